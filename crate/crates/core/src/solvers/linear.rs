//! Cached factorization of `H^H H + c I` and the two x-updates built on it.

use nalgebra::{Cholesky, Dyn};

use crate::error::{check_len, invalid, JaddError, Result};
use crate::{CMat, CVec, Cx};

/// Cholesky factor of `H^H H + shift * I` together with `H` and `H^H`.
///
/// Built once per channel realization and shared read-only across
/// iterations, slots and threads.
#[derive(Debug, Clone)]
pub struct GramFactor {
    h: CMat,
    hh: CMat,
    shift: f64,
    chol: Cholesky<Cx, Dyn>,
}

impl GramFactor {
    pub fn new(h: &CMat, shift: f64) -> Result<Self> {
        if !(shift > 0.0 && shift.is_finite()) {
            return Err(invalid(format!("diagonal shift must be positive, got {shift}")));
        }
        let hh = h.adjoint();
        let mut a = &hh * h;
        for i in 0..a.nrows() {
            a[(i, i)] += Cx::new(shift, 0.0);
        }
        let chol =
            Cholesky::new(a).ok_or_else(|| JaddError::Factorization("H^H H + cI is not positive definite".into()))?;
        Ok(Self { h: h.clone(), hh, shift, chol })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn matrix(&self) -> &CMat {
        &self.h
    }

    /// `H^H r`.
    pub fn adjoint_times(&self, r: &CVec) -> Result<CVec> {
        check_len("observation length", self.h.nrows(), r.len())?;
        Ok(&self.hh * r)
    }

    /// Solves `(H^H H + shift I) x = rhs`.
    pub fn solve(&self, rhs: &CVec) -> CVec {
        self.chol.solve(rhs)
    }

    fn expect_shift(&self, shift: f64) -> Result<()> {
        if (self.shift - shift).abs() <= 1e-12 * shift.abs().max(1.0) {
            Ok(())
        } else {
            Err(invalid(format!("factor was built for shift {} but {shift} is required", self.shift)))
        }
    }
}

/// Sparse-group x-update `(H^H H + 2 rho I)^{-1} (H^H r + rho (z + q - u1 - u2))`.
///
/// `h_r` is the precomputed `H^H r`; `factor` must carry the shift `2 rho`.
pub fn x_update_sg(
    factor: &GramFactor,
    h_r: &CVec,
    z: &CVec,
    q: &CVec,
    u1: &CVec,
    u2: &CVec,
    rho: f64,
) -> Result<CVec> {
    factor.expect_shift(2.0 * rho)?;
    let n = factor.h.ncols();
    for (what, v) in [("H^H r", h_r), ("z", z), ("q", q), ("u1", u1), ("u2", u2)] {
        check_len(what, n, v.len())?;
    }
    let rhs = h_r + (z + q - u1 - u2) * Cx::new(rho, 0.0);
    Ok(factor.solve(&rhs))
}

/// Group and prior-aided x-update
/// `(H^H H + (mu + rho) I)^{-1} (H^H r + mu beta + rho (z - u))`.
///
/// `beta = None` is the zero prior; `factor` must carry the shift `mu + rho`.
pub fn x_update_g(
    factor: &GramFactor,
    h_r: &CVec,
    z: &CVec,
    u: &CVec,
    rho: f64,
    mu: f64,
    beta: Option<&CVec>,
) -> Result<CVec> {
    factor.expect_shift(mu + rho)?;
    let n = factor.h.ncols();
    for (what, v) in [("H^H r", h_r), ("z", z), ("u", u)] {
        check_len(what, n, v.len())?;
    }
    let mut rhs = h_r + (z - u) * Cx::new(rho, 0.0);
    if let Some(b) = beta {
        check_len("prior signal", n, b.len())?;
        rhs += b * Cx::new(mu, 0.0);
    }
    Ok(factor.solve(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::complex_normal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> CVec {
        CVec::from_fn(n, |_, _| complex_normal(rng))
    }

    #[test]
    fn zero_channel_collapses() {
        let h = CMat::zeros(4, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (z, q, u1, u2) =
            (rand_vec(8, &mut rng), rand_vec(8, &mut rng), rand_vec(8, &mut rng), rand_vec(8, &mut rng));
        let hr = CVec::zeros(8);
        let f = GramFactor::new(&h, 1.4).unwrap();
        let x = x_update_sg(&f, &hr, &z, &q, &u1, &u2, 0.7).unwrap();
        assert!((x - (&z + &q - &u1 - &u2) * Cx::new(0.5, 0.0)).norm() < 1e-14);

        let f = GramFactor::new(&h, 0.7).unwrap();
        let x = x_update_g(&f, &hr, &z, &u1, 0.7, 0.0, None).unwrap();
        assert!((x - (&z - &u1)).norm() < 1e-14);
    }

    #[test]
    fn orthonormal_columns() {
        let h = CMat::identity(4, 4);
        let r = CVec::from_fn(4, |i, _| Cx::new(i as f64, -1.0));
        let f = GramFactor::new(&h, 1.0).unwrap();
        let zero = CVec::zeros(4);
        let hr = f.adjoint_times(&r).unwrap();
        let x = x_update_sg(&f, &hr, &zero, &zero, &zero, &zero, 0.5).unwrap();
        assert!((x - &r * Cx::new(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn large_mu_pulls_towards_prior() {
        let h = CMat::zeros(2, 4);
        let beta = CVec::from_fn(4, |i, _| Cx::new(1.0, i as f64));
        let zero = CVec::zeros(4);
        let f = GramFactor::new(&h, 1e8 + 1.0).unwrap();
        let x = x_update_g(&f, &zero, &zero, &zero, 1.0, 1e8, Some(&beta)).unwrap();
        assert!((x - &beta).norm() < 1e-6);
    }

    #[test]
    fn shift_mismatch_is_reported() {
        let f = GramFactor::new(&CMat::identity(2, 2), 1.0).unwrap();
        let z = CVec::zeros(2);
        assert!(x_update_g(&f, &z, &z, &z, 2.0, 0.0, None).is_err());
        assert!(x_update_sg(&f, &z, &z, &z, &z, &z, 1.0).is_err());
        assert!(GramFactor::new(&CMat::identity(2, 2), 0.0).is_err());
    }
}
