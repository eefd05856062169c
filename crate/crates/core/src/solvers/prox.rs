//! Proximal operators of the weighted l1 and l2 norms.

use crate::error::{check_len, invalid, Result};
use crate::{CVec, Cx};

/// Complex elementwise shrinkage `v_i * max(|v_i| - tau_i, 0) / |v_i|`.
///
/// Each output entry minimizes `tau_i |q| + 0.5 |q - v_i|^2`.
pub fn soft_threshold(v: &CVec, tau: &[f64]) -> Result<CVec> {
    check_len("threshold vector", v.len(), tau.len())?;
    if let Some(t) = tau.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(invalid(format!("threshold must be nonnegative, got {t}")));
    }
    Ok(CVec::from_iterator(v.len(), v.iter().zip(tau).map(|(&x, &t)| shrink_scalar(x, t))))
}

#[inline]
pub(crate) fn shrink_scalar(v: Cx, tau: f64) -> Cx {
    let mag = v.norm();
    if mag <= tau {
        Cx::new(0.0, 0.0)
    } else {
        v * ((mag - tau) / mag)
    }
}

/// Block shrinkage `(v / ||v||) * max(||v|| - tau, 0)`, the minimizer of
/// `tau ||z|| + 0.5 ||z - v||^2`. A negative `tau` is treated as zero.
pub fn block_soft_threshold(v: &CVec, tau: f64) -> CVec {
    let mut out = v.clone();
    shrink_block_in_place(&mut out, tau);
    out
}

pub(crate) fn shrink_block_in_place<S>(v: &mut nalgebra::Matrix<Cx, nalgebra::Dyn, nalgebra::U1, S>, tau: f64)
where
    S: nalgebra::StorageMut<Cx, nalgebra::Dyn, nalgebra::U1>,
{
    let mag = v.norm();
    if mag <= tau.max(0.0) {
        v.fill(Cx::new(0.0, 0.0));
    } else {
        *v *= Cx::new((mag - tau.max(0.0)) / mag, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cvec(v: &[(f64, f64)]) -> CVec {
        CVec::from_iterator(v.len(), v.iter().map(|&(a, b)| Cx::new(a, b)))
    }

    #[test]
    fn scalar_examples() {
        let out = soft_threshold(&cvec(&[(3.0, 0.0)]), &[1.0]).unwrap();
        assert_eq!(out[0], Cx::new(2.0, 0.0));
        let out = soft_threshold(&cvec(&[(0.3, 0.4), (0.0, 0.0)]), &[0.5, 0.1]).unwrap();
        assert_eq!(out[0], Cx::new(0.0, 0.0));
        assert_eq!(out[1], Cx::new(0.0, 0.0));
        assert!(soft_threshold(&cvec(&[(1.0, 0.0)]), &[-0.1]).is_err());
        assert!(soft_threshold(&cvec(&[(1.0, 0.0)]), &[0.1, 0.2]).is_err());
    }

    #[test]
    fn block_examples() {
        let out = block_soft_threshold(&cvec(&[(3.0, 0.0), (4.0, 0.0)]), 2.5);
        assert!((out[0] - Cx::new(1.5, 0.0)).norm() < 1e-15);
        assert!((out[1] - Cx::new(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(block_soft_threshold(&cvec(&[(3.0, 0.0), (4.0, 0.0)]), 5.0).norm(), 0.0);
    }

    fn block_obj(z: &CVec, v: &CVec, tau: f64) -> f64 {
        tau * z.norm() + 0.5 * (z - v).norm_squared()
    }

    proptest! {
        #[test]
        fn scalar_shrink_preserves_phase_and_shrinks(re in -5.0..5.0f64, im in -5.0..5.0f64, tau in 0.0..3.0f64) {
            let v = Cx::new(re, im);
            let q = shrink_scalar(v, tau);
            prop_assert!(q.norm() <= v.norm());
            prop_assert!((q.norm() - (v.norm() - tau).max(0.0)).abs() < 1e-12);
            if q.norm() > 0.0 {
                prop_assert!((q / q.norm() - v / v.norm()).norm() < 1e-12);
            }
        }

        #[test]
        fn block_shrink_beats_perturbations(
            v in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 4),
            tau in 0.0..4.0f64,
            d in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4),
            scale in 1e-6..1.0f64,
        ) {
            let v = cvec(&v);
            let z = block_soft_threshold(&v, tau);
            let cand = &z + cvec(&d) * Cx::new(scale, 0.0);
            prop_assert!(block_obj(&z, &v, tau) <= block_obj(&cand, &v, tau) + 1e-12);
        }

        #[test]
        fn block_of_size_one_matches_scalar(re in -5.0..5.0f64, im in -5.0..5.0f64, tau in 0.0..3.0f64) {
            let v = Cx::new(re, im);
            let b = block_soft_threshold(&cvec(&[(re, im)]), tau);
            prop_assert!((b[0] - shrink_scalar(v, tau)).norm() < 1e-14);
        }
    }
}
