use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use crate::error::{check_len, invalid, Result};
use crate::{CMat, CVec, Cx};

/// Draws one circularly symmetric complex Gaussian sample with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Cx {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cx::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Per-user, per-antenna fading vectors `h[j][n]` of length `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    j: usize,
    k: usize,
    nr: usize,
    h: Vec<Vec<CVec>>,
}

impl ChannelRealization {
    pub fn new(h: Vec<Vec<CVec>>) -> Result<Self> {
        let j = h.len();
        let nr = h.first().map_or(0, Vec::len);
        let k = h.first().and_then(|v| v.first()).map_or(0, CVec::len);
        if j == 0 || nr == 0 || k == 0 {
            return Err(invalid("channel realization must be non-empty"));
        }
        for per_user in &h {
            check_len("receive antennas", nr, per_user.len())?;
            for v in per_user {
                check_len("fading vector length", k, v.len())?;
            }
        }
        Ok(Self { j, k, nr, h })
    }

    /// I.i.d. standard complex Gaussian entries.
    pub fn draw<R: Rng + ?Sized>(j: usize, k: usize, nr: usize, rng: &mut R) -> Self {
        let h = (0..j).map(|_| (0..nr).map(|_| CVec::from_fn(k, |_, _| complex_normal(rng))).collect()).collect();
        Self { j, k, nr, h }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.j, self.k, self.nr)
    }

    pub fn fading(&self, user: usize, antenna: usize) -> &CVec {
        &self.h[user][antenna]
    }
}

/// The stacked `N_r K x J K` measurement matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledChannel {
    j: usize,
    k: usize,
    nr: usize,
    matrix: CMat,
}

impl AssembledChannel {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn num_users(&self) -> usize {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn antennas(&self) -> usize {
        self.nr
    }

    /// Builds an assembled channel from a raw matrix, checking the block
    /// diagonal structure.
    pub fn from_matrix(matrix: CMat, j: usize, k: usize, nr: usize) -> Result<Self> {
        check_len("rows", nr * k, matrix.nrows())?;
        check_len("columns", j * k, matrix.ncols())?;
        for c in 0..matrix.ncols() {
            for r in 0..matrix.nrows() {
                if r % k != c % k && matrix[(r, c)] != Cx::new(0.0, 0.0) {
                    return Err(invalid(format!("entry ({r},{c}) violates the diagonal block structure")));
                }
            }
        }
        Ok(Self { j, k, nr, matrix })
    }

    /// Positions `(row, col)` that may be nonzero.
    pub fn structural_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (j, k, nr) = (self.j, self.k, self.nr);
        (0..nr).flat_map(move |n| (0..j).flat_map(move |u| (0..k).map(move |e| (n * k + e, u * k + e))))
    }
}

/// Places `diag(h[j][n])` at row block `n`, column block `j`.
pub fn assemble_channel_matrix(ch: &ChannelRealization) -> AssembledChannel {
    let (j, k, nr) = ch.dims();
    let mut matrix = CMat::zeros(nr * k, j * k);
    for u in 0..j {
        for n in 0..nr {
            for (e, &v) in ch.h[u][n].iter().enumerate() {
                matrix[(n * k + e, u * k + e)] = v;
            }
        }
    }
    AssembledChannel { j, k, nr, matrix }
}

/// `r = H x + w` with `w` i.i.d. complex Gaussian of variance `noise_var`.
///
/// The noise is drawn at unit variance and then scaled, so one generator
/// state yields the same noise shape at every SNR.
pub fn observe<R: Rng + ?Sized>(h: &AssembledChannel, x: &CVec, noise_var: f64, rng: &mut R) -> Result<CVec> {
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(invalid(format!("noise variance must be finite and nonnegative, got {noise_var}")));
    }
    check_len("signal length", h.matrix.ncols(), x.len())?;
    let mut r = &h.matrix * x;
    if noise_var > 0.0 {
        let sigma = noise_var.sqrt();
        for v in r.iter_mut() {
            *v += complex_normal(rng) * sigma;
        }
    }
    Ok(r)
}

/// `H + delta * Omega` with `Omega` standard complex Gaussian on the structural
/// nonzeros of `H` only.
pub fn perturb_channel<R: Rng + ?Sized>(h: &AssembledChannel, delta: f64, rng: &mut R) -> Result<AssembledChannel> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid(format!("perturbation scale must be finite and nonnegative, got {delta}")));
    }
    let mut out = h.clone();
    if delta == 0.0 {
        return Ok(out);
    }
    let positions: Vec<_> = h.structural_positions().collect();
    for (r, c) in positions {
        out.matrix[(r, c)] += complex_normal(rng) * delta;
    }
    Ok(out)
}
