//! Residuals, stopping tolerances, objective and augmented Lagrangian
//! evaluation, and the penalty-parameter conditions for guaranteed descent.

use super::admm::AdmmState;
use super::{AdmmConfig, Variant};
use crate::model::AssembledChannel;
use crate::{CMat, CVec, Cx};

/// Extreme eigenvalues of `H^H H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

pub fn gram_spectrum(h: &CMat) -> Spectrum {
    let eig = (h.adjoint() * h).symmetric_eigenvalues();
    let lambda_min = eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let lambda_max = eig.iter().copied().fold(0.0, f64::max);
    Spectrum { lambda_min, lambda_max }
}

/// Pass/fail of the three conditions on `rho`:
/// `rho > 0`, `rho (rho + mu + lmin) >= 2 (lmax + mu)^2` and `rho > lmax + mu`.
/// With `mu = 0` these are the plain group-LASSO conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoConditions {
    pub rho: f64,
    pub mu: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub positive: bool,
    pub descent: bool,
    pub dominance: bool,
    /// The descent inequality holds with equality up to rounding.
    pub boundary: bool,
}

impl RhoConditions {
    pub fn from_spectrum(spec: Spectrum, rho: f64, mu: f64) -> Self {
        let lmax = spec.lambda_max + mu;
        let lhs = rho * (rho + mu + spec.lambda_min);
        let rhs = 2.0 * lmax * lmax;
        Self {
            rho,
            mu,
            lambda_min: spec.lambda_min,
            lambda_max: spec.lambda_max,
            positive: rho > 0.0,
            descent: lhs >= rhs,
            dominance: rho > lmax,
            boundary: (lhs - rhs).abs() <= 1e-12 * rhs.max(1.0),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.positive && self.descent && self.dominance
    }
}

pub fn check_rho_conditions(h: &AssembledChannel, rho: f64) -> RhoConditions {
    check_rho_conditions_with_prior(h, rho, 0.0)
}

pub fn check_rho_conditions_with_prior(h: &AssembledChannel, rho: f64, mu: f64) -> RhoConditions {
    RhoConditions::from_spectrum(gram_spectrum(h.matrix()), rho, mu)
}

/// Infimum of the `rho` values passing all three conditions; any larger value passes.
pub fn smallest_admissible_rho(spec: Spectrum, mu: f64) -> f64 {
    let b = mu + spec.lambda_min;
    let m = spec.lambda_max + mu;
    let root = 0.5 * (-b + (b * b + 8.0 * m * m).sqrt());
    root.max(m)
}

/// `(r_p, r_d)`: primal residual `||x - z||` and dual residual
/// `rho ||z_prev - z||`, combined root-sum-square with the `q` terms on the
/// sparse-group path.
pub fn residuals(state: &AdmmState, rho: f64) -> (f64, f64) {
    let mut p = (&state.x - &state.z).norm_squared();
    let mut d = (&state.z_prev - &state.z).norm_squared();
    if state.sparse_group {
        p += (&state.x - &state.q).norm_squared();
        d += (&state.q_prev - &state.q).norm_squared();
    }
    (p.sqrt(), rho * d.sqrt())
}

/// `(eps_pri, eps_dual)` with `eps_pri = sqrt(n) eps_abs + eps_rel max(||x||, ||z||)`
/// and `eps_dual = sqrt(n) eps_abs + eps_rel ||rho u1||`.
pub fn tolerances(state: &AdmmState, cfg: &AdmmConfig) -> (f64, f64) {
    let base = (state.x.len() as f64).sqrt() * cfg.eps_abs;
    let pri = base + cfg.eps_rel * state.x.norm().max(state.z.norm());
    let dual = base + cfg.eps_rel * cfg.rho * state.u1.norm();
    (pri, dual)
}

fn re_inner(a: &CVec, b: &CVec) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| (p.conj() * q).re).sum()
}

/// Smooth part `0.5 ||r - H x||^2 + mu/2 ||x - beta||^2`.
pub(crate) fn smooth_term(x: &CVec, h: &CMat, r: &CVec, cfg: &AdmmConfig, variant: &Variant) -> f64 {
    let mut f = 0.5 * (r - h * x).norm_squared();
    if let Some(beta) = variant.beta() {
        f += 0.5 * variant.mu(cfg) * (x - beta).norm_squared();
    }
    f
}

pub(crate) fn group_penalty(z: &CVec, w_group: &[f64], prior_w: &[f64], alpha1: f64) -> f64 {
    let k = z.len() / w_group.len();
    let sum: f64 = (0..w_group.len()).map(|j| w_group[j] * prior_w[j] * z.rows(j * k, k).norm()).sum();
    alpha1 * sum
}

fn elem_penalty(q: &CVec, w_elem: &[f64], alpha2: f64) -> f64 {
    alpha2 * q.iter().zip(w_elem).map(|(v, w)| w * v.norm()).sum::<f64>()
}

/// Penalized objective evaluated at `x` with the given weights.
pub fn objective(
    x: &CVec,
    w_group: &[f64],
    w_elem: &[f64],
    h: &CMat,
    r: &CVec,
    cfg: &AdmmConfig,
    variant: &Variant,
) -> f64 {
    let prior_w = variant.prior_weights(w_group.len());
    let mut obj = smooth_term(x, h, r, cfg, variant) + group_penalty(x, w_group, &prior_w, cfg.alpha1);
    if variant.is_sparse_group() {
        obj += elem_penalty(x, w_elem, cfg.alpha2);
    }
    obj
}

/// Augmented Lagrangian with unscaled multipliers `y = rho u`.
pub fn augmented_lagrangian(state: &AdmmState, h: &CMat, r: &CVec, cfg: &AdmmConfig, variant: &Variant) -> f64 {
    let rho = cfg.rho;
    let prior_w = variant.prior_weights(state.w_group.len());
    let y1 = &state.u1 * Cx::new(rho, 0.0);
    let d1 = &state.x - &state.z;
    let mut l = smooth_term(&state.x, h, r, cfg, variant)
        + group_penalty(&state.z, &state.w_group, &prior_w, cfg.alpha1)
        + re_inner(&y1, &d1)
        + 0.5 * rho * d1.norm_squared();
    if variant.is_sparse_group() {
        let y2 = &state.u2 * Cx::new(rho, 0.0);
        let d2 = &state.x - &state.q;
        l += elem_penalty(&state.q, &state.w_elem, cfg.alpha2) + re_inner(&y2, &d2) + 0.5 * rho * d2.norm_squared();
    }
    l
}

/// Right-hand side of the Lagrangian lower bound: `f(z) + alpha1 sum w_j ||z_j||`.
pub(crate) fn lagrangian_lower_bound(
    state: &AdmmState,
    h: &CMat,
    r: &CVec,
    cfg: &AdmmConfig,
    variant: &Variant,
) -> f64 {
    let prior_w = variant.prior_weights(state.w_group.len());
    smooth_term(&state.z, h, r, cfg, variant) + group_penalty(&state.z, &state.w_group, &prior_w, cfg.alpha1)
}
