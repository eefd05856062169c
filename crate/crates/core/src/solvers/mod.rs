//! Proximal operators and the three ADMM solvers (sparse-group, group and
//! prior-aided group LASSO) with residual tracking and convergence diagnostics.

mod admm;
mod diagnostics;
mod linear;
mod prox;
mod trace;

pub use admm::{
    admm_group_lasso, admm_prior_aided, admm_sparse_group_lasso, update_weights, AdmmSolver, AdmmState,
    ConvergenceReport, IterationRecord,
};
pub use diagnostics::{
    augmented_lagrangian, check_rho_conditions, check_rho_conditions_with_prior, gram_spectrum, objective, residuals,
    smallest_admissible_rho, tolerances, RhoConditions, Spectrum,
};
pub use linear::{x_update_g, x_update_sg, GramFactor};
pub use prox::{block_soft_threshold, soft_threshold};
pub use trace::write_trace_csv;

use crate::error::{invalid, Result};
use crate::{CVec, UserSet};

/// Order of the primal updates within one ADMM iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateOrder {
    /// x, then the shrinkage variables, then the duals.
    #[default]
    XFirst,
    /// Shrinkage variables, then x, then the duals. Under this order the
    /// dual always equals the negative gradient of the smooth term, which is
    /// what the descent and lower-bound inequalities rely on.
    ZFirst,
}

impl std::str::FromStr for UpdateOrder {
    type Err = crate::JaddError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "x_first" | "xzu" => Ok(Self::XFirst),
            "z_first" | "zxu" => Ok(Self::ZFirst),
            other => Err(invalid(format!("unknown update order '{other}'"))),
        }
    }
}

/// Which penalty the solver carries.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    /// Group plus elementwise penalty with two splits.
    SparseGroup,
    /// Group penalty only.
    Group,
    /// Group penalty with users in `quality` exempt and a proximity term
    /// `mu/2 ||x - beta||^2`.
    PriorAided { quality: UserSet, beta: CVec },
}

impl Variant {
    pub fn is_sparse_group(&self) -> bool {
        matches!(self, Variant::SparseGroup)
    }

    /// `0` for users in the quality set, `1` otherwise.
    pub fn prior_weights(&self, j: usize) -> Vec<f64> {
        match self {
            Variant::PriorAided { quality, .. } => {
                (0..j).map(|u| if quality.contains(&u) { 0.0 } else { 1.0 }).collect()
            }
            _ => vec![1.0; j],
        }
    }

    pub fn beta(&self) -> Option<&CVec> {
        match self {
            Variant::PriorAided { beta, .. } => Some(beta),
            _ => None,
        }
    }

    /// Proximity weight actually used by this variant.
    pub fn mu(&self, cfg: &AdmmConfig) -> f64 {
        match self {
            Variant::PriorAided { .. } => cfg.mu,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    /// Augmented Lagrangian penalty.
    pub rho: f64,
    /// Group penalty weight.
    pub alpha1: f64,
    /// Elementwise penalty weight (sparse-group path only).
    pub alpha2: f64,
    /// Prior proximity weight (prior-aided path only).
    pub mu: f64,
    /// Maximum number of iterations.
    pub max_iter: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Floor in the reweighting rule `1 / (||x_j|| + eps_w)`.
    pub eps_w: f64,
    /// Last iteration at which weights are recomputed; `1` keeps unit weights.
    pub reweight_iters: usize,
    pub order: UpdateOrder,
    /// Compute the spectrum of `H^H H` and check the descent inequalities.
    pub diagnostics: bool,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: 10.0,
            alpha1: 0.5,
            alpha2: 0.0,
            mu: 1.0,
            max_iter: 100,
            eps_abs: 1e-4,
            eps_rel: 1e-2,
            eps_w: 1e-6,
            reweight_iters: 5,
            order: UpdateOrder::XFirst,
            diagnostics: false,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(invalid(format!("rho must be positive, got {}", self.rho)));
        }
        if !(finite_nonneg(self.alpha1) && finite_nonneg(self.alpha2) && finite_nonneg(self.mu)) {
            return Err(invalid("alpha1, alpha2 and mu must be finite and nonnegative"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0 && self.eps_w > 0.0) {
            return Err(invalid("tolerances and eps_w must be positive"));
        }
        Ok(())
    }
}

/// Euclidean norm of each length-`k` block.
pub fn block_norms(x: &CVec, k: usize) -> Vec<f64> {
    (0..x.len() / k).map(|j| x.rows(j * k, k).norm()).collect()
}
