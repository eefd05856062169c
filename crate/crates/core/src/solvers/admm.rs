//! Reweighted ADMM for the sparse-group, group and prior-aided group LASSO.

use serde::Serialize;

use super::diagnostics::{augmented_lagrangian, lagrangian_lower_bound, objective, residuals, tolerances};
use super::diagnostics::{gram_spectrum, RhoConditions, Spectrum};
use super::linear::{x_update_g, x_update_sg, GramFactor};
use super::prox::{shrink_block_in_place, shrink_scalar};
use super::{AdmmConfig, UpdateOrder, Variant};
use crate::error::{check_len, invalid, JaddError, Result};
use crate::model::AssembledChannel;
use crate::{CVec, Cx, UserSet};

const LEMMA1_SLACK: f64 = 1e-8;
const LEMMA2_SLACK: f64 = 1e-9;
const LEMMA3_SLACK: f64 = 1e-9;

/// One row of the per-iteration history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
    pub lagrangian: f64,
    pub objective: f64,
}

/// Primal variables, scaled duals, weights and history of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: CVec,
    pub z: CVec,
    pub q: CVec,
    pub u1: CVec,
    pub u2: CVec,
    pub z_prev: CVec,
    pub q_prev: CVec,
    pub w_group: Vec<f64>,
    pub w_elem: Vec<f64>,
    pub t: usize,
    pub sparse_group: bool,
    pub history: Vec<IterationRecord>,
}

impl AdmmState {
    pub fn zeros(j: usize, k: usize, sparse_group: bool) -> Self {
        let n = j * k;
        Self {
            x: CVec::zeros(n),
            z: CVec::zeros(n),
            q: CVec::zeros(n),
            u1: CVec::zeros(n),
            u2: CVec::zeros(n),
            z_prev: CVec::zeros(n),
            q_prev: CVec::zeros(n),
            w_group: vec![1.0; j],
            w_elem: vec![1.0; n],
            t: 0,
            sparse_group,
            history: Vec::new(),
        }
    }

    pub fn block_size(&self) -> usize {
        self.x.len() / self.w_group.len()
    }
}

/// Outcome flags of a solve. The diagnostic fields are `None` unless
/// [`AdmmConfig::diagnostics`] is set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub iterations_used: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub rho_conditions: Option<RhoConditions>,
    pub rho_conditions_met: Option<bool>,
    /// Non-increase of the augmented Lagrangian over iterations with frozen weights.
    pub lagrangian_monotone: Option<bool>,
    pub lemma1_violations: Option<usize>,
    /// Violations of the Lagrangian lower bound; not evaluated on the sparse-group path.
    pub lemma3_violations: Option<usize>,
}

/// Reweighting `w_j = 1 / (||x_j|| + eps)` and `w_i = 1 / (|x_i| + eps)`
/// computed from the current `x`.
pub fn update_weights(state: &AdmmState, cfg: &AdmmConfig) -> (Vec<f64>, Vec<f64>) {
    let k = state.block_size();
    let w_group = (0..state.w_group.len()).map(|j| 1.0 / (state.x.rows(j * k, k).norm() + cfg.eps_w)).collect();
    let w_elem = state.x.iter().map(|v| 1.0 / (v.norm() + cfg.eps_w)).collect();
    (w_group, w_elem)
}

/// A solver bound to one channel realization. The Gram factorization is
/// computed once here and reused by every call to `solve`.
#[derive(Debug, Clone)]
pub struct AdmmSolver {
    cfg: AdmmConfig,
    j: usize,
    k: usize,
    sparse_group: bool,
    prior: bool,
    factor: GramFactor,
    spectrum: Option<Spectrum>,
}

impl AdmmSolver {
    fn build(h: &AssembledChannel, cfg: &AdmmConfig, sparse_group: bool, prior: bool) -> Result<Self> {
        cfg.validate()?;
        let shift = if sparse_group {
            2.0 * cfg.rho
        } else if prior {
            cfg.mu + cfg.rho
        } else {
            cfg.rho
        };
        let factor = GramFactor::new(h.matrix(), shift)?;
        let spectrum = cfg.diagnostics.then(|| gram_spectrum(h.matrix()));
        Ok(Self { cfg: cfg.clone(), j: h.num_users(), k: h.dim(), sparse_group, prior, factor, spectrum })
    }

    /// Solver for the group plus elementwise penalty.
    pub fn sparse_group(h: &AssembledChannel, cfg: &AdmmConfig) -> Result<Self> {
        Self::build(h, cfg, true, false)
    }

    /// Solver for the group penalty.
    pub fn group(h: &AssembledChannel, cfg: &AdmmConfig) -> Result<Self> {
        Self::build(h, cfg, false, false)
    }

    /// Solver for the prior-aided group penalty; uses `cfg.mu`.
    pub fn prior_aided(h: &AssembledChannel, cfg: &AdmmConfig) -> Result<Self> {
        Self::build(h, cfg, false, true)
    }

    pub fn config(&self) -> &AdmmConfig {
        &self.cfg
    }

    pub fn factor(&self) -> &GramFactor {
        &self.factor
    }

    /// Solves the plain sparse-group or group problem.
    pub fn solve(&self, r: &CVec) -> Result<(AdmmState, ConvergenceReport)> {
        if self.prior {
            return self.solve_prior(r, &UserSet::new(), &CVec::zeros(self.j * self.k));
        }
        let variant = if self.sparse_group { Variant::SparseGroup } else { Variant::Group };
        self.run(r, &variant)
    }

    /// Solves the prior-aided problem with quality set `quality` and prior
    /// signal `beta`, which must vanish outside the quality blocks.
    pub fn solve_prior(&self, r: &CVec, quality: &UserSet, beta: &CVec) -> Result<(AdmmState, ConvergenceReport)> {
        if !self.prior {
            return Err(invalid("solver was not built for the prior-aided problem"));
        }
        check_len("prior signal", self.j * self.k, beta.len())?;
        if let Some(&u) = quality.iter().find(|&&u| u >= self.j) {
            return Err(invalid(format!("quality user {u} out of range")));
        }
        for u in (0..self.j).filter(|u| !quality.contains(u)) {
            if beta.rows(u * self.k, self.k).norm() != 0.0 {
                return Err(invalid(format!("prior signal is nonzero outside the quality set (user {u})")));
            }
        }
        self.run(r, &Variant::PriorAided { quality: quality.clone(), beta: beta.clone() })
    }

    fn run(&self, r: &CVec, variant: &Variant) -> Result<(AdmmState, ConvergenceReport)> {
        let cfg = &self.cfg;
        let (j, k, rho) = (self.j, self.k, cfg.rho);
        let h = self.factor.matrix();
        let h_r = self.factor.adjoint_times(r)?;
        let mu = variant.mu(cfg);
        let beta = variant.beta();
        let prior_w = variant.prior_weights(j);
        let mut st = AdmmState::zeros(j, k, self.sparse_group);

        let lipschitz = self.spectrum.map(|s| s.lambda_max + mu);
        let mut lemma1 = 0usize;
        let mut lemma3 = 0usize;
        let mut monotone = true;
        let mut converged = false;
        let (mut rp, mut rd) = (f64::INFINITY, f64::INFINITY);

        for t in 1..=cfg.max_iter {
            if t >= 2 && t <= cfg.reweight_iters {
                let (wg, we) = update_weights(&st, cfg);
                st.w_group = wg;
                st.w_elem = we;
            }
            let x_old = st.x.clone();
            let y_old = self.multiplier(&st);
            st.z_prev.copy_from(&st.z);
            st.q_prev.copy_from(&st.q);

            match cfg.order {
                UpdateOrder::XFirst => {
                    self.x_step(&mut st, &h_r, mu, beta)?;
                    self.shrink_step(&mut st, &prior_w);
                }
                UpdateOrder::ZFirst => {
                    self.shrink_step(&mut st, &prior_w);
                    self.x_step(&mut st, &h_r, mu, beta)?;
                }
            }
            st.u1 += &st.x - &st.z;
            if self.sparse_group {
                st.u2 += &st.x - &st.q;
            }
            if !st.x.iter().chain(st.u1.iter()).all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(JaddError::Diverged { iteration: t });
            }

            (rp, rd) = residuals(&st, rho);
            let (eps_pri, eps_dual) = tolerances(&st, cfg);
            let lagrangian = augmented_lagrangian(&st, h, r, cfg, variant);
            let obj = objective(&st.x, &st.w_group, &st.w_elem, h, r, cfg, variant);

            if let Some(lip) = lipschitz {
                let frozen = t >= 2 && t > cfg.reweight_iters;
                if frozen {
                    let dy = (self.multiplier(&st) - y_old).norm_squared();
                    let dx = (&st.x - &x_old).norm_squared();
                    if dy > lip * lip * dx + LEMMA1_SLACK {
                        lemma1 += 1;
                    }
                    let prev = st.history.last().map_or(f64::INFINITY, |h| h.lagrangian);
                    if lagrangian > prev + LEMMA2_SLACK * prev.abs().max(1.0) {
                        monotone = false;
                    }
                }
                if !self.sparse_group && lagrangian < lagrangian_lower_bound(&st, h, r, cfg, variant) - LEMMA3_SLACK {
                    lemma3 += 1;
                }
            }

            st.t = t;
            st.history.push(IterationRecord {
                iteration: t,
                primal_residual: rp,
                dual_residual: rd,
                eps_pri,
                eps_dual,
                lagrangian,
                objective: obj,
            });
            if rp <= eps_pri && rd <= eps_dual {
                converged = true;
                break;
            }
        }

        let rho_conditions = self.spectrum.map(|s| RhoConditions::from_spectrum(s, rho, mu));
        let report = ConvergenceReport {
            converged,
            iterations_used: st.t,
            primal_residual: rp,
            dual_residual: rd,
            rho_conditions,
            rho_conditions_met: rho_conditions.map(|c| c.all_pass()),
            lagrangian_monotone: lipschitz.map(|_| monotone),
            lemma1_violations: lipschitz.map(|_| lemma1),
            lemma3_violations: lipschitz.filter(|_| !self.sparse_group).map(|_| lemma3),
        };
        Ok((st, report))
    }

    /// Unscaled multiplier `rho (u1 + u2)`, the quantity tied to the gradient
    /// of the smooth term.
    fn multiplier(&self, st: &AdmmState) -> CVec {
        let u = if self.sparse_group { &st.u1 + &st.u2 } else { st.u1.clone() };
        u * Cx::new(self.cfg.rho, 0.0)
    }

    fn x_step(&self, st: &mut AdmmState, h_r: &CVec, mu: f64, beta: Option<&CVec>) -> Result<()> {
        st.x = if self.sparse_group {
            x_update_sg(&self.factor, h_r, &st.z, &st.q, &st.u1, &st.u2, self.cfg.rho)?
        } else {
            x_update_g(&self.factor, h_r, &st.z, &st.u1, self.cfg.rho, mu, beta)?
        };
        Ok(())
    }

    fn shrink_step(&self, st: &mut AdmmState, prior_w: &[f64]) {
        let (k, rho) = (self.k, self.cfg.rho);
        st.z = &st.x + &st.u1;
        for (u, (w, p)) in st.w_group.iter().zip(prior_w).enumerate() {
            shrink_block_in_place(&mut st.z.rows_mut(u * k, k), self.cfg.alpha1 * w * p / rho);
        }
        if self.sparse_group {
            let scale = self.cfg.alpha2 / rho;
            st.q = CVec::from_iterator(
                st.x.len(),
                st.x.iter().zip(st.u2.iter()).zip(&st.w_elem).map(|((x, u), w)| shrink_scalar(x + u, scale * w)),
            );
        }
    }
}

/// Reweighted sparse-group LASSO: group and elementwise penalties, two splits.
pub fn admm_sparse_group_lasso(
    r: &CVec,
    h: &AssembledChannel,
    cfg: &AdmmConfig,
) -> Result<(AdmmState, ConvergenceReport)> {
    AdmmSolver::sparse_group(h, cfg)?.solve(r)
}

/// Reweighted group LASSO.
pub fn admm_group_lasso(r: &CVec, h: &AssembledChannel, cfg: &AdmmConfig) -> Result<(AdmmState, ConvergenceReport)> {
    AdmmSolver::group(h, cfg)?.solve(r)
}

/// Prior-aided group LASSO: users in `quality` carry no group penalty and
/// `cfg.mu` pulls the estimate towards `beta`.
pub fn admm_prior_aided(
    r: &CVec,
    h: &AssembledChannel,
    cfg: &AdmmConfig,
    quality: &UserSet,
    beta: &CVec,
) -> Result<(AdmmState, ConvergenceReport)> {
    AdmmSolver::prior_aided(h, cfg)?.solve_prior(r, quality, beta)
}
