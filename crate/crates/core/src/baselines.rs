//! Reference detectors: least squares on the true support, ADMM with the
//! true sparsity level, and block subspace pursuit.

use crate::error::{check_len, invalid, JaddError, Result};
use crate::model::AssembledChannel;
use crate::solvers::{block_norms, AdmmSolver};
use crate::support::{prune_signal, top_k_support};
use crate::{CMat, CVec, UserSet};

/// Support estimate and signal estimate of a baseline detector.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineEstimate {
    pub support: UserSet,
    pub x: CVec,
    pub iterations: usize,
}

fn restricted_columns(h: &AssembledChannel, support: &UserSet) -> CMat {
    let k = h.dim();
    let cols: Vec<usize> = support.iter().flat_map(|&u| u * k..(u + 1) * k).collect();
    h.matrix().select_columns(&cols)
}

fn scatter(h: &AssembledChannel, support: &UserSet, coeffs: &CVec) -> CVec {
    let k = h.dim();
    let mut x = CVec::zeros(h.num_users() * k);
    for (i, &u) in support.iter().enumerate() {
        x.rows_mut(u * k, k).copy_from(&coeffs.rows(i * k, k));
    }
    x
}

/// Least squares on the blocks in `support`. With `require_full_rank`
/// a rank-deficient restricted matrix is an error; otherwise the
/// minimum-norm solution is returned.
fn restricted_ls(h: &AssembledChannel, r: &CVec, support: &UserSet, require_full_rank: bool) -> Result<CVec> {
    let a = restricted_columns(h, support);
    let cols = a.ncols();
    if cols == 0 {
        return Ok(CVec::zeros(h.num_users() * h.dim()));
    }
    let rows = a.nrows();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * f64::EPSILON * rows.max(cols) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if require_full_rank && rank < cols {
        return Err(JaddError::RankDeficient { columns: cols, rank });
    }
    let coeffs = svd.solve(r, tol).map_err(|e| JaddError::Factorization(e.to_string()))?;
    Ok(scatter(h, support, &coeffs))
}

/// Least squares restricted to the true support; zero elsewhere.
pub fn oracle_lse(r: &CVec, h: &AssembledChannel, support: &UserSet) -> Result<CVec> {
    check_len("observation length", h.matrix().nrows(), r.len())?;
    if support.is_empty() {
        return Err(invalid("oracle least squares needs a nonempty support"));
    }
    if let Some(&u) = support.iter().find(|&&u| u >= h.num_users()) {
        return Err(invalid(format!("user {u} out of range")));
    }
    restricted_ls(h, r, support, true)
}

/// ADMM with the true sparsity: keeps the `s_l` strongest blocks.
pub fn oracle_admm(r: &CVec, solver: &AdmmSolver, k: usize, s_l: usize) -> Result<BaselineEstimate> {
    let (state, report) = solver.solve(r)?;
    let support = top_k_support(&block_norms(&state.x, k), s_l);
    let x = prune_signal(&state.x, &support, k);
    Ok(BaselineEstimate { support, x, iterations: report.iterations_used })
}

/// Per-user correlation `||H_j^H res||`.
fn block_correlation(h: &AssembledChannel, res: &CVec) -> Vec<f64> {
    block_norms(&(h.matrix().adjoint() * res), h.dim())
}

/// Block subspace pursuit with known sparsity `s_l`.
///
/// Each iteration merges the current support with the `s_l` blocks most
/// correlated with the residue, fits the merged set by minimum-norm least
/// squares, prunes back to `s_l` blocks and refits. The candidate is kept
/// only if the residue norm decreases.
pub fn bsp(r: &CVec, h: &AssembledChannel, s_l: usize, t_bsp: usize) -> Result<BaselineEstimate> {
    check_len("observation length", h.matrix().nrows(), r.len())?;
    if s_l > h.num_users() {
        return Err(invalid(format!("sparsity {s_l} exceeds the user count")));
    }
    let k = h.dim();
    let mut support = top_k_support(&block_correlation(h, r), s_l);
    let mut x = restricted_ls(h, r, &support, true)?;
    let mut res = r - h.matrix() * &x;
    let mut iterations = 0;
    for it in 1..=t_bsp {
        let mut merged = support.clone();
        merged.extend(top_k_support(&block_correlation(h, &res), s_l));
        let b = restricted_ls(h, r, &merged, false)?;
        let candidate = top_k_support(&block_norms(&b, k), s_l);
        let x_new = restricted_ls(h, r, &candidate, true)?;
        let res_new = r - h.matrix() * &x_new;
        if res_new.norm() >= res.norm() {
            break;
        }
        support = candidate;
        x = x_new;
        res = res_new;
        iterations = it;
    }
    Ok(BaselineEstimate { support, x, iterations })
}
