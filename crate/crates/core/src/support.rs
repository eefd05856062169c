//! Activity detection after the ADMM iterations: the first-significant-jump
//! threshold, top-k selection, pruning and minimum-distance demapping.

use crate::error::{check_len, invalid, Result};
use crate::model::Codebook;
use crate::solvers::{block_norms, AdmmSolver};
use crate::{CVec, SymbolMap, UserSet};

/// Result of the first-significant-jump rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEstimate {
    /// Threshold separating active from inactive blocks; `None` when no jump exists.
    pub beta: Option<f64>,
    pub sparsity_hat: usize,
    pub support: UserSet,
    pub block_norms: Vec<f64>,
    /// No sorted gap exceeded the jump threshold, so no user is declared active.
    pub no_jump: bool,
}

/// Sorts the block norms ascending and finds the first gap
/// `s[p+1] - s[p] > alpha * max / n_r`; users above `s[p]` are active.
pub fn fsj_threshold(block_norms: &[f64], alpha: f64, nr: usize) -> Result<SupportEstimate> {
    if let Some(v) = block_norms.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(invalid(format!("block norms must be finite and nonnegative, got {v}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) || nr == 0 {
        return Err(invalid("FSJ parameter must be positive and N_r at least 1"));
    }
    let mut sorted = block_norms.to_vec();
    sorted.sort_by(f64::total_cmp);
    let max = sorted.last().copied().unwrap_or(0.0);
    let jump = alpha * max / nr as f64;
    let p = sorted.windows(2).position(|w| w[1] - w[0] > jump);
    Ok(match p {
        Some(p) => {
            let beta = sorted[p];
            let support: UserSet = (0..block_norms.len()).filter(|&j| block_norms[j] > beta).collect();
            SupportEstimate {
                beta: Some(beta),
                sparsity_hat: support.len(),
                support,
                block_norms: block_norms.to_vec(),
                no_jump: false,
            }
        }
        None => SupportEstimate {
            beta: None,
            sparsity_hat: 0,
            support: UserSet::new(),
            block_norms: block_norms.to_vec(),
            no_jump: true,
        },
    })
}

/// The `k` users with the largest block norms, ties to the lowest index.
pub fn top_k_support(block_norms: &[f64], k: usize) -> UserSet {
    let mut idx: Vec<usize> = (0..block_norms.len()).collect();
    idx.sort_by(|&a, &b| block_norms[b].total_cmp(&block_norms[a]).then(a.cmp(&b)));
    idx.into_iter().take(k).collect()
}

/// Zeros every block outside `support`.
pub fn prune_signal(x: &CVec, support: &UserSet, k: usize) -> CVec {
    let mut out = CVec::zeros(x.len());
    for &u in support {
        out.rows_mut(u * k, k).copy_from(&x.rows(u * k, k));
    }
    out
}

/// Minimum-distance codeword for every user in `support`, ties to the lowest index.
pub fn demap_symbols(x_hat: &CVec, support: &UserSet, cb: &Codebook) -> Result<SymbolMap> {
    let k = cb.dim();
    check_len("signal length", cb.num_users() * k, x_hat.len())?;
    support
        .iter()
        .map(|&u| {
            if u >= cb.num_users() {
                return Err(invalid(format!("user {u} out of range")));
            }
            let block = x_hat.rows(u * k, k);
            let best = cb
                .user_words(u)
                .iter()
                .map(|c| (block - c).norm_squared())
                .enumerate()
                .fold((0, f64::INFINITY), |best, (m, d)| if d < best.1 { (m, d) } else { best });
            Ok((u, best.0))
        })
        .collect()
}

/// Output of the one-shot FSJ-aided ADMM detector for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotDetection {
    pub estimate: SupportEstimate,
    /// Pruned signal estimate.
    pub x: CVec,
    pub symbols: SymbolMap,
    pub iterations: usize,
    pub converged: bool,
}

/// ADMM followed by the FSJ rule, pruning and demapping.
pub fn fsj_admm_detect(
    r: &CVec,
    solver: &AdmmSolver,
    cb: &Codebook,
    alpha_fsj: f64,
    nr: usize,
) -> Result<SlotDetection> {
    let (state, report) = solver.solve(r)?;
    let k = cb.dim();
    let norms = block_norms(&state.x, k);
    let estimate = fsj_threshold(&norms, alpha_fsj, nr)?;
    let support = top_k_support(&norms, estimate.sparsity_hat);
    debug_assert_eq!(support, estimate.support);
    let x = prune_signal(&state.x, &support, k);
    let symbols = demap_symbols(&x, &support, cb)?;
    Ok(SlotDetection { estimate, x, symbols, iterations: report.iterations_used, converged: report.converged })
}
