//! Two-step frame detector. Step i runs the one-shot FSJ-aided ADMM on every
//! slot. If adjacent slots share users, step ii re-detects the slots in order.
//! Users found in both the previous slot's final support and the current
//! slot's preliminary support form a quality set, which is exempt from the
//! group penalty. When symbols also repeat, the previous estimate serves as
//! a prior signal.

use crate::error::{invalid, JaddError, Result};
use crate::model::{AssembledChannel, Codebook};
use crate::solvers::{block_norms, AdmmConfig, AdmmSolver};
use crate::support::{demap_symbols, fsj_admm_detect, fsj_threshold, prune_signal, top_k_support};
use crate::{CVec, SymbolMap, UserSet};

/// Frame label deciding how much of the previous slot is reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CaseLabel {
    /// No user is shared between adjacent slots.
    Case1,
    /// Users are shared but none repeats its symbol.
    Case2a,
    /// Some shared user repeats its symbol.
    Case2b,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2a => "case2a",
            CaseLabel::Case2b => "case2b",
        })
    }
}

/// How step ii chooses the number of users kept after its solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepTwoSparsity {
    /// Keep step i's sparsity estimate.
    ReuseStepOne,
    /// Re-run the FSJ rule on step ii's own estimate.
    #[default]
    Refit,
}

impl std::str::FromStr for StepTwoSparsity {
    type Err = JaddError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "reuse" | "reuse_step_one" => Ok(Self::ReuseStepOne),
            "refit" => Ok(Self::Refit),
            other => Err(invalid(format!("unknown step-two sparsity rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicConfig {
    pub admm: AdmmConfig,
    pub alpha_fsj: f64,
    pub step_two: StepTwoSparsity,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self { admm: AdmmConfig::default(), alpha_fsj: 0.5, step_two: StepTwoSparsity::default() }
    }
}

/// Preliminary per-slot estimate from step i.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotEstimate {
    pub support_p: UserSet,
    pub x_p: CVec,
    pub symbol_idx: SymbolMap,
    pub sparsity_hat: usize,
    pub no_jump: bool,
    pub iterations: usize,
}

/// Final per-slot output of the frame detector.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotFinal {
    pub support: UserSet,
    pub x: CVec,
    pub symbols: SymbolMap,
    pub quality: UserSet,
    pub prior: CVec,
    /// Step ii failed for this slot and step i's estimate was kept.
    pub fell_back: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameEstimate {
    pub case_label: CaseLabel,
    pub slots: Vec<SlotFinal>,
}

/// Returns the channel used in slot `l`: either one shared realization or one per slot.
fn channel_for(channels: &[AssembledChannel], l: usize) -> &AssembledChannel {
    if channels.len() == 1 {
        &channels[0]
    } else {
        &channels[l]
    }
}

fn check_frame(obs: &[CVec], channels: &[AssembledChannel]) -> Result<()> {
    if obs.is_empty() {
        return Err(invalid("frame has no slots"));
    }
    if channels.len() != 1 && channels.len() != obs.len() {
        return Err(invalid(format!("expected 1 or {} channels, got {}", obs.len(), channels.len())));
    }
    Ok(())
}

/// Builds one solver per distinct channel.
fn solvers(
    channels: &[AssembledChannel],
    build: impl Fn(&AssembledChannel) -> Result<AdmmSolver>,
) -> Result<Vec<AdmmSolver>> {
    channels.iter().map(build).collect()
}

fn solver_for(solvers: &[AdmmSolver], l: usize) -> &AdmmSolver {
    if solvers.len() == 1 {
        &solvers[0]
    } else {
        &solvers[l]
    }
}

/// One-shot FSJ-aided group-LASSO detection of every slot, independently.
pub fn step_i(
    obs: &[CVec],
    channels: &[AssembledChannel],
    cb: &Codebook,
    cfg: &DynamicConfig,
) -> Result<Vec<SlotEstimate>> {
    check_frame(obs, channels)?;
    let group = solvers(channels, |h| AdmmSolver::group(h, &cfg.admm))?;
    obs.iter()
        .enumerate()
        .map(|(l, r)| {
            let nr = channel_for(channels, l).antennas();
            let d = fsj_admm_detect(r, solver_for(&group, l), cb, cfg.alpha_fsj, nr)
                .map_err(|e| JaddError::Slot { slot: l, source: Box::new(e) })?;
            Ok(SlotEstimate {
                support_p: d.estimate.support,
                x_p: d.x,
                symbol_idx: d.symbols,
                sparsity_hat: d.estimate.sparsity_hat,
                no_jump: d.estimate.no_jump,
                iterations: d.iterations,
            })
        })
        .collect()
}

/// Frame label from adjacent-slot overlaps; the most informative label of
/// any adjacent pair wins. A single slot is `Case1`.
pub fn classify_case(estimates: &[SlotEstimate]) -> CaseLabel {
    estimates
        .windows(2)
        .map(|w| {
            let (prev, cur) = (&w[0], &w[1]);
            let common: Vec<usize> = cur.support_p.intersection(&prev.support_p).copied().collect();
            if common.is_empty() {
                CaseLabel::Case1
            } else if common.iter().any(|u| cur.symbol_idx.get(u) == prev.symbol_idx.get(u)) {
                CaseLabel::Case2b
            } else {
                CaseLabel::Case2a
            }
        })
        .max()
        .unwrap_or(CaseLabel::Case1)
}

/// Users in both the previous final support and the current preliminary support.
pub fn quality_set(prev_final: &UserSet, current_prior: &UserSet) -> UserSet {
    prev_final.intersection(current_prior).copied().collect()
}

/// `0` on the quality set, `1` elsewhere.
pub fn prior_weights(quality: &UserSet, j: usize) -> Vec<f64> {
    (0..j).map(|u| if quality.contains(&u) { 0.0 } else { 1.0 }).collect()
}

/// Blocks of the previous final estimate restricted to the quality set.
pub fn prior_signal(prev_x: &CVec, quality: &UserSet, k: usize) -> CVec {
    prune_signal(prev_x, quality, k)
}

fn step_one_as_final(e: &SlotEstimate, quality: UserSet, prior: CVec, fell_back: bool) -> SlotFinal {
    SlotFinal {
        support: e.support_p.clone(),
        x: e.x_p.clone(),
        symbols: e.symbol_idx.clone(),
        quality,
        prior,
        fell_back,
        iterations: e.iterations,
    }
}

/// Sequential prior-aided re-detection. `Case1` frames return step i's
/// result unchanged. `Case2a` uses the quality set only (`mu = 0`) and
/// `Case2b` adds the prior signal with `cfg.admm.mu`. Slots with an empty
/// quality set keep their step-i estimate. A slot whose solve fails keeps
/// its step-i estimate and is flagged.
pub fn step_ii(
    obs: &[CVec],
    channels: &[AssembledChannel],
    cb: &Codebook,
    cfg: &DynamicConfig,
    estimates: &[SlotEstimate],
    case_label: CaseLabel,
) -> Result<FrameEstimate> {
    check_frame(obs, channels)?;
    if estimates.len() != obs.len() {
        return Err(invalid("one step-i estimate per slot is required"));
    }
    let (j, k) = (cb.num_users(), cb.dim());
    if case_label == CaseLabel::Case1 {
        let slots = estimates.iter().map(|e| step_one_as_final(e, UserSet::new(), CVec::zeros(j * k), false)).collect();
        return Ok(FrameEstimate { case_label, slots });
    }
    let mu = if case_label == CaseLabel::Case2b { cfg.admm.mu } else { 0.0 };
    let admm = AdmmConfig { mu, ..cfg.admm.clone() };
    let prior_solvers = solvers(channels, |h| AdmmSolver::prior_aided(h, &admm))?;

    let mut slots: Vec<SlotFinal> = Vec::with_capacity(obs.len());
    for (l, (r, est)) in obs.iter().zip(estimates).enumerate() {
        let (quality, prior) = match slots.last() {
            Some(prev) => {
                let q = quality_set(&prev.support, &est.support_p);
                let b = prior_signal(&prev.x, &q, k);
                (q, b)
            }
            None => (UserSet::new(), CVec::zeros(j * k)),
        };
        // Without a quality set there is nothing to reuse; the prior-aided
        // solve with q empty and mu = 0 is exactly the step-i solve, while
        // mu > 0 with a zero prior would only shrink the estimate.
        if quality.is_empty() {
            slots.push(step_one_as_final(est, quality, prior, false));
            continue;
        }
        let nr = channel_for(channels, l).antennas();
        let attempt = solver_for(&prior_solvers, l).solve_prior(r, &quality, &prior).and_then(|(state, report)| {
            let norms = block_norms(&state.x, k);
            let s_hat = match cfg.step_two {
                StepTwoSparsity::ReuseStepOne => est.sparsity_hat,
                StepTwoSparsity::Refit => fsj_threshold(&norms, cfg.alpha_fsj, nr)?.sparsity_hat,
            };
            let support = top_k_support(&norms, s_hat);
            let x = prune_signal(&state.x, &support, k);
            let symbols = demap_symbols(&x, &support, cb)?;
            Ok((support, x, symbols, report.iterations_used))
        });
        slots.push(match attempt {
            Ok((support, x, symbols, iterations)) => {
                SlotFinal { support, x, symbols, quality, prior, fell_back: false, iterations }
            }
            Err(_) => step_one_as_final(est, quality, prior, true),
        });
    }
    Ok(FrameEstimate { case_label, slots })
}

/// Step i, case classification and step ii in sequence.
pub fn detect_frame(
    obs: &[CVec],
    channels: &[AssembledChannel],
    cb: &Codebook,
    cfg: &DynamicConfig,
) -> Result<FrameEstimate> {
    let estimates = step_i(obs, channels, cb, cfg)?;
    let label = classify_case(&estimates);
    step_ii(obs, channels, cb, cfg, &estimates, label)
}
