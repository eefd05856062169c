use std::fs::File;
use std::io::BufWriter;

use rayon::prelude::*;

use crate::baselines::{bsp, oracle_admm, oracle_lse};
use crate::dynamic::detect_frame;
use crate::error::{JaddError, Result};
use crate::model::{
    assemble_channel_matrix, encode_slot, generate_frame, noise_variance, observe, perturb_channel, AssembledChannel,
    ChannelRealization, Codebook, CodebookKind, TransmitFrame,
};
use crate::rng::{trial_rng, Stream};
use crate::solvers::{write_trace_csv, AdmmSolver, ConvergenceReport, IterationRecord};
use crate::support::{demap_symbols, fsj_admm_detect};
use crate::{CVec, SymbolMap, UserSet};

use super::config::{Detector, ExperimentSpec};
use super::flops::{count_flops, FlopInputs};
use super::metrics::{aggregate, write_rows_csv, write_slot_log_csv, MetricRow, SlotRecord};

/// Summary rows plus the per-slot log they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<MetricRow>,
    pub slots: Vec<SlotRecord>,
}

impl ExperimentResult {
    pub fn total_failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }
}

impl ExperimentSpec {
    pub fn flop_inputs(&self) -> FlopInputs {
        let s = &self.system;
        FlopInputs {
            j: s.j as u64,
            k: s.k as u64,
            nr: s.nr as u64,
            t: self.solver.max_iter as u64,
            l: s.l as u64,
            s_l: s.s_l as u64,
            t_bsp: self.t_bsp as u64,
        }
    }

    /// Codebook a detector transmits with. The two FSJ detectors name their
    /// codebook family; the configured codebook is used when it is of that
    /// family and the built-in default otherwise.
    fn codebook_for(&self, d: Detector) -> Codebook {
        let wanted = match d {
            Detector::FsjAdmmScma => CodebookKind::Sparse,
            Detector::FsjAdmmDcma => CodebookKind::Dense,
            _ => return self.codebook.clone(),
        };
        if self.codebook.kind() == wanted {
            self.codebook.clone()
        } else if wanted == CodebookKind::Sparse {
            Codebook::scma_default()
        } else {
            Codebook::dcma_default()
        }
    }
}

/// Detector output for one slot before scoring.
struct Detection {
    support: UserSet,
    symbols: SymbolMap,
    iterations: usize,
    failed: bool,
}

impl Detection {
    fn failed() -> Self {
        Self { support: UserSet::new(), symbols: SymbolMap::new(), iterations: 0, failed: true }
    }
}

fn demapped(x: &CVec, support: UserSet, cb: &Codebook, iterations: usize) -> Result<Detection> {
    let symbols = demap_symbols(x, &support, cb)?;
    Ok(Detection { support, symbols, iterations, failed: false })
}

fn channel_at(channels: &[AssembledChannel], l: usize) -> &AssembledChannel {
    &channels[if channels.len() == 1 { 0 } else { l }]
}

/// Random draws shared by every detector, SNR and error level of one trial.
struct TrialDraws {
    channels: Vec<AssembledChannel>,
    frame: TransmitFrame,
}

fn draw_trial(spec: &ExperimentSpec, trial: usize) -> Result<TrialDraws> {
    let s = &spec.system;
    let mut ch_rng = trial_rng(s.seed, trial as u64, Stream::Channel);
    let realizations = if s.redraw_channel { s.l } else { 1 };
    let channels = (0..realizations)
        .map(|_| assemble_channel_matrix(&ChannelRealization::draw(s.j, s.k, s.nr, &mut ch_rng)))
        .collect();
    let mut frame_rng = trial_rng(s.seed, trial as u64, Stream::Frame);
    let frame = generate_frame(s, &spec.codebook, &mut frame_rng)?;
    Ok(TrialDraws { channels, frame })
}

/// Observations of every slot through the true channel. The noise stream
/// restarts for each call, so all SNR points and codebooks share one noise shape.
fn observe_frame(
    spec: &ExperimentSpec,
    trial: usize,
    draws: &TrialDraws,
    cb: &Codebook,
    snr_db: f64,
) -> Result<Vec<CVec>> {
    let mut rng = trial_rng(spec.system.seed, trial as u64, Stream::Noise);
    let nv = noise_variance(snr_db);
    (0..spec.system.l)
        .map(|l| {
            let x = encode_slot(&draws.frame.supports[l], &draws.frame.symbols[l], cb)?;
            observe(channel_at(&draws.channels, l), &x, nv, &mut rng)
        })
        .collect()
}

fn perturbed(
    spec: &ExperimentSpec,
    trial: usize,
    channels: &[AssembledChannel],
    delta: f64,
) -> Result<Vec<AssembledChannel>> {
    let mut rng = trial_rng(spec.system.seed, trial as u64, Stream::ChannelError);
    channels.iter().map(|h| perturb_channel(h, delta, &mut rng)).collect()
}

/// Solvers built on the (possibly perturbed) channels, one per realization.
#[derive(Default)]
struct SolverSet {
    sparse_group: Option<Result<Vec<AdmmSolver>>>,
    group: Option<Result<Vec<AdmmSolver>>>,
}

impl SolverSet {
    fn build(spec: &ExperimentSpec, channels: &[AssembledChannel]) -> Self {
        let needs = |kind| {
            spec.detectors.iter().any(|&d| match d {
                Detector::OracleAdmm => spec.codebook.kind() == kind,
                Detector::FsjAdmmScma => kind == CodebookKind::Sparse,
                Detector::FsjAdmmDcma => kind == CodebookKind::Dense,
                _ => false,
            })
        };
        let build = |f: fn(&AssembledChannel, &crate::solvers::AdmmConfig) -> Result<AdmmSolver>| {
            channels.iter().map(|h| f(h, &spec.solver)).collect::<Result<Vec<_>>>()
        };
        SolverSet {
            sparse_group: needs(CodebookKind::Sparse).then(|| build(AdmmSolver::sparse_group)),
            group: needs(CodebookKind::Dense).then(|| build(AdmmSolver::group)),
        }
    }

    fn get(&self, kind: CodebookKind, l: usize) -> Result<&AdmmSolver> {
        let slot = match kind {
            CodebookKind::Sparse => &self.sparse_group,
            CodebookKind::Dense => &self.group,
        };
        match slot {
            Some(Ok(v)) => Ok(&v[if v.len() == 1 { 0 } else { l }]),
            Some(Err(e)) => Err(JaddError::Factorization(e.to_string())),
            None => Err(JaddError::InvalidInput("solver was not prepared".into())),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn detect_slot(
    spec: &ExperimentSpec,
    d: Detector,
    cb: &Codebook,
    r: &CVec,
    h: &AssembledChannel,
    solvers: &SolverSet,
    l: usize,
    truth: &UserSet,
) -> Result<Detection> {
    let s = &spec.system;
    match d {
        Detector::OracleLse => {
            let x = oracle_lse(r, h, truth)?;
            demapped(&x, truth.clone(), cb, 0)
        }
        Detector::OracleAdmm => {
            let est = oracle_admm(r, solvers.get(cb.kind(), l)?, s.k, s.s_l)?;
            demapped(&est.x, est.support, cb, est.iterations)
        }
        Detector::FsjAdmmScma | Detector::FsjAdmmDcma => {
            let det = fsj_admm_detect(r, solvers.get(cb.kind(), l)?, cb, spec.alpha_fsj, s.nr)?;
            Ok(Detection {
                support: det.estimate.support,
                symbols: det.symbols,
                iterations: det.iterations,
                failed: false,
            })
        }
        Detector::Bsp => {
            let est = bsp(r, h, s.s_l, spec.t_bsp)?;
            demapped(&est.x, est.support, cb, est.iterations)
        }
        Detector::DynamicAlg2 => unreachable!("frame detector is handled per frame"),
    }
}

fn run_trial(spec: &ExperimentSpec, trial: usize) -> Vec<SlotRecord> {
    let s = &spec.system;
    let draws = match draw_trial(spec, trial) {
        Ok(d) => d,
        // Without a frame there is nothing to score against; record one
        // failed slot per point so the failure is visible in the summary.
        Err(_) => return failed_trial(spec, trial),
    };
    let codebooks: Vec<(Detector, Codebook)> = spec.detectors.iter().map(|&d| (d, spec.codebook_for(d))).collect();
    let mut out = Vec::new();
    for &delta in &spec.delta_grid {
        let channels = perturbed(spec, trial, &draws.channels, delta);
        let solvers = channels.as_ref().map(|c| SolverSet::build(spec, c));
        for &snr in &spec.snr_grid {
            for (d, cb) in &codebooks {
                let obs = observe_frame(spec, trial, &draws, cb, snr);
                let results: Vec<(Detection, String)> = match (&obs, &channels, &solvers) {
                    (Ok(obs), Ok(ch), Ok(sv)) => run_detector(spec, *d, cb, obs, ch, sv, &draws.frame),
                    _ => (0..s.l).map(|_| (Detection::failed(), String::new())).collect(),
                };
                for (l, (det, case)) in results.into_iter().enumerate() {
                    let truth = (&draws.frame.supports[l], &draws.frame.symbols[l]);
                    let mut rec = SlotRecord::score(
                        *d,
                        snr,
                        delta,
                        trial,
                        l,
                        truth,
                        (&det.support, &det.symbols),
                        det.iterations,
                        det.failed,
                    );
                    rec.case = case;
                    out.push(rec);
                }
            }
        }
    }
    out
}

fn run_detector(
    spec: &ExperimentSpec,
    d: Detector,
    cb: &Codebook,
    obs: &[CVec],
    channels: &[AssembledChannel],
    solvers: &SolverSet,
    frame: &TransmitFrame,
) -> Vec<(Detection, String)> {
    if d == Detector::DynamicAlg2 {
        return match detect_frame(obs, channels, cb, &spec.dynamic_config()) {
            Ok(fe) => {
                let case = fe.case_label.to_string();
                fe.slots
                    .into_iter()
                    .map(|sf| {
                        let det = Detection {
                            support: sf.support,
                            symbols: sf.symbols,
                            iterations: sf.iterations,
                            failed: sf.fell_back,
                        };
                        (det, case.clone())
                    })
                    .collect()
            }
            Err(_) => (0..obs.len()).map(|_| (Detection::failed(), String::new())).collect(),
        };
    }
    obs.iter()
        .enumerate()
        .map(|(l, r)| {
            let h = channel_at(channels, l);
            let det =
                detect_slot(spec, d, cb, r, h, solvers, l, &frame.supports[l]).unwrap_or_else(|_| Detection::failed());
            (det, String::new())
        })
        .collect()
}

fn failed_trial(spec: &ExperimentSpec, trial: usize) -> Vec<SlotRecord> {
    let empty = (UserSet::new(), SymbolMap::new());
    let mut out = Vec::new();
    for &delta in &spec.delta_grid {
        for &snr in &spec.snr_grid {
            for &d in &spec.detectors {
                out.push(SlotRecord::score(
                    d,
                    snr,
                    delta,
                    trial,
                    0,
                    (&empty.0, &empty.1),
                    (&empty.0, &empty.1),
                    0,
                    true,
                ));
            }
        }
    }
    out
}

/// Runs every trial and aggregates, without touching the filesystem.
/// Output does not depend on the number of threads.
pub fn simulate(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| JaddError::InvalidInput(format!("thread pool: {e}")))?;
    let per_trial: Vec<Vec<SlotRecord>> =
        pool.install(|| (0..spec.trials).into_par_iter().map(|t| run_trial(spec, t)).collect());
    let slots: Vec<SlotRecord> = per_trial.into_iter().flatten().collect();
    let flop_inputs = spec.flop_inputs();
    let rows =
        aggregate(&slots, spec.system.j, |name| name.parse::<Detector>().map_or(0, |d| count_flops(d, &flop_inputs)));
    Ok(ExperimentResult { rows, slots })
}

/// Runs the experiment and writes the summary CSV and, if configured, the
/// per-slot log.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let result = simulate(spec)?;
    if let Some(path) = &spec.output_path {
        write_rows_csv(&result.rows, BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = &spec.slot_log_path {
        write_slot_log_csv(&result.slots, BufWriter::new(File::create(path)?))?;
    }
    Ok(result)
}

/// Same experiment over a grid of channel-error levels.
pub fn run_cee_sweep(spec: &ExperimentSpec, deltas: &[f64]) -> Result<ExperimentResult> {
    let mut s = spec.clone();
    s.delta_grid = deltas.to_vec();
    run_experiment(&s)
}

/// One traced solve: trial 0, first slot, first SNR and error level, on the
/// path matching the codebook. Writes the history when a trace path is set.
pub fn run_convergence_trace(spec: &ExperimentSpec) -> Result<(Vec<IterationRecord>, ConvergenceReport)> {
    spec.validate()?;
    trace_trial(spec, 0)
}

/// Traced solve for an arbitrary trial index; used for convergence statistics.
pub fn trace_trial(spec: &ExperimentSpec, trial: usize) -> Result<(Vec<IterationRecord>, ConvergenceReport)> {
    let draws = draw_trial(spec, trial)?;
    let obs = observe_frame(spec, trial, &draws, &spec.codebook, spec.snr_grid[0])?;
    let channels = perturbed(spec, trial, &draws.channels, spec.delta_grid[0])?;
    let solver = match spec.codebook.kind() {
        CodebookKind::Sparse => AdmmSolver::sparse_group(&channels[0], &spec.solver)?,
        CodebookKind::Dense => AdmmSolver::group(&channels[0], &spec.solver)?,
    };
    let (state, report) = solver.solve(&obs[0])?;
    if let Some(path) = &spec.trace_path {
        write_trace_csv(&state.history, BufWriter::new(File::create(path)?))?;
    }
    Ok((state.history, report))
}
