use std::path::PathBuf;

use crate::dynamic::{DynamicConfig, StepTwoSparsity};
use crate::error::{invalid, JaddError, Result};
use crate::model::{Codebook, SystemConfig};
use crate::solvers::AdmmConfig;

/// Detectors the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Detector {
    /// Least squares on the true support.
    OracleLse,
    /// ADMM with the true sparsity level; sparse-group path for sparse codebooks.
    OracleAdmm,
    /// FSJ-aided sparse-group ADMM.
    FsjAdmmScma,
    /// FSJ-aided group ADMM.
    FsjAdmmDcma,
    /// Block subspace pursuit with the true sparsity level.
    Bsp,
    /// Two-step frame detector.
    DynamicAlg2,
}

impl Detector {
    pub const ALL: [Detector; 6] = [
        Detector::OracleLse,
        Detector::OracleAdmm,
        Detector::FsjAdmmScma,
        Detector::FsjAdmmDcma,
        Detector::Bsp,
        Detector::DynamicAlg2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Detector::OracleLse => "oracle_lse",
            Detector::OracleAdmm => "oracle_admm",
            Detector::FsjAdmmScma => "fsj_admm_scma",
            Detector::FsjAdmmDcma => "fsj_admm_dcma",
            Detector::Bsp => "bsp",
            Detector::DynamicAlg2 => "dynamic_alg2",
        }
    }
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Detector {
    type Err = JaddError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Detector::ALL.into_iter().find(|d| d.name() == s).ok_or_else(|| invalid(format!("unknown detector '{s}'")))
    }
}

/// Full description of a Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub system: SystemConfig,
    pub solver: AdmmConfig,
    pub codebook: Codebook,
    pub detectors: Vec<Detector>,
    pub snr_grid: Vec<f64>,
    /// Channel-error levels; each one yields its own rows.
    pub delta_grid: Vec<f64>,
    pub trials: usize,
    pub alpha_fsj: f64,
    pub t_bsp: usize,
    pub step_two: StepTwoSparsity,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub trace_path: Option<PathBuf>,
    pub slot_log_path: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            solver: AdmmConfig::default(),
            codebook: Codebook::dcma_default(),
            detectors: vec![Detector::FsjAdmmDcma],
            snr_grid: vec![0.0, 4.0, 8.0, 12.0, 16.0],
            delta_grid: vec![0.0],
            trials: 1000,
            alpha_fsj: 0.5,
            t_bsp: 10,
            step_two: StepTwoSparsity::default(),
            threads: None,
            output_path: None,
            trace_path: None,
            slot_log_path: None,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, line: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| JaddError::Parse { line, msg: format!("bad value '{s}': {e}") }))
        .collect()
}

fn parse_one<T: std::str::FromStr>(value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| JaddError::Parse { line, msg: format!("bad value '{value}': {e}") })
}

fn parse_bool(value: &str, line: usize) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(JaddError::Parse { line, msg: format!("bad boolean '{value}'") }),
    }
}

impl ExperimentSpec {
    /// Parses `key = value` lines with `system.*`, `solver.*` and
    /// `experiment.*` keys. Lines starting with `#` are comments.
    /// Relative codebook paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&std::path::Path>) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| JaddError::Parse { line, msg: format!("expected key = value, got '{content}'") })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            let sys = &mut spec.system;
            let sol = &mut spec.solver;
            match key.as_str() {
                "system.j" => sys.j = parse_one(value, line)?,
                "system.k" => sys.k = parse_one(value, line)?,
                "system.n_r" | "system.nr" => sys.nr = parse_one(value, line)?,
                "system.l" => sys.l = parse_one(value, line)?,
                "system.s_l" | "system.sparsity" => sys.s_l = parse_one(value, line)?,
                "system.snr_db" => sys.snr_db = parse_one(value, line)?,
                "system.seed" => sys.seed = parse_one(value, line)?,
                "system.activity_mode" => sys.activity_mode = parse_one(value, line)?,
                "system.p_stay" => sys.p_stay = parse_one(value, line)?,
                "system.redraw_channel" => sys.redraw_channel = parse_bool(value, line)?,
                "system.codebook" => {
                    spec.codebook = match value.to_ascii_lowercase().as_str() {
                        "dcma" | "dense" => Codebook::dcma_default(),
                        "scma" | "sparse" => Codebook::scma_default(),
                        _ => {
                            let path = PathBuf::from(value);
                            let path = match base_dir {
                                Some(dir) if path.is_relative() => dir.join(path),
                                _ => path,
                            };
                            Codebook::from_file(&path)?
                        }
                    }
                }
                "solver.rho" => sol.rho = parse_one(value, line)?,
                "solver.alpha1" => sol.alpha1 = parse_one(value, line)?,
                "solver.alpha2" => sol.alpha2 = parse_one(value, line)?,
                "solver.mu" => sol.mu = parse_one(value, line)?,
                "solver.t" | "solver.max_iter" => sol.max_iter = parse_one(value, line)?,
                "solver.eps_abs" => sol.eps_abs = parse_one(value, line)?,
                "solver.eps_rel" => sol.eps_rel = parse_one(value, line)?,
                "solver.eps_w" | "solver.eps" => sol.eps_w = parse_one(value, line)?,
                "solver.t_w" | "solver.reweight_iters" => sol.reweight_iters = parse_one(value, line)?,
                "solver.order" => sol.order = parse_one(value, line)?,
                "solver.diagnostics" => sol.diagnostics = parse_bool(value, line)?,
                "experiment.detector" | "experiment.detectors" => spec.detectors = parse_list(value, line)?,
                "experiment.snr_db" | "experiment.snr_grid" => spec.snr_grid = parse_list(value, line)?,
                "experiment.delta" | "experiment.delta_cee" | "experiment.delta_grid" => {
                    spec.delta_grid = parse_list(value, line)?
                }
                "experiment.trials" => spec.trials = parse_one(value, line)?,
                "experiment.alpha_fsj" => spec.alpha_fsj = parse_one(value, line)?,
                "experiment.t_bsp" => spec.t_bsp = parse_one(value, line)?,
                "experiment.step_two" => spec.step_two = parse_one(value, line)?,
                "experiment.threads" => spec.threads = Some(parse_one(value, line)?),
                "experiment.output" => spec.output_path = Some(PathBuf::from(value)),
                "experiment.trace" => spec.trace_path = Some(PathBuf::from(value)),
                "experiment.slot_log" => spec.slot_log_path = Some(PathBuf::from(value)),
                _ => return Err(JaddError::Parse { line, msg: format!("unknown key '{key}'") }),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path)?, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.system.check_codebook(&self.codebook)?;
        self.solver.validate()?;
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.snr_grid.is_empty() || self.snr_grid.iter().any(|s| !s.is_finite()) {
            return Err(invalid("SNR grid must be nonempty and finite"));
        }
        if self.delta_grid.is_empty() || self.delta_grid.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(invalid("channel-error grid must be nonempty and nonnegative"));
        }
        if self.detectors.is_empty() {
            return Err(invalid("at least one detector is required"));
        }
        if self.alpha_fsj.is_nan() || self.alpha_fsj <= 0.0 {
            return Err(invalid("alpha_fsj must be positive"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn dynamic_config(&self) -> DynamicConfig {
        DynamicConfig { admm: self.solver.clone(), alpha_fsj: self.alpha_fsj, step_two: self.step_two }
    }
}
