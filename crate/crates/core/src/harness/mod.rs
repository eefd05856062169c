//! Monte Carlo experiment runner: configuration, detectors, scoring, FLOP
//! accounting and CSV persistence.
//!
//! Every random draw comes from [`crate::rng::trial_rng`] keyed by the
//! experiment seed, the trial index and a stream name. Channels, activity,
//! noise shape and channel-error shape are therefore shared across SNR
//! points, error levels and detectors, and results do not depend on thread
//! count.

mod analysis;
mod config;
mod experiment;
mod flops;
mod metrics;

pub use analysis::{paired_difference, paired_difference_where, snr_at_ser, PairedDifference};
pub use config::{Detector, ExperimentSpec};
pub use experiment::{run_cee_sweep, run_convergence_trace, run_experiment, simulate, trace_trial, ExperimentResult};
pub use flops::{algorithm1, algorithm2, algorithm2_slot, bsp_iteration, count_flops, FlopInputs};
pub use metrics::{aggregate, read_slot_log_csv, write_rows_csv, write_slot_log_csv, MetricRow, SlotRecord};
