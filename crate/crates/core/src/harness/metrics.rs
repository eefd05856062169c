use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::{SymbolMap, UserSet};

use super::config::Detector;

/// Outcome of one detector on one slot of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub detector: String,
    pub snr_db: f64,
    pub delta: f64,
    pub trial: usize,
    pub slot: usize,
    /// Case label for the frame detector, empty otherwise.
    pub case: String,
    pub true_support: String,
    pub detected_support: String,
    pub active: usize,
    pub missed: usize,
    pub false_alarms: usize,
    /// Users detected correctly as active but demapped to the wrong codeword.
    pub wrong: usize,
    pub iterations: usize,
    pub failed: bool,
}

fn join(set: &UserSet) -> String {
    set.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

impl SlotRecord {
    /// Scores a detection against the transmitted support and symbols.
    #[allow(clippy::too_many_arguments)]
    pub fn score(
        detector: Detector,
        snr_db: f64,
        delta: f64,
        trial: usize,
        slot: usize,
        truth: (&UserSet, &SymbolMap),
        detected: (&UserSet, &SymbolMap),
        iterations: usize,
        failed: bool,
    ) -> Self {
        let (true_support, true_symbols) = truth;
        let (det_support, det_symbols) = detected;
        let missed = true_support.difference(det_support).count();
        let false_alarms = det_support.difference(true_support).count();
        let wrong =
            true_support.intersection(det_support).filter(|u| det_symbols.get(u) != true_symbols.get(u)).count();
        Self {
            detector: detector.name().to_string(),
            snr_db,
            delta,
            trial,
            slot,
            case: String::new(),
            true_support: join(true_support),
            detected_support: join(det_support),
            active: true_support.len(),
            missed,
            false_alarms,
            wrong,
            iterations,
            failed,
        }
    }

    pub fn exact_support(&self) -> bool {
        self.missed == 0 && self.false_alarms == 0
    }

    /// Per-user symbol errors with inactive users counted as the zero codeword.
    pub fn user_errors(&self) -> usize {
        self.missed + self.false_alarms + self.wrong
    }
}

/// One CSV row of summary statistics for a (detector, SNR, delta) point.
///
/// `ser` counts errors over all J users per slot, treating an inactive user
/// as sending the zero codeword, so missed users, false alarms and wrong
/// codewords each count once. `ser_active` counts missed and wrong users over
/// the truly active ones only. `ser_se` is the standard error of `ser` across
/// trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub detector: String,
    pub snr_db: f64,
    pub delta: f64,
    pub ser: f64,
    pub ser_se: f64,
    pub ser_active: f64,
    pub aer: f64,
    pub support_exact_rate: f64,
    pub mean_iterations: f64,
    pub flops: u64,
    pub trials: usize,
    pub slots: usize,
    pub failures: usize,
}

#[derive(Default)]
struct Tally {
    slots: usize,
    active: usize,
    missed: usize,
    false_alarms: usize,
    wrong: usize,
    exact: usize,
    iterations: usize,
    failures: usize,
    per_trial: BTreeMap<usize, (usize, usize)>,
}

/// Key ordering rows by detector, delta and SNR using total ordering on floats.
fn row_key(r: &SlotRecord) -> (String, u64, u64) {
    (r.detector.clone(), ordered_bits(r.delta), ordered_bits(r.snr_db))
}

fn ordered_bits(v: f64) -> u64 {
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Summarizes slot records into one row per (detector, delta, SNR).
/// `num_users` is J; `flops` maps each detector name to its count.
pub fn aggregate(records: &[SlotRecord], num_users: usize, flops: impl Fn(&str) -> u64) -> Vec<MetricRow> {
    let mut groups: BTreeMap<(String, u64, u64), (f64, f64, Tally)> = BTreeMap::new();
    for r in records {
        let entry = groups.entry(row_key(r)).or_insert_with(|| (r.snr_db, r.delta, Tally::default()));
        let t = &mut entry.2;
        t.slots += 1;
        t.active += r.active;
        t.missed += r.missed;
        t.false_alarms += r.false_alarms;
        t.wrong += r.wrong;
        t.exact += usize::from(r.exact_support());
        t.iterations += r.iterations;
        t.failures += usize::from(r.failed);
        let pt = t.per_trial.entry(r.trial).or_default();
        pt.0 += r.user_errors();
        pt.1 += num_users;
    }
    groups
        .into_iter()
        .map(|((detector, _, _), (snr_db, delta, t))| {
            let user_slots = (num_users * t.slots) as f64;
            let ser = (t.missed + t.false_alarms + t.wrong) as f64 / user_slots;
            let ser_se = trial_standard_error(t.per_trial.values().map(|&(e, n)| e as f64 / n as f64));
            let ser_active = if t.active == 0 { 0.0 } else { (t.missed + t.wrong) as f64 / t.active as f64 };
            MetricRow {
                flops: flops(&detector),
                detector,
                snr_db,
                delta,
                ser,
                ser_se,
                ser_active,
                aer: (t.missed + t.false_alarms) as f64 / user_slots,
                support_exact_rate: t.exact as f64 / t.slots as f64,
                mean_iterations: t.iterations as f64 / t.slots as f64,
                trials: t.per_trial.len(),
                slots: t.slots,
                failures: t.failures,
            }
        })
        .collect()
}

/// Standard error of the mean of per-trial values.
pub(crate) fn trial_standard_error(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Writes summary rows with a header in `MetricRow` field order.
pub fn write_rows_csv<W: Write>(rows: &[MetricRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the per-slot log that the summary rows are computed from.
pub fn write_slot_log_csv<W: Write>(records: &[SlotRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a per-slot log written by [`write_slot_log_csv`].
pub fn read_slot_log_csv<R: std::io::Read>(reader: R) -> Result<Vec<SlotRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
