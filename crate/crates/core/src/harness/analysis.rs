use std::collections::BTreeMap;

use super::config::Detector;
use super::metrics::{trial_standard_error, SlotRecord};

/// Mean and standard error of a per-trial difference between two detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedDifference {
    /// Mean of `ser(a) - ser(b)` over trials.
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl PairedDifference {
    /// True when `a` is no worse than `b` up to `k` standard errors.
    pub fn not_worse_within(&self, k: f64) -> bool {
        self.mean <= k * self.std_error
    }
}

fn per_trial_rates(slots: &[SlotRecord], select: impl Fn(&SlotRecord) -> bool) -> BTreeMap<usize, (usize, usize)> {
    let mut out: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for s in slots.iter().filter(|s| select(s)) {
        let e = out.entry(s.trial).or_default();
        e.0 += s.user_errors();
        e.1 += 1;
    }
    out
}

/// Paired comparison of per-trial error rates between two detectors at one
/// (SNR, delta) point. Both detectors see the same channels, frames and
/// noise in each trial, so the difference has a much smaller variance than
/// the two rates separately. Rates are in `ser` units.
pub fn paired_difference(
    slots: &[SlotRecord],
    num_users: usize,
    a: Detector,
    b: Detector,
    snr: f64,
    delta: f64,
) -> Option<PairedDifference> {
    paired_difference_where(
        slots,
        num_users,
        |s| s.detector == a.name() && s.snr_db == snr && s.delta == delta,
        |s| s.detector == b.name() && s.snr_db == snr && s.delta == delta,
    )
}

/// Paired comparison between two arbitrary selections of the slot log,
/// matched by trial index. Returns `None` when no trial appears in both.
pub fn paired_difference_where(
    slots: &[SlotRecord],
    num_users: usize,
    select_a: impl Fn(&SlotRecord) -> bool,
    select_b: impl Fn(&SlotRecord) -> bool,
) -> Option<PairedDifference> {
    let ra = per_trial_rates(slots, select_a);
    let rb = per_trial_rates(slots, select_b);
    let rate = |e: usize, n: usize| e as f64 / (n * num_users) as f64;
    let diffs: Vec<f64> =
        ra.iter().filter_map(|(trial, &(ea, na))| rb.get(trial).map(|&(eb, nb)| rate(ea, na) - rate(eb, nb))).collect();
    if diffs.is_empty() {
        return None;
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    Some(PairedDifference { mean, std_error: trial_standard_error(diffs.iter().copied()), trials: diffs.len() })
}

/// SNR at which a decreasing SER curve first reaches `target`, interpolated
/// linearly in (SNR, log10 SER). Segments ending at zero SER fall back to
/// linear interpolation in SER. Returns `None` if the curve never reaches it.
pub fn snr_at_ser(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    if target.is_nan() || target <= 0.0 {
        return None;
    }
    let mut pts = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(&(snr, ser)) = pts.first() {
        if ser <= target {
            return Some(snr);
        }
    }
    for w in pts.windows(2) {
        let ((s0, e0), (s1, e1)) = (w[0], w[1]);
        if e0 > target && e1 <= target {
            let frac = if e1 > 0.0 {
                (e0.log10() - target.log10()) / (e0.log10() - e1.log10())
            } else {
                (e0 - target) / (e0 - e1)
            };
            return Some(s0 + frac * (s1 - s0));
        }
    }
    None
}
