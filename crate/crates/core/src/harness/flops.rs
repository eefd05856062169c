//! Closed-form FLOP totals per detector.

use super::Detector;

/// Dimensions the FLOP totals depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopInputs {
    pub j: u64,
    pub k: u64,
    pub nr: u64,
    /// ADMM iteration budget.
    pub t: u64,
    /// Slots per frame.
    pub l: u64,
    /// Sparsity known to the oracle baselines.
    pub s_l: u64,
    /// Iteration budget of block subspace pursuit.
    pub t_bsp: u64,
}

/// `(N_r K)(KJ)^2 + (KJ)^3 + (N_r K)(KJ)`: Gram matrix, factorization and `H^H r`.
fn admm_preprocessing(f: &FlopInputs) -> u64 {
    let (m, n) = (f.nr * f.k, f.k * f.j);
    m * n * n + n * n * n + m * n
}

/// One-shot FSJ-aided ADMM: preprocessing plus `T (2KJ + (KJ)^2)`.
pub fn algorithm1(f: &FlopInputs) -> u64 {
    let n = f.k * f.j;
    admm_preprocessing(f) + f.t * (2 * n + n * n)
}

/// Per-slot cost used by the frame detector totals: preprocessing plus `T (KJ + (KJ)^2)`.
pub fn algorithm2_slot(f: &FlopInputs) -> u64 {
    let n = f.k * f.j;
    admm_preprocessing(f) + f.t * (n + n * n)
}

/// Frame detector total: `L` slot costs for `Case1` frames, `2L` for `Case2` frames.
pub fn algorithm2(f: &FlopInputs, case_two: bool) -> u64 {
    let passes = if case_two { 2 } else { 1 };
    passes * f.l * algorithm2_slot(f)
}

/// Least squares on `s` blocks: `(sK)^3 + 2 K N_r (sK)^2`.
fn block_lse(f: &FlopInputs, s: u64) -> u64 {
    let c = s * f.k;
    c * c * c + 2 * f.k * f.nr * c * c
}

/// One block subspace pursuit iteration with merged support `2 S_l`.
pub fn bsp_iteration(f: &FlopInputs) -> u64 {
    let correlation = f.j * f.k * f.k * f.nr + f.j * f.k + f.k;
    let merged_lse = block_lse(f, 2 * f.s_l);
    let pruning = f.k * f.j + f.j;
    let final_lse = block_lse(f, f.s_l);
    let residue = f.k * f.nr * f.k * f.j;
    correlation + merged_lse + pruning + final_lse + residue
}

/// FLOPs per frame of `L` slots. The frame detector is charged its `Case2`
/// total, the upper bound over frame labels.
pub fn count_flops(detector: Detector, f: &FlopInputs) -> u64 {
    match detector {
        Detector::OracleLse => f.l * block_lse(f, f.s_l),
        Detector::OracleAdmm | Detector::FsjAdmmScma | Detector::FsjAdmmDcma => f.l * algorithm1(f),
        Detector::Bsp => f.l * f.t_bsp * bsp_iteration(f),
        Detector::DynamicAlg2 => algorithm2(f, true),
    }
}
