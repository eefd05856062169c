//! End-to-end checks across model, solvers, support detection and the frame detector.

use jadd::dynamic::{detect_frame, CaseLabel, DynamicConfig};
use jadd::model::{
    assemble_channel_matrix, encode_slot, generate_frame, observe, ActivityMode, ChannelRealization, Codebook,
    SystemConfig,
};
use jadd::solvers::{AdmmConfig, AdmmSolver};
use jadd::support::fsj_admm_detect;
use jadd::CVec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn detection_cfg() -> AdmmConfig {
    AdmmConfig { rho: 1.0, alpha1: 0.5, reweight_iters: 1, ..AdmmConfig::default() }
}

#[test]
fn noiseless_well_conditioned_slots_are_detected_exactly() {
    // Eight receive antennas make the 32x32 system overdetermined enough for
    // exact recovery of two active users in almost every draw.
    let sys = SystemConfig { nr: 8, ..SystemConfig::default() };
    let cb = Codebook::dcma_default();
    let mut exact = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = assemble_channel_matrix(&ChannelRealization::draw(sys.j, sys.k, sys.nr, &mut rng));
        let frame = generate_frame(&sys, &cb, &mut rng).unwrap();
        let r = observe(&h, &frame.x_slots[0], 0.0, &mut rng).unwrap();
        let solver = AdmmSolver::group(&h, &detection_cfg()).unwrap();
        let det = fsj_admm_detect(&r, &solver, &cb, 0.5, sys.nr).unwrap();
        exact += usize::from(det.estimate.support == frame.supports[0] && det.symbols == frame.symbols[0]);
    }
    assert!(exact >= 48, "exact {exact}/50");
}

#[test]
fn sparse_codebook_runs_on_sparse_group_path() {
    let sys = SystemConfig { nr: 8, ..SystemConfig::default() };
    let cb = Codebook::scma_default();
    let mut exact = 0;
    for seed in 0..30 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let h = assemble_channel_matrix(&ChannelRealization::draw(sys.j, sys.k, sys.nr, &mut rng));
        let frame = generate_frame(&sys, &cb, &mut rng).unwrap();
        let r = observe(&h, &frame.x_slots[0], 1e-4, &mut rng).unwrap();
        let cfg = AdmmConfig { alpha2: 0.05, ..detection_cfg() };
        let solver = AdmmSolver::sparse_group(&h, &cfg).unwrap();
        let det = fsj_admm_detect(&r, &solver, &cb, 0.5, sys.nr).unwrap();
        exact += usize::from(det.estimate.support == frame.supports[0] && det.symbols == frame.symbols[0]);
    }
    assert!(exact >= 27, "exact {exact}/30");
}

#[test]
fn encoded_slot_matches_frame_signal() {
    let sys = SystemConfig { l: 4, activity_mode: ActivityMode::Case2a, ..SystemConfig::default() };
    let cb = Codebook::scma_default();
    let frame = generate_frame(&sys, &cb, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    for l in 0..sys.l {
        assert_eq!(encode_slot(&frame.supports[l], &frame.symbols[l], &cb).unwrap(), frame.x_slots[l]);
    }
}

#[test]
fn static_frames_are_labelled_by_symbol_agreement() {
    // In a noiseless, well-determined static frame every slot recovers the
    // same users. Labels then depend only on whether symbols repeat.
    let cb = Codebook::dcma_default();
    let cfg = DynamicConfig { admm: detection_cfg(), ..DynamicConfig::default() };
    let sys = SystemConfig { nr: 8, l: 3, activity_mode: ActivityMode::Case2b, p_stay: 1.0, ..SystemConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let h = assemble_channel_matrix(&ChannelRealization::draw(sys.j, sys.k, sys.nr, &mut rng));
    let frame = generate_frame(&sys, &cb, &mut rng).unwrap();
    let obs: Vec<CVec> = frame.x_slots.iter().map(|x| observe(&h, x, 0.0, &mut rng).unwrap()).collect();
    let est = detect_frame(&obs, std::slice::from_ref(&h), &cb, &cfg).unwrap();
    assert_eq!(est.case_label, CaseLabel::Case2b);
    for (l, s) in est.slots.iter().enumerate() {
        assert_eq!(s.support, frame.supports[l]);
        assert_eq!(s.symbols, frame.symbols[l]);
    }
}
