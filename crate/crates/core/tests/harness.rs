//! Experiment runner behaviour through its public interface.

use jadd::harness::{
    aggregate, count_flops, read_slot_log_csv, run_convergence_trace, run_experiment, simulate, Detector,
    ExperimentSpec, FlopInputs,
};
use jadd::solvers::{gram_spectrum, smallest_admissible_rho, UpdateOrder};
use proptest::prelude::*;

fn detection_spec(detectors: Vec<Detector>, trials: usize) -> ExperimentSpec {
    let mut spec = ExperimentSpec { detectors, trials, ..ExperimentSpec::default() };
    spec.solver.rho = 1.0;
    spec.solver.reweight_iters = 1;
    spec
}

fn scratch_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("jadd-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn ser_does_not_increase_with_snr() {
    let spec = detection_spec(vec![Detector::FsjAdmmDcma], 1000);
    let res = simulate(&spec).unwrap();
    let sers: Vec<f64> = res.rows.iter().map(|r| r.ser).collect();
    assert_eq!(res.rows.iter().map(|r| r.snr_db).collect::<Vec<_>>(), spec.snr_grid);
    for w in res.rows.windows(2) {
        assert!(w[1].ser <= w[0].ser, "{sers:?}");
    }
}

#[test]
fn summary_is_recomputable_from_the_slot_log() {
    let dir = scratch_dir("log");
    let mut spec = detection_spec(vec![Detector::Bsp, Detector::DynamicAlg2, Detector::OracleAdmm], 20);
    spec.system.l = 4;
    spec.snr_grid = vec![6.0, 14.0];
    spec.delta_grid = vec![0.0, 0.05];
    spec.output_path = Some(dir.join("rows.csv"));
    spec.slot_log_path = Some(dir.join("slots.csv"));
    let res = run_experiment(&spec).unwrap();
    let log = read_slot_log_csv(std::fs::File::open(dir.join("slots.csv")).unwrap()).unwrap();
    let flops = spec.flop_inputs();
    let recomputed = aggregate(&log, spec.system.j, |n| count_flops(n.parse().unwrap(), &flops));
    assert_eq!(recomputed, res.rows);
    let text = std::fs::read_to_string(dir.join("rows.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "detector,snr_db,delta,ser,ser_se,ser_active,aer,support_exact_rate,mean_iterations,flops,trials,slots,failures"
    );
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
}

#[test]
fn trace_lagrangian_decreases_after_weights_freeze() {
    let dir = scratch_dir("trace");
    let mut spec = detection_spec(vec![Detector::FsjAdmmDcma], 1);
    spec.snr_grid = vec![10.0];
    spec.solver.order = UpdateOrder::ZFirst;
    spec.solver.reweight_iters = 5;
    spec.solver.eps_abs = 1e-12;
    spec.solver.eps_rel = 1e-12;
    spec.trace_path = Some(dir.join("trace.csv"));
    spec.solver.rho = 1e3;
    spec.solver.diagnostics = true;
    let (hist, rep) = run_convergence_trace(&spec).unwrap();
    assert_eq!(rep.rho_conditions_met, Some(true));
    assert!(hist.len() <= spec.solver.max_iter);
    let text = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(text.lines().count(), hist.len() + 1);
    for w in hist.windows(2).filter(|w| w[0].iteration > spec.solver.reweight_iters) {
        assert!(w[1].lagrangian <= w[0].lagrangian + 1e-9 * w[0].lagrangian.abs().max(1.0), "{w:?}");
    }
}

#[test]
fn smallest_admissible_rho_is_the_boundary() {
    use jadd::model::{assemble_channel_matrix, ChannelRealization};
    use rand::SeedableRng;
    let h = assemble_channel_matrix(&ChannelRealization::draw(8, 4, 2, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3)));
    let rho = smallest_admissible_rho(gram_spectrum(h.matrix()), 0.0);
    assert!(jadd::solvers::check_rho_conditions(&h, rho * 1.0001).all_pass());
    assert!(!jadd::solvers::check_rho_conditions(&h, rho * 0.99).all_pass());
}

#[test]
fn config_file_with_relative_codebook_path() {
    let dir = scratch_dir("cfg");
    jadd::model::Codebook::scma_default().write_file(dir.join("cb.txt")).unwrap();
    std::fs::write(
        dir.join("exp.cfg"),
        "system.codebook = cb.txt\nexperiment.detectors = fsj_admm_scma\nexperiment.trials = 3\nexperiment.snr_db = 10\n",
    )
    .unwrap();
    let spec = ExperimentSpec::from_file(dir.join("exp.cfg")).unwrap();
    assert_eq!(spec.codebook, jadd::model::Codebook::scma_default());
    assert_eq!(simulate(&spec).unwrap().rows.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rates_are_probabilities(seed in 0u64..1000, snr in -5.0f64..25.0, l in 1usize..4) {
        let mut spec = detection_spec(Detector::ALL.to_vec(), 4);
        spec.system.seed = seed;
        spec.system.l = l;
        spec.snr_grid = vec![snr];
        let res = simulate(&spec).unwrap();
        for r in &res.rows {
            for v in [r.ser, r.ser_active, r.aer, r.support_exact_rate] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert_eq!(r.slots, 4 * l);
            prop_assert!(r.aer <= r.ser + 1e-15);
        }
    }

    #[test]
    fn flops_grow_with_iteration_budget(j in 2u64..20, k in 1u64..8, nr in 1u64..6, t in 0u64..300, l in 1u64..8) {
        let f = FlopInputs { j, k, nr, t, l, s_l: 1, t_bsp: 5 };
        let g = FlopInputs { t: t + 1, ..f };
        for d in [Detector::OracleAdmm, Detector::FsjAdmmDcma, Detector::DynamicAlg2] {
            prop_assert!(count_flops(d, &g) > count_flops(d, &f));
        }
        prop_assert_eq!(count_flops(Detector::Bsp, &g), count_flops(Detector::Bsp, &f));
    }
}
