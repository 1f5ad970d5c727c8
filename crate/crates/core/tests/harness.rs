use mcdiff::detectors::DetectorKind;
use mcdiff::harness::{
    binomial_estimate, monte_carlo, rows_table, run_ber_point, run_figure_sweep, run_point_with, EvalSpec,
    ExperimentConfig, Extras, Figure, MoleculeGrid,
};
use proptest::prelude::*;

fn config() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{
            "schema_version": 1,
            "topology": {"r0": 15.0, "rr": 5.0, "diffusion": 100.0},
            "rate_ratio": 0.5,
            "samples_per_symbol": 5,
            "memory": 4,
            "window": 2,
            "orders": [0, 1],
            "molecules": [1e4, 1e5],
            "snr_db": 10.0,
            "detectors": ["fstd", "matd", "banded-mlsd", "mlda", "ftd"],
            "bit_budget": 50000,
            "block_symbols": 500,
            "seed": 11,
            "gamma_policy": "optimize-empirical",
            "calibration_bits": 20000
        }"#,
    )
    .unwrap()
}

#[test]
fn no_molecules_gives_coin_flip() {
    let mut cfg = config();
    cfg.target_errors = 10_000;
    cfg.bit_budget = 40_000;
    for kind in [
        DetectorKind::Fstd,
        DetectorKind::Matd,
        DetectorKind::BandedMlsd,
        DetectorKind::Mlda,
    ] {
        let r = run_ber_point(&cfg, kind, 1, 0.0).unwrap();
        assert!(r.bits_simulated >= 10_000);
        assert!((r.ber - 0.5).abs() < 3.0 * r.std_error.max(1e-3), "{kind}: {}", r.ber);
    }
}

#[test]
fn noiseless_sequence_detectors_make_no_errors() {
    let mut cfg = config();
    cfg.memory = 4;
    cfg.window = 4;
    cfg.warmup_symbols = Some(0);
    let mut mc = monte_carlo(&cfg);
    mc.noiseless = true;
    mc.bit_budget = 20_000;
    let specs: Vec<EvalSpec> = [DetectorKind::BandedMlsd, DetectorKind::Mlda]
        .iter()
        .flat_map(|&k| (0..2).map(move |m| EvalSpec::new(k, m, 4)))
        .collect();
    for row in run_point_with(&cfg, 1e7, &specs, Extras::default(), mc).unwrap() {
        assert_eq!(row.record.bit_errors, 0, "{:?}", row.record);
        assert_eq!(row.record.bits_simulated, 20_000);
    }
}

#[test]
fn sweeps_are_reproducible_across_worker_counts() {
    let cfg = config();
    let csv = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| rows_table(&run_figure_sweep(&cfg, Figure::Fig8).unwrap(), false).to_csv_string())
    };
    let one = csv(1);
    assert_eq!(one, csv(1));
    assert_eq!(one, csv(4));
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(
        one,
        rows_table(&run_figure_sweep(&other, Figure::Fig8).unwrap(), false).to_csv_string()
    );
}

#[test]
fn std_error_matches_counts_exactly() {
    for row in run_figure_sweep(&config(), Figure::Fig8).unwrap() {
        let r = row.record;
        assert_eq!((r.ber, r.std_error), binomial_estimate(r.bit_errors, r.bits_simulated));
        // Stopped by the error target or the bit budget.
        assert!(r.bit_errors >= 100 || r.bits_simulated >= 50_000);
    }
}

#[test]
fn block_length_does_not_bias_estimates() {
    let mut cfg = config();
    cfg.memory = 10;
    cfg.window = 3;
    cfg.molecules = MoleculeGrid::Values(vec![1e5]);
    cfg.target_errors = u64::MAX;
    cfg.bit_budget = 300_000;
    let run = |block: usize| {
        let mut c = cfg.clone();
        c.block_symbols = block;
        run_figure_sweep(&c, Figure::Fig8).unwrap()
    };
    let (short, long) = (run(1_000), run(10_000));
    for (a, b) in short.iter().zip(&long) {
        let (a, b) = (&a.record, &b.record);
        assert_eq!((a.detector, a.m), (b.detector, b.m));
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.ber - b.ber).abs() <= 3.0 * se.max(1e-6), "{a:?} vs {b:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binomial_estimate_is_bounded(bits in 1u64..10_000_000, frac in 0.0f64..=1.0) {
        let errors = (bits as f64 * frac) as u64;
        let (p, se) = binomial_estimate(errors, bits);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(se >= 0.0 && se <= 0.5 / (bits as f64).sqrt() + 1e-15);
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), budget in 10_000u64..1_000_000_000, snr in -10.0f64..30.0) {
        let mut cfg = config();
        cfg.seed = seed;
        cfg.bit_budget = budget;
        cfg.snr_db = snr;
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
