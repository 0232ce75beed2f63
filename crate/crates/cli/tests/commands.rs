use cusign_cli::commands::{self, StatOptions};
use cusign_cli::reference;
use cusign_cli::CliError;
use cusign_core::chi2::{reference_for_probability, ChiSquareContext};
use cusign_core::cusign::CusignConfig;
use cusign_core::montecarlo::{chi_square_samples, estimator_stats, theta_from_variance};
use cusign_core::stats::RunningStats;
use cusign_core::ugv::ScenarioConfig;

fn configs() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn validate_passes_quickly() {
    let report = commands::validate().unwrap();
    assert!(report.passed(), "{:?}", report.failures());
    let elapsed = report.details["elapsed_ms"].as_f64().unwrap();
    assert!(elapsed < 1_000.0, "{elapsed} ms");
}

#[test]
fn corrupted_theta_table_is_named() {
    let corrupt = |tau: u32| -> Result<f64, CliError> {
        Ok(if tau == 2 {
            1.0
        } else {
            reference::THETA_COEFFICIENTS[tau as usize - 1]
        })
    };
    let report = commands::validate_with(&corrupt).unwrap();
    assert!(!report.passed());
    let failures = report.failures();
    assert!(
        failures.contains(&"theta/coefficient tau=2".to_string()),
        "{failures:?}"
    );
    assert!(
        failures.iter().any(|f| f.starts_with("detection_bounds/")),
        "{failures:?}"
    );
    assert!(!failures.iter().any(|f| f.starts_with("riccati/")));
}

#[test]
fn too_few_samples_is_a_usage_error() {
    for samples in [0, 9_999] {
        let opts = StatOptions {
            samples,
            ..StatOptions::default()
        };
        let err = commands::table2(&opts).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn table2_rows_carry_targets() {
    let report = commands::table2(&StatOptions::default()).unwrap();
    assert!(report.passed(), "{:?}", report.failures());
    let row = report.find("analytic", "tau=1").unwrap();
    assert_eq!(row.measured, 0.5);
    let sim = report.find("simulated", "tau=3 plus").unwrap();
    assert!(sim.expected.is_some() && sim.tolerance == Some(0.002));
}

#[test]
fn theta_and_appendix_pass_at_half() {
    let opts = StatOptions::default();
    let (theta, hist) = commands::theta(&opts, true).unwrap();
    assert!(theta.passed(), "{:?}", theta.failures());
    assert_eq!(hist.len(), 4);
    let total: u64 = hist[1].histogram.counts.iter().sum();
    assert_eq!(total as usize, opts.samples - 10 * opts.window as usize);

    let appendix = commands::appendix(&opts).unwrap();
    assert!(appendix.passed(), "{:?}", appendix.failures());
    let row = appendix.find("mean", "tau=2 p=0.6").unwrap();
    assert!(row.pass.is_none());
    assert!((row.measured - 0.2250).abs() < 0.002);
}

/// θ from non-overlapping batches, returning (mean, standard error).
fn batched_theta(seed: u64, batches: usize, per_batch: usize) -> (f64, f64) {
    let chi = ChiSquareContext::new(3, reference_for_probability(3, 0.5).unwrap()).unwrap();
    let cfg = CusignConfig::new(2, &chi, 100, 3.0).unwrap();
    let samples = chi_square_samples(3, batches * per_batch, seed);
    let thetas: RunningStats = samples
        .chunks(per_batch)
        .map(|chunk| {
            let st = estimator_stats(chunk, &cfg, 1_000, false);
            theta_from_variance(st.plus.variance(), 1.0 / 6.0, 100)
        })
        .collect();
    (thetas.mean(), thetas.std_dev() / (batches as f64).sqrt())
}

#[test]
fn theta_is_reproducible_across_seeds() {
    let (a, se_a) = batched_theta(11, 10, 100_000);
    let (b, se_b) = batched_theta(12, 10, 100_000);
    assert!(
        (a - b).abs() < 2.0 * (se_a * se_a + se_b * se_b).sqrt(),
        "{a} ± {se_a} vs {b} ± {se_b}"
    );
}

#[test]
fn bundled_scenarios_pass() {
    for name in ["nominal", "persistent", "alternating"] {
        let cfg = commands::load_scenario(&configs().join(format!("{name}.toml"))).unwrap();
        let (report, trace) = commands::scenario(&cfg).unwrap();
        assert!(report.passed(), "{name}: {:?}", report.failures());
        assert_eq!(trace.records.len(), 20_000);
    }
}

#[test]
fn bundled_nominal_matches_defaults() {
    let cfg = commands::load_scenario(&configs().join("nominal.toml")).unwrap();
    assert_eq!(cfg, ScenarioConfig::default());
}

#[test]
fn scenario_config_round_trips_through_toml() {
    let cfg = commands::load_scenario(&configs().join("alternating.toml")).unwrap();
    let text = toml::to_string(&cfg).unwrap();
    let back: ScenarioConfig = toml::from_str(&text).unwrap();
    assert_eq!(cfg, back);
}

#[test]
fn bad_config_reports_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = 1\nduration = 200.0\nsidelength = 5.0\n").unwrap();
    let err = commands::load_scenario(&path).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(msg.contains("line 3"), "{msg}");
    assert!(msg.contains("sidelength"), "{msg}");
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.toml");
    std::fs::write(&path, "duration = -1.0\n").unwrap();
    assert!(matches!(
        commands::load_scenario(&path),
        Err(CliError::Config { .. })
    ));
}
