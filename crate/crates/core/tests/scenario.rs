use cusign_core::attack::AttackKind;
use cusign_core::ugv::{run_scenario, AttackSettings, ScenarioConfig};

fn attacked(kind: AttackKind) -> ScenarioConfig {
    ScenarioConfig {
        attack: AttackSettings::relative(kind, 10_000, 0.1),
        ..ScenarioConfig::default()
    }
}

#[test]
fn nominal_run_is_quiet() {
    let trace = run_scenario(&ScenarioConfig::default()).unwrap();
    let summary = trace.summary();
    assert_eq!(trace.records.len(), 20_000);
    assert!(summary.nominal_cusign_detection_fraction <= 0.01, "{summary:?}");
    assert!(summary.waypoint_switches >= 16, "{summary:?}");
}

#[test]
fn identical_configs_give_identical_traces() {
    let cfg = ScenarioConfig {
        duration: 20.0,
        ..attacked(AttackKind::StealthyPersistent)
    };
    assert_eq!(run_scenario(&cfg).unwrap(), run_scenario(&cfg).unwrap());
}

#[test]
fn attack_does_not_change_the_past() {
    let nominal = run_scenario(&ScenarioConfig::default()).unwrap();
    let attacked = run_scenario(&attacked(AttackKind::StealthyPersistent)).unwrap();
    assert_eq!(nominal.records[..10_000], attacked.records[..10_000]);
    assert_ne!(nominal.records[10_000].y, attacked.records[10_000].y);
}

#[test]
fn stealthy_persistent_pins_the_test_measure() {
    let trace = run_scenario(&attacked(AttackKind::StealthyPersistent)).unwrap();
    let z = (0.1 * 2.3226_f64).powi(2);
    for rec in &trace.records[10_000..] {
        assert!((rec.z - z).abs() < 1e-9, "k={} z={}", rec.k, rec.z);
        assert_eq!(rec.c, 0.0);
        assert!(rec.s_minus <= 0);
    }
    let summary = trace.summary();
    let first = summary.cusign_first_detection_after_onset.unwrap();
    assert!(first - 10_000 <= 2_000, "{summary:?}");
    assert_eq!(summary.cusum_first_detection_after_onset, None);
}

#[test]
fn alternating_attack_is_detected_by_cusign_only() {
    let trace = run_scenario(&attacked(AttackKind::StealthyAlternating)).unwrap();
    let summary = trace.summary();
    assert!(
        summary.cusign_first_detection_after_onset.unwrap() - 10_000 <= 5_000,
        "{summary:?}"
    );
    assert_eq!(summary.cusum_first_detection_after_onset, None);
    println!("{summary:#?}");
}
