use orthoseries::coefficients::tandori_blocks;
use orthoseries::majorants::chaining_diagnostics;
use orthoseries::verify::{check_eq24, check_lemma1, check_theorem1, run_suite, CheckId, TrialConfig};
use orthoseries::{generate, System, SystemKind, SystemSpec};

#[test]
fn majorant_bound_on_large_random_qr_ensemble() {
    let spec = SystemSpec::minimal(SystemKind::RandomQr, 256).with_seed(42);
    let cfg = TrialConfig::new(spec, 1000, 42, vec![CheckId::Lemma1]);
    let report = check_lemma1(&cfg).unwrap();
    let lemma = report.check(CheckId::Lemma1).unwrap();
    assert!(report.passed);
    assert_eq!(lemma.labels[0].evaluations, 1000);
    assert!(lemma.labels[0].worst_value < 1.0);
}

#[test]
fn chaining_bounds_on_rademacher_ensemble() {
    let cfg = TrialConfig::new(
        SystemSpec::minimal(SystemKind::Rademacher, 8),
        500,
        3,
        vec![CheckId::Thm1, CheckId::Eq15, CheckId::Eq20],
    );
    let report = check_theorem1(&cfg).unwrap();
    assert!(report.passed, "{:#?}", report.checks);
    assert_eq!(report.checks.len(), 3);
}

#[test]
fn small_random_qr_is_orthonormal() {
    let spec = SystemSpec::minimal(SystemKind::RandomQr, 8)
        .with_fiber_dim(2)
        .with_resolution(16)
        .with_seed(42);
    let sys: System<f64> = generate(&spec).unwrap();
    assert_eq!(sys.fibers.len(), 16);
    assert!(sys.validate(1e-10).unwrap().0);
}

#[test]
fn chaining_bounds_on_seeded_qr() {
    let spec = SystemSpec::minimal(SystemKind::RandomQr, 31)
        .with_resolution(64)
        .with_seed(7);
    let sys: System<f64> = generate(&spec).unwrap();
    let a: Vec<f64> = (1..=31).map(|n| 1.0 / n as f64).collect();
    let c = chaining_diagnostics(&sys, &a, 31).unwrap();
    for b in [c.bound_4, c.bound_15, c.bound_20] {
        assert!(b.holds(1e-12), "{b:?}");
    }
}

#[test]
fn block_length_arithmetic() {
    // 4 + 2 log2(nu (nu - 1)) <= 8 log2 nu, with nu = 4 giving 4 + 2 log2 12 against 16
    let lhs = 4.0 + 2.0 * 12f64.log2();
    assert!((lhs - 11.17).abs() < 5e-3);
    assert!(lhs <= 16.0);

    let mut cfg = TrialConfig::new(SystemSpec::minimal(SystemKind::RandomQr, 16), 4, 9, vec![CheckId::Eq24]);
    cfg.n_shuffles = 4;
    let report = check_eq24(&cfg).unwrap();
    let eq24 = report.check(CheckId::Eq24).unwrap();
    assert!(report.passed);
    let stored = tandori_blocks(orthoseries::coefficients::MAX_TRUNCATION)
        .unwrap()
        .nu
        .len();
    assert_eq!(eq24.label("arithmetic").unwrap().evaluations, stored);
}

#[test]
fn default_config_passes() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.json")).unwrap();
    let mut cfg = TrialConfig::from_json(&text).unwrap();
    cfg.n_trials = 12;
    let report = run_suite(&cfg).unwrap();
    assert!(report.passed, "{}", report.to_json_without_timing().unwrap());
    assert_eq!(report.checks.len(), CheckId::ALL.len());
}
