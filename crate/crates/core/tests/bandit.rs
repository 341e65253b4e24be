use combimots::bandit::{
    check_failure_decay, check_log_bound, run_bandit_seeds, BanditInstance, BanditOptions,
    LOG_FIT_WINDOW,
};
use combimots::engine::SelectionPolicy;

fn traces(
    instance: &BanditInstance,
    horizon: usize,
    seeds: u64,
) -> Vec<combimots::bandit::RegretTrace> {
    run_bandit_seeds(
        instance,
        &SelectionPolicy::Pareto,
        horizon,
        0..seeds,
        &BanditOptions::default(),
    )
    .unwrap()
}

#[test]
fn dominated_arm_logarithmic_optimal_arms_linear() {
    let instance = BanditInstance::dominated_arm();
    let runs = traces(&instance, 30_000, 40);
    let report = check_log_bound(&runs, &instance, LOG_FIT_WINDOW).unwrap();
    assert!(report.passed);
    let dominated = &report.arms[2];
    assert!(dominated.dominated && dominated.log_preferred);
    assert!(dominated.log_fit.r2 > dominated.linear_fit.r2);
    for optimal in &report.arms[..2] {
        assert!(!optimal.dominated);
        assert!(optimal.linear_fit.r2 > optimal.log_fit.r2, "{optimal:?}");
    }
    for t in &runs {
        assert_eq!(t.counts.iter().sum::<u64>(), 30_000);
    }
}

#[test]
fn smaller_gap_larger_log_coefficient() {
    let wide = BanditInstance::with_gap(0.4).unwrap();
    let narrow = BanditInstance::with_gap(0.1).unwrap();
    let fit = |i: &BanditInstance| {
        let r = check_log_bound(&traces(i, 20_000, 40), i, (1_000, 20_000)).unwrap();
        r.arms[1].log_fit.slope
    };
    let (a_wide, a_narrow) = (fit(&wide), fit(&narrow));
    assert!(a_narrow > a_wide, "narrow {a_narrow} wide {a_wide}");
}

#[test]
fn larger_gap_decays_faster() {
    let slope = |gap: f64| {
        let i = BanditInstance::with_gap(gap).unwrap();
        check_failure_decay(&traces(&i, 10_000, 100), &i)
            .unwrap()
            .slope
            .unwrap()
    };
    let (steep, shallow) = (slope(0.4), slope(0.1));
    assert!(steep < shallow, "0.4 -> {steep}, 0.1 -> {shallow}");
}

#[test]
fn all_optimal_never_fails() {
    let instance = BanditInstance::all_optimal();
    let runs = traces(&instance, 1_000, 100);
    let report = check_failure_decay(&runs, &instance).unwrap();
    assert!(report.passed);
    assert_eq!(report.initial, 0.0);
    assert!(report.points.iter().all(|p| p.probability == 0.0));
    assert!(check_log_bound(&runs, &instance, (10, 1_000)).is_err());
}

#[test]
fn instances_roundtrip_through_json() {
    let text = r#"{"name":"custom","means":[[0.8,0.2],[0.1,0.1]],"noise":0.0,"drift":{"amplitude":0.1,"decay":0.5}}"#;
    let instance: BanditInstance = serde_json::from_str(text).unwrap();
    instance.validate().unwrap();
    assert_eq!(instance.exploration, 1.0);
    assert_eq!(instance.pareto_optimal(), vec![true, false]);
    let back: BanditInstance =
        serde_json::from_str(&serde_json::to_string(&instance).unwrap()).unwrap();
    assert_eq!(back, instance);
}
