use tollsim_core::pricing::SchemeKind;
use tollsim_core::scenario::{stages, ArtifactStore, ScenarioConfig};

#[test]
fn staged_run_writes_verified_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let store = ArtifactStore::open(dir.path()).unwrap();
    let cfg = ScenarioConfig::tiny();
    stages::synth(&cfg, &store).unwrap();
    let cfg = stages::stored_config(&store, &Default::default()).unwrap();
    assert_eq!(cfg, ScenarioConfig::tiny());

    // Later stages refuse to start before their inputs exist.
    assert!(stages::design(&cfg, &store).is_err());
    let (base, eval) = stages::baseline(&cfg, &store).unwrap();
    assert_eq!(base.changes.len(), cfg.learning.iterations);
    assert_eq!(eval.accessibility.len(), cfg.city.n_individuals as usize);

    let design = stages::design(&cfg, &store).unwrap();
    assert_eq!(design.schemes.len(), 3);
    let (run, _) = stages::run(&cfg, &store, SchemeKind::Distance).unwrap();
    assert_eq!(run.scheme.kind, SchemeKind::Distance);
    let report = stages::report(&cfg, &store).unwrap();
    assert_eq!(report.len(), 1);
    for f in ["report/welfare.csv", "report/groups.csv", "report/indicators.csv", "report/summary.json"] {
        assert!(store.contains(f).unwrap(), "{f} missing");
    }
    let welfare = std::fs::read_to_string(store.path("report/welfare.csv")).unwrap();
    assert!(welfare.starts_with("scheme,component,value"));
    assert!(welfare.contains("distance,social_welfare,"));

    // An edited upstream artifact is caught by the next stage.
    let p = store.path(stages::SYNTHESIS);
    let mut bytes = std::fs::read(&p).unwrap();
    bytes.push(b' ');
    std::fs::write(&p, bytes).unwrap();
    let err = stages::run(&cfg, &store, SchemeKind::Cordon).unwrap_err();
    assert!(err.to_string().contains("manifest hash"), "{err}");
}

#[test]
fn baseline_is_reproducible() {
    let cfg = ScenarioConfig::tiny();
    let syn = tollsim_core::scenario::synthesize(&cfg).unwrap();
    let a = tollsim_core::scenario::run_scenario(&cfg, &syn, &tollsim_core::pricing::TollScheme::none()).unwrap();
    let b = tollsim_core::scenario::run_scenario(&cfg, &syn, &tollsim_core::pricing::TollScheme::none()).unwrap();
    assert_eq!(a.day.trajectories, b.day.trajectories);
    assert_eq!(a.patterns, b.patterns);
    assert_eq!(a.freight, b.freight);
}
