use heralink::config::*;
use heralink::Error;

const BUNDLED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/published-defaults.json");

fn defaults_json() -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(BUNDLED).unwrap()).unwrap()
}

fn error_path(v: &serde_json::Value) -> String {
    match ScenarioConfig::<f64>::from_json_str(&v.to_string()) {
        Err(Error::Scenario { path, .. }) => path,
        other => panic!("expected a scenario error, got {other:?}"),
    }
}

#[test]
fn bundled_scenario_equals_built_in_defaults() {
    let loaded = ScenarioConfig::<f64>::load(BUNDLED).unwrap();
    assert_eq!(loaded, ScenarioConfig::published_defaults());
}

#[test]
fn unknown_keys_are_reported_with_their_path() {
    let mut v = defaults_json();
    v["timing"]["warp_factor"] = 9.into();
    assert!(error_path(&v).starts_with("timing"));
    let mut v = defaults_json();
    v["extra_section"] = serde_json::json!({});
    let _ = error_path(&v);
}

#[test]
fn wrong_types_and_missing_keys_are_reported() {
    let mut v = defaults_json();
    v["run"]["cycles"] = "many".into();
    assert!(error_path(&v).starts_with("run.cycles"));
    let mut v = defaults_json();
    v["memory_b"].as_object_mut().unwrap().remove("decay");
    assert!(error_path(&v).starts_with("memory_b"));
}

#[test]
fn out_of_range_values_name_the_field() {
    let mut v = defaults_json();
    v["bsm_detectors"]["efficiency"] = 1.5.into();
    assert_eq!(error_path(&v), "bsm_detectors.efficiency");
    let mut v = defaults_json();
    v["memory_a"]["end_to_end_efficiency"] = 0.2.into();
    assert!(error_path(&v).starts_with("memory_a"));
}

#[test]
fn cross_section_inconsistencies_are_rejected() {
    let mut v = defaults_json();
    v["timing"]["storage_time_ns"] = 60.0.into();
    assert!(ScenarioConfig::<f64>::from_json_str(&v.to_string()).is_err());
    let mut v = defaults_json();
    v["run"]["modes"] = 8.into();
    assert!(error_path(&v).contains("modes"));
    let mut v = defaults_json();
    v["schema_version"] = 99.into();
    assert_eq!(error_path(&v), "schema_version");
}

#[test]
fn calibration_section_is_optional() {
    let mut v = defaults_json();
    v.as_object_mut().unwrap().remove("calibration");
    let sc = ScenarioConfig::<f64>::from_json_str(&v.to_string()).unwrap();
    let resolved = sc.resolve().unwrap();
    assert_eq!(resolved.source_a, sc.source_a);
}

#[test]
fn calibrated_sources_hit_targets() {
    let sc = ScenarioConfig::<f64>::published_defaults();
    let r = sc.resolve().unwrap();
    let g2 = heralink::sources::g2_cross_correlation(&r.source_a, sc.arm_detectors(&r.source_a), 2.0).unwrap().g2;
    assert!((g2 - 50.0).abs() < 1e-6);
    let rho = heralink::sources::postselected_source_rho(&r.source_b).unwrap().rho;
    assert!((heralink::analysis::fidelity_phi_plus(&rho).unwrap() - 0.933).abs() < 1e-9);
}
