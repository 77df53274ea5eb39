use satsec_py::{default_config_json, solve_instance};

#[test]
fn preset_json_parses_back() {
    let text = default_config_json("q").unwrap();
    let spec = satsec::config::ExperimentSpec::from_json(&text).unwrap();
    assert_eq!(spec.sweep, satsec::config::SweepVar::Q);
    assert!(default_config_json("bogus").is_err());
}

#[test]
fn zf_instance_solves() {
    let text = default_config_json("p_b").unwrap();
    let (rate, margin, _) = solve_instance(&text, 0, "zf").unwrap();
    assert!(rate.is_finite() && rate >= 0.0);
    assert!(margin >= -1e-4);
    assert!(solve_instance(&text, 0, "mrt").is_err());
}
