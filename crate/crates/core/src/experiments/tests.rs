use super::*;
use proptest::prelude::*;

fn minimal(kind: &str) -> String {
    format!(r#"{{"schema_version": 1, "experiment": "{kind}"}}"#)
}

/// Two bumps either side of the origin between one-particle packets.
fn wedge_config(vartheta: f64, right_center: [f64; 2]) -> String {
    format!(
        r#"{{
        "schema_version": 1,
        "experiment": "wedge_locality",
        "theta": {{"vartheta_e": {vartheta}}},
        "functions": {{
            "f1": {{"kind": "bump", "center": [0.0, 1.5], "radius": 0.3}},
            "f2": {{"kind": "bump", "center": [{}, {}], "radius": 0.3}},
            "h": {{"kind": "gaussian", "center": [0.0, 0.3], "widths": [1.0, 1.0], "momentum": [0.0, 0.5]}},
            "g": {{"kind": "gaussian", "center": [0.2, -0.4], "widths": [1.0, 1.0], "momentum": [0.0, -0.3]}}
        }},
        "bra": ["h"],
        "left": "f1",
        "right": "f2",
        "ket": ["g"]
    }}"#,
        right_center[0], right_center[1]
    )
}

#[test]
fn config_defaults_and_validation() {
    let c = ExperimentConfig::from_json(&minimal("star_checks")).unwrap();
    assert_eq!((c.dim, c.mass, c.tolerance, c.seed), (2, 1.0, 0.01, 0));
    assert_eq!(c.theta, ThetaDescriptor::default());
    assert!(c.check_doubling);
    assert!(ExperimentConfig::from_json(r#"{"schema_version": 2, "experiment": "star_checks"}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"schema_version": 1, "experiment": "nope"}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"schema_version": 1, "experiment": "star_checks", "extra": 1}"#).is_err());
    let unknown = r#"{"schema_version": 1, "experiment": "decay_scan", "left": "f"}"#;
    assert!(matches!(ExperimentConfig::from_json(unknown), Err(Error::Config(_))));
    let wrong_dim = r#"{"schema_version": 1, "experiment": "decay_scan",
        "functions": {"f": {"kind": "gaussian", "center": [0, 0, 0, 0], "widths": [1, 1, 1, 1]}}}"#;
    assert!(matches!(ExperimentConfig::from_json(wrong_dim), Err(Error::Config(_))));
}

#[test]
fn missing_carrier_is_filled_in() {
    let json = r#"{"schema_version": 1, "experiment": "decay_scan",
        "functions": {"f": {"kind": "gaussian", "center": [0, 0], "widths": [1, 1]}}}"#;
    let c = ExperimentConfig::from_json(json).unwrap();
    let TestFunction::Gaussian(g) = c.function("f").unwrap() else { panic!() };
    assert_eq!(g.carrier, vec![0.0, 0.0]);
}

#[test]
fn boosted_theta_is_unchanged_in_two_dimensions() {
    let d = ThetaDescriptor { vartheta_e: 0.7, vartheta_m: 0.0, rapidity: 0.9 };
    let t = d.theta(2).unwrap();
    assert!((t.get(0, 1) - 0.7).abs() < 1e-12);
    assert!(d.wedge(2).unwrap().contains(&MinkowskiVector::d2(0.0, 1.0)));
}

#[test]
fn csv_layout() {
    let rows = [ScanPoint { lambda: 2.0, abs_u: 0.1, eps_quad: 1e-12 }];
    assert_eq!(csv_table(&rows), "lambda,abs_u,eps_quad\n2,0.10000000000000001,9.9999999999999998e-13\n");
    assert_eq!(suffixed("table.csv", "deformed"), "table_deformed.csv");
    assert_eq!(suffixed("table", "deformed"), "table_deformed");
}

#[test]
fn status_order_and_codes() {
    assert!(Status::Fail > Status::Inconclusive && Status::Inconclusive > Status::Pass);
    assert_eq!([Status::Pass, Status::Fail, Status::Inconclusive].map(|s| s.exit_code()), [0, 1, 2]);
}

#[test]
fn vacuum_contrast_is_not_resolved() {
    // two slots only: the twist drops out, so the control vanishes too
    let json = r#"{"schema_version": 1, "experiment": "wedge_locality",
        "functions": {"f1": {"kind": "bump", "center": [0.0, 1.5], "radius": 0.3},
                      "f2": {"kind": "bump", "center": [0.0, -1.5], "radius": 0.3}},
        "left": "f1", "right": "f2"}"#;
    let report = run(&ExperimentConfig::from_json(json).unwrap()).unwrap();
    assert_eq!(report.check("opposite_tags").unwrap().status, Status::Inconclusive);
    assert_eq!(report.check("same_tag_contrast").unwrap().status, Status::Fail);
    assert_eq!(report.status, Status::Fail);
}

#[test]
fn wedge_supports_are_checked_before_computing() {
    // right bump on the wrong side
    let cfg = ExperimentConfig::from_json(&wedge_config(1.0, [0.0, 1.0])).unwrap();
    assert!(matches!(run(&cfg), Err(Error::Config(_))));
    let gaussian = wedge_config(1.0, [0.0, -1.5]).replace(r#""kind": "bump", "center": [0.0, 1.5], "radius": 0.3"#, r#""kind": "gaussian", "center": [0.0, 1.5], "widths": [0.3, 0.3]"#);
    assert!(matches!(run(&ExperimentConfig::from_json(&gaussian).unwrap()), Err(Error::Config(_))));
}

#[test]
fn undeformed_wedge_run_uses_the_correlator_as_contrast() {
    // spacelike but not in opposite wedges
    let cfg = ExperimentConfig::from_json(&wedge_config(0.0, [0.3, -1.5])).unwrap();
    let report = run(&cfg).unwrap();
    assert_eq!(report.status, Status::Pass, "{:?}", report.checks);
    let c = report.check("opposite_tags").unwrap();
    assert!(c.contrast.unwrap() > 0.0 && c.value <= c.threshold);
    assert!(report.check("same_tag_contrast").is_none());
    assert!(report.check("translated").is_none());
    assert!(!report.notes.is_empty());
}

#[test]
fn wedge_run_passes_and_reports_the_contrast() {
    let mut cfg = ExperimentConfig::from_json(&wedge_config(1.0, [0.0, -1.5])).unwrap();
    cfg.translation = Some(vec![0.2, 0.5]);
    let report = run(&cfg).unwrap();
    assert_eq!(report.status, Status::Pass, "{:?}", report.checks);
    let same = report.check("same_tag_contrast").unwrap();
    assert!(same.value > 100.0 * same.eps_quad.unwrap());
    assert_eq!(report.check("opposite_tags").unwrap().contrast, Some(same.value));
    assert_eq!(report.elementary_length, 1.0);
}

fn decay_config(lambdas: &str) -> ExperimentConfig {
    let json = format!(
        r#"{{
        "schema_version": 1,
        "experiment": "decay_scan",
        "functions": {{
            "f1": {{"kind": "gaussian", "center": [0, 0], "widths": [0.3, 0.3]}},
            "f2": {{"kind": "gaussian", "center": [0, 0], "widths": [0.3, 0.3]}}
        }},
        "left": "f1",
        "right": "f2",
        "scan": {{"lambdas": {lambdas}, "direction": [0, -1]}},
        "check_doubling": false
    }}"#
    );
    ExperimentConfig::from_json(&json).unwrap()
}

#[test]
fn decay_scan_without_enough_signal_is_inconclusive() {
    let report = run(&decay_config("[6, 8, 10, 12, 14]")).unwrap();
    assert_eq!(report.status, Status::Inconclusive, "{:?}", report.tables[0].rows);
    assert!(matches!(report.fit("decay"), Some(FitOutcome::Inconclusive { .. })));
    assert_eq!(report.tables[0].rows.len(), 5);
}

#[test]
fn decay_scan_requires_spacelike_direction() {
    let mut cfg = decay_config("[1, 2, 3, 4]");
    cfg.scan.as_mut().unwrap().direction = vec![1.0, 0.5];
    assert!(matches!(run(&cfg), Err(Error::Config(_))));
}

#[test]
fn locality_experiments_reject_four_dimensions() {
    let cfg = ExperimentConfig::from_json(r#"{"schema_version": 1, "experiment": "star_checks", "dim": 4, "theta": {"vartheta_m": 1.0}}"#).unwrap();
    assert!(matches!(run(&cfg), Err(Error::Config(_))));
}

#[test]
fn support_shift_is_linear_in_theta() {
    let one = checks::support_shift(&ThetaMatrix::d2(1.0)).unwrap();
    let two = checks::support_shift(&ThetaMatrix::d2(2.0)).unwrap();
    assert_eq!(one.status, Status::Pass);
    assert_eq!(two.status, Status::Pass);
    assert!((two.contrast.unwrap() / one.contrast.unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn space_checks_pass_in_both_dimensions() {
    for dim in [2, 4] {
        let json = format!(r#"{{"schema_version": 1, "experiment": "space_checks", "dim": {dim}, "theta": {{"vartheta_e": 0.8, "vartheta_m": 0.4, "rapidity": -0.7}}, "seed": 3}}"#);
        let report = run(&ExperimentConfig::from_json(&json).unwrap()).unwrap();
        assert_eq!(report.status, Status::Pass, "{:?}", report.checks);
    }
}

#[test]
fn report_round_trips_through_files() {
    let cfg = ExperimentConfig::from_json(r#"{"schema_version": 1, "experiment": "space_checks", "output": {"report": "r.json", "table": "t.csv"}}"#).unwrap();
    let report = run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = report.write(dir.path()).unwrap();
    assert_eq!(written, vec![dir.path().join("r.json")]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&written[0]).unwrap()).unwrap();
    assert_eq!(v["experiment"], "space_checks");
    assert_eq!(v["checks"].as_array().unwrap().len(), report.checks.len());
    assert_eq!(report.to_json().unwrap(), run(&cfg).unwrap().to_json().unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn lambda_lists_must_increase(lambdas in prop::collection::vec(0.0f64..10.0, 1..8)) {
        let json = format!(
            r#"{{"schema_version": 1, "experiment": "decay_scan", "scan": {{"lambdas": {}, "direction": [0, 1]}}}}"#,
            serde_json::to_string(&lambdas).unwrap()
        );
        let increasing = lambdas.windows(2).all(|w| w[1] > w[0]);
        prop_assert_eq!(ExperimentConfig::from_json(&json).is_ok(), increasing);
    }

    #[test]
    fn report_status_is_the_worst_check(statuses in prop::collection::vec(0u8..3, 1..6)) {
        let cfg = ExperimentConfig::from_json(r#"{"schema_version": 1, "experiment": "space_checks"}"#).unwrap();
        let mut report = Report::new(&cfg).unwrap();
        for (i, s) in statuses.iter().enumerate() {
            let mut c = Check::new(&format!("c{i}"), true, 0.0, 0.0, "");
            c.status = [Status::Pass, Status::Inconclusive, Status::Fail][*s as usize];
            report.checks.push(c);
        }
        let worst = report.checks.iter().map(|c| c.status).max().unwrap();
        prop_assert_eq!(report.finish().status, worst);
    }
}

#[test]
fn undeformed_decay_scan_is_identically_zero() {
    // equal-time real packets: the free commutator is odd in time and drops out
    let mut cfg = decay_config("[2, 3, 4, 5, 6]");
    cfg.theta.vartheta_e = 0.0;
    let report = run(&cfg).unwrap();
    assert_eq!(report.status, Status::Pass);
    assert!(report.check("identically_zero").is_some());
    assert!(report.tables[0].rows.iter().all(|p| p.abs_u <= p.eps_quad));
}
