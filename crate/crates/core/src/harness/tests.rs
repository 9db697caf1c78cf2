use super::*;
use crate::lattice::LatticeKind;

#[test]
fn torus_degeneracy_counts_commuting_classes() {
    assert_eq!(torus_ground_degeneracy(&load_group("Z2").unwrap()), 4);
    assert_eq!(torus_ground_degeneracy(&load_group("Z3").unwrap()), 9);
    assert_eq!(torus_ground_degeneracy(&load_group("S3").unwrap()), 8);
    assert_eq!(torus_ground_degeneracy(&load_group("D4").unwrap()), 22);
}

#[test]
fn check_ids_round_trip() {
    for id in CheckId::ALL {
        assert_eq!(id.name().parse::<CheckId>().unwrap(), id);
    }
    assert!("thm2".parse::<CheckId>().is_err());
}

#[test]
fn config_validation() {
    let mut cfg = ExperimentConfig::full_suite();
    cfg.validate().unwrap();
    cfg.lambda_grid = vec![0.02, 0.01];
    assert!(cfg.validate().is_err());
    cfg.lambda_grid = vec![0.0, 0.01];
    assert!(cfg.validate().is_err());
    cfg.lambda_grid = DEFAULT_LAMBDA_GRID.to_vec();
    cfg.order = 9;
    assert!(cfg.validate().is_err());
    cfg.order = 6;
    cfg.checks.push("prop1".into());
    assert!(cfg.validate().is_err());
    assert!(ExperimentConfig::from_json(r#"{"checks": ["prop1"], "colour": 1}"#).is_err());
}

#[test]
fn config_json_defaults() {
    let cfg = ExperimentConfig::from_json(r#"{"checks": ["prop1"], "group": "Z2", "lattice": "square"}"#).unwrap();
    assert_eq!(cfg.lambda_grid, DEFAULT_LAMBDA_GRID.to_vec());
    assert_eq!(cfg.order, 6);
    assert_eq!(cfg.tolerances, Tolerances::default());
    assert_eq!(cfg.lattice, Some(LatticeKind::Square));
}

#[test]
fn lambda_grid_parsing() {
    assert_eq!(parse_lambda_grid("0.01, 0.02,0.04").unwrap(), vec![0.01, 0.02, 0.04]);
    assert!(parse_lambda_grid("0.01,x").is_err());
    assert!(parse_lambda_grid("").is_err());
}

#[test]
fn unknown_check_is_invalid_argument() {
    let cfg = ExperimentConfig {
        checks: vec!["nope".into()],
        ..Default::default()
    };
    assert_eq!(run_suite(&cfg).unwrap_err().kind(), "invalid-argument");
}

#[test]
fn empty_suite_passes() {
    let report = run_suite(&ExperimentConfig::default()).unwrap();
    assert!(report.records.is_empty());
    assert!(report.all_pass());
    assert_eq!(csv_string(&report), "name,value,threshold,pass,seconds\n");
}

#[test]
fn prop1_narrowed_scope() {
    let mut cfg = ExperimentConfig::single(CheckId::Prop1);
    cfg.group = Some("Z2".into());
    cfg.lattice = Some(LatticeKind::Square);
    let r = run_check(CheckId::Prop1, &cfg).unwrap();
    assert!(r.pass);
    assert_eq!(r.rows.len(), 2);
    assert!(r.value <= 1e-12);
}

#[test]
fn hqd_spectrum_z2() {
    let s = hqd_spectrum("Z2", LatticeKind::Square, Some("2x2"), 8, 1e-8).unwrap();
    assert_eq!(s.dim, 256);
    assert!((s.ground().energy + 8.0).abs() < 1e-10);
    assert_eq!(s.ground().degeneracy, 4);
    assert!((s.levels[1].energy + 6.0).abs() < 1e-10);
}

#[test]
fn group_levels_marks_cut_level() {
    let pairs = crate::linop::EigenPairs {
        energies: vec![0.0, 0.0, 1.0],
        states: Vec::new(),
        next_energy: Some(1.0),
        max_residual: 0.0,
    };
    let levels = group_levels(&pairs, 1e-8);
    assert_eq!(levels.len(), 2);
    assert!(levels[0].complete);
    assert!(!levels[1].complete);
}

fn sample_report() -> Report {
    let rows = vec![
        Row::info("lambda=0.01", 1e-10).at_lambda(0.01),
        Row::info("lambda=0.02", 2e-9).at_lambda(0.02),
        Row::test("slope", 5.0, Comparison::AtLeast, 4.5),
        Row::test("residual", 3e-11, Comparison::AtMost, 1e-10),
    ];
    Report {
        records: vec![
            CheckRecord::from_rows("sweep", rows, 0.5),
            CheckRecord::from_rows("exact", vec![Row::test("count", 2.0, Comparison::Equal, 2.0)], 0.0),
            CheckRecord::from_rows("failing", vec![Row::test("r", 1.0, Comparison::AtMost, 1e-10)], 0.0),
        ],
        environment: Environment::current(0, Tolerances::default()),
    }
}

#[test]
fn record_headline_is_worst_margin() {
    let r = sample_report();
    assert_eq!(r.records[0].value, 5.0);
    assert!(r.records[0].pass);
    assert!(!r.records[2].pass);
    assert!(!r.all_pass());
}

#[test]
fn csv_layout() {
    let text = csv_string(&sample_report());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 + 3);
    assert_eq!(lines[0], "name,value,threshold,pass,seconds");
    assert!(lines[1].starts_with("sweep/lambda=0.01,1.00000000000e-10,"));
    assert!(lines[3].starts_with("sweep,5.00000000000e0,4.50000000000e0,true,"));
    assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
    assert_eq!(sweep_csv_string(&sample_report()).lines().count(), 3);
}

#[test]
fn outputs_are_atomic_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let report = sample_report();
    let p = dir.path().join("r.csv");
    emit_csv(&report, &p).unwrap();
    let first = std::fs::read(&p).unwrap();
    emit_csv(&report, &p).unwrap();
    assert_eq!(first, std::fs::read(&p).unwrap());
    let j = dir.path().join("r.json");
    report.write_json(&j).unwrap();
    assert_eq!(read_report(&j).unwrap(), report);
    let bad = dir.path().join("missing").join("r.csv");
    assert_eq!(emit_csv(&report, &bad).unwrap_err().kind(), "io-error");
}

#[test]
fn gadget_config_modes() {
    let cfg = GadgetConfig::from_json(r#"{"group": "Z2", "lattice": "square", "mode": "pair"}"#).unwrap();
    let inst = GadgetInstance::from_config(&cfg).unwrap();
    assert_eq!(inst.gadget.layout().total_dim(), 4096);
    assert_eq!(inst.gadget.clock_count(), 2);
    let full = GadgetConfig {
        size: Some("2x2".into()),
        mode: GadgetMode::Full,
        ..Default::default()
    };
    assert_eq!(GadgetInstance::from_config(&full).unwrap_err().kind(), "resource-limit");
}

#[test]
fn bloch_report_square_plaquette() {
    let inst = GadgetInstance::single("Z2", LatticeKind::Square, None, crate::lattice::Site::Plaquette(0)).unwrap();
    let r = bloch_report(&inst, 4, &DEFAULT_LAMBDA_GRID, &Tolerances::default()).unwrap();
    assert!(r.pass);
    assert_eq!(r.orders.len(), 4);
    assert!(r.algebraic.is_some());
    // odd orders vanish on a single clock with n = 4
    assert!(r.orders[0].a_norm < 1e-12 && r.orders[2].a_norm < 1e-12);
    assert!(r.orders[3].a_norm > 1.0);
    let short = bloch_report(&inst, 3, &DEFAULT_LAMBDA_GRID, &Tolerances::default()).unwrap();
    assert!(short.algebraic.is_none());
}

#[test]
fn suite_is_deterministic() {
    let cfg = ExperimentConfig {
        checks: vec!["hqd-spectrum".into(), "combinatorics".into(), "thm1-exact".into()],
        ..Default::default()
    };
    let a = run_suite(&cfg).unwrap();
    let b = run_suite(&cfg).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.pass, y.pass);
        assert!((x.value - y.value).abs() <= 1e-12);
    }
}
