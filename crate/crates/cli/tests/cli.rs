//! End-to-end tests of the binary: exit codes, file handling, and the
//! subcommand surfaces.

use std::process::{Command, Output};

use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ballcurv"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn malformed_csv_exits_1_and_writes_no_report() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "0,1\n1,zzz\n").unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "report",
        "--matrix",
        input.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 1);
    assert!(!report_path.exists(), "no partial report may be written");
}

#[test]
fn invalid_metric_exits_2() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("nonmetric.csv");
    std::fs::write(&input, "0,5,1\n5,0,1\n1,1,0\n").unwrap();

    let out = run(&["validate", "--matrix", input.to_str().unwrap()]);
    assert_exit(&out, 2);
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["valid"], serde_json::json!(false));
    assert!(body["violations"].as_array().unwrap().iter().any(|v| {
        v["kind"] == "triangle_defect" && (v["defect"].as_f64().unwrap() - 3.0).abs() < 1e-12
    }));

    let report_path = dir.path().join("report.json");
    let out = run(&[
        "report",
        "--matrix",
        input.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
    assert!(!report_path.exists());
}

#[test]
fn valid_run_exits_0_with_versioned_schema() {
    let dir = tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "report",
        "--gen-kind",
        "cycle",
        "--nodes",
        "6",
        "--circumference",
        "6",
        "--nerve-radii",
        "1.0",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(body["schema_version"], serde_json::json!(1));
    for section in [
        "config",
        "validation",
        "triples",
        "delta",
        "expansion",
        "nerve",
        "timings",
    ] {
        assert!(body.get(section).is_some(), "missing section {section}");
    }
    assert_eq!(body["nerve"][0]["betti"], serde_json::json!([1, 1, 0]));
}

#[test]
fn gen_is_deterministic_and_validates() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "gen",
            "--gen-kind",
            "weighted-tree",
            "--nodes",
            "30",
            "--gen-seed",
            "9",
            "--dyadic",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
    }
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "identical spec must produce identical bytes"
    );
    let out = run(&["validate", "--matrix", a.to_str().unwrap()]);
    assert_exit(&out, 0);
}

#[test]
fn gen_batch_writes_one_file_per_spec() {
    let dir = tempdir().unwrap();
    let specs = dir.path().join("batch.json");
    std::fs::write(
        &specs,
        r#"[
            {"kind": "cycle", "nodes": 5, "circumference": 5.0},
            {"kind": "path", "nodes": 4, "edge_weight": 2.0}
        ]"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "gen",
        "--spec",
        specs.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    assert!(out_dir.join("gen_000.csv").exists());
    assert!(out_dir.join("gen_001.csv").exists());
}

#[test]
fn gen_cloud_format_only_for_coordinate_kinds() {
    let out = run(&[
        "gen",
        "--gen-kind",
        "lp-grid",
        "--side",
        "3",
        "--dim",
        "2",
        "--grid-p",
        "1",
        "--format",
        "cloud",
    ]);
    assert_exit(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);

    let out = run(&[
        "gen",
        "--gen-kind",
        "path",
        "--nodes",
        "4",
        "--format",
        "cloud",
    ]);
    assert_exit(&out, 1);
}

#[test]
fn curvature_summary_on_star_tree() {
    let dir = tempdir().unwrap();
    let csv_path = dir.path().join("triples.csv");
    let out = run(&[
        "curvature",
        "--gen-kind",
        "star",
        "--leaves",
        "4",
        "--gen-seed",
        "2",
        "--triples-csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["fraction_nonpositive"], serde_json::json!(1.0));
    // Star weights are not dyadic here, so rho carries round-off.
    let rho_max = body["rho_max"].as_f64().unwrap();
    assert!((rho_max - 1.0).abs() < 1e-12, "rho_max {rho_max}");
    let csv_text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "i,j,k,r1,r2,r3,rho,witness,rho_bar,verdict,tripod_defect,tripod_witness"
    );
    assert_eq!(csv_text.lines().count(), 11); // header + C(5,3) triples
}

#[test]
fn tree_report_is_fully_nonpositive_with_zero_delta() {
    let out = run(&[
        "report",
        "--gen-kind",
        "weighted-tree",
        "--nodes",
        "30",
        "--gen-seed",
        "12",
        "--dyadic",
    ]);
    assert_exit(&out, 0);
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["triples"]["exhaustive"], serde_json::json!(true));
    assert_eq!(
        body["triples"]["fraction_nonpositive"],
        serde_json::json!(1.0)
    );
    assert_eq!(body["triples"]["positive"], serde_json::json!(0));
    assert_eq!(body["triples"]["rho_max"], serde_json::json!(1.0));
    assert_eq!(body["triples"]["max_tripod_defect"], serde_json::json!(0.0));
    assert_eq!(body["delta"]["delta"], serde_json::json!(0.0));
}

#[test]
fn hyperbolicity_reports_tree_delta_zero() {
    let out = run(&[
        "hyperbolicity",
        "--gen-kind",
        "weighted-tree",
        "--nodes",
        "20",
        "--gen-seed",
        "4",
        "--dyadic",
    ]);
    assert_exit(&out, 0);
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["delta"], serde_json::json!(0.0));
    assert_eq!(body["exhaustive"], serde_json::json!(true));
}

#[test]
fn plot_outputs_from_a_tree_report() {
    let dir = tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "report",
        "--gen-kind",
        "weighted-tree",
        "--nodes",
        "14",
        "--gen-seed",
        "3",
        "--dyadic",
        "--keep-triples",
        "--delta-top-k",
        "5",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);

    // Histogram of a tree run: every nondegenerate triple has rho exactly 1,
    // so the histogram collapses to a single bin at 1.0.
    let out = run(&[
        "plot",
        "--report",
        report_path.to_str().unwrap(),
        "--which",
        "rho-histogram",
    ]);
    assert_exit(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bin_lo,bin_hi,count");
    assert_eq!(lines.len(), 2, "single collapsed bin expected: {text}");
    assert!(lines[1].starts_with("1,1,"));

    let out = run(&[
        "plot",
        "--report",
        report_path.to_str().unwrap(),
        "--which",
        "rho-vs-rhobar",
    ]);
    assert_exit(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("rho,rho_bar\n"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("1,")));

    let out = run(&[
        "plot",
        "--report",
        report_path.to_str().unwrap(),
        "--which",
        "delta-quadruple-topk",
    ]);
    assert_exit(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6); // header + 5 rows
    let defects: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(
        defects.windows(2).all(|w| w[0] >= w[1]),
        "not sorted: {defects:?}"
    );
}

#[test]
fn plot_missing_section_exits_1() {
    let dir = tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "report",
        "--gen-kind",
        "cycle",
        "--nodes",
        "5",
        "--circumference",
        "5",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let out = run(&[
        "plot",
        "--report",
        report_path.to_str().unwrap(),
        "--which",
        "rho-histogram",
    ]);
    assert_exit(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("keep_triples"));
}

#[test]
fn report_accepts_config_file_and_rejects_unknown_fields() {
    let dir = tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "input": {"type": "generator", "spec": {"kind": "cycle", "nodes": 6, "circumference": 6.0}},
            "nerve_radii": [1.0],
            "workers": 2
        }"#,
    )
    .unwrap();
    let out = run(&["report", "--config", cfg_path.to_str().unwrap()]);
    assert_exit(&out, 0);
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["nerve"][0]["betti"], serde_json::json!([1, 1, 0]));
    // Echo never contains the workers field.
    assert!(body["config"].get("workers").is_none());

    std::fs::write(
        &cfg_path,
        r#"{"input": {"type": "matrix-csv", "path": "x"}, "bogus": 1}"#,
    )
    .unwrap();
    let out = run(&["report", "--config", cfg_path.to_str().unwrap()]);
    assert_exit(&out, 1);
}

#[test]
fn rerun_reports_are_identical_outside_timings() {
    // Identical config means identical output path too, so rerun onto the
    // same file and capture the bytes in between.
    let dir = tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut captured = Vec::new();
    for _ in 0..2 {
        let out = run(&[
            "report",
            "--gen-kind",
            "euclidean-sample",
            "--count",
            "18",
            "--dim",
            "2",
            "--gen-seed",
            "11",
            "--nerve-radii",
            "0.4,0.8",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
        captured.push(std::fs::read_to_string(&path).unwrap());
    }
    let strip = |text: &str| {
        let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string_pretty(&v).unwrap()
    };
    assert_eq!(strip(&captured[0]), strip(&captured[1]));
}

#[test]
fn cloud_csv_input_is_accepted() {
    let dir = tempdir().unwrap();
    let cloud = dir.path().join("cloud.csv");
    std::fs::write(&cloud, "0,0\n1,0\n0,1\n1,1\n").unwrap();
    let out = run(&[
        "hyperbolicity",
        "--cloud",
        cloud.to_str().unwrap(),
        "--p",
        "inf",
    ]);
    assert_exit(&out, 0);
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["delta"], serde_json::json!(0.0));
}

#[test]
fn nerve_full_complex_includes_simplices_and_witnesses() {
    let out = run(&[
        "nerve",
        "--gen-kind",
        "cycle",
        "--nodes",
        "6",
        "--circumference",
        "6",
        "--radii",
        "1.0",
        "--full-complex",
    ]);
    assert_exit(&out, 0);
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let complex = &body[0]["complex"];
    assert_eq!(complex["vertices"], serde_json::json!([0, 1, 2, 3, 4, 5]));
    assert_eq!(complex["simplex_counts"], serde_json::json!([6, 12, 6]));
    assert_eq!(complex["betti"], serde_json::json!([1, 1, 0]));
    // One witness per simplex at every dimension.
    let simplices = complex["simplices"].as_array().unwrap();
    let witnesses = complex["witnesses"].as_array().unwrap();
    for (level, wits) in simplices.iter().zip(witnesses) {
        assert_eq!(
            level.as_array().unwrap().len(),
            wits.as_array().unwrap().len()
        );
    }
}

#[test]
fn no_validate_accepts_and_degenerates_nonmetric_input() {
    // Skipping the triangle scan lets a violating table through; the triples
    // it breaks surface as degenerate rather than crashing anything.
    let dir = tempdir().unwrap();
    let input = dir.path().join("nonmetric.csv");
    std::fs::write(&input, "0,5,1\n5,0,1\n1,1,0\n").unwrap();
    let out = run(&[
        "curvature",
        "--matrix",
        input.to_str().unwrap(),
        "--no-validate",
    ]);
    assert_exit(&out, 0);
    let body: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["degenerate"], serde_json::json!(1));
    assert_eq!(body["triples_evaluated"], serde_json::json!(1));
}

#[test]
fn conflicting_inputs_exit_1() {
    let out = run(&[
        "curvature",
        "--matrix",
        "a.csv",
        "--spec-inline",
        r#"{"kind":"path","nodes":4}"#,
    ]);
    assert_exit(&out, 1);
}

#[test]
fn point_cap_is_enforced_with_exit_1() {
    let out = run(&[
        "report",
        "--gen-kind",
        "cycle",
        "--nodes",
        "100",
        "--circumference",
        "100",
        "--max-points",
        "50",
    ]);
    assert_exit(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}
