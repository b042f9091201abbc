use std::path::Path;
use std::process::Command;

fn run(sub: &str, config: &str, out: &Path, seed: Option<u64>) -> (i32, String) {
    let cfg_path = out.with_extension("json");
    std::fs::write(&cfg_path, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dapick"));
    cmd.arg(sub)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(out);
    if let Some(s) = seed {
        cmd.arg("--seed").arg(s.to_string());
    }
    cmd.env("DAPICK_THREADS", "2");
    let o = cmd.output().unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn operator_r_headline_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("opr");
    let (code, err) = run(
        "operator-r",
        r#"{"kind":"operator-r","map":{"monomial":{"p":2,"q":3,"alpha":0.5}},"grid_size":1024,"modes":32}"#,
        &out,
        None,
    );
    assert_eq!(code, 0, "{err}");
    let rep = report(&out);
    assert!(rep["metrics"]["max_diag_oracle_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(rep["metrics"]["gap_modes"], serde_json::json!([1]));
    assert_eq!(rep["metrics"]["symbol_limit"], serde_json::json!(0.4));
    assert_eq!(rep["config"]["grid_size"], 1024);

    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mode,eigenvalue,oracle_value,abs_error"
    );
    assert_eq!(lines.count(), 33);
    for f in ["diagonal.csv", "mkernel.csv"] {
        assert!(out.join(f).exists());
    }
}

#[test]
fn pick_norm_schwarz_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pick");
    let (code, err) = run(
        "pick-norm",
        r#"{"kind":"pick-norm","nodes":[[[0,0]],[[0.5,0]]],"values":[[0,0],[0.25,0]],"expected_norm":0.5}"#,
        &out,
        None,
    );
    assert_eq!(code, 0, "{err}");
    let norm = report(&out)["metrics"]["pick"]["norm"].as_f64().unwrap();
    assert!((norm - 0.5).abs() < 1e-10);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let (code, _) = run(
        "operator-r",
        r#"{"kind":"operator-r","map":{"monomial":{"p":2,"q":3,"alpha":0.5}},"grid_size":64,"modes":0}"#,
        &dir.path().join("zero_modes"),
        None,
    );
    assert_eq!(code, 2);

    let (code, _) = run(
        "pick-norm",
        r#"{"kind":"operator-r","map":{"monomial":{"p":2,"q":3,"alpha":0.5}},"grid_size":64,"modes":4}"#,
        &dir.path().join("wrong_kind"),
        None,
    );
    assert_eq!(code, 2);

    let (code, _) = run(
        "pick-norm",
        r#"{"kind":"pick-norm","nodes":[[[0,0]],[[0.5,0]]],"values":[[0,0],[0.25,0]],"expected_norm":0.6}"#,
        &dir.path().join("wrong_expectation"),
        None,
    );
    assert_eq!(code, 1);

    let (code, _) = run(
        "pick-norm",
        r#"{"kind":"pick-norm","nodes":[[[0.5,0]],[[0.5,0]]],"values":[[0,0],[0.25,0]]}"#,
        &dir.path().join("duplicate"),
        None,
    );
    assert_eq!(code, 3);

    // (z^2, 0) folds the circle onto itself.
    let (code, _) = run(
        "holomap-check",
        r#"{"kind":"holomap-check","map":{"polynomial":[[[0,0],[0,0],[1,0]],[[0,0]]]},"grid_size":64}"#,
        &dir.path().join("folded"),
        None,
    );
    assert_eq!(code, 1);
    let rep = report(&dir.path().join("folded"));
    let inj = rep["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["name"] == "boundary_injective")
        .unwrap();
    assert_eq!(inj["passed"], false);
}

#[test]
fn holomap_check_of_example_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hc");
    let (code, err) = run(
        "holomap-check",
        r#"{"kind":"holomap-check","map":{"monomial":{"p":2,"q":3,"alpha":0.5}},"grid_size":1024,
            "boundary_normalized":true,"expected_margin":2.5}"#,
        &out,
        None,
    );
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(out.join("boundary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1025);
}

#[test]
fn seed_flag_controls_disjoint_union() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind":"disjoint-union","pieces":[[[[0,0]]],[[[0.5,0]]]],"trials":10,"seed":1}"#;
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    assert_eq!(run("disjoint-union", cfg, &a, Some(5)).0, 0);
    assert_eq!(run("disjoint-union", cfg, &b, Some(5)).0, 0);
    assert_eq!(run("disjoint-union", cfg, &c, Some(6)).0, 0);
    let read = |p: &Path| std::fs::read(p.join("union.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(report(&a)["config"]["seed"], 5);

    let seps = std::fs::read_to_string(a.join("separators.csv")).unwrap();
    for line in seps.lines().skip(1) {
        let s: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((s - 2.0).abs() < 1e-10);
    }
}

#[test]
fn close_pieces_are_reported_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("close");
    let (code, _) = run(
        "disjoint-union",
        r#"{"kind":"disjoint-union","pieces":[[[[0,0]]],[[[0.01,0]]]]}"#,
        &out,
        None,
    );
    assert_eq!(code, 1);
    assert_eq!(report(&out)["metrics"]["separated"], false);
}
