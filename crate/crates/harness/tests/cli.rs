use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_union-lap"))
}

#[test]
fn preset_list_names_everything() {
    let out = bin().args(["preset", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["paper-fig1", "paper-fig2", "paper-sweep", "circle-sweep", "pierced-square"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn unknown_kernel_exits_2() {
    let out = bin().args(["spectrum", "--kernel", "cosine", "--n", "200"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "k = 3\nmodel = \"unit-circle\"\nbandwidth = { constant = 0.2 }\nn = 100\nmystery = 1\n").unwrap();
    let out = bin().args(["spectrum", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&path, "k = 3\nmodel = \"unit-circle\"\nbandwidth = { constant = 1.5 }\nn = 100\n").unwrap();
    let out = bin().args(["spectrum", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_needs_three_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.toml");
    std::fs::write(
        &path,
        "k = 3\nmodel = \"unit-circle\"\nbandwidth = { rule = { scale = 2.0, exponent = 0.9 } }\nn_list = [500, 1000]\n",
    )
    .unwrap();
    let out = bin().args(["sweep", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tight.toml");
    std::fs::write(
        &path,
        "k = 4\nmodel = \"unit-circle\"\nbandwidth = { constant = 0.05 }\nn = 800\nsolver_tol = 1e-300\n",
    )
    .unwrap();
    let out = bin().args(["spectrum", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn spectrum_and_sample_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["spectrum", "--preset", "paper-fig1", "--n", "600", "--eps", "0.3", "--seed", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    union_harness::validate_bundle(&dir.path().join("paper-fig1_seed2.json")).unwrap();

    let csv = dir.path().join("cloud.csv");
    let out = bin().args(["sample", "--preset", "paper-fig1", "--n", "50", "--out"]).arg(&csv).output().unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert!(text.starts_with("x1,x2,x3,label"));
}

#[test]
fn tl2_between_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "x,u\n0,0\n1,0\n").unwrap();
    std::fs::write(&b, "x,u\n1,0\n0,1\n").unwrap();
    let out = bin().arg("tl2").arg(&a).arg(&b).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // best coupling swaps the atoms; only one value differs by 1
    assert!((v["distance"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn nonlocal_on_circle() {
    let out = bin().args(["nonlocal", "--model", "unit-circle", "--eps", "0.1"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let phi = 2.0 * 0.05f64.asin();
    let exact = (phi - phi.sin()) / (0.01 * phi);
    assert!((v["value"].as_f64().unwrap() - exact).abs() < 1e-5);
}
