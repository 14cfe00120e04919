use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn toric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toric")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn canonical_weights_of_the_square() {
    let out = toric(&["polygon", "canon", path_str(&fixture("square.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    for w in v["weights"].as_array().unwrap() {
        assert!((w.as_f64().unwrap() - 0.25).abs() < 1e-15);
    }
    assert_eq!(v["A"]["coeffs"][0], 1.0);
    assert_eq!(v["config"]["command"], "polygon canon");
}

#[test]
fn balance_exit_codes() {
    let out = toric(&["polygon", "balance", path_str(&fixture("perturbed_square.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["balanced"], true);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "weights": [1,1,1,1], "A": {"kind": "constant", "coeffs": [1]}}"#,
    )
    .unwrap();
    let out = toric(&["polygon", "balance", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["balanced"], false);
}

#[test]
fn malformed_input_is_reported_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"vertices\": [[0,0],[1,0]\n").unwrap();
    let out = toric(&["polygon", "mu", path_str(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.json") && err.contains("line"), "{err}");

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"vertices": [[0,0],[1,0],[0,1]], "colour": "red"}"#).unwrap();
    let out = toric(&["polygon", "mu", path_str(&unknown)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    assert_eq!(toric(&["polygon", "frobnicate"]).status.code(), Some(2));
    let out = toric(&["polygon", "mu", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn path_needs_matching_vertex_counts() {
    let out = toric(&[
        "polygon",
        "path",
        path_str(&fixture("square.json")),
        path_str(&fixture("simplex.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn surgery_output_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path_str(dir.path());
    let cut = toric(&["polygon", "cut", path_str(&fixture("square.json")), "--vertex", "2", "--eps", "0.1", "--out", out_dir]);
    assert_eq!(cut.status.code(), Some(0));
    let cut_file = dir.path().join("cut.json");
    assert_eq!(read_json(&cut_file)["vertices"].as_array().unwrap().len(), 5);
    let bal = toric(&["polygon", "balance", path_str(&cut_file)]);
    assert_eq!(bal.status.code(), Some(0), "{}", String::from_utf8_lossy(&bal.stderr));
}

#[test]
fn solve_square_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = toric(&["solve", "--manifest", path_str(&fixture("solve_square.json")), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let d = read_json(&dir.path().join("diagnostics.json"));
    assert!(d["max_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(d["converged"], true);
    assert_eq!(d["config"]["manifest"]["grid"], 33);
    let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(csv.starts_with("nx,ny,x0,y0,h"));
}

#[test]
fn solve_is_deterministic() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = toric(&["solve", "--manifest", path_str(&fixture("solve_perturbed.json")), "--out", path_str(dir.path())]);
        assert_eq!(out.status.code(), Some(0));
        (
            std::fs::read(dir.path().join("diagnostics.json")).unwrap(),
            std::fs::read(dir.path().join("grid.csv")).unwrap(),
        )
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let d: Value = serde_json::from_slice(&a.0).unwrap();
    assert!(d["steps"].as_u64().unwrap() <= 10);
    assert!(d["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn unreachable_tolerance_fails_the_check() {
    let out = toric(&["solve", "--manifest", path_str(&fixture("solve_perturbed.json")), "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["converged"], false);
}

#[test]
fn verify_all_passes() {
    let out = toric(&["verify", "all"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let summary = lines.last().unwrap();
    assert_eq!(summary["failed"], 0);
    assert_eq!(summary["passed"].as_u64().unwrap() as usize, lines.len() - 1);
    assert!(lines.iter().any(|l| l["name"] == "theorem2"));
}

#[test]
fn verify_single_check_is_reproducible() {
    let a = toric(&["verify", "lemma14"]);
    let b = toric(&["verify", "lemma14"]);
    assert_eq!(a.stdout, b.stdout);
    let first: Value = serde_json::from_str(String::from_utf8_lossy(&a.stdout).lines().next().unwrap()).unwrap();
    assert!((first["ratio"].as_f64().unwrap() - 0.25 / 3f64.ln().powi(2)).abs() < 1e-12);
}

#[test]
fn probe_depends_only_on_the_seed() {
    let hexagon = fixture("hexagon.json");
    let args = ["stability", "probe", path_str(&hexagon), "--n", "100", "--seed", "3"];
    let (a, b) = (toric(&args), toric(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    assert!(v["min_L"].as_f64().unwrap() > 0.0);
    assert_eq!(v["config"]["seed"], 3);
}

#[test]
fn m_condition_on_models_and_polygons() {
    let out = toric(&["geom", "mcond", "half:10", "--axis-only", "--box", "0,0,2,2", "--grid", "17"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json_of(&out)["sup_v"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let out = toric(&["geom", "mcond", path_str(&fixture("square.json")), "--grid", "17", "--m", "1e-3"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert!(v["sup_v"].as_f64().unwrap().is_finite());
    assert_eq!(v["violated"], true);
}

#[test]
fn field_and_plot_outputs() {
    let out = toric(&["field", "abreu", path_str(&fixture("square.json")), "--grid", "17"]);
    let v = json_of(&out);
    assert!((v["mean"].as_f64().unwrap() + 4.0).abs() < 1e-10);

    let out = toric(&["field", "energy", path_str(&fixture("square.json"))]);
    assert!((json_of(&out)["total"].as_f64().unwrap() + 2.0).abs() < 1e-10);

    let dir = tempfile::tempdir().unwrap();
    let out = toric(&["plot", "polygon-svg", path_str(&fixture("hexagon.json")), "--heat", "abreu", "--grid", "17", "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("polygon.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polygon") && svg.contains("<rect"));

    let out = toric(&["plot", "field-csv", "quarter:2", "--grid", "9"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("i,j,x,y"));
}

#[test]
fn geodesic_and_volume() {
    let out = toric(&["geom", "geodist", path_str(&fixture("square.json")), "--boundary", "--at", "0.5,0.5", "--grid", "33"]);
    let d = json_of(&out)["distances"][0]["distance"].as_f64().unwrap();
    assert!((d - std::f64::consts::FRAC_PI_2).abs() < 0.05 * std::f64::consts::FRAC_PI_2);

    let out = toric(&["geom", "volume", "quarter:8", "--tau", "1,2,4,8"]);
    let v = json_of(&out);
    assert!((v["exponent"].as_f64().unwrap() - 4.0).abs() < 0.1);
    assert_eq!(toric(&["geom", "volume", "half:4", "--tau", "1"]).status.code(), Some(2));
}
