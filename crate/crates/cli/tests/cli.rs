use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use copula_order::ordering::{schur_scan, SignClass};
use copula_order::{EvalMode, Execution};
use copula_order_cli::{fig1_spec, Scenario};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_copula-order"));
    c.env_remove("COPULA_ORDER_SAFE_MODE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const ONE_COMPONENT: &str = r#"{"schema":1,"systems":[{"k":0,"generator":{"family":"independence"},
  "transform":{"model":"PHR"},"baseline":{"family":"std_exponential"},"params":[1.0]}],"grid":{"points":50}}"#;

#[test]
fn curve_single_component_is_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", ONE_COMPONENT);
    let out = dir.path().join("curve.csv");
    let o = run(&["curve", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header, ["x", "cdf"]);
    assert_eq!(rows.len(), 50);
    for r in &rows {
        assert!((r[1] - (1.0 - (-r[0]).exp())).abs() < 1e-15);
    }
}

#[test]
fn curve_matches_library_and_is_monotone() {
    let path = scenario("three_component_clayton.json");
    let (_, rows) = csv_rows(&stdout(&run(&["curve", "--scenario", &path])));
    let sc = Scenario::load(Path::new(&path)).unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let fs = sc.systems[0].curve(&xs, EvalMode::Safe, Execution::Sequential).unwrap();
    assert_eq!(rows.len(), 400);
    for (r, f) in rows.iter().zip(&fs) {
        assert_eq!(r[1], *f);
    }
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn explicit_n_field_gives_identical_curve() {
    let dir = tempfile::tempdir().unwrap();
    let with_n = ONE_COMPONENT.replace(r#""k":0"#, r#""n":1,"k":0"#);
    let a = write(dir.path(), "a.json", ONE_COMPONENT);
    let b = write(dir.path(), "b.json", &with_n);
    let ca = stdout(&run(&["curve", "--scenario", a.to_str().unwrap()]));
    let cb = stdout(&run(&["curve", "--scenario", b.to_str().unwrap()]));
    assert_eq!(ca, cb);
}

#[test]
fn compare_recipes() {
    let cases = [
        ("parallel_coordinatewise.json", "Dominates", "Thm-main0"),
        ("parallel_majorization.json", "Dominates", "Thm-main1"),
        ("series_coordinatewise.json", "DominatedBy", "Thm-main0min"),
        ("series_majorization.json", "DominatedBy", "Thm-main1min"),
        ("k_out_of_n_coordinatewise.json", "Dominates", "Thm-koutofn-coordinatewise"),
        ("three_component_majorization.json", "Dominates", "NumericOnly"),
    ];
    for (file, relation, justification) in cases {
        let v = json(&run(&["compare", "--scenario", &scenario(file)]));
        assert_eq!(v["relation"], relation, "{file}");
        assert_eq!(v["justification"], justification, "{file}");
    }
}

#[test]
fn compare_identical_systems() {
    let dir = tempfile::tempdir().unwrap();
    let sys = r#"{"k":1,"generator":{"family":"frank","gamma":3.0},"transform":{"model":"OMO","theta":2.0},
        "baseline":{"family":"weibull","shape":2.0,"scale":1.0},"params":[1.0,2.0,3.0]}"#;
    let sc = write(dir.path(), "s.json", &format!(r#"{{"schema":1,"systems":[{sys},{sys}]}}"#));
    let v = json(&run(&["compare", "--scenario", sc.to_str().unwrap()]));
    assert_eq!(v["relation"], "Indistinguishable");
}

#[test]
fn fig1_sign_pattern_and_call_through() {
    let (header, rows) = csv_rows(&stdout(&run(&["fig1"])));
    assert_eq!(header, ["x", "D12", "D13", "D23"]);
    assert_eq!(rows.len(), 400);
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let class = |v: &[f64]| copula_order::ordering::classify_signs(v, 1e-12);
    assert_eq!(class(&col(1)), SignClass::SignChanging);
    assert_ne!(class(&col(2)), SignClass::SignChanging);
    assert_ne!(class(&col(3)), SignClass::SignChanging);

    let xs = col(0);
    assert!(xs[0] > 0.0 && *xs.last().unwrap() == 10.0);
    let scan = schur_scan(&fig1_spec(), &xs, (0, 2), EvalMode::Safe, Execution::Sequential).unwrap();
    assert_eq!(scan.values, col(2));
}

#[test]
fn superadd_reports() {
    let v = json(&run(&["superadd", "--gen1", "independence", "--gen2", "gumbel:2"]));
    assert_eq!(v["passed"], true);
    assert_eq!(v["status"], "grid-verified");
    // φ_I ∘ ψ_C(t) = log(1 + 2t)/2 is concave
    let v = json(&run(&["superadd", "--gen1", "clayton:2", "--gen2", "independence", "--grid-points", "30"]));
    assert_eq!(v["passed"], false);
    assert!(v["counterexample"]["gap"].as_f64().unwrap() < 0.0);
    assert_eq!(v["pairs_checked"], 30 * 31 / 2);
}

#[test]
fn extremal_example() {
    let v = json(&run(&["extremal", "--a", "1", "--b", "4", "--c", "7.5", "--n", "3"]));
    assert_eq!(v["q"], 1);
    assert_eq!(v["eta"], 2.5);
    assert_eq!(v["alpha_star"], serde_json::json!([1.0, 2.5, 4.0]));
    assert_eq!(v["alpha_bar"], serde_json::json!([2.5, 2.5, 2.5]));
}

#[test]
fn validate_three_component_example() {
    let path = scenario("three_component_clayton.json");
    let v = json(&run(&["validate", "--scenario", &path, "--samples", "200000", "--seed", "9"]));
    assert_eq!(v["passed"], true, "{v}");
    assert_eq!(v["samples"], 200_000);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["probes"].as_array().unwrap().len(), 19);
}

#[test]
fn tabulated_path_resolves_relative_to_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("data");
    std::fs::create_dir(&sub).unwrap();
    write(&sub, "f.csv", "x,F\n0,0\n1,0.5\n2,1\n");
    let sc = write(
        dir.path(),
        "s.json",
        r#"{"schema":1,"systems":[{"k":0,"generator":{"family":"independence"},"transform":{"model":"PRHR"},
            "baseline":{"family":"tabulated","path":"data/f.csv"},"params":[1.0]}],"grid":{"xs":[0.5,1.0,1.5]}}"#,
    );
    let (_, rows) = csv_rows(&stdout(&run(&["curve", "--scenario", sc.to_str().unwrap()])));
    let fs: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(fs, [0.25, 0.5, 0.75]);

    let recipe = scenario("tabulated_baseline.json");
    assert!(run(&["curve", "--scenario", &recipe]).status.success());
}

#[test]
fn scenario_round_trip() {
    for file in ["three_component_clayton.json", "series_majorization.json", "tabulated_baseline.json"] {
        let path = scenario(file);
        let sc = Scenario::load(Path::new(&path)).unwrap();
        let text = serde_json::to_string(&sc).unwrap();
        let back = Scenario::from_json_str(&text, Path::new(".")).unwrap();
        assert_eq!(sc, back, "{file}");
    }
}

fn assert_exit(o: &Output, code: i32, needle: &str) {
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(o.status.code(), Some(code), "stderr: {err}");
    assert!(err.contains(needle), "stderr `{err}` lacks `{needle}`");
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str, t: &str| write(dir.path(), n, t).to_string_lossy().into_owned();

    let unknown = d("u.json", &ONE_COMPONENT.replace(r#""schema":1"#, "\"schema\":1,\n\"extra\":0"));
    assert_exit(&run(&["curve", "--scenario", &unknown]), 2, "line 2");

    let missing = dir.path().join("nope.json");
    assert_exit(&run(&["curve", "--scenario", missing.to_str().unwrap()]), 2, "nope.json");

    let mismatch = d(
        "m.json",
        r#"{"schema":1,"systems":[
        {"k":0,"generator":{"family":"independence"},"transform":{"model":"PHR"},"baseline":{"family":"std_exponential"},"params":[1.0]},
        {"k":0,"generator":{"family":"independence"},"transform":{"model":"PHR"},"baseline":{"family":"std_exponential"},"params":[1.0,2.0]}]}"#,
    );
    assert_exit(&run(&["compare", "--scenario", &mismatch]), 2, "usage");
    assert_exit(&run(&["curve", "--scenario", &mismatch]), 2, "exactly one system");

    let bad_gamma = d("g.json", &ONE_COMPONENT.replace(r#"{"family":"independence"}"#, r#"{"family":"gumbel","gamma":0.5}"#));
    assert_exit(&run(&["curve", "--scenario", &bad_gamma]), 2, "gamma");

    let bad_csv = d("t.json", r#"{"schema":1,"systems":[{"k":0,"generator":{"family":"independence"},
        "transform":{"model":"PHR"},"baseline":{"family":"tabulated","path":"bad.csv"},"params":[1.0]}]}"#);
    write(dir.path(), "bad.csv", "x,F\n0,0\n1,oops\n");
    assert_exit(&run(&["curve", "--scenario", &bad_csv]), 2, "line 3");

    let schema = d("v.json", &ONE_COMPONENT.replace(r#""schema":1"#, r#""schema":2"#));
    assert_exit(&run(&["curve", "--scenario", &schema]), 2, "schema");

    let frank_neg = d("f.json", &ONE_COMPONENT.replace(r#"{"family":"independence"}"#, r#"{"family":"frank","gamma":-2.0}"#));
    assert_exit(&run(&["validate", "--scenario", &frank_neg, "--samples", "100"]), 2, "sampler");

    assert_exit(&run(&["extremal", "--a", "1", "--b", "4", "--c", "20", "--n", "3"]), 2, "`c`");
    assert_exit(&run(&["superadd", "--gen1", "gumbel:0.2", "--gen2", "independence"]), 2, "gamma");
    assert_exit(&run(&["curve"]), 2, "--scenario");
    assert_exit(&run(&["frobnicate"]), 2, "");

    let o = bin().env("COPULA_ORDER_SAFE_MODE", "yes").arg("fig1").output().unwrap();
    assert_exit(&o, 2, "COPULA_ORDER_SAFE_MODE");
}

#[test]
fn output_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    assert_exit(&run(&["fig1", "--out", out.to_str().unwrap()]), 1, "cannot write");
}

#[test]
fn raw_mode_toggle() {
    let path = scenario("three_component_clayton.json");
    let safe = stdout(&run(&["curve", "--scenario", &path]));
    let raw = bin().env("COPULA_ORDER_SAFE_MODE", "0").args(["curve", "--scenario", &path]).output().unwrap();
    let (_, a) = csv_rows(&safe);
    let (_, b) = csv_rows(&stdout(&raw));
    for (ra, rb) in a.iter().zip(&b) {
        assert!((ra[1] - rb[1]).abs() <= 1e-10);
    }
    // unclamped, the largest-rate component reaches F = 1 before x = 10
    let o = bin().env("COPULA_ORDER_SAFE_MODE", "0").arg("fig1").output().unwrap();
    assert_exit(&o, 1, "domain error");
}
