use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mindep"))
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn analyze_antitoxin_perks() {
    let t = data("antitoxin.json");
    let v = json(&run(&["analyze", "--table", &t, "--prior", "perks", "--format", "json"]));
    assert_eq!(v["map_model"], "SC+A");
    let models = v["models"].as_array().unwrap();
    assert_eq!(models.len(), 8);
    let p = models[3]["posterior_probability"].as_f64().unwrap();
    assert!((p - 0.9171).abs() < 5e-4);
    let total: f64 = models.iter().map(|m| m["posterior_probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(v["reproducibility"]["seed"].is_u64());
    assert!(v["reproducibility"]["draws"].is_u64());
}

#[test]
fn analyze_alcohol_jeffreys_text() {
    let out = run(&["analyze", "--table", &data("alcohol.json"), "--prior", "jeffreys"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("MAP model: HO+A"));
    assert!(text.contains("83.68"));
}

#[test]
fn cells_form_gives_same_answer() {
    let a = json(&run(&["analyze", "--table", &data("antitoxin.json"), "--format", "json"]));
    let b = json(&run(&["analyze", "--table", &data("antitoxin_cells.json"), "--format", "json"]));
    assert_eq!(a["models"], b["models"]);
}

#[test]
fn sample_is_deterministic() {
    let t = data("antitoxin.json");
    let args = ["sample", "--table", &t, "--model", "a+sc", "--draws", "2000", "--seed", "5", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let detail = &v["detail"];
    assert_eq!(detail["label"], "SC+A");
    assert_eq!(detail["parameters"][0]["a"], 37.25);
    let zeros: Vec<&str> = detail["lambda"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["exact_zero"] == true)
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(zeros, ["lambda_AS(2,2)", "lambda_AC(2,2)", "lambda_ASC(2,2,2)"]);
}

#[test]
fn sample_saturated_rows() {
    let v = json(&run(&[
        "sample", "--table", &data("antitoxin.json"), "--model", "ASC", "--draws", "200", "--cells", "--format",
        "json",
    ]));
    assert_eq!(v["detail"]["parameters"].as_array().unwrap().len(), 8);
    assert_eq!(v["detail"]["lambda"].as_array().unwrap().len(), 8);
    assert_eq!(v["detail"]["cells"].as_array().unwrap().len(), 8);
}

#[test]
fn out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "prior-report", "--table", &data("alcohol.json"), "--prior", "uec", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let vr = v["prior"]["variance_ratio"].as_f64().unwrap();
    assert!((vr - 2.0 / 25.0).abs() < 1e-12);
    assert_eq!(v["prior_cells"].as_array().unwrap().len(), 24);
}

#[test]
fn power_prior() {
    let t = data("antitoxin.json");
    let v = json(&run(&[
        "prior-report", "--table", &t, "--prior", "power", "--imaginary", &t, "--alpha0", "0.5", "--format", "json",
    ]));
    let total = v["prior"]["total_alpha"].as_f64().unwrap();
    assert!((total - 5.0).abs() < 1e-12);
    let out = run(&["prior-report", "--table", &t, "--prior", "power"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn models_listing() {
    let out = run(&["models"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let labels = ["A+S+C", "AS+C", "AC+S", "SC+A", "AS+AC", "AS+SC", "AC+SC", "ASC"];
    let firsts: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(firsts, labels);
    let v = json(&run(&["models", "--table", &data("alcohol.json"), "--format", "json"]));
    assert_eq!(v[2]["label"], "HO+A");
}

#[test]
fn exit_codes() {
    let t = data("antitoxin.json");
    assert_eq!(run(&["analyze"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let out = run(&["sample", "--table", &t, "--model", "XY+Z"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SC+A"));
    assert_eq!(run(&["sample", "--table", &t, "--model", "ASC", "--draws", "0"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--table", "/nonexistent/table.json"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"variables": [{"name": "A", "levels": ["a", "b"]}], "counts": [1]}"#).unwrap();
    let out = run(&["analyze", "--table", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("counts"));

    let zero = dir.path().join("zero.json");
    std::fs::write(
        &zero,
        r#"{"variables": [{"name": "A", "levels": ["a", "b"]}, {"name": "B", "levels": ["a", "b"]},
            {"name": "C", "levels": ["a", "b"]}], "counts": [1, 0, 2, 3, 4, 5, 6, 7]}"#,
    )
    .unwrap();
    assert_eq!(run(&["analyze", "--table", zero.to_str().unwrap(), "--prior", "empirical"]).status.code(), Some(2));
}
