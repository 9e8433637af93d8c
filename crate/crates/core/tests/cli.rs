use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;
use torus_ym::cli::{self, EXIT_FAILED, EXIT_IO, EXIT_OK, EXIT_USAGE};
use torus_ym::exterior::norm_sq;
use torus_ym::solver::SolverConfig;
use torus_ym::yang_mills::curvature;
use torus_ym::{Connection, Equation};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn dym(args: &[&str]) -> i32 {
    cli::run(std::iter::once("dym").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn all_zero(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64() == Some(0.0),
        Value::Array(xs) => xs.iter().all(all_zero),
        Value::Object(m) => m.iter().filter(|(k, _)| !matches!(k.as_str(), "n" | "m" | "degree")).all(|(_, x)| all_zero(x)),
        _ => true,
    }
}

#[test]
fn curvature_of_fixtures() {
    let tmp = TempDir::new().unwrap();
    for name in ["zero_2x2.json", "commuting_constant_2x2.json"] {
        let out = tmp.path().join(name);
        assert_eq!(dym(&["curvature", "--input", path(&fixture(name)), "--out", path(&out)]), EXIT_OK);
        let doc = read_json(out.join("curvature.json"));
        assert_eq!(doc["norm_sq"], 0.0);
        assert!(all_zero(&doc["curvature"]), "{name}");
        assert_eq!(doc["curvature"]["degree"], 2);
        assert!(out.join("manifest.json").exists());
    }

    let input = fixture("random_3x4.json");
    let out = tmp.path().join("random");
    assert_eq!(dym(&["curvature", "--input", path(&input), "--out", path(&out)]), EXIT_OK);
    let doc = read_json(out.join("curvature.json"));
    let a = Connection::from_json(&fs::read_to_string(&input).unwrap()).unwrap();
    let f = curvature(&a);
    assert_eq!(doc["norm_sq"].as_f64().unwrap(), norm_sq(&f.form));
    assert_eq!(doc["su2_deviation_max"].as_f64().unwrap(), f.su2_deviation_max);
    let written = torus_ym::DiscreteForm::from_json(&doc["curvature"].to_string()).unwrap();
    assert_eq!(written, f.form);
}

#[test]
fn residual_files() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("zero");
    assert_eq!(dym(&["residual", "--input", path(&fixture("zero_2x2.json")), "--out", path(&out)]), EXIT_OK);
    let doc = read_json(out.join("residual.json"));
    assert!(all_zero(&doc["residual"]));
    assert_eq!(doc["max_abs"], 0.0);
    assert_eq!(doc["equation"], "delta");

    let input = fixture("random_2x2.json");
    let out = tmp.path().join("dstar");
    let code = dym(&["residual", "--input", path(&input), "--equation", "dstar", "--out", path(&out)]);
    assert_eq!(code, EXIT_OK);
    let doc = read_json(out.join("residual.json"));
    let a = Connection::from_json(&fs::read_to_string(&input).unwrap()).unwrap();
    assert_eq!(doc["max_abs"].as_f64().unwrap(), Equation::Dstar.residual(&a).max_abs());

    assert_eq!(dym(&["residual", "--input", path(&input), "--equation", "neither"]), EXIT_USAGE);
}

#[test]
fn matrix_form_report() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("mf");
    assert_eq!(dym(&["matrix-form", "--input", path(&fixture("random_2x2.json")), "--out", path(&out)]), EXIT_OK);
    let doc = read_json(out.join("matrix_form.json"));
    assert_eq!(doc["consistent"], true);
    assert_eq!(doc["D"].as_array().unwrap().len(), 8);
    assert_eq!(doc["S"][0], serde_json::json!([0, 0, 0, 1]));
    assert_eq!(doc["D2"].as_array().unwrap().len(), 4);
    assert_eq!(doc["A"].as_array().unwrap().len(), 8);
    assert_eq!(doc["F"].as_array().unwrap().len(), 4);
    assert_eq!(doc["star_star_A"].as_array().unwrap().len(), 8);
    assert_eq!(doc["residual"]["delta"].as_array().unwrap().len(), 8);
    assert_eq!(doc["residual"]["dstar"].as_array().unwrap().len(), 8);

    let code = dym(&["matrix-form", "--input", path(&fixture("random_3x4.json")), "--out", path(&out)]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn input_errors() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ \"n\": 2, \"m\": ").unwrap();
    assert_eq!(dym(&["curvature", "--input", path(&bad), "--out", path(tmp.path())]), EXIT_IO);
    let missing = tmp.path().join("missing.json");
    assert_eq!(dym(&["residual", "--input", path(&missing), "--out", path(tmp.path())]), EXIT_IO);

    // Coordinates are su(2) by construction, so corrupt the schema instead.
    let text = fs::read_to_string(fixture("zero_2x2.json")).unwrap().replace("\"degree\": 1", "\"degree\": 2");
    fs::write(&bad, text).unwrap();
    assert_eq!(dym(&["curvature", "--input", path(&bad), "--out", path(tmp.path())]), EXIT_IO);

    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"grid":"2x2","init":{"kind":"random","scale":-1,"seed":1},"tol_residual":1e-10,"max_iters":5}"#).unwrap();
    assert_eq!(dym(&["solve", "--config", path(&cfg), "--out", path(tmp.path())]), EXIT_USAGE);
    assert_eq!(dym(&["verify", "--trials", "many"]), EXIT_USAGE);
}

#[test]
fn archived_solve_reproduces_bitwise() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("solve");
    let cfg = fixture("solve_seed1.json");
    assert_eq!(dym(&["solve", "--config", path(&cfg), "--deterministic", "--out", path(&out)]), EXIT_OK);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace, fs::read_to_string(fixture("solve_seed1_trace.csv")).unwrap());
    assert!(trace.starts_with("iter,objective,grad_norm,step\n"));

    let final_a = Connection::from_json(&fs::read_to_string(out.join("connection.json")).unwrap()).unwrap();
    let archived = SolverConfig::from_json(&fs::read_to_string(&cfg).unwrap()).unwrap();
    assert!(torus_ym::solver::objective(&final_a, archived.equation) <= archived.tol_residual);

    let manifest = read_json(out.join("manifest.json"));
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["deterministic"], true);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["timestamp"].as_u64().unwrap() > 0);
}

#[test]
fn solve_budget_and_init_file() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("short");
    assert_eq!(dym(&["solve", "--max-iters", "0", "--out", path(&out)]), EXIT_FAILED);
    assert_eq!(fs::read_to_string(out.join("trace.csv")).unwrap().lines().count(), 2);

    let out = tmp.path().join("from_file");
    let init = fixture("commuting_constant_2x2.json");
    assert_eq!(dym(&["solve", "--init-file", path(&init), "--out", path(&out)]), EXIT_OK);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse::<f64>().unwrap(), 0.0);

    let code = dym(&["solve", "--grid", "3x3", "--init-file", path(&init), "--out", path(&out)]);
    assert_eq!(code, EXIT_USAGE);
}

fn same_files(a: &Path, b: &Path, names: &[&str]) {
    for name in names {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert!(x == y, "{name} differs between {} and {}", a.display(), b.display());
    }
}

#[test]
fn every_command_reruns_from_its_manifest() {
    let tmp = TempDir::new().unwrap();
    let t = |s: &str| tmp.path().join(s);
    let input = fixture("random_2x2.json");
    let runs: Vec<(Vec<&str>, &str, &[&str])> = vec![
        (vec!["verify", "--grid", "2x2", "--grid", "3x5", "--trials", "3", "--seed", "9"], "verify", &["verify_report.json", "diagnostics.csv"]),
        (vec!["solve", "--seed", "2", "--equation", "dstar"], "solve", &["trace.csv", "connection.json"]),
        (vec!["curvature", "--input", path(&input)], "curvature", &["curvature.json"]),
        (vec!["residual", "--input", path(&input), "--equation", "dstar"], "residual", &["residual.json"]),
        (vec!["matrix-form", "--input", path(&input)], "matrix-form", &["matrix_form.json"]),
    ];
    for (args, name, outputs) in runs {
        let first = t(name);
        let mut full = args.clone();
        full.extend(["--deterministic", "--out", path(&first)]);
        assert_eq!(dym(&full), EXIT_OK, "{name}");
        let again = t(&format!("{name}-rerun"));
        let code = dym(&["rerun", "--manifest", path(&first.join("manifest.json")), "--out", path(&again)]);
        assert_eq!(code, EXIT_OK, "{name}");
        same_files(&first, &again, outputs);
        assert_eq!(fs::read_dir(&again).unwrap().filter(|e| e.as_ref().unwrap().file_name() == "manifest.json").count(), 1);
    }
}

#[test]
fn verify_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = path(tmp.path());
    assert_eq!(dym(&["verify", "--trials", "0", "--out", out]), EXIT_OK);
    let code = dym(&["verify", "--grid", "2x2", "--trials", "2", "--fault", "corrupt-star", "--out", out]);
    assert_eq!(code, EXIT_FAILED);
    let report = read_json(tmp.path().join("verify_report.json"));
    let failed: Vec<&str> = report
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["max_error"].as_f64().unwrap() > c["tol"].as_f64().unwrap())
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"star_inverse"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dym");
    let tmp = TempDir::new().unwrap();
    let status = |args: &[&str]| Command::new(bin).args(args).current_dir(tmp.path()).output().unwrap();

    let ok = status(&["verify", "--grid", "2x2", "--trials", "1"]);
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS star_inverse"));

    let fault = status(&["verify", "--grid", "1x1", "--trials", "1", "--fault", "corrupt-star"]);
    assert_eq!(fault.status.code(), Some(EXIT_FAILED));
    assert!(String::from_utf8_lossy(&fault.stderr).contains("invariant violated: star_inverse"));

    let empty = status(&["verify", "--trials", "0"]);
    assert_eq!(empty.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&empty.stderr).contains("no trials"));

    assert_eq!(status(&["curvature"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(status(&["curvature", "--input", "nope.json"]).status.code(), Some(EXIT_IO));
    assert_eq!(status(&["--version"]).status.code(), Some(EXIT_OK));
}
