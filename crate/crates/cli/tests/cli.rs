use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn canonical() -> Value {
    serde_json::from_str(&std::fs::read_to_string(configs().join("canonical.json")).unwrap()).unwrap()
}

fn run(args: &[&str], config: &Value, out: &Path) -> Output {
    let path = out.join("config.json");
    std::fs::create_dir_all(out).unwrap();
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_nonlocal"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV written by the tool, after the digest line and header.
fn rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let digest = lines.next().unwrap().trim_start_matches("# config_digest: ").to_string();
    lines.next();
    let data = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (digest, data)
}

fn failed_checks(report: &Value) -> Vec<String> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["passed"].as_bool().unwrap())
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn validate_canonical_config_passes_with_positive_margins() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate"], &canonical(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("validate.json"));
    assert_eq!(report["passed"], json!(true));
    for c in report["checks"].as_array().unwrap() {
        assert!(c["margin"].as_f64().unwrap() > 0.0, "{c}");
    }
}

#[test]
fn validate_names_the_cancellation_check_for_an_unpaired_atom() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = canonical();
    cfg["measure"]["alpha"] = json!(1.0);
    cfg["measure"]["atoms"] = json!([{ "direction": [1.0], "weight": 0.7 }, { "direction": [-1.0], "weight": 0.3 }]);
    let o = run(&["validate"], &cfg, dir.path());
    assert_eq!(code(&o), 1);
    let report = read_json(&dir.path().join("validate.json"));
    assert_eq!(failed_checks(&report), vec!["alpha1-cancellation"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha1-cancellation"));
}

#[test]
fn validate_rejects_exponents_next_to_the_excluded_value() {
    for p in [3.0 - 1e-4, 3.0 + 1e-4] {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = canonical();
        cfg["problem"]["p"] = json!(p);
        let o = run(&["validate"], &cfg, dir.path());
        assert_eq!(code(&o), 1, "p = {p}");
        assert_eq!(failed_checks(&read_json(&dir.path().join("validate.json"))), vec!["exponent-exclusion"]);
    }
}

#[test]
fn parse_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut unknown = canonical();
    unknown["grid"]["spacing"] = json!(0.1);
    assert_eq!(code(&run(&["validate"], &unknown, dir.path())), 2);

    let mut no_alpha = canonical();
    no_alpha["measure"].as_object_mut().unwrap().remove("alpha");
    assert_eq!(code(&run(&["validate"], &no_alpha, dir.path())), 2);

    let mut no_initial = canonical();
    no_initial.as_object_mut().unwrap().remove("problem");
    assert_eq!(code(&run(&["solve"], &no_initial, dir.path())), 2);

    let mut no_initial_field = canonical();
    no_initial_field["problem"].as_object_mut().unwrap().remove("initial");
    assert_eq!(code(&run(&["solve"], &no_initial_field, dir.path())), 2);
}

#[test]
fn operator_suite_reports_two_sided_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = canonical();
    cfg["ensemble"]["size"] = json!(20);
    let o = run(&["verify", "--suite", "operator"], &cfg, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&dir.path().join("summary.json"));
    let bounds = summary["bounds"].as_array().unwrap();
    assert_eq!(bounds.len(), 3);
    for b in bounds {
        assert!(b["c_lower"].as_f64().unwrap() > 0.0);
        assert!(b["C_upper"].as_f64().unwrap().is_finite());
    }
    let text = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 2 * 20 * 3);
}

#[test]
fn empty_ensemble_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = canonical();
    cfg["ensemble"]["size"] = json!(0);
    let o = run(&["verify", "--suite", "norms"], &cfg, dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ensemble.size"));
}

#[test]
fn semigroup_suite_is_reproducible_for_a_fixed_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = Command::new(env!("CARGO_BIN_EXE_nonlocal"))
            .args(["verify", "--suite", "semigroup", "--seed", "41", "--threads", "2"])
            .arg("--config")
            .arg(configs().join("canonical.json"))
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["samples.csv", "summary.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn seed_override_changes_the_digest() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = canonical();
    run(&["validate"], &cfg, a.path());
    let path = a.path().join("config.json");
    let o = Command::new(env!("CARGO_BIN_EXE_nonlocal"))
        .args(["validate", "--seed", "8"])
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(b.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let da = read_json(&a.path().join("validate.json"))["config_digest"].clone();
    let db = read_json(&b.path().join("validate.json"))["config_digest"].clone();
    assert_eq!(da.as_str().unwrap().len(), 64);
    assert_ne!(da, db);
}

/// `−Γ(−α) cos(πα/2)` at `α = 3/2`, with `Γ(−3/2) = 4√π/3`.
fn stable_constant_three_halves() -> f64 {
    4.0 * std::f64::consts::PI.sqrt() / 3.0 * std::f64::consts::FRAC_1_SQRT_2
}

#[test]
fn frozen_plane_wave_solution_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve"], &canonical(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (digest, data) = rows(&dir.path().join("solution.csv"));
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["config_digest"].as_str().unwrap(), digest);
    assert_eq!(data.len(), 33 * 64);
    let psi = -stable_constant_three_halves();
    let worst = data.iter().map(|r| ((psi * r[0]).exp() * r[1].cos() - r[2]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "max deviation {worst}");
    assert_eq!(report["apriori"].as_array().unwrap().len(), 2);
}

#[test]
fn solve_reruns_are_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = canonical();
    cfg["solve"] = json!({ "route": "imex", "steps": 16 });
    for dir in [&a, &b] {
        assert_eq!(code(&run(&["solve"], &cfg, dir.path())), 0);
    }
    for name in ["solution.csv", "report.json"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn route_mismatch_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = canonical();
    cfg["coefficient"] = json!({ "kind": "separable", "x_amp": 0.25, "y_amp": 0.25, "gamma": 0.6 });
    let o = run(&["solve"], &cfg, dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("route"));
}

#[test]
fn nonlinear_demo_energy_is_non_increasing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: Value = serde_json::from_str(&std::fs::read_to_string(configs().join("nonlinear.json")).unwrap()).unwrap();
    let o = run(&["solve"], &cfg, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, energy) = rows(&dir.path().join("energy.csv"));
    assert_eq!(energy.len(), 201);
    assert!(energy.windows(2).all(|w| w[1][1] <= w[0][1]));
}

#[test]
fn continuity_route_reports_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: Value = serde_json::from_str(&std::fs::read_to_string(configs().join("variable.json")).unwrap()).unwrap();
    let o = run(&["solve"], &cfg, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("report.json"));
    let factors = report["continuity"]["contraction_estimates"].as_array().unwrap();
    assert!(!factors.is_empty());
    assert!(factors.iter().all(|f| f.as_f64().unwrap() < 1.0));
}

#[test]
fn sample_levy_writes_paths_and_characteristic_function() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sample-levy"], &canonical(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, paths) = rows(&dir.path().join("paths.csv"));
    assert_eq!(paths.len(), 16 * 33);
    assert!(paths.iter().filter(|r| r[1] == 0.0).all(|r| r[2] == 0.0));
    let report = read_json(&dir.path().join("char_function.json"));
    assert_eq!(report["reports"].as_array().unwrap().len(), 3);
    assert_eq!(report["passed"], json!(true));
}

#[test]
fn zero_threads_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["validate", "--threads", "0"], &canonical(), dir.path())), 2);
}
