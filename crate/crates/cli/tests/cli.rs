use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hbvp(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbvp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("HBVP_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Path, command: &str) -> Value {
    let text = fs::read_to_string(out.join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn sector_at_right_angle() {
    let dir = TempDir::new().unwrap();
    let o = hbvp(dir.path(), &["sector", "--aperture", "90", "--degrees"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "sector");
    let ell = r["result"]["ell"].as_f64().unwrap();
    assert!((2.0 * ell - std::f64::consts::FRAC_PI_2).abs() <= 1e-10);
    assert_eq!(r["config"]["common"]["seed"], 0);
    assert!(r["versions"]["hbvp"].is_string());
    assert!(r["wall_time_s"].as_f64().unwrap() >= 0.0);
    let csv = fs::read_to_string(dir.path().join("sector.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# hbvp sector seed=0"));
    assert_eq!(lines.next(), Some("theta,a,da"));
}

#[test]
fn non_convex_domain_is_rejected() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("dart.json");
    fs::write(&file, r#"{"kind": "polygon", "vertices": [[0, 0], [2, 0], [1, 0.2], [1, 2]]}"#).unwrap();
    let o = hbvp(dir.path(), &["metric", "--domain", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_json(&o);
    assert_eq!(err["error"]["kind"], "non-convex");
    assert!(err["error"]["message"].as_str().unwrap().starts_with("non-convex input"));
    assert!(!dir.path().join("metric.json").exists());
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(hbvp(dir.path(), &["metric", "--square", "--disk", "64"]).status.code(), Some(2));
    assert_eq!(hbvp(dir.path(), &["metric"]).status.code(), Some(2));
    let o = hbvp(dir.path(), &["solve", "--square", "--h", "-0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["error"]["message"].as_str().unwrap().contains("--h"));
    assert_eq!(hbvp(dir.path(), &["solve", "--square", "--grading", "2,4"]).status.code(), Some(2));
    assert_eq!(hbvp(dir.path(), &["profile", "--coeffs", "nope"]).status.code(), Some(2));
}

#[test]
fn thread_count_is_validated_and_recorded() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_hbvp"))
            .args(["sector", "--aperture", "1.0", "--out"])
            .arg(dir.path())
            .env("HBVP_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(run("zero").status.code(), Some(2));
    assert_eq!(run("0").status.code(), Some(2));
    assert_eq!(run("3").status.code(), Some(0));
    assert_eq!(report(dir.path(), "sector")["threads"], 3);
}

fn strip_run_specific(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v["config"]["common"].as_object_mut().unwrap().remove("out");
    v
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        assert_eq!(hbvp(dir.path(), &["metric", "--ngon", "7", "--seed", "11", "--pairs", "20"]).status.code(), Some(0));
        assert_eq!(hbvp(dir.path(), &["profile"]).status.code(), Some(0));
    }
    for file in ["metric.csv", "profile.csv"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    for command in ["metric", "profile"] {
        assert_eq!(strip_run_specific(report(a.path(), command)), strip_run_specific(report(b.path(), command)));
    }
    let csv = fs::read_to_string(a.path().join("metric.csv")).unwrap();
    assert!(csv.starts_with("# hbvp metric seed=11\n"));
    assert_eq!(csv.lines().count(), 22);
}

#[test]
fn explicit_metric_pair() {
    let dir = TempDir::new().unwrap();
    let o = hbvp(dir.path(), &["metric", "--disk", "4096", "--p", "0.3,-0.4", "--q", "-0.7,0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "metric");
    let d = r["result"][0]["d_hilbert"].as_f64().unwrap();
    let t = r["result"][0]["d_thompson"].as_f64().unwrap();
    assert!(t <= d && d <= 2.0 * t);
}

#[test]
fn profile_summary() {
    let dir = TempDir::new().unwrap();
    assert_eq!(hbvp(dir.path(), &["profile"]).status.code(), Some(0));
    let r = report(dir.path(), "profile");
    assert!((r["result"]["xbar"].as_f64().unwrap() - 0.59907).abs() <= 1e-5);
    assert!(r["result"]["first_integral_spread"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn solve_and_lipschitz_on_the_square() {
    let dir = TempDir::new().unwrap();
    let o = hbvp(dir.path(), &["solve", "--square", "--h", "0.1", "--eps-steps", "4", "--grading", "0.5,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "solve");
    assert_eq!(r["passed"], true);
    assert_eq!(r["result"]["stages"].as_array().unwrap().len(), 5);
    assert_eq!(r["result"]["gradient_cap"]["violations"], 0);
    let field = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(field.lines().nth(1), Some("x,y,w"));

    let o = hbvp(dir.path(), &["lipschitz", "--square", "--h", "0.05", "--eps-steps", "4", "--corner", "0", "--depths", "0.5,0.45"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "lipschitz");
    assert!(r["result"]["uniform"]["max_ratio"].as_f64().unwrap() <= 1.02);
    assert!(r["result"]["corner_asymptote"]["samples"].is_array());
}

#[test]
fn verify_disk_with_defaults() {
    let dir = TempDir::new().unwrap();
    let o = hbvp(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = hbvp(dir.path(), &["verify-disk"]);
    let r = report(dir.path(), "verify-disk");
    let code = o.status.code().unwrap();
    assert_eq!(code == 0, r["passed"] == true);
    if code != 0 {
        assert_eq!(code, 4);
    }
    // The two-dimensional solve tracks √(1 − r²); the √((1 − r²)/2) check fails.
    assert!(r["result"]["hemisphere_sup_error"].as_f64().unwrap() <= 2e-2);
    assert!(r["result"]["closed_form_sup_error"].as_f64().is_some());
    assert!(dir.path().join("field.csv").exists());
    assert!(dir.path().join("radial.csv").exists());
}
