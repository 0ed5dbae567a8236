use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn socmed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socmed")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn smi_by_hand() {
    let dir = tempfile::tempdir().unwrap();
    let posts = write(
        dir.path(),
        "posts.csv",
        "post_id,account_id,timestamp,sentiment\n\
         s1,a1,2014-04-02T10:00:00Z,1\n\
         s2,a1,2014-04-05T10:00:00Z,1\n\
         s3,a2,2014-04-09T10:00:00Z,-1\n\
         s4,a3,2014-04-20T10:00:00Z,0\n\
         s5,a3,2014-05-01T00:00:00Z,-1\n",
    );
    let out = dir.path().join("smi.csv");
    let res = socmed(&["smi", &posts, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "period,m,smi");
    // April: (2 - 1) / 4 * 100
    assert_eq!(lines[1], "2014-04,4,25");
    assert_eq!(lines[2], "2014-05,1,-100");
    assert!(dir.path().join("smi.csv.manifest.json").exists());
}

#[test]
fn smi_without_posts_fails() {
    let dir = tempfile::tempdir().unwrap();
    let posts = write(dir.path(), "posts.csv", "post_id,account_id,timestamp,sentiment\n");
    let res = socmed(&["smi", &posts, "--out", dir.path().join("x.csv").to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("no posts"));
}

#[test]
fn validate_bundled() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = out.to_str().unwrap();
    let loose = stdout_json(&socmed(&["validate", "@bundled", "--cv", "0.367", "--out", o]));
    assert!((loose["p_value"].as_f64().unwrap() - 0.05).abs() < 0.005);
    assert_eq!(loose["df"], 26);
    let strict = stdout_json(&socmed(&["validate", "@bundled", "--cv", "0.1", "--out", o]));
    assert_eq!(strict["reject"], true);
    let saved: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(saved, strict);
}

#[test]
fn validate_sigma_source_is_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("v.json");
    let o = o.to_str().unwrap();
    assert_eq!(socmed(&["validate", "@bundled", "--out", o]).status.code(), Some(2));
    assert_eq!(socmed(&["validate", "@bundled", "--cv", "0.2", "--sigma-column", "--out", o]).status.code(), Some(2));
    assert_eq!(socmed(&["validate", "@bundled", "--cv", "0.2"]).status.code(), Some(2));
}

#[test]
fn constant_difference_never_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let series = write(dir.path(), "s.csv", "period,cci,smi,sigma\n1,10,4,1\n2,12,6,2\n3,9,3,1\n4,-2,-8,0.5\n");
    let o = dir.path().join("v.json");
    let res = stdout_json(&socmed(&["validate", &series, "--sigma-column", "--out", o.to_str().unwrap()]));
    assert!((res["p_value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(res["reject"], false);
}

#[test]
fn sensitivity_rejects_inverted_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("c.csv");
    let res = socmed(&["sensitivity", "@bundled", "--eta-min", "0.5", "--eta-max", "0.1", "--out", o.to_str().unwrap()]);
    assert!(!res.status.success());
}

#[test]
fn sensitivity_writes_curve_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("c.csv");
    let res = socmed(&["sensitivity", "@bundled", "--steps", "10", "--out", o.to_str().unwrap()]);
    assert!(res.status.success());
    let curve = fs::read_to_string(&o).unwrap();
    assert_eq!(curve.lines().next(), Some("eta,D,p_value"));
    assert_eq!(curve.lines().count(), 11);
    let t: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.threshold.json")).unwrap()).unwrap();
    assert!((t["threshold_eta"].as_f64().unwrap() - 0.367).abs() < 0.005);
}

#[test]
fn calibrate_needs_seed_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("cal.json");
    let o = o.to_str().unwrap();
    let base = ["calibrate", "@bundled", "--cv", "0.2", "--mu", "-3", "--sims", "2000", "--out", o];
    assert_eq!(socmed(&base).status.code(), Some(2));
    let with_seed: Vec<&str> = base.iter().copied().chain(["--seed", "9"]).collect();
    let a = stdout_json(&socmed(&with_seed));
    let b = stdout_json(&socmed(&with_seed));
    assert_eq!(a, b);
    assert_eq!(a["n_sims"], 2000);
}

#[test]
fn simulate_pipeline_quality_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"n_users": 40, "away_fraction": 0.2, "broker_share": 0.7, "duplicate_fraction": 0.1}"#);
    let sim = dir.path().join("sim");
    assert_eq!(socmed(&["simulate", &cfg, "--out", sim.to_str().unwrap()]).status.code(), Some(2));
    let res = socmed(&["simulate", &cfg, "--seed", "3", "--out", sim.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let first = fs::read(sim.join("api_posts.jsonl")).unwrap();

    let run = dir.path().join("run");
    let p = |f: &str| sim.join(f).to_string_lossy().into_owned();
    let res = socmed(&[
        "pipeline",
        "--api",
        &p("api_posts.jsonl"),
        "--broker",
        &p("broker_posts.jsonl"),
        "--gazetteer",
        &p("gazetteer.csv"),
        "--out",
        run.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["pseudo_survey.jsonl", "error_report.json", "rejects.jsonl", "manifest.json"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(run.join("error_report.json")).unwrap()).unwrap();
    assert!(report["duplicates_merged"].as_u64().unwrap() > 0);

    let q = socmed(&[
        "quality",
        "--records",
        run.join("pseudo_survey.jsonl").to_str().unwrap(),
        "--ground-truth",
        &p("ground_truth.json"),
        "--out",
        dir.path().join("q.json").to_str().unwrap(),
    ]);
    assert!(q.status.success(), "{}", String::from_utf8_lossy(&q.stderr));
    let q = stdout_json(&q);
    assert_eq!(q["register_size"], 40);

    socmed(&["simulate", &cfg, "--seed", "3", "--out", sim.to_str().unwrap()]);
    assert_eq!(fs::read(sim.join("api_posts.jsonl")).unwrap(), first);
}

#[test]
fn quality_rejects_wrong_file() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.jsonl", "{\"not\": \"a record\"}\n");
    let res = socmed(&[
        "quality",
        "--records",
        &junk,
        "--ground-truth",
        &junk,
        "--out",
        dir.path().join("q.json").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}
