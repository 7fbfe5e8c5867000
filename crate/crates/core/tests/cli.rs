use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const P3: &str = r#"{"n":3,"edges":[[1,2],[2,3]],"theta":[0.5,0.5,0.5],"delta":[1,1,1]}"#;
const K3: &str = r#"{"n":3,"edges":[[1,2],[2,3],[1,3]]}"#;

fn secalloc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secalloc")).current_dir(dir).args(args).output().expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p3.json"), P3).unwrap();
    fs::write(dir.path().join("k3.json"), K3).unwrap();
    dir
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn dominating_on_paths_and_triangles() {
    let dir = setup();
    let d = dir.path();
    let out = secalloc(d, &["dominating", "--network", "p3.json", "--budget", "1", "--out", "a"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read(d, "a/dominating.json"), "[[2]]\n");
    let summary = json(d, "a/dominating_summary.json");
    assert_eq!(summary["count"], 1);
    assert_eq!(summary["subset_count"], 3);

    secalloc(d, &["dominating", "--network", "k3.json", "--budget", "1", "--out", "b"]);
    assert_eq!(json(d, "b/dominating_summary.json")["count"], 3);

    secalloc(d, &["dominating", "--network", "p3.json", "--budget", "2", "--out", "c", "--verify"]);
    assert_eq!(json(d, "c/dominating_summary.json")["count"], 4);
}

#[test]
fn dominating_error_codes() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("bad.json"), r#"{"n":3,"edges":[[1,2]"#).unwrap();
    fs::write(d.join("split.json"), r#"{"n":2,"edges":[]}"#).unwrap();
    fs::write(d.join("path5.json"), r#"{"n":5,"edges":[[1,2],[2,3],[3,4],[4,5]]}"#).unwrap();
    assert_eq!(secalloc(d, &["dominating", "--network", "bad.json"]).status.code(), Some(2));
    assert_eq!(secalloc(d, &["dominating", "--network", "split.json"]).status.code(), Some(3));
    assert_eq!(secalloc(d, &["dominating", "--network", "path5.json", "--budget", "1"]).status.code(), Some(4));
    assert_eq!(secalloc(d, &["dominating", "--network", "missing.json"]).status.code(), Some(2));
}

#[test]
fn impact_on_path() {
    let dir = setup();
    let d = dir.path();
    let out = secalloc(d, &["impact", "--network", "p3.json", "--attack", "1", "--target", "3", "--monitors", "2", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let result = json(d, "impact.json");
    assert_eq!(result["status"], "bounded");
    assert!((result["value"].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-8);

    let out = secalloc(d, &["impact", "--network", "p3.json", "--attack", "1", "--target", "1", "--monitors", "2"]);
    assert_eq!(out.status.code(), Some(7));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid scenario"));

    let args = ["impact", "--network", "p3.json", "--attack", "1", "--target", "2", "--monitors", "3"];
    assert_eq!(secalloc(d, &args).status.code(), Some(0));
    assert_eq!(json(d, "impact.json")["status"], "unbounded");
    let strict: Vec<&str> = args.iter().copied().chain(["--require-bounded"]).collect();
    assert_eq!(secalloc(d, &strict).status.code(), Some(5));
}

#[test]
fn solve_is_deterministic_across_workers() {
    let dir = setup();
    let d = dir.path();
    for (w, out) in [("1", "w1"), ("8", "w8")] {
        let o = secalloc(d, &["solve", "--network", "p3.json", "--budget", "1", "--kappa", "5", "--workers", w, "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = read(d, "w1/solution.json");
    assert_eq!(a, read(d, "w8/solution.json"));
    assert!(a.ends_with('\n'));
    let sol: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(sol["m_star"], serde_json::json!([2]));
    assert_eq!(sol["a_star"], 1);
    assert!((sol["r_star"].as_f64().unwrap() - 5.722222).abs() < 1e-6);
    assert_eq!(secalloc(d, &["solve", "--network", "nowhere.json"]).status.code(), Some(2));
}

#[test]
fn solve_with_config_verify_and_zero_dump() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("cfg.json"), r#"{"network":"p3.json","budget":2,"kappa":1.0,"out":"cfg_out"}"#).unwrap();
    let o = secalloc(d, &["solve", "--config", "cfg.json", "--kappa", "5", "--verify", "--dump-zeros"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sol = json(d, "cfg_out/solution.json");
    // κ = 5 from the flag, budget 2 from the file
    assert_eq!(sol["table"].as_array().unwrap().len(), 4);
    assert!((sol["r_star"].as_f64().unwrap() - 5.722222).abs() < 1e-6);
    let zeros = json(d, "cfg_out/zeros.json");
    assert_eq!(zeros.as_array().unwrap().len(), 6);
}

#[test]
fn belief_table_from_file() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("belief.json"), r#"{"1":{"2":0.5,"3":0.5},"2":{"1":0.5,"3":0.5},"3":{"1":0.5,"2":0.5}}"#).unwrap();
    let o = secalloc(d, &["solve", "--network", "p3.json", "--budget", "1", "--belief", "belief.json", "--out", "b"]);
    assert_eq!(o.status.code(), Some(0));
    fs::write(d.join("skewed.json"), r#"{"1":{"2":0.9}}"#).unwrap();
    let o = secalloc(d, &["solve", "--network", "p3.json", "--budget", "1", "--belief", "skewed.json"]);
    assert_eq!(o.status.code(), Some(7));
}

#[test]
fn experiments_write_artifacts() {
    let dir = setup();
    let d = dir.path();
    let o = secalloc(d, &["experiment", "fig2", "--n-list", "10,15", "--samples", "5", "--seed", "1", "--out", "f"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(d, "f/fig2.csv");
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("n,samples,mean_dom_count,subset_count\n"));
    secalloc(d, &["experiment", "fig2", "--n-list", "10,15", "--samples", "5", "--seed", "1", "--out", "g", "--workers", "4"]);
    assert_eq!(csv, read(d, "g/fig2.csv"));

    let o = secalloc(d, &["experiment", "simulate", "--network", "p3.json", "--attack", "1", "--target", "3", "--monitors", "2", "--out", "s"]);
    assert_eq!(o.status.code(), Some(0));
    let trace = read(d, "s/trace.csv");
    let header: Vec<&str> = trace.lines().next().unwrap().split(',').collect();
    let p_m = header.iter().position(|h| *h == "p_m2").unwrap();
    for line in trace.lines().skip(1) {
        let power: f64 = line.split(',').nth(p_m).unwrap().parse().unwrap();
        assert!(power <= 1.0);
    }
    assert_eq!(read(d, "s/trace.json").lines().count(), 8);
}
