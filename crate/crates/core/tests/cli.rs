use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pursuit-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_dict_rip_solve_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let dict = dir.path().join("dict.csv");
    let out = cli(&["gen-dict", "--m", "20", "--n", "30", "--seed", "3", "--out", path(&dict)]);
    assert!(out.status.success());

    let rip = stdout_json(&cli(&["rip", "--in", path(&dict), "--k", "2", "--mode", "exact"]));
    assert_eq!(rip["method"], "ExactEnumeration");
    let exact = rip["delta"].as_f64().unwrap();
    let mc = stdout_json(&cli(&["rip", "--in", path(&dict), "--k", "2", "--mode", "mc", "--trials", "40"]));
    assert!(mc["delta"].as_f64().unwrap() <= exact + 1e-12);

    let trace = dir.path().join("trace.jsonl");
    let instance = dir.path().join("instance.json");
    let solved = stdout_json(&cli(&[
        "solve", "--dict", path(&dict), "--algorithm", "sp", "--k", "2", "--sigma", "0.01",
        "--seed", "4", "--iterations", "5", "--trace-out", path(&trace), "--instance-out", path(&instance),
    ]));
    assert_eq!(solved["iterations_run"], 5);
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 5);

    let summary = stdout_json(&cli(&["diagnose", "--in", path(&trace)]));
    assert_eq!(summary.as_array().unwrap().len(), 5);
    let report = stdout_json(&cli(&[
        "diagnose", "--in", path(&trace), "--dict", path(&dict), "--instance", path(&instance),
    ]));
    assert_eq!(report["algorithm"], "sp");
    assert!(report["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn bounds_report_and_errors() {
    let report = stdout_json(&cli(&[
        "bounds", "--algorithm", "sp", "--delta", "0.1", "--n", "1024", "--k", "10", "--sigma", "1",
    ]));
    assert_eq!(report["condition_met"], true);

    let ds = stdout_json(&cli(&[
        "bounds", "--algorithm", "ds", "--delta", "0.1", "--n", "1", "--k", "1", "--sigma", "1",
    ]));
    assert!((ds["constant"].as_f64().unwrap() - 5.0).abs() < 1e-12);

    let pole = cli(&["bounds", "--algorithm", "ds", "--delta", "0.5", "--n", "1", "--k", "1", "--sigma", "1"]);
    assert!(!pole.status.success());
    assert!(String::from_utf8_lossy(&pole.stderr).starts_with("error: "));

    let bp = cli(&["bounds", "--algorithm", "bp", "--delta", "0.1", "--n", "1", "--k", "1", "--sigma", "1"]);
    assert!(!bp.status.success());
}

#[test]
fn run_writes_identical_results_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(
        &config,
        "m = 24\nn_atoms = 48\nk_values = [2, 4]\nsigma_values = [0.5]\ntrials_per_point = 6\nseed = 9\n",
    )
    .unwrap();
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(format!("out{threads}"));
        let out = cli(&["run", "--config", path(&config), "--out-dir", path(&out_dir), "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out_dir.join("results.jsonl").exists());
        let trials = std::fs::read_to_string(out_dir.join("trials.jsonl")).unwrap();
        assert_eq!(trials.lines().count(), 2 * 6 * 4);
        csvs.push(std::fs::read(out_dir.join("results.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "m = 24\nbogus = 1\n").unwrap();
    let out = cli(&["run", "--config", path(&config), "--out-dir", path(dir.path())]);
    assert!(!out.status.success());
}
