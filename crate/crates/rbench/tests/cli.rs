use std::path::Path;
use std::process::{Command, Output};

fn rbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbench")).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = r#"{"lengths": [1, 2, 4, 8, 16, 32, 64], "k": 10, "r": 50,
  "pulse": {"shape": "square", "pi_duration": 1e-6},
  "noise": {"depolarizing_per_clifford": 0.02}, "seed": 5}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn clifford_verify_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rbench(tmp.path(), &["clifford", "verify"]);
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["mean_gate_count"], 1.875);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.json", r#"{"preset": "electron-square", "lengths": []}"#);
    let out = rbench(tmp.path(), &["--config", &bad, "rb", "run"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("lengths"));

    let unknown = write(tmp.path(), "unknown.json", r#"{"preset": "electron-square", "pulse": {"width": 1}}"#);
    let out = rbench(tmp.path(), &["--config", &unknown, "rb", "run"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("pulse"), "{}", stderr(&out));

    let out = rbench(tmp.path(), &["--preset", "nope", "rb", "run"]);
    assert_eq!(code(&out), 2);

    let capped = write(tmp.path(), "cap.json", r#"{"preset": "electron-square", "max_total_shots": 10}"#);
    assert_eq!(code(&rbench(tmp.path(), &["--config", &capped, "rb", "run"])), 2);
}

#[test]
fn run_fit_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.json", SMALL);
    let out = rbench(tmp.path(), &["--config", &cfg, "--out", "d", "rb", "run"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("d/dataset.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7 * 10 * 50);

    let out = rbench(tmp.path(), &["--out", "d", "rb", "fit", "--mode", "combined", "--bootstrap", "50"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(tmp.path().join("d/fit.json")).unwrap();
    let top_level: Vec<&str> =
        text.lines().filter_map(|l| l.strip_prefix("  \"")).filter_map(|l| l.split('"').next()).collect();
    assert_eq!(top_level, ["seed", "shape", "pi_duration", "interleaved_gate", "fit", "bootstrap", "points"]);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let p = report["fit"]["p"]["value"].as_f64().unwrap();
    assert!((p - 0.98).abs() < 0.02, "{p}");
    let decay = std::fs::read_to_string(tmp.path().join("d/decay.csv")).unwrap();
    assert!(decay.starts_with("n,mean_success,sem,fit_value\n1,"));
    assert_eq!(decay.lines().count(), 8);
    for name in ["decay_up.csv", "decay_down.csv"] {
        let t = std::fs::read_to_string(tmp.path().join("d").join(name)).unwrap();
        assert!(t.starts_with("n,mean_p_up,sem,fit_value\n"));
    }

    for mode in ["free", "fixed", "fixed=0.5"] {
        let out = rbench(tmp.path(), &["--out", "d", "rb", "fit", "--mode", mode]);
        assert_eq!(code(&out), 0, "{mode}: {}", stderr(&out));
    }
    let out = rbench(tmp.path(), &["--out", "d", "rb", "fit", "--mode", "sideways"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn degenerate_fit_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "ideal.json",
        r#"{"lengths": [1, 2, 4], "k": 3, "r": 10, "pulse": {"shape": "square", "pi_duration": 1e-6}}"#,
    );
    assert_eq!(code(&rbench(tmp.path(), &["--config", &cfg, "--out", "d", "rb", "run"])), 0);
    // Target-down P↑ is 0 everywhere: no decay to fit against a pinned 0.
    let out = rbench(tmp.path(), &["--out", "d", "rb", "fit", "--mode", "fixed=0"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    // Perfect success against the 1/2 asymptote fits p = 1.
    let out = rbench(tmp.path(), &["--out", "d", "rb", "fit", "--mode", "combined"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn missing_or_corrupt_dataset_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&rbench(tmp.path(), &["--out", "nothing", "rb", "fit"])), 1);
    let cfg = write(tmp.path(), "small.json", SMALL);
    assert_eq!(code(&rbench(tmp.path(), &["--config", &cfg, "--out", "d", "rb", "run"])), 0);
    std::fs::write(tmp.path().join("d/dataset.csv"), "n,k,target,shot_index,outcome\n1,0,up,0,3\n").unwrap();
    assert_eq!(code(&rbench(tmp.path(), &["--out", "d", "rb", "fit"])), 1);
}

#[test]
fn interleaved_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.json", SMALL);
    assert_eq!(code(&rbench(tmp.path(), &["--config", &cfg, "--out", "ref", "rb", "run"])), 0);
    assert_eq!(code(&rbench(tmp.path(), &["--out", "ref", "rb", "fit"])), 0);
    for gate in ["Y", "X", "-X/2"] {
        let c = write(tmp.path(), "g.json", &SMALL.replace("\"seed\": 5", &format!("\"seed\": 5, \"interleaved_gate\": \"{gate}\"")));
        let dir = format!("g{}", gate.replace('/', "_"));
        assert_eq!(code(&rbench(tmp.path(), &["--config", &c, "--out", &dir, "rb", "run"])), 0);
    }
    let out = rbench(
        tmp.path(),
        &["--out", "t", "rb", "interleaved", "--reference", "ref/fit.json", "--dataset", "gY", "gX", "g-X_2"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = std::fs::read_to_string(tmp.path().join("t/interleaved.csv")).unwrap();
    let gates: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(gates, ["X", "Y", "-X/2"]);
    assert!(table.starts_with("gate,p_gate,f_gate,f_gate_lo,f_gate_hi,above_one\n"));

    let out = rbench(tmp.path(), &["--out", "ref", "rb", "interleaved", "--reference", "ref/fit.json", "--dataset", "ref"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn empty_results_give_valid_empty_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.json", SMALL);
    assert_eq!(code(&rbench(tmp.path(), &["--config", &cfg, "--out", "ref", "rb", "run"])), 0);
    assert_eq!(code(&rbench(tmp.path(), &["--out", "ref", "rb", "fit"])), 0);
    let out = rbench(tmp.path(), &["--out", "e", "rb", "interleaved", "--reference", "ref/fit.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("e/interleaved.csv")).unwrap(),
        "gate,p_gate,f_gate,f_gate_lo,f_gate_hi,above_one\n"
    );
    let out = rbench(tmp.path(), &["--config", &cfg, "--out", "s", "sweep", "run"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap(),
        "pi_duration,shape,p,f_c,f_c_lo,f_c_hi,f_single,error\n"
    );
    let sweep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("s/sweep.json")).unwrap()).unwrap();
    assert_eq!(sweep["rows"], serde_json::json!([]));
}

#[test]
fn single_point_sweep_matches_run_and_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.json", SMALL);
    assert_eq!(code(&rbench(tmp.path(), &["--config", &cfg, "--out", "d", "rb", "run"])), 0);
    assert_eq!(code(&rbench(tmp.path(), &["--out", "d", "rb", "fit"])), 0);
    let sweep_cfg = write(
        tmp.path(),
        "sweep.json",
        &SMALL.replace("\"seed\": 5", "\"seed\": 5, \"sweep\": [{\"pi_duration\": 1e-6, \"shape\": \"square\"}]"),
    );
    assert_eq!(code(&rbench(tmp.path(), &["--config", &sweep_cfg, "--out", "s", "sweep", "run"])), 0);
    let read = |p: &str| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join(p)).unwrap()).unwrap()
    };
    let fit = read("d/fit.json");
    let sweep = read("s/sweep.json");
    assert_eq!(sweep["rows"][0]["fit"]["p"], fit["fit"]["p"]);
    assert_eq!(sweep["rows"][0]["fit"]["clifford_fidelity"], fit["fit"]["clifford_fidelity"]);
    // The resolved configuration written next to the sweep parses back to itself.
    let echoed = read("s/config.json");
    let again = write(tmp.path(), "again.json", &serde_json::to_string(&echoed).unwrap());
    assert_eq!(code(&rbench(tmp.path(), &["--config", &again, "--out", "s2", "sweep", "run"])), 0);
    assert_eq!(read("s2/sweep.json"), sweep);
}

#[test]
fn sweep_records_failed_points() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.json",
        r#"{"lengths": [1, 2, 4], "k": 3, "r": 10, "pulse": {"shape": "square", "pi_duration": 1e-6},
            "report": {"fit_mode": "free_pinf"},
            "sweep": [{"pi_duration": 1e-6, "shape": "square"}, {"pi_duration": 2e-6, "shape": "sinc3"}]}"#,
    );
    let out = rbench(tmp.path(), &["--config", &cfg, "--out", "s", "sweep", "run"]);
    assert_eq!(code(&out), 0);
    let table = std::fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.lines().skip(1).all(|l| l.ends_with(",fit")), "{table}");
}

#[test]
fn pulse_profile_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rbench(tmp.path(), &["--out", "p", "pulse", "profile", "--shape", "sinc3", "--pi-duration", "1e-5", "--points", "21"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["fwhm_hz"].as_f64().unwrap() > 0.0);
    let table = std::fs::read_to_string(tmp.path().join("p/profile.csv")).unwrap();
    assert_eq!(table.lines().count(), 22);
    assert_eq!(code(&rbench(tmp.path(), &["pulse", "profile", "--shape", "gauss"])), 2);
}

#[test]
fn parallelism_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.json", &SMALL.replace("\"noise\": {", "\"noise\": {\"detuning_sigma\": 2e4, "));
    for (dir, threads) in [("a", "1"), ("b", "3")] {
        assert_eq!(code(&rbench(tmp.path(), &["--config", &cfg, "--threads", threads, "--out", dir, "rb", "run"])), 0);
        assert_eq!(code(&rbench(tmp.path(), &["--threads", threads, "--out", dir, "rb", "fit", "--bootstrap", "40"])), 0);
    }
    for name in ["dataset.csv", "dataset.json", "fit.json", "decay.csv", "decay_up.csv", "decay_down.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
