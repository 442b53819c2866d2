use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kdgf"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn kdgf(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn kdgf_run(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut c = bin();
    c.arg("run")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(extra);
    c.output().expect("binary runs")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn verdict(report: &Value, name: &str) -> String {
    report["certifiers"][name]["verdict"]
        .as_str()
        .unwrap()
        .to_string()
}

#[test]
fn near_sync_run_passes_both_certifiers() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdgf_run(&configs().join("near_sync.toml"), dir.path(), &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(verdict(&r, "order_preservation"), "pass");
    assert_eq!(verdict(&r, "diameter_decay"), "pass");
    assert_eq!(r["equilibrium"]["kind"], "sync");
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "n,t,theta_0,theta_1,theta_2,diameter,potential,grad_norm,order_r,order_phi"
    );
}

#[test]
fn double_well_descends_to_a_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdgf_run(&configs().join("double_well.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(verdict(&r, "descent"), "pass");
    assert_eq!(verdict(&r, "summability"), "pass");
    assert_eq!(r["summary"]["descent_certified"], true);
    let x = r["summary"]["final_point"][0].as_f64().unwrap();
    assert!((x.abs() - 1.0).abs() < 1e-9, "{x}");
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,t,x_0,f_value,grad_norm");
}

#[test]
fn missing_coupling_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("near_sync.toml")).unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, text.replace("coupling = 1.0\n", "")).unwrap();
    let o = kdgf_run(&bad, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coupling"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unreadable_and_malformed_configs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "model = \"identical\"\nn = [").unwrap();
    assert_eq!(kdgf_run(&bad, dir.path(), &[]).status.code(), Some(2));
    let o = kdgf_run(&dir.path().join("nope.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("wild.toml");
    std::fs::write(
        &cfg,
        r#"
model = "nonidentical"
n = 2
coupling = 1.0
step = 1.0
max_steps = 100
stop = "max_steps"

[init]
kind = "near_sync"
delta = 0.1

[omega]
kind = "explicit"
values = [100000.0, -100000.0]
"#,
    )
    .unwrap();
    let o = kdgf_run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn empty_sweep_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("euler_error.toml");
    let o = bin()
        .args([
            "sweep",
            cfg.to_str().unwrap(),
            "--axis",
            "h",
            "--values",
            "",
        ])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn step_sweep_halves_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("euler_error.toml");
    let o = bin()
        .args([
            "sweep",
            cfg.to_str().unwrap(),
            "--axis",
            "h",
            "--values",
            "0.1,0.05,0.025",
            "--quiet",
        ])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let tm: Vec<f64> = (0..3)
        .map(|i| {
            let r = read_json(&dir.path().join(format!("point_{i:03}/report.json")));
            assert_eq!(verdict(&r, "error_bound"), "pass");
            r["certifiers"]["error_bound"]["truncation_max"]
                .as_f64()
                .unwrap()
        })
        .collect();
    for w in tm.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "point,h,seed,status,steps_run,stop_reason,final_grad_norm,error_bound"
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn coupling_sweep_across_cluster_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let t = kdgf(&[
        "thresholds",
        "--n",
        "4",
        "--n0",
        "3",
        "--l",
        "1.0471975511965976",
        "--domega",
        "0.2",
    ]);
    assert_eq!(t.status.code(), Some(0));
    let th: Value = serde_json::from_slice(&t.stdout).unwrap();
    let k_min = th["k_min"].as_f64().unwrap();
    assert!((k_min - 0.5006).abs() < 1e-3);

    let values: Vec<String> = [0.5, 1.5, 2.0, 4.0]
        .iter()
        .map(|f| (f * k_min).to_string())
        .collect();
    let cfg = configs().join("cluster.toml");
    let o = bin()
        .args([
            "sweep",
            cfg.to_str().unwrap(),
            "--axis",
            "K",
            "--values",
            &values.join(","),
            "--quiet",
        ])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for i in 1..4 {
        let r = read_json(&dir.path().join(format!("point_{i:03}/report.json")));
        assert_eq!(verdict(&r, "cluster_invariance"), "pass", "point {i}");
        assert_eq!(verdict(&r, "uniform_bound"), "pass");
    }
    let below = read_json(&dir.path().join("point_000/report.json"));
    assert_ne!(verdict(&below, "cluster_invariance"), "pass");
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("near_sync.toml");
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let o = bin()
            .env("KDGF_THREADS", threads)
            .args([
                "sweep",
                cfg.to_str().unwrap(),
                "--axis",
                "delta",
                "--values",
                "0.05,0.1,0.2,0.25",
                "--quiet",
            ])
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
    }
    for f in [
        "summary.csv",
        "point_002/trajectory.csv",
        "point_003/report.json",
    ] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("near_sync.toml"))
        .unwrap()
        .replace(
            "kind = \"near_sync\"\ndelta = 0.1",
            "kind = \"random_arc\"\nwidth = 1.5",
        );
    let cfg = a.path().join("rand.toml");
    std::fs::write(&cfg, text).unwrap();
    for d in [a.path(), b.path()] {
        assert_eq!(
            kdgf_run(&cfg, &d.join("o"), &["--seed", "99"])
                .status
                .code(),
            Some(0)
        );
    }
    for f in ["trajectory.csv", "report.json"] {
        assert_eq!(
            std::fs::read(a.path().join("o").join(f)).unwrap(),
            std::fs::read(b.path().join("o").join(f)).unwrap()
        );
    }
    let c = b.path().join("other");
    assert_eq!(
        kdgf_run(&cfg, &c, &["--seed", "100"]).status.code(),
        Some(0)
    );
    assert_ne!(
        std::fs::read(a.path().join("o/trajectory.csv")).unwrap(),
        std::fs::read(c.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn json_config_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"model": "identical", "n": 4, "coupling": 2.0, "step": 0.01, "max_steps": 50,
            "stop": "max_steps", "init": {"kind": "near_sync", "delta": 0.2}}"#,
    )
    .unwrap();
    let o = kdgf_run(&cfg, dir.path(), &["--format", "json"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let t = read_json(&dir.path().join("trajectory.json"));
    assert_eq!(t["columns"].as_array().unwrap().len(), 2 + 4 + 5);
    assert_eq!(t["rows"].as_array().unwrap().len(), 51);
    assert_eq!(
        read_json(&dir.path().join("report.json"))["summary"]["steps_run"],
        50
    );
}

#[test]
fn classify_reports_bipolar_class() {
    let o = kdgf(&[
        "classify",
        configs().join("near_bipolar.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classification"]["class"], "A2");
    assert_eq!(v["classification"]["limit"]["kind"], "bipolar");
}

#[test]
fn unmet_hypotheses_are_reported_not_raised() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("near_sync.toml"))
        .unwrap()
        .replace("delta = 0.1", "delta = 0.5");
    let cfg = dir.path().join("wide.toml");
    std::fs::write(&cfg, text).unwrap();
    let o = kdgf_run(&cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(verdict(&r, "diameter_decay"), "error");
    assert!(r["certifiers"]["diameter_decay"]["message"]
        .as_str()
        .unwrap()
        .contains("eps"));
}

#[test]
fn bipolar_run_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdgf_run(&configs().join("near_bipolar.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("report.json"));
    for c in [
        "classify",
        "two_sided_decay",
        "bipolar_containment",
        "bipolar_bounds",
    ] {
        assert_eq!(verdict(&r, c), "pass", "{c}");
    }
}
