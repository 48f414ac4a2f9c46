use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use acflow_core::io::decode_checkpoint;
use acflow_core::PadFactor;

const RUN_CFG: &str = "\
[grid]
dim = 2
n = 16
[physics]
eps = 1e-2
[time]
T = 0.2
dt = 5e-3
save_stride = 0.02
[data]
family = taylor-green
";

fn acflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acflow")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", RUN_CFG);
    let out = dir.path().join("out");
    let o = acflow(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,E,D,balance_residual,div_u_L2,Qu_L2,Qu_L4,sqrt_eps_p_L2,u_L2,theta_L2"
    );
    assert_eq!(lines.count(), 11);
    assert!(!out.join("checkpoints").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let o = acflow(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("usage"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", &RUN_CFG.replace("eps = 1e-2", "eps = -1"));
    let o = acflow(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse_config: [physics] eps must be > 0 (line 5)"), "{}", stderr(&o));

    let o = acflow(&["run", "--config", "/nonexistent.cfg", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // a fixed step far above the advective limit of a small box
    let cfg = write(dir.path(), "cfl.cfg", &RUN_CFG.replace("n = 16", "n = 16\nlength = 0.01pi").replace("eps = 1e-2", "eps = 1e-2\nmu = 0\nkappa = 0"));
    let o = acflow(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("acflow run: run:"), "{}", stderr(&o));
}

#[test]
fn restart_from_checkpoint_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", &RUN_CFG.replace("family = taylor-green", "family = random\nseed = 9"));
    let full = dir.path().join("full");
    let o = acflow(&["run", "--config", &cfg, "--out", full.to_str().unwrap(), "--checkpoint-every", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mid = full.join("checkpoints").join("save_000004.acnsf");
    assert!(mid.exists());
    assert!(full.join("checkpoints").join("save_000008.acnsf").exists());

    let resumed = dir.path().join("resumed");
    let o = acflow(&[
        "run",
        "--config",
        &cfg,
        "--out",
        resumed.to_str().unwrap(),
        "--restart",
        mid.to_str().unwrap(),
        "--checkpoint-every",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = decode_checkpoint(&fs::read(full.join("checkpoints/final.acnsf")).unwrap(), PadFactor::ThreeHalves).unwrap();
    let b = decode_checkpoint(&fs::read(resumed.join("checkpoints/final.acnsf")).unwrap(), PadFactor::ThreeHalves).unwrap();
    assert_eq!(a.t, b.t);
    let drift = a.u.sub(&b.u).l2_norm() / a.u.l2_norm();
    assert!(drift <= 1e-12, "drift {drift:e}");
    assert!(a.theta.sub(&b.theta).l2_norm() <= 1e-12 * a.theta.l2_norm());
    assert!(a.p.sub(&b.p).l2_norm() <= 1e-12 * a.p.l2_norm());

    let csv = fs::read_to_string(resumed.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7);

    let mut bad = fs::read(&mid).unwrap();
    bad[0] = b'Z';
    let badp = dir.path().join("bad.acnsf");
    fs::write(&badp, bad).unwrap();
    let o = acflow(&["run", "--config", &cfg, "--out", resumed.to_str().unwrap(), "--restart", badp.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not an ACNSF1 checkpoint"));
}

fn sweep_cfg() -> String {
    format!(
        "{}[sweep]\neps_list = 1e-1, 1e-2, 1e-3, 1e-4\n[diagnostics]\nnorms = Qu:2:4:0, Pu-err:2:2:0, theta-err:2:2:0, p:4:4:-2\n",
        RUN_CFG.replace("eps = 1e-2\n", "")
    )
}

#[test]
fn sweep_writes_one_record_per_eps_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.cfg", &sweep_cfg());
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let o = acflow(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let nd = fs::read_to_string(out1.join("sweep.ndjson")).unwrap();
    let rows: Vec<serde_json::Value> = nd.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let norms = row["norms"].as_object().unwrap();
        for label in ["Qu:L2t_L4x", "Pu-err:L2t_L2x", "theta-err:L2t_L2x", "p:L4t_W-2,4x"] {
            assert!(norms.contains_key(label), "{label} missing from {norms:?}");
        }
    }
    for name in ["sweep.ndjson", "norms.csv", "fits.csv", "summary.json", "eps_03/trace.csv"] {
        assert_eq!(fs::read(out1.join(name)).unwrap(), fs::read(out2.join(name)).unwrap(), "{name}");
    }
    assert_eq!(fs::read_to_string(out1.join("norms.csv")).unwrap().lines().count(), 5);
}

#[test]
fn property_suites_pass() {
    let o = acflow(&["check-projectors", "--dim", "3", "--n", "8", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS") && !text.contains("FAIL"));

    let dir = tempfile::tempdir().unwrap();
    let o = acflow(&["mollifier-test", "--n", "32", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let y1 = fs::read_to_string(dir.path().join("y1_p4.csv")).unwrap();
    assert!(y1.starts_with("alpha,numerator,bound,ratio"));

    let o = acflow(&["check-projectors", "--n", "7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wave_residual_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let fine = RUN_CFG.replace("dt = 5e-3", "dt = 2.5e-3").replace("save_stride = 0.02", "save_stride = 0.0025");
    let cfg = write(dir.path(), "w.cfg", &fine);
    let o = acflow(&["wave-residual", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("wave_residual.json").exists());

    let coarse = write(dir.path(), "c.cfg", RUN_CFG);
    let o = acflow(&["wave-residual", "--config", &coarse]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pressure_wave_residual"));

    let out = dir.path().join("cmp");
    let o = acflow(&["compare", "--config", &cfg, "--out", out.to_str().unwrap(), "--window-factor", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 81);
    let limit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("pressure_limit.json")).unwrap()).unwrap();
    assert!(limit["relative"].as_f64().unwrap().is_finite());
}
