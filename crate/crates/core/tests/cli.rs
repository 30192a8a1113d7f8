use std::fs;
use std::path::Path;
use std::process::Command;

fn icefloe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_icefloe"))
}

fn config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn summary(dir: &Path) -> serde_json::Value {
    let text = fs::read_to_string(dir.join("summary.json")).expect("summary.json");
    serde_json::from_str(&text).unwrap()
}

fn run(cfg: &Path, out: &Path, set: &[&str]) -> i32 {
    let mut cmd = icefloe();
    cmd.arg("run").arg(cfg).arg("--out").arg(out);
    for s in set {
        cmd.args(["--set", s]);
    }
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn usage_error_exits_one() {
    let out = icefloe().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = icefloe().args(["converge", "--scheme", "spectral"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_config_exits_one_with_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "scenario=custom\ncells=ten\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), 1);
    let s = summary(&out);
    assert_eq!(s["status"], "error");
    assert!(s["message"].as_str().unwrap().contains("line 2"));
}

#[test]
fn missing_config_file_exits_one_with_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&tmp.path().join("absent.cfg"), &out, &[]), 1);
    assert_eq!(summary(&out)["exit_code"], 1);
}

#[test]
fn completed_run_writes_snapshots_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "scenario = custom\nscheme = weno\ncells = 40\ndx = 20 km\ndt = 10 s\nhorizon = 10 min\nsnapshot_every = 5 min\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), 0);
    let s = summary(&out);
    assert_eq!(s["status"], "completed");
    assert_eq!(s["completion_time"], 600.0);
    let snaps: Vec<_> = fs::read_dir(out.join("snapshots")).unwrap().collect();
    assert!(snaps.len() >= 3, "{snaps:?}");
    assert!(out.join("run.log").exists());
}

#[test]
fn sharp_cd_run_records_blow_up() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "scenario=sharp_vp\nscheme=cd\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), 2);
    let s = summary(&out);
    assert_eq!(s["status"], "blow_up");
    let t = s["blow_up_time"].as_f64().unwrap();
    assert!(t > 2000.0 && t < 3600.0, "{t}");
    assert!(fs::read_to_string(out.join("run.log")).unwrap().contains("blow"));
}

#[test]
fn newton_failure_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "scenario=potential_dirichlet\nk_max=1\nhorizon=1d\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), 3);
    assert_eq!(summary(&out)["status"], "non_convergence");
}

#[test]
fn mms_run_writes_convergence_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "scenario=mms\nscheme=cd\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &["horizon=0.01"]), 0);
    let table = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let lines: Vec<_> = table.lines().collect();
    assert_eq!(lines[0], "dx,err_u,err_h,err_a,rate_u,rate_h,rate_a");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",,,"));
}

#[test]
fn overrides_beat_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "scenario=custom\ncells=40\ndx=20km\ndt=10\nhorizon=100\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &["horizon=50"]), 0);
    assert_eq!(summary(&out)["completion_time"], 50.0);
    assert_eq!(run(&cfg, &out, &["nonsense=1"]), 1);
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "scenario=sharp_vp\nscheme=weno\nhorizon=5 min\nsnapshot_every=1 min\n",
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a, &[]), 0);
    assert_eq!(run(&cfg, &b, &[]), 0);
    for name in ["summary.json", "snapshots/index.csv", "snapshots/snapshot_00005.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn converge_subcommand_prints_and_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = icefloe()
        .args(["converge", "--scheme", "cd", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(tmp.path().join("convergence_cd.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), table.trim());
}
