use std::fs;
use std::process::Command;

fn mns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mns"))
}

#[test]
fn run_writes_to_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = mns()
        .args(["run", "--h", "0.25", "--T", "0.5", "--tau", "0.1"])
        .env("MNS_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("energy_nu0p1_tau0p1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
    assert!(dir.path().join("run_final.vtk").exists());
}

#[test]
fn converge_with_config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    fs::write(&cfg, "h = 0.25\ntaus = 0.2, 0.1\nnus = 0.5 # overridden\n").unwrap();
    let out_dir = dir.path().join("res");
    let out = mns()
        .args(["converge", "--nus", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .env("MNS_OUT_DIR", dir.path().join("ignored"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("convergence_nu1.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn invalid_input_fails_with_diagnostic() {
    let out = mns().args(["run", "--tau", "-1"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mns run: error:") && err.contains("tau"), "{err}");

    let out = mns().args(["stir", "--config", "/nonexistent/cfg"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("mns stir: error:"));
}
