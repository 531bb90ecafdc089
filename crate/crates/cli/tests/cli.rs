use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracstep(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracstep"));
    cmd.args(args).env_remove("FRACSTEP_OUT");
    if let Some(dir) = out_env {
        cmd.env("FRACSTEP_OUT", dir);
    }
    cmd.output().expect("spawn fracstep")
}

fn small_table(out: &Path) -> Output {
    fracstep(
        &["--example", "1", "--alpha", "0.5", "--r", "2", "--N", "64,128", "--out", out.to_str().unwrap()],
        None,
    )
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn table_matches_published_entry() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_table(dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("example1_r2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha,r,N,M,E_L,rate_L,E_G,rate_G,expected_local,expected_global"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[2], "64");
    assert_eq!(first[4], "1.8993e-07");
    assert_eq!(first[6], "3.3526e-05");
    let second: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(second[5], "2.0029");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(small_table(a.path()).status.success());
    assert!(small_table(b.path()).status.success());
    for name in ["example1_r2.csv", "example1_r2.provenance.csv", "example1_r2.txt"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn environment_overrides_out_flag() {
    let flag = tempfile::tempdir().unwrap();
    let env = tempfile::tempdir().unwrap();
    let o = fracstep(
        &["--alpha", "0.5", "--r", "2", "--N", "64,128", "--out", flag.path().to_str().unwrap()],
        Some(env.path()),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(env.path().join("example1_r2.csv").exists());
    assert!(!flag.path().join("example1_r2.csv").exists());
}

#[test]
fn bad_value_exits_one_and_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracstep(&["--alpha", "1.5", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`alpha`"), "{}", stderr(&o));

    let o = fracstep(&["--N", "64,100", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`N`"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "alpha = 0.5\nbogus = 3\n").unwrap();
    let o = fracstep(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`bogus`"), "{}", stderr(&o));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!("# small run\nalpha = 0.3\nr = 1\nN = 64,128\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = fracstep(&["--config", cfg.to_str().unwrap(), "--alpha", "0.5", "--r", "2"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("example1_r2.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0.5,"));
    assert!(!out.join("example1_r1.csv").exists());
}

#[test]
fn audit_mode_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracstep(
        &["--mode", "audit", "--N", "32,64", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("audit.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3 * 4 * 2);
    assert!(rows.iter().all(|r| r.ends_with(",pass")), "{csv}");
}

#[test]
fn help_exits_zero() {
    let o = fracstep(&["--help"], None);
    assert_eq!(o.status.code(), Some(0));
}
