mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::hier;
use dsc::symbol::{write_symbol, GridFunction, Symbol};

fn experiments() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments")
}

fn dsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsc")).args(args).output().expect("run dsc")
}

fn summary_value(out: &Path, key: &str) -> f64 {
    let text = fs::read_to_string(out.join("summary.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no `{key}` in summary"))
        .parse()
        .unwrap()
}

#[test]
fn unknown_key_fails_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "dim = 2\nbogus_key = 3\n").unwrap();
    let o = dsc(&["build-symbol", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus_key"));
}

#[test]
fn bad_value_fails_with_its_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "dim = 2\nK = three\n").unwrap();
    let o = dsc(&["build-symbol", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`K`"));
}

#[test]
fn unknown_command_and_missing_config_exit_one() {
    let cfg = experiments().join("smoke-build.cfg");
    assert_eq!(dsc(&["frobnicate", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(dsc(&["invert", "--config", "/nonexistent/x.cfg"]).status.code(), Some(1));
}

#[test]
fn unconverged_inversion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiments().join("smoke-invert.cfg");
    let o = dsc(&[
        "invert",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "max_iter=1",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("iterations.log").exists());
}

#[test]
fn applying_the_identity_reproduces_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let id = Symbol::<f64>::identity(3, hier(2, 6, 1, 5));
    write_symbol(&id, fs::File::create(dir.path().join("id.dsc")).unwrap()).unwrap();
    let u = GridFunction::<f64>::random_bandlimited(2, 32, 8, 3).unwrap();
    u.write_to(fs::File::create(dir.path().join("u.dscf")).unwrap()).unwrap();
    let cfg = dir.path().join("apply.cfg");
    fs::write(&cfg, "dim = 2\nn = 32\ninput = id.dsc\nfield = u.dscf\n").unwrap();
    let out = dir.path().join("out");
    let o = dsc(&["apply", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(out.join("output.dscf")).unwrap(), fs::read(dir.path().join("u.dscf")).unwrap());
    assert!(out.join("output.pgm").exists());
}

#[test]
fn oracle_check_compose_is_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiments().join("oracle-compose.cfg");
    let o = dsc(&["oracle-check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let err = summary_value(dir.path(), "relative_error");
    assert!(err <= 1e-3, "{err:e}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = experiments().join("smoke-build.cfg");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = dsc(&["build-symbol", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap(), "--seed", "7"]);
        assert!(o.status.success());
    }
    for name in ["symbol.dsc", "summary.txt"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
