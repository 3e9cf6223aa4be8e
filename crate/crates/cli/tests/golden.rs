//! Byte-for-byte comparison of the documented sweeps and baseline commands with stored output.
//! Run with `UPDATE_GOLDEN=1` to regenerate the stored files.

use std::path::PathBuf;
use std::process::Command;

use storage_equilibria::{Config, Variant};
use storage_equilibria_cli::figures::{BASELINE, FIGURES};
use storage_equilibria_cli::sweep::{run_sweep, sweep_csv};
use storage_equilibria_cli::{cmd_equilibrium, cmd_policy};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.csv"))
}

fn check(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from {}:\n{actual}", path.display());
}

#[test]
fn figure_sweeps() {
    for fig in FIGURES {
        let spec = fig.spec().unwrap();
        let rows = run_sweep(&spec).unwrap();
        check(fig.name, &sweep_csv(&spec, &rows));
    }
}

#[test]
fn baseline_equilibria_and_policy() {
    let cfg = Config::parse(BASELINE).unwrap();
    check("baseline_private", &cmd_equilibrium(&cfg, Variant::Private, false).unwrap().csv);
    let public = cfg.with_overrides([("sigma", "1"), ("n", "10")]).unwrap();
    check("baseline_targeted", &cmd_equilibrium(&public, Variant::Targeted, false).unwrap().csv);
    check("baseline_policy", &cmd_policy(&cfg.with_overrides([("sigma", "1"), ("n", "20")]).unwrap()).unwrap().csv);
}

#[test]
fn binary_reproduces_library_output() {
    let fig = FIGURES[0];
    let out = Command::new(env!("CARGO_BIN_EXE_storeq"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .args(fig.args())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spec = fig.spec().unwrap();
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), sweep_csv(&spec, &rows));
}
