//! Exit codes and output files of the `dtn-spectral` binary.

use std::path::Path;
use std::process::Command;

const T1: &str = "[domain]\nkind = \"halfline1d\"\nh = 1.0\nlength = 3.0\n[window]\nlower = 0.0\nupper = 4.0\nstep = 0.5\n";

fn run(dir: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_dtn-spectral"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn subcommands_succeed_on_t1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t1.toml");
    std::fs::write(&cfg, T1).unwrap();
    let cfg = cfg.to_str().unwrap();
    for sub in ["validate", "classify", "oracle", "measures", "convergence"] {
        assert_eq!(run(dir.path(), &[sub, "--config", cfg, "--threads", "1", "--seed", "3"]), 0, "{sub}");
    }
    for f in ["validate.json", "report.json", "samples.csv", "boundary_values.dat", "poles.dat", "oracle.json", "measures.json", "convergence.json"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn bad_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["classify", "--config", "/nonexistent/x.toml"]), 1);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, T1.replace("h = 1.0", "h = -1.0")).unwrap();
    assert_eq!(run(dir.path(), &["classify", "--config", bad.to_str().unwrap()]), 1);
    std::fs::write(&bad, T1.replace("step", "stepp")).unwrap();
    assert_eq!(run(dir.path(), &["oracle", "--config", bad.to_str().unwrap()]), 1);
}
