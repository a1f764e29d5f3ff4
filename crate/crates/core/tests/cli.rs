//! End-to-end tests of the `rcbo` binary: argument handling, exit codes,
//! output files, and byte-level reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rcbo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcbo"))
        .args(args)
        .current_dir(dir)
        .env_remove("RCBO_SEED")
        .output()
        .expect("binary runs")
}

fn tmpdir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("rcbo-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn optimize_happy_path_writes_report_and_trace() {
    let dir = tmpdir("optimize");
    let out = rcbo(
        &[
            "optimize", "--objective", "ackley", "--domain", "ball", "--radius", "3", "--center",
            "0,0", "--scheme", "projection", "-N", "50", "--alpha", "1e4", "--beta", "1",
            "--sigma", "4", "--h", "0.1", "--steps", "10", "--seed", "42", "--trace", "--out",
            "run",
        ],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("final_consensus ="));
    assert!(stdout.contains("objective_value ="));
    assert!(dir.join("run/report.csv").exists());
    let trace = fs::read_to_string(dir.join("run/trace.csv")).unwrap();
    // header + initial consensus + 10 steps
    assert_eq!(trace.lines().filter(|l| !l.starts_with('#')).count(), 12);
    // the logged configuration is emitted before stepping
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("config scheme = projection"), "stderr: {stderr}");
    assert!(stderr.contains("config seed = 42"));
}

#[test]
fn identical_argv_produces_byte_identical_output() {
    let dir = tmpdir("determinism");
    let args = [
        "optimize", "--objective", "rosenbrock", "--radius", "1.4142135623730951", "--scheme",
        "projection", "-N", "30", "--alpha", "1e4", "--beta", "1", "--sigma", "4", "--h", "0.05",
        "--steps", "20", "--seed", "7", "--trace", "--out", "a",
    ];
    assert!(rcbo(&args, &dir).status.success());
    let mut args_b = args;
    args_b[args.len() - 1] = "b";
    assert!(rcbo(&args_b, &dir).status.success());
    for file in ["report.csv", "trace.csv"] {
        let a = fs::read(dir.join("a").join(file)).unwrap();
        let b = fs::read(dir.join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical invocations");
    }
}

#[test]
fn missing_required_flag_exits_one() {
    let dir = tmpdir("missing");
    let out = rcbo(&["optimize", "--scheme", "projection"], &dir);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("--objective"), "stderr: {stderr}");
}

#[test]
fn unknown_flag_exits_nonzero_with_usage() {
    let dir = tmpdir("unknown");
    let out = rcbo(&["optimize", "--no-such-flag"], &dir);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dimension_mismatch_exits_one() {
    let dir = tmpdir("dim");
    let out = rcbo(
        &[
            "optimize", "--objective", "rastrigin", "--dim", "5", "--domain", "ball", "--center",
            "0,0", "--radius", "3", "--scheme", "projection", "-N", "10", "--alpha", "1", "--beta",
            "1", "--sigma", "1", "--h", "0.1", "--steps", "1",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tmpdir("config");
    fs::write(
        dir.join("run.cfg"),
        "# ackley setup\nobjective = ackley\ndomain.kind = ball\ndomain.center = 0,0\ndomain.radius = 3\nsolver.scheme = projection\nsolver.particles = 25\nsolver.alpha = 1e4\nsolver.beta = 1\nsolver.sigma = 4\nsolver.h = 0.1\nsolver.steps = 5\nsolver.seed = 9\n",
    )
    .unwrap();
    let out = rcbo(&["optimize", "--config", "run.cfg", "--out", "c1"], &dir);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.join("c1/report.csv")).unwrap();
    assert!(report.contains("# particles = 25"));
    assert!(report.contains("# seed = 9"));
    // flags take precedence over file values
    let out = rcbo(
        &["optimize", "--config", "run.cfg", "-N", "40", "--out", "c2"],
        &dir,
    );
    assert!(out.status.success());
    let report = fs::read_to_string(dir.join("c2/report.csv")).unwrap();
    assert!(report.contains("# particles = 40"));
}

#[test]
fn env_seed_is_the_fallback() {
    let dir = tmpdir("envseed");
    let out = Command::new(env!("CARGO_BIN_EXE_rcbo"))
        .args([
            "optimize", "--objective", "ackley", "--radius", "3", "--scheme", "projection", "-N",
            "10", "--alpha", "1e4", "--beta", "1", "--sigma", "4", "--h", "0.2", "--steps", "3",
            "--out", "e",
        ])
        .current_dir(&dir)
        .env("RCBO_SEED", "4242")
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.join("e/report.csv")).unwrap();
    assert!(report.contains("# seed = 4242"));
}

#[test]
fn bench_rosenbrock_emits_both_panels() {
    let dir = tmpdir("bench");
    let out = rcbo(
        &["bench", "--table", "rosenbrock", "--runs", "2", "--seed", "3", "--out", "t"],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.join("t/report.csv")).unwrap();
    let standard = report.lines().filter(|l| l.contains(",standard,")).count();
    let repelling = report.lines().filter(|l| l.contains(",repelling,")).count();
    assert_eq!(standard, 20);
    assert_eq!(repelling, 20);
}

#[test]
fn decay_subcommand_writes_curve() {
    let dir = tmpdir("decay");
    let out = rcbo(
        &["decay", "--beta", "2", "--sigma", "1", "--replicas", "20", "--seed", "1", "--out", "d"],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let curve = fs::read_to_string(dir.join("d/decay_curve.csv")).unwrap();
    assert!(curve.contains("t,var,bound"));
    // eta0 <= 0 is a configuration error
    let out = rcbo(&["decay", "--beta", "1", "--sigma", "1", "--out", "d2"], &dir);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invert_subcommand_writes_histograms() {
    let dir = tmpdir("invert");
    let out = rcbo(
        &[
            "invert", "--runs", "2", "--alpha", "1e14", "-N", "30", "--steps", "10", "--seed",
            "5", "--out", "inv",
        ],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.csv", "histogram_sigma.csv", "histogram_m.csv", "histogram_gamma.csv"] {
        assert!(dir.join("inv").join(f).exists(), "{f} missing");
    }
}

#[test]
fn chaos_subcommand_reports_slope() {
    let dir = tmpdir("chaos");
    let out = rcbo(
        &[
            "chaos", "--n-list", "16,32,64", "--n-ref", "256", "--replicas", "24", "--seed", "2",
            "--out", "ch",
        ],
        &dir,
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("fitted slope"));
    assert!(dir.join("ch/report.csv").exists());
}
