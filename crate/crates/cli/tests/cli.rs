use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fisher-harnack"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn scenario(name: &str) -> String {
    format!("{}/../../scenarios/{name}.conf", env!("CARGO_MANIFEST_DIR"))
}

/// Small 1-D problem that runs in milliseconds.
const SMALL: [&str; 8] = ["--set", "grid.points=64", "--set", "grid.length=16", "--set", "solver.samples=10", "--set", "solver.t_end=1"];

#[test]
fn feasible_single_query() {
    let o = run(&["feasible"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("feasible regime=iii"));

    let o = run(&["feasible", "--set", "params.alpha=1.2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("infeasible (i)"));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tmp("bad_config");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.conf");
    fs::write(&path, "params.n = 1\nthis is not an assignment\n").unwrap();
    assert_eq!(run(&["feasible", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["feasible", "--set", "params.unknown=1"]).status.code(), Some(2));
    assert_eq!(run(&["feasible", "--set", "params.c=-1"]).status.code(), Some(2));
    assert_eq!(run(&["feasible", "--config", "/nonexistent.conf"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "everything"]).status.code(), Some(2));
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
}

#[test]
fn sweep_emits_one_row_per_grid_point() {
    let o = run(&["sweep", "--config", &scenario("sweep_compact")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,beta,regime,margin_ii,margin_iii"));
    assert_eq!(lines.count(), 2500);
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_order_is_independent_of_thread_count() {
    let a = bin().args(["sweep", "--set", "sweep.alpha_points=7"]).env("FISHER_HARNACK_THREADS", "1").output().unwrap();
    let b = bin().args(["sweep", "--set", "sweep.alpha_points=7"]).env("FISHER_HARNACK_THREADS", "3").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let bad = bin().arg("feasible").env("FISHER_HARNACK_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_phi_defaults_pass() {
    let o = run(&["verify", "phi", "--out", tmp("phi").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("overall_pass = true"));

    let o = run(&["verify", "phi", "--config", &scenario("phi_noncompact"), "--out", tmp("phi_nc").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("nu2 + omega2"));
}

#[test]
fn verify_phi_on_infeasible_params_is_a_usage_error() {
    assert_eq!(run(&["verify", "phi", "--set", "params.beta=1"]).status.code(), Some(2));
}

#[test]
fn verify_harnack_writes_reports_and_manifest() {
    let out = tmp("harnack");
    let mut args = vec!["verify", "harnack", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("min_h="));
    let csv = fs::read_to_string(out.join("harnack.csv")).unwrap();
    assert!(csv.starts_with("t,phi,min_h,argmin,tol,pass\n"));
    assert_eq!(csv.lines().count(), 11);
    let manifest = fs::read_to_string(out.join("run_manifest.txt")).unwrap();
    assert!(manifest.contains("command = verify harnack"));
    assert!(manifest.contains("grid.points = 64"));
    assert!(manifest.contains("run.seed = 42"));
}

#[test]
fn violation_exits_one() {
    // A negative tolerance factor turns every sample into a violation.
    let mut args = vec!["verify", "harnack", "--set", "check.tol_factor=-1e6"];
    args.extend(SMALL);
    assert_eq!(run(&args).status.code(), Some(1));
}

#[test]
fn seed_changes_the_data() {
    let mut a = vec!["verify", "harnack", "--seed", "1"];
    a.extend(SMALL);
    let mut b = vec!["verify", "harnack", "--seed", "2"];
    b.extend(SMALL);
    assert_ne!(run(&a).stdout, run(&b).stdout);
    assert_eq!(run(&a).stdout, run(&a).stdout);
}

#[test]
fn converge_validates_resolutions() {
    for bad in ["converge.resolutions=64,128", "converge.resolutions=64,128,128", "converge.resolutions=64,96,128"] {
        assert_eq!(run(&["converge", "--set", bad]).status.code(), Some(2), "{bad}");
    }
}

#[test]
fn converge_reports_second_order() {
    let mut args = vec!["converge", "--set", "converge.resolutions=64,128,256", "--set", "grid.length=32"];
    args.extend(["--set", "solver.samples=10", "--set", "solver.t_end=1"]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("dx,dt,max_identity_residual,min_h_negative_part\n"));
    let order: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# identity_order = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(order >= 1.9, "{order}");
}

#[test]
fn converge_on_constant_data_has_tiny_residuals() {
    let args = [
        "converge",
        "--set",
        "initial.kind=constant",
        "--set",
        "converge.resolutions=16,32,64",
        "--set",
        "solver.samples=5",
        "--set",
        "solver.t_end=1",
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines().skip(1).filter(|l| !l.starts_with('#')) {
        let r: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(r < 1e-6, "{line}");
    }
}

#[test]
fn verify_waves_reports_speed_and_table_value() {
    let o = run(&["verify", "waves", "--n", "1", "--c", "1", "--out", tmp("waves").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .and_then(|v| v.split_whitespace().next())
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((value("eta_min = ") - 2.0).abs() < 1e-3);
    assert!((value("m_triple_prime = ") - 1.26795).abs() < 1e-5);
}

#[test]
fn verify_waves_rejects_unsupported_dimension() {
    assert_eq!(run(&["verify", "waves", "--n", "4"]).status.code(), Some(2));
}

#[test]
fn verify_cutoff_and_classical_pass() {
    assert_eq!(run(&["verify", "cutoff", "--set", "cutoff.samples=50", "--out", tmp("cut").to_str().unwrap()]).status.code(), Some(0));
    let mut args = vec!["verify", "classical", "--set", "classical.pairs=10", "--out"];
    let out = tmp("classical");
    args.push(out.to_str().unwrap());
    args.extend(["--set", "grid.points=64", "--set", "grid.length=16"]);
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(fs::read_to_string(out.join("classical.csv")).unwrap().lines().count(), 11);
}

#[test]
fn classical_reads_pair_files() {
    let dir = tmp("pairs");
    fs::create_dir_all(&dir).unwrap();
    let pairs = dir.join("pairs.txt");
    fs::write(&pairs, "# x1 t1 x2 t2\n1.0 1.0 1.0 2.0\n3.0 0.5 5.0 4.0\n").unwrap();
    let set = format!("classical.pair_file={}", pairs.display());
    let o = run(&["verify", "classical", "--set", &set, "--set", "grid.points=64", "--set", "grid.length=16", "--set", "solver.samples=2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("x1")).count(), 3);

    let close = dir.join("close.txt");
    fs::write(&close, "1.0 1.0 1.0 1.000001\n").unwrap();
    let set = format!("classical.pair_file={}", close.display());
    assert_eq!(run(&["verify", "classical", "--set", &set, "--set", "grid.points=64", "--set", "grid.length=16"]).status.code(), Some(2));
}

#[test]
fn classical_outside_case_range_is_rejected() {
    assert_eq!(run(&["verify", "classical", "--set", "params.beta=-1.5"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_an_archive() {
    let out = tmp("simulate");
    let mut args = vec!["simulate", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    assert_eq!(run(&args).status.code(), Some(0));
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert_eq!(manifest.lines().count(), 10);
    assert!(out.join("snapshot_00009.txt").exists());
}

#[test]
fn verify_identity_uses_the_order_threshold() {
    let base = ["verify", "identity", "--set", "converge.resolutions=64,128,256", "--set", "solver.times=0.5"];
    assert_eq!(run(&base).status.code(), Some(0));
    let mut strict = base.to_vec();
    strict.extend(["--set", "converge.min_order=5"]);
    assert_eq!(run(&strict).status.code(), Some(1));
}
