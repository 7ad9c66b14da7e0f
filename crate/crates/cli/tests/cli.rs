use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use egl_cli::manifest::{verify_checksums, RunManifest, MANIFEST_FILE};

fn egl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egl"))
        .args(args)
        .current_dir(cwd)
        .env_remove("EGL_WORKERS")
        .output()
        .expect("spawn egl")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn run_dir(o: &Output) -> PathBuf {
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().find_map(|l| l.strip_prefix("run_dir=")).expect("run_dir line");
    PathBuf::from(line)
}

fn report_value(o: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&o.stdout);
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .to_string()
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

const SMALL_THM2: &str = "sim.N = 32\nsim.t_end = 0.5\nsim.checkpoint_interval = 0.25\ndata.family = thm2\ndata.epsilon = 0.05\n";

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let unknown = write_cfg(d, "a.cfg", "sim.N = 32\nsim.nope = 1\n");
    let dup = write_cfg(d, "b.cfg", "sim.N = 32\nsim.N = 64\n");
    let range = write_cfg(d, "c.cfg", "sim.N = 48\n");
    let empty_sweep = write_cfg(d, "d.cfg", "sim.N = 32\n");
    for (cmd, cfg) in [("simulate", &unknown), ("simulate", &dup), ("simulate", &range), ("sweep", &empty_sweep)] {
        let o = egl(&[cmd, "--config", cfg], d);
        assert_eq!(code(&o), 2, "{cmd} {cfg}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&egl(&["simulate"], d)), 2);
    assert_eq!(code(&egl(&["simulate", "--config", "missing.cfg"], d)), 2);
    assert_eq!(code(&egl(&["frobnicate"], d)), 2);
    assert_eq!(code(&egl(&["--help"], d)), 0);
    assert!(fs::read_dir(d).unwrap().all(|e| !e.unwrap().path().is_dir()));
}

#[test]
fn oracle_passes_without_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = egl(&["oracle", "--out", "runs"], tmp.path());
    assert_eq!(code(&o), 0);
    assert_eq!(report_value(&o, "checks"), report_value(&o, "passed"));
    let dir = tmp.path().join(run_dir(&o));
    let csv = fs::read_to_string(dir.join("oracle.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn simulate_is_deterministic_and_manifested() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_cfg(d, "s.cfg", &format!("{SMALL_THM2}diag.snapshots = true\ndiag.pgm = true\n"));
    let a = egl(&["simulate", "--config", &cfg, "--out", "one"], d);
    let b = egl(&["simulate", "--config", &cfg, "--out", "two"], d);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let (da, db) = (d.join(run_dir(&a)), d.join(run_dir(&b)));
    assert_eq!(da.file_name(), db.file_name());
    let csv = fs::read(da.join("diagnostics.csv")).unwrap();
    assert_eq!(csv, fs::read(db.join("diagnostics.csv")).unwrap());
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 4);
    assert!(da.join("snapshots/theta_t0000.5000.bin").exists());
    assert!(da.join("snapshots/theta_t0000.2500.pgm").exists());

    assert!(verify_checksums(&da).unwrap());
    let m = RunManifest::parse(&fs::read_to_string(da.join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(m.command, "simulate");
    assert!(da.file_name().unwrap().to_string_lossy().ends_with(&m.input_hash[..16]));
    assert!(m.flags.is_empty());

    let again = egl(&["simulate", "--config", &cfg, "--out", "one"], d);
    assert_eq!(code(&again), 0);
    assert!(String::from_utf8_lossy(&again.stdout).starts_with("identical run already present"));

    let seeded = egl(&["simulate", "--config", &cfg, "--out", "one", "--seed", "7"], d);
    assert_ne!(run_dir(&seeded), run_dir(&a));
}

#[test]
fn time_scaling_gives_an_equivalent_run() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let base = format!("{SMALL_THM2}sim.dt = 0.01\n");
    let plain = write_cfg(d, "p.cfg", &base);
    let scaled = write_cfg(d, "q.cfg", &format!("{base}sim.time_scale = 4\n"));
    let a = egl(&["simulate", "--config", &plain, "--out", "r"], d);
    let b = egl(&["simulate", "--config", &scaled, "--out", "r"], d);
    assert_eq!((code(&a), code(&b)), (0, 0));
    let read = |o: &Output| -> Vec<Vec<f64>> {
        fs::read_to_string(d.join(run_dir(o)).join("diagnostics.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect()
    };
    let (ra, rb) = (read(&a), read(&b));
    assert_eq!(ra.len(), rb.len());
    for (x, y) in ra.iter().zip(&rb) {
        // Columns up to psi_l2; the residual columns are relative to rounding.
        for k in [0, 1, 2, 3, 4, 5, 8, 9] {
            assert!((x[k] - y[k]).abs() <= 1e-10 * x[k].abs().max(1e-6), "col {k}: {} vs {}", x[k], y[k]);
        }
    }
    assert!(report_value(&b, "flag").starts_with("time_scale=4"));
}

#[test]
fn theorem2_reports_growth_helper_and_hessian_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_cfg(
        d,
        "t.cfg",
        "sim.N = 32\nsim.t_end = 1\nsim.checkpoint_interval = 0.25\ndata.family = thm2\ndata.epsilon = 0.05\nthm2.C = 1\nthm2.fit_start = 0.25\n",
    );
    let o = egl(&["theorem2", "--config", &cfg, "--out", "r"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    report_value(&o, "lambda").parse::<f64>().unwrap();
    assert_eq!(report_value(&o, "helper_rho"), "6.065307e-4");
    let trace = fs::read_to_string(d.join(run_dir(&o)).join("hessian_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 5);

    let wrong = write_cfg(d, "w.cfg", SMALL_THM2.replace("thm2", "thm1").as_str());
    assert_eq!(code(&egl(&["theorem2", "--config", &wrong], d)), 2);
}

#[test]
fn theorem1_writes_area_accounting() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_cfg(
        d,
        "t.cfg",
        "sim.N = 128\nsim.t_end = 1\nsim.checkpoint_interval = 0.5\ndata.family = thm1\ndata.delta = 0.1\ntracer.box_eps = 0.01\n",
    );
    let o = egl(&["theorem1", "--config", &cfg, "--out", "r"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = d.join(run_dir(&o));
    let sn = fs::read_to_string(dir.join("sn_accounting.csv")).unwrap();
    let rows: Vec<&str> = sn.lines().collect();
    assert_eq!(rows[0], "n,area_Sn,area_Sn2,grad_sup,flags");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0,") && rows[2].starts_with("1,"));
    assert_eq!(fs::read_to_string(dir.join("superlinear.csv")).unwrap().lines().count(), 3);
    assert!(dir.join("sn_crosscheck.csv").exists());
    assert!(verify_checksums(&dir).unwrap());

    let bad = write_cfg(d, "b.cfg", &fs::read_to_string(d.join(&cfg)).unwrap().replace("0.5", "0.3"));
    assert_eq!(code(&egl(&["theorem1", "--config", &bad], d)), 2);
}

#[test]
fn ode_checks_pass_and_failures_exit_four() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_cfg(
        d,
        "o.cfg",
        "ode.checks = trapping,decay,reciprocal\node.samples = 100\node.random_draws = 1\node.n_legs = 5\node.draws = 2\node.beta0 = 0.2\n",
    );
    let o = egl(&["ode", "--config", &cfg, "--out", "r"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let dir = d.join(run_dir(&o));
    for f in ["curves.csv", "trajectory_zero.csv", "trajectories/draw_001.csv", "partial_sums.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let report = fs::read_to_string(dir.join("report.txt")).unwrap();
    for section in ["[trapping]", "[decay]", "[reciprocal]"] {
        assert!(report.contains(section));
    }
    assert!(report.contains("draws_passed=2/2"));

    // A sequence whose metric never starts increasing within n_max fails the check.
    let failing = write_cfg(d, "f.cfg", "ode.checks = reciprocal\node.sequence = geometric:0.99\node.n_max = 2\n");
    let f = egl(&["ode", "--config", &failing, "--out", "r"], d);
    assert_eq!(code(&f), 4);
    assert!(d.join(run_dir(&f)).join("report.txt").exists());
}

#[test]
fn sweep_runs_every_point_and_flags_small_gamma() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write_cfg(
        d,
        "s.cfg",
        "sim.N = 32\nsim.t_end = 0.1\nsim.checkpoint_interval = 0.1\ndata.family = thm1\ndata.delta = 0.1\nsweep.gamma = 0.6,0.8,1.0\n",
    );
    let o = Command::new(env!("CARGO_BIN_EXE_egl"))
        .args(["sweep", "--config", &cfg, "--out", "r"])
        .current_dir(d)
        .env("EGL_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report_value(&o, "workers"), "2");
    let dir = d.join(run_dir(&o));
    let rollup = fs::read_to_string(dir.join("rollup.csv")).unwrap();
    let rows: Vec<&str> = rollup.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].ends_with("gamma<1: global existence unknown"));
    assert!(rows[1].ends_with("gamma<1: global existence unknown"));
    assert!(rows[2].ends_with(','));
    let points: Vec<_> = fs::read_dir(dir.join("points")).unwrap().collect();
    assert_eq!(points.len(), 3);
    for p in points {
        let p = p.unwrap().path();
        assert!(verify_checksums(&p).unwrap());
        assert!(p.join("diagnostics.csv").exists());
    }
    assert!(verify_checksums(&dir).unwrap());
    let m = RunManifest::parse(&fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(m.flags, vec!["gamma<1: global existence unknown".to_string()]);
}
