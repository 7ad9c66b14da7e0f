//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use egl_cli::commands::ode::{decay_section, reciprocal_section};
use egl_cli::config::{DataFamily, DtSetting, RunConfig, Sequence};
use egl_cli::{execute, Command, Finished, RunStatus};
use egl_core::ode_lab::{trapping_escape_check, Adversary};
use egl_core::spectral::{spectral_to_grid, theta_star_spectral};
use egl_core::{oracle, run_with, RunOptions, SimState, SpectralField, TimeStep};

const SEED: u64 = 20_240_601;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn report_value(report: &str, key: &str) -> Option<f64> {
    let prefix = format!("{key}=");
    report.lines().find_map(|l| l.strip_prefix(prefix.as_str())).and_then(|v| v.parse().ok())
}

fn columns(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let (header, rows) = columns(csv);
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k]).collect()
}

fn max_relative_drift(v: &[f64]) -> f64 {
    v.iter().map(|x| ((x - v[0]) / v[0]).abs()).fold(0.0, f64::max)
}

fn run_cli(command: Command, cfg: &RunConfig) -> Result<Finished, String> {
    execute(command, cfg).map_err(|e| e.to_string())
}

fn criterion1() -> Verdict {
    match oracle::run_suite(SEED) {
        Ok(checks) => {
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
            let worst = checks.iter().map(|c| c.error).fold(0.0, f64::max);
            verdict(
                failed.is_empty(),
                format!("{} comparisons, worst error {worst:.2e}, failed: {failed:?}", checks.len()),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion2() -> Verdict {
    let n = 128;
    let star = theta_star_spectral(n).expect("theta star");
    let state = SimState::new(star.clone(), 1.0).expect("state");
    let opts = RunOptions {
        t_end: 5.0,
        checkpoint_interval: 0.5,
        dt: TimeStep::Fixed(1e-3),
    };
    let mut worst: f64 = 0.0;
    let res = run_with(&state, &opts, |c| {
        let diff: SpectralField = c.field.sub(&star);
        worst = worst.max(spectral_to_grid(&diff)?.max_abs());
        Ok(())
    });
    match res {
        Ok(s) => verdict(
            s.blow_up.is_none() && worst <= 1e-7,
            format!("max |theta - theta*| = {worst:.2e} over t in [0, 5], {} steps", s.steps),
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn conservation_config(out: &Path) -> RunConfig {
    RunConfig {
        n: 256,
        dt: DtSetting::Fixed(1e-3),
        t_end: 10.0,
        checkpoint_interval: 1.0,
        family: DataFamily::Thm1,
        delta: 0.05,
        output_dir: out.to_path_buf(),
        ..RunConfig::default()
    }
}

fn criterion3(run: &Result<Finished, String>) -> Verdict {
    let f = match run {
        Ok(f) => f,
        Err(e) => return verdict(false, e.clone()),
    };
    let csv = fs::read_to_string(f.dir.join("diagnostics.csv")).unwrap_or_default();
    let drifts: Vec<(&str, f64)> = ["l2", "energy", "kn_invariant"]
        .iter()
        .map(|&k| (k, max_relative_drift(&column(&csv, k))))
        .collect();
    let ok = f.status == RunStatus::Complete && drifts.iter().all(|d| d.1 <= 1e-6);
    let detail = drifts.iter().map(|(k, d)| format!("{k} {d:.2e}")).collect::<Vec<_>>().join(", ");
    verdict(ok, format!("max relative drift: {detail}"))
}

fn criterion4(run: &Result<Finished, String>) -> Verdict {
    let f = match run {
        Ok(f) => f,
        Err(e) => return verdict(false, e.clone()),
    };
    let csv = fs::read_to_string(f.dir.join("diagnostics.csv")).unwrap_or_default();
    let even = column(&csv, "even_residual").into_iter().fold(0.0, f64::max);
    let rot4 = column(&csv, "rot4_residual").into_iter().fold(0.0, f64::max);
    verdict(
        even <= 1e-9 && rot4 <= 1e-9,
        format!("max even residual {even:.2e}, max rot4 residual {rot4:.2e}"),
    )
}

fn criterion5() -> Verdict {
    let suite = Adversary::suite(SEED, 5);
    match trapping_escape_check(0.01, 1000, &suite, SEED) {
        Ok(r) => verdict(
            r.passed() && r.adversaries.len() == 10,
            format!(
                "trap {}/{}, escape {}/{}, floor {}/{}, ceiling {}/{}, worst margins trap {:.2e} escape {:.2e} floor {:.2e}",
                r.trap_passed,
                r.trap_checked,
                r.escape_passed,
                r.escape_checked,
                r.floor_passed,
                r.floor_checked,
                r.ceiling_passed,
                r.runs,
                r.worst_trap_margin,
                r.worst_escape_margin,
                r.worst_floor_margin
            ),
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion6() -> Verdict {
    let cfg = RunConfig {
        seed: SEED,
        ode_n_legs: 10,
        ode_draws: 20,
        ode_bound: 0.009,
        ode_beta0: 0.2,
        ..RunConfig::default()
    };
    match decay_section(&cfg) {
        Ok(out) => {
            let get = |k: &str| {
                out.section
                    .lines
                    .iter()
                    .find(|l| l.0 == k)
                    .map_or("?".to_string(), |l| l.1.clone())
            };
            verdict(
                out.section.passed,
                format!(
                    "draws passed {}, worst decay ratio {}, worst pinch ratio {}, zero-case error {}",
                    get("draws_passed"),
                    get("worst_decay_ratio"),
                    get("worst_pinch_ratio"),
                    get("zero_case_exact_error")
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion7() -> Verdict {
    let cfg = RunConfig {
        ode_sequence: Sequence::Geometric(0.5),
        ode_n_max: 20,
        ..RunConfig::default()
    };
    match reciprocal_section(&cfg) {
        Ok(out) => {
            let s = &out.section;
            let line = |k: &str| s.lines.iter().find(|l| l.0 == k).map_or("?".into(), |l| l.1.clone());
            verdict(
                s.passed,
                format!(
                    "closed-form error {}, equality-case error {}",
                    line("closed_form_max_rel_error"),
                    line("equality_case_max_rel_error")
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion8(out: &Path) -> Verdict {
    let cfg = RunConfig {
        n: 512,
        t_end: 5.0,
        checkpoint_interval: 1.0,
        family: DataFamily::Thm1,
        delta: 0.1,
        box_eps: 0.01,
        output_dir: out.to_path_buf(),
        ..RunConfig::default()
    };
    match run_cli(Command::Theorem1, &cfg) {
        Ok(f) => {
            let v = |k| report_value(&f.report, k).unwrap_or(f64::NAN);
            let records = v("sn_records");
            let flagged = v("sn_flagged");
            let growth = v("sn_max_area_growth");
            let pixel = v("sn_max_pixel_difference");
            let mismatch = v("sn_max_symmetry_mismatch");
            verdict(
                f.status == RunStatus::Complete
                    && records == 6.0
                    && flagged == 0.0
                    && growth <= 0.02
                    && pixel <= 0.02
                    && mismatch <= 0.01,
                format!(
                    "{records} checkpoints, {flagged} flagged, max area growth {growth:.2e}, shoelace/pixel {pixel:.2e}, symmetry {mismatch:.2e}"
                ),
            )
        }
        Err(e) => verdict(false, e),
    }
}

fn criterion9(out: &Path) -> Verdict {
    let cfg = RunConfig {
        n: 512,
        t_end: 4.0,
        checkpoint_interval: 0.25,
        family: DataFamily::Thm2,
        epsilon: 0.05,
        fit_window: (1.0, 4.0),
        growth_from: 0.5,
        output_dir: out.to_path_buf(),
        ..RunConfig::default()
    };
    match run_cli(Command::Theorem2, &cfg) {
        Ok(f) => {
            let v = |k| report_value(&f.report, k).unwrap_or(f64::NAN);
            let (factor, lambda, r2) = (v("growth_factor_final"), v("lambda"), v("fit_r2"));
            let hess = v("hessian_sup_max");
            let has_trace = f.dir.join("hessian_trace.csv").exists();
            verdict(
                f.status == RunStatus::Complete && factor >= 3.0 && lambda >= 0.3 && r2 >= 0.9 && has_trace,
                format!(
                    "growth factor from t=0.5 {factor:.3}, lambda {lambda:.4}, r2 {r2:.4}, max hessian_sup {hess:.3e} (threshold 0.01)"
                ),
            )
        }
        Err(e) => verdict(false, e),
    }
}

fn criterion10(out: &Path) -> Verdict {
    let mut cfg = RunConfig {
        n: 512,
        t_end: 0.01,
        checkpoint_interval: 0.01,
        family: DataFamily::Thm1,
        output_dir: out.to_path_buf(),
        ..RunConfig::default()
    };
    cfg.sweep.delta = vec![0.1, 0.05, 0.025];
    match run_cli(Command::Sweep, &cfg) {
        Ok(f) => {
            let psi = report_value(&f.report, "psi0_l2_over_sqrt_param_spread").unwrap_or(f64::NAN);
            let shell = report_value(&f.report, "shell_dev_over_sqrt_param_spread").unwrap_or(f64::NAN);
            verdict(
                f.status == RunStatus::Complete && psi < 2.0 && shell < 2.0,
                format!("max/min across delta: |psi0|_2/sqrt(delta) {psi:.3}, |shell - 1|/sqrt(delta) {shell:.3}"),
            )
        }
        Err(e) => verdict(false, e),
    }
}

fn criterion11(a: &Result<Finished, String>, b: &Result<Finished, String>) -> Verdict {
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let x = fs::read(a.dir.join("diagnostics.csv")).unwrap_or_default();
            let y = fs::read(b.dir.join("diagnostics.csv")).unwrap_or_default();
            verdict(
                !x.is_empty() && x == y && !b.reused,
                format!("{} bytes, identical: {}", x.len(), x == y),
            )
        }
        (Err(e), _) | (_, Err(e)) => verdict(false, e.clone()),
    }
}

fn main() {
    let tmp = tempfile::tempdir().expect("scratch directory");
    let root = tmp.path();
    let mut failures = 0;
    let mut report = |id: u32, title: &str, limit: Duration, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let ok = v.passed && took <= limit;
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {id:>2} [{}] {title}: {} ({:.1} s, limit {} s)",
            if ok { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    };

    report(1, "spectral oracle suite", Duration::from_secs(10), &mut criterion1);
    report(2, "stationarity of theta*", Duration::from_secs(60), &mut criterion2);

    let mut first = None;
    report(3, "conservation", Duration::from_secs(600), &mut || {
        let run = run_cli(Command::Simulate, &conservation_config(&root.join("c3a")));
        let v = criterion3(&run);
        first = Some(run);
        v
    });
    let first = first.expect("criterion 3 ran");
    report(4, "symmetry preservation", Duration::from_secs(1), &mut || criterion4(&first));
    report(5, "trapping and escape", Duration::from_secs(60), &mut criterion5);
    report(6, "decaying trajectory", Duration::from_secs(120), &mut criterion6);
    report(7, "reciprocal sums", Duration::from_secs(1), &mut criterion7);
    report(8, "level-set area accounting", Duration::from_secs(1800), &mut || {
        criterion8(&root.join("c8"))
    });
    report(9, "exponential growth", Duration::from_secs(1800), &mut || criterion9(&root.join("c9")));
    report(10, "scaling sweep", Duration::from_secs(900), &mut || criterion10(&root.join("c10")));
    report(11, "determinism", Duration::from_secs(600), &mut || {
        let second = run_cli(Command::Simulate, &conservation_config(&root.join("c3b")));
        criterion11(&first, &second)
    });

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
