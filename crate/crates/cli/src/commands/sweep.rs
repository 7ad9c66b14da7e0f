//! Cartesian parameter sweeps with one run directory per grid point.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::simulate::{run_summary_lines, simulate_into, status_of};
use super::{CmdResult, Outcome};
use crate::config::{Command, DataFamily, RunConfig};
use crate::manifest::{RunDir, RunStatus};

pub const WORKERS_ENV: &str = "EGL_WORKERS";

/// Point configurations in row-major order over δ, ε, γ, N.
pub fn grid_points(cfg: &RunConfig) -> Vec<RunConfig> {
    let or = |v: &[f64], d: f64| if v.is_empty() { vec![d] } else { v.to_vec() };
    let ns = if cfg.sweep.n.is_empty() { vec![cfg.n] } else { cfg.sweep.n.clone() };
    let mut out = Vec::new();
    for &delta in &or(&cfg.sweep.delta, cfg.delta) {
        for &epsilon in &or(&cfg.sweep.epsilon, cfg.epsilon) {
            for &gamma in &or(&cfg.sweep.gamma, cfg.gamma) {
                for &n in &ns {
                    let mut p = cfg.clone();
                    p.sweep = Default::default();
                    p.delta = delta;
                    p.epsilon = epsilon;
                    p.gamma = gamma;
                    p.n = n;
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Worker count: `EGL_WORKERS` if set and positive, else the configured value.
pub fn worker_count(configured: usize) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or(configured)
        .max(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub dir: String,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub n: usize,
    pub status: String,
    pub t_final: f64,
    pub grad_sup: f64,
    pub l2: f64,
    pub energy: f64,
    pub kn_invariant: f64,
    pub psi0_l2: f64,
    pub shell0: f64,
    pub flags: Vec<String>,
}

impl PointResult {
    /// The amplitude parameter the scaling ratios divide by.
    pub fn scale_param(&self, family: DataFamily) -> f64 {
        match family {
            DataFamily::Thm2 => self.epsilon,
            _ => self.delta,
        }
    }

    pub fn ok(&self) -> bool {
        self.status == RunStatus::Complete.label()
    }
}

pub const ROLLUP_HEADER: &str = "point,dir,delta,epsilon,gamma,N,status,t_final,grad_sup,l2,energy,kn_invariant,psi0_l2,shell_energy0,psi0_l2_over_sqrt_param,shell_dev_over_sqrt_param,flags";

pub fn rollup_csv(points: &[PointResult], family: DataFamily) -> String {
    let mut s = format!("{ROLLUP_HEADER}\n");
    for p in points {
        let root = p.scale_param(family).sqrt();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            p.index,
            p.dir,
            p.delta,
            p.epsilon,
            p.gamma,
            p.n,
            p.status,
            p.t_final,
            p.grad_sup,
            p.l2,
            p.energy,
            p.kn_invariant,
            p.psi0_l2,
            p.shell0,
            p.psi0_l2 / root,
            (p.shell0 - 1.0).abs() / root,
            p.flags.join(";")
        );
    }
    s
}

/// `max/min` of `‖ψ₀‖₂/√p` and `|shell − 1|/√p` over points with finite values.
pub fn scaling_spread(points: &[PointResult], family: DataFamily) -> (f64, f64) {
    let spread = |f: &dyn Fn(&PointResult) -> f64| {
        let v: Vec<f64> = points.iter().map(f).filter(|x| x.is_finite() && *x > 0.0).collect();
        if v.is_empty() {
            return f64::NAN;
        }
        v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min)
    };
    (
        spread(&|p| p.psi0_l2 / p.scale_param(family).sqrt()),
        spread(&|p| (p.shell0 - 1.0).abs() / p.scale_param(family).sqrt()),
    )
}

fn run_point(index: usize, cfg: &RunConfig, sweep_dir: &RunDir) -> PointResult {
    let name = format!(
        "points/{index:03}-d{}-e{}-g{}-N{}",
        cfg.delta, cfg.epsilon, cfg.gamma, cfg.n
    );
    let mut res = PointResult {
        index,
        dir: name.clone(),
        delta: cfg.delta,
        epsilon: cfg.epsilon,
        gamma: cfg.gamma,
        n: cfg.n,
        status: "error".into(),
        t_final: f64::NAN,
        grad_sup: f64::NAN,
        l2: f64::NAN,
        energy: f64::NAN,
        kn_invariant: f64::NAN,
        psi0_l2: f64::NAN,
        shell0: f64::NAN,
        flags: cfg.flags(),
    };
    let mut attempt = || -> anyhow::Result<RunStatus> {
        let dir = RunDir::at(sweep_dir.path.join(&name), Command::Simulate, cfg)?;
        let sim = simulate_into(cfg, &dir, |_| false)?;
        if let (Some(first), Some(last)) = (sim.records.first(), sim.records.last()) {
            res.psi0_l2 = first.psi_l2;
            res.shell0 = first.shell_energy;
            res.t_final = last.t;
            res.grad_sup = last.grad_sup;
            res.l2 = last.l2;
            res.energy = last.energy;
            res.kn_invariant = last.kn_invariant;
        }
        dir.write("report.txt", format!("command=simulate\n{}", run_summary_lines(cfg, &sim)))?;
        let status = status_of(&sim);
        dir.finish(status)?;
        Ok(status)
    };
    match attempt() {
        Ok(s) => res.status = s.label().into(),
        Err(e) => res.flags.push(format!("error: {e:#}").replace([',', '\n'], " ")),
    }
    res
}

pub fn cmd_sweep(cfg: &RunConfig, dir: &RunDir) -> CmdResult {
    let points = grid_points(cfg);
    for p in &points {
        p.validate(Command::Simulate)?;
    }
    let workers = worker_count(cfg.sweep_workers).min(points.len());
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(points.len()));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = points.get(i) else { break };
                let r = run_point(i, p, dir);
                results.lock().expect("sweep result lock").push(r);
            });
        }
    });
    let mut results = results.into_inner().expect("sweep result lock");
    results.sort_by_key(|r| r.index);
    dir.write("rollup.csv", rollup_csv(&results, cfg.family))?;

    let (psi_spread, shell_spread) = scaling_spread(&results, cfg.family);
    let failed = results.iter().filter(|r| !r.ok()).count();
    let mut report = String::from("command=sweep\n");
    let _ = writeln!(report, "points={}", results.len());
    let _ = writeln!(report, "failed_points={failed}");
    let _ = writeln!(report, "workers={workers}");
    let _ = writeln!(report, "psi0_l2_over_sqrt_param_spread={psi_spread:.6}");
    let _ = writeln!(report, "shell_dev_over_sqrt_param_spread={shell_spread:.6}");
    for r in &results {
        let _ = writeln!(report, "point.{}={} {}", r.index, r.dir, r.status);
    }
    for f in cfg.flags() {
        let _ = writeln!(report, "flag={f}");
    }
    dir.write("report.txt", &report)?;
    let status = if failed == 0 { RunStatus::Complete } else { RunStatus::CheckFailed };
    Ok(Outcome::new(status, report))
}
