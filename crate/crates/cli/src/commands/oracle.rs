//! Spectral correctness suite against direct sums.

use std::fmt::Write as _;

use egl_core::oracle::run_suite;

use super::{CmdResult, Outcome};
use crate::config::RunConfig;
use crate::manifest::{RunDir, RunStatus};

pub fn cmd_oracle(cfg: &RunConfig, dir: &RunDir) -> CmdResult {
    let checks = run_suite(cfg.seed)?;
    let mut csv = String::from("name,error,tolerance,pass\n");
    for c in &checks {
        let _ = writeln!(csv, "{},{:.3e},{:.1e},{}", c.name, c.error, c.tolerance, c.passed());
    }
    dir.write("oracle.csv", &csv)?;
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
    let worst = checks.iter().map(|c| c.error / c.tolerance).fold(0.0, f64::max);
    let mut report = String::from("command=oracle\n");
    let _ = writeln!(report, "checks={}", checks.len());
    let _ = writeln!(report, "passed={}", checks.len() - failed.len());
    let _ = writeln!(report, "worst_error_over_tolerance={worst:.3e}");
    let _ = writeln!(report, "failed={}", if failed.is_empty() { "none".into() } else { failed.join(";") });
    dir.write("report.txt", &report)?;
    let status = if failed.is_empty() { RunStatus::Complete } else { RunStatus::CheckFailed };
    Ok(Outcome::new(status, report))
}
