//! Exponential gradient growth from the second data family.

use std::fmt::Write as _;

use egl_core::diagnostics::{growth_fit, GrowthFit};

use super::simulate::{run_summary_lines, simulate_into, status_of};
use super::{CmdResult, Outcome};
use crate::config::RunConfig;
use crate::manifest::RunDir;

pub const HESSIAN_THRESHOLD: f64 = 0.01;

/// `ρ = 0.001·C⁻¹·e^{−T/2}` and `ε = 0.001·√(ρ/C)` for a given constant `C`.
pub fn parameter_helper(c: f64, t: f64) -> (f64, f64) {
    let rho = 0.001 / c * (-t / 2.0).exp();
    (rho, 0.001 * (rho / c).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthSummary {
    pub fit: GrowthFit,
    pub window: (f64, f64),
    pub base_t: f64,
    pub base: f64,
    /// `grad_sup(t_end) / grad_sup(growth_from)`.
    pub final_factor: f64,
    pub max_factor: f64,
    pub first_hessian_exceedance: Option<f64>,
    pub max_hessian: f64,
}

/// Growth measurements on `(t, grad_sup, hessian_sup)` rows.
pub fn summarize(rows: &[(f64, f64, f64)], window: (f64, f64), growth_from: f64) -> egl_core::Result<GrowthSummary> {
    let t_last = rows.last().map_or(0.0, |r| r.0);
    let window = (window.0, window.1.min(t_last));
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let fit = growth_fit(&series, window)?;
    let (base_t, base) = series
        .iter()
        .copied()
        .find(|&(t, _)| t >= growth_from - 1e-9)
        .unwrap_or((f64::NAN, f64::NAN));
    let later = series.iter().filter(|&&(t, _)| t >= base_t);
    let max_factor = later.map(|&(_, g)| g / base).fold(f64::NEG_INFINITY, f64::max);
    let final_factor = series.last().map_or(f64::NAN, |&(_, g)| g / base);
    Ok(GrowthSummary {
        fit,
        window,
        base_t,
        base,
        final_factor,
        max_factor,
        first_hessian_exceedance: rows.iter().find(|r| r.2 > HESSIAN_THRESHOLD).map(|r| r.0),
        max_hessian: rows.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

impl GrowthSummary {
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("fit_window", format!("{};{}", self.window.0, self.window.1)),
            ("lambda", format!("{:.6}", self.fit.lambda)),
            ("lambda_reference", "0.5".into()),
            ("fit_r2", format!("{:.6}", self.fit.r2)),
            ("fit_prefactor", format!("{:.6e}", self.fit.prefactor)),
            ("growth_base_t", format!("{}", self.base_t)),
            ("growth_base_grad_sup", format!("{:.6e}", self.base)),
            ("growth_factor_final", format!("{:.6}", self.final_factor)),
            ("growth_factor_max", format!("{:.6}", self.max_factor)),
            ("hessian_threshold", HESSIAN_THRESHOLD.to_string()),
            ("hessian_sup_max", format!("{:.6e}", self.max_hessian)),
            (
                "hessian_first_exceedance_t",
                self.first_hessian_exceedance.map_or("none".into(), |t| t.to_string()),
            ),
        ]
    }
}

pub fn cmd_theorem2(cfg: &RunConfig, dir: &RunDir) -> CmdResult {
    let sim = simulate_into(cfg, dir, |_| false)?;
    let rows: Vec<(f64, f64, f64)> = sim.records.iter().map(|r| (r.t, r.grad_sup, r.hessian_sup)).collect();

    let mut trace = String::from("t,hessian_sup,below_threshold\n");
    for &(t, _, h) in &rows {
        let _ = writeln!(trace, "{t:.16e},{h:.16e},{}", h <= HESSIAN_THRESHOLD);
    }
    dir.write("hessian_trace.csv", trace)?;

    let mut report = format!("command=theorem2\n{}", run_summary_lines(cfg, &sim));
    let _ = writeln!(report, "epsilon={}", cfg.epsilon);
    match summarize(&rows, cfg.fit_window, cfg.growth_from) {
        Ok(g) => {
            for (k, v) in g.key_values() {
                let _ = writeln!(report, "{k}={v}");
            }
        }
        Err(e) => {
            let _ = writeln!(report, "growth_fit_error={e}");
        }
    }
    match cfg.helper_c {
        Some(c) => {
            let (rho, eps) = parameter_helper(c, cfg.t_end);
            let _ = writeln!(report, "helper_C={c}");
            let _ = writeln!(report, "helper_T={}", cfg.t_end);
            let _ = writeln!(report, "helper_rho={rho:.6e}");
            let _ = writeln!(report, "helper_epsilon={eps:.6e}");
        }
        None => {
            let _ = writeln!(report, "helper=not run (thm2.C unset)");
        }
    }
    dir.write("report.txt", &report)?;
    Ok(Outcome::new(status_of(&sim), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helper_arithmetic() {
        let (rho, eps) = parameter_helper(1.0, 4.0);
        assert!((rho - 1.353352832366127e-4).abs() < 1e-15);
        assert!((eps - 1.163337e-5).abs() < 1e-11);
    }

    #[test]
    fn summary_of_pure_exponential() {
        let rows: Vec<_> = (0..=16).map(|k| {
            let t = k as f64 * 0.25;
            (t, 2.0 * (0.5 * t).exp(), 0.002 * t)
        }).collect();
        let g = summarize(&rows, (1.0, f64::INFINITY), 0.5).unwrap();
        assert!((g.fit.lambda - 0.5).abs() < 1e-12);
        assert!((g.fit.r2 - 1.0).abs() < 1e-12);
        assert!((g.final_factor - (0.5f64 * 3.5).exp()).abs() < 1e-12);
        assert_eq!(g.window.1, 4.0);
        assert_eq!(g.first_hessian_exceedance, None);
        assert!((g.max_hessian - 0.008).abs() < 1e-15);
    }
}
