//! Level-set area accounting along a run from the first data family.

use std::fmt::Write as _;

use egl_core::characteristics::{sn_accounting_csv, sn_crosscheck_csv};
use egl_core::diagnostics::superlinear_metric;
use egl_core::ode_lab::{partial_sums_csv, reciprocal_partial_sums_of};
use egl_core::{sn_accounting, SaddleFrame, SnRecord};

use super::simulate::{run_summary_lines, simulate_into, status_of};
use super::{CmdResult, Outcome};
use crate::config::{FrameChoice, RunConfig};
use crate::manifest::RunDir;

/// Tolerances the area bookkeeping is judged against.
pub const AREA_GROWTH_TOL: f64 = 0.02;
pub const PIXEL_TOL: f64 = 0.02;
pub const SYMMETRY_TOL: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct SnSummary {
    pub records: usize,
    pub flagged: usize,
    /// Largest `(a_{n+1} − a_n)/a_n` over consecutive `area_Sn`.
    pub max_area_growth: f64,
    pub max_pixel_difference: f64,
    pub max_symmetry_mismatch: f64,
}

impl SnSummary {
    pub fn of(records: &[SnRecord]) -> Self {
        let max_area_growth = records
            .windows(2)
            .map(|w| {
                if w[0].area_sn > 0.0 {
                    (w[1].area_sn - w[0].area_sn) / w[0].area_sn
                } else if w[1].area_sn > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            records: records.len(),
            flagged: records.iter().filter(|r| !r.flags.is_empty()).count(),
            max_area_growth,
            max_pixel_difference: records.iter().map(|r| r.pixel_relative_difference()).fold(0.0, f64::max),
            max_symmetry_mismatch: records.iter().map(|r| r.symmetry_mismatch).fold(0.0, f64::max),
        }
    }

    pub fn passed(&self) -> bool {
        self.records >= 2
            && self.flagged == 0
            && self.max_area_growth <= AREA_GROWTH_TOL
            && self.max_pixel_difference <= PIXEL_TOL
            && self.max_symmetry_mismatch <= SYMMETRY_TOL
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("sn_records", self.records.to_string()),
            ("sn_flagged", self.flagged.to_string()),
            ("sn_max_area_growth", format!("{:.4e}", self.max_area_growth)),
            ("sn_max_pixel_difference", format!("{:.4e}", self.max_pixel_difference)),
            ("sn_max_symmetry_mismatch", format!("{:.4e}", self.max_symmetry_mismatch)),
            ("sn_checks_pass", self.passed().to_string()),
        ]
    }
}

pub fn frame_of(choice: FrameChoice) -> SaddleFrame {
    match choice {
        FrameChoice::A1 => SaddleFrame::a1(),
        FrameChoice::A2 => SaddleFrame::a2(),
    }
}

fn is_integer_time(t: f64) -> bool {
    (t - t.round()).abs() <= 1e-9
}

/// `t,grad_sup,superlinear_metric` from the second checkpoint on.
pub fn superlinear_csv(series: &[(f64, f64)]) -> egl_core::Result<String> {
    let mut s = String::from("t,grad_sup,superlinear_metric\n");
    for k in 2..=series.len() {
        let m = superlinear_metric(&series[..k])?;
        let (t, g) = series[k - 1];
        let _ = writeln!(s, "{t:.16e},{g:.16e},{m:.16e}");
    }
    Ok(s)
}

pub fn cmd_theorem1(cfg: &RunConfig, dir: &RunDir) -> CmdResult {
    let sim = simulate_into(cfg, dir, is_integer_time)?;
    let frame = frame_of(cfg.frame);
    let records = sn_accounting(&sim.kept, &frame, cfg.box_eps)?;
    dir.write("sn_accounting.csv", sn_accounting_csv(&records))?;
    dir.write("sn_crosscheck.csv", sn_crosscheck_csv(&records))?;
    let series = sim.grad_series();
    if series.len() >= 2 {
        dir.write("superlinear.csv", superlinear_csv(&series)?)?;
    }

    // a_j = |S²_{j−1}|, cut at the first nonpositive area.
    let seq: Vec<f64> = records.iter().map(|r| r.area_sn2).take_while(|&a| a > 0.0).collect();
    if !seq.is_empty() {
        dir.write("reciprocal.csv", partial_sums_csv(&reciprocal_partial_sums_of(&seq)?))?;
    }

    let summary = SnSummary::of(&records);
    let mut report = format!("command=theorem1\n{}", run_summary_lines(cfg, &sim));
    let _ = writeln!(report, "delta={}", cfg.delta);
    let _ = writeln!(report, "box_eps={}", cfg.box_eps);
    for (k, v) in summary.key_values() {
        let _ = writeln!(report, "{k}={v}");
    }
    let _ = writeln!(report, "reciprocal_terms={}", seq.len());
    if series.len() >= 2 {
        let _ = writeln!(report, "superlinear_metric_final={:.10e}", superlinear_metric(&series)?);
    }
    let dips = series.windows(2).filter(|w| w[1].1 < 0.95 * w[0].1).count();
    let _ = writeln!(report, "grad_sup_dips_over_5pct={dips}");
    for r in &records {
        let _ = writeln!(
            report,
            "sn.{}=area {:.6e} area2 {:.6e} pixel_diff {:.3e} mismatch {:.3e} flags {}",
            r.n,
            r.area_sn,
            r.area_sn2,
            r.pixel_relative_difference(),
            r.symmetry_mismatch,
            r.flags_label()
        );
    }
    dir.write("report.txt", &report)?;
    Ok(Outcome::new(status_of(&sim), report))
}
