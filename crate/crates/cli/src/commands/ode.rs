//! Trapping, decay and reciprocal-sum checks on the saddle ODEs.

use std::fmt::Write as _;

use egl_core::ode_lab::{
    find_decaying_trajectory, min_reciprocal_sum, partial_sums_csv, reciprocal_partial_sums, reciprocal_sum,
    trapping_escape_check, Adversary, DecayReport, PartialSumRow, CURVE_MAX_SEG,
};
use egl_core::{Perturbation, PerturbedSaddleSystem, Polyline, Trajectory, Variant};

use super::{CmdResult, Outcome};
use crate::config::{OdeCheck, RunConfig, Sequence};
use crate::manifest::{RunDir, RunStatus};

pub const CLOSED_FORM_TOL: f64 = 1e-12;
pub const ZERO_CASE_TOL: f64 = 1e-8;

/// One section of the report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckSection {
    pub name: &'static str,
    pub passed: bool,
    pub lines: Vec<(String, String)>,
}

impl CheckSection {
    fn render(&self, out: &mut String) {
        let _ = writeln!(out, "[{}]", self.name);
        let _ = writeln!(out, "pass={}", self.passed);
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k}={v}");
        }
        out.push('\n');
    }
}

fn kv(pairs: Vec<(&'static str, String)>) -> Vec<(String, String)> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn trapping_section(cfg: &RunConfig) -> anyhow::Result<CheckSection> {
    let suite = Adversary::suite(cfg.seed, cfg.ode_random_draws);
    let r = trapping_escape_check(cfg.ode_eps, cfg.ode_samples, &suite, cfg.seed)?;
    Ok(CheckSection {
        name: "trapping",
        passed: r.passed(),
        lines: kv(r.key_values()),
    })
}

/// Initial curve: the horizontal segment `|α| ≤ β₀/2` at height `β₀`.
pub fn initial_curve(beta0: f64) -> Polyline {
    Polyline::segment([beta0 / 2.0, beta0], [-beta0 / 2.0, beta0], CURVE_MAX_SEG)
}

/// Draw `d` of the random perturbation family, each component bounded by `bound`.
pub fn random_pot_system(seed: u64, draw: usize, bound: f64) -> egl_core::Result<PerturbedSaddleSystem> {
    let base = seed.wrapping_mul(1_000_003).wrapping_add(4 * draw as u64);
    let p = |k: u64| Perturbation::random(base.wrapping_add(k), bound);
    PerturbedSaddleSystem::pot(bound, [p(0), p(1), p(2), p(3)])
}

/// `max_t max(|α(t)|, |β(t) − β(0)e^{−t}|)` for the unperturbed system.
pub fn zero_case_error(tr: &Trajectory) -> f64 {
    (0..tr.len())
        .map(|k| {
            let exact = tr.beta[0] * (-tr.t[k]).exp();
            tr.alpha[k].abs().max((tr.beta[k] - exact).abs())
        })
        .fold(0.0, f64::max)
}

pub struct DecayOutcome {
    pub section: CheckSection,
    pub zero: DecayReport,
    pub draws: Vec<Result<DecayReport, String>>,
}

pub fn decay_section(cfg: &RunConfig) -> anyhow::Result<DecayOutcome> {
    let zero = find_decaying_trajectory(
        &PerturbedSaddleSystem::unperturbed(Variant::Pot),
        cfg.ode_n_legs,
        initial_curve(cfg.ode_beta0),
    )?;
    let zero_err = zero.trajectory.as_ref().map_or(f64::INFINITY, zero_case_error);
    let mut lines = vec![
        ("n_legs".to_string(), cfg.ode_n_legs.to_string()),
        ("beta0".to_string(), cfg.ode_beta0.to_string()),
        ("bound".to_string(), cfg.ode_bound.to_string()),
        ("zero_case_verdict".to_string(), format!("{:?}", zero.verdict)),
        ("zero_case_exact_error".to_string(), format!("{zero_err:.3e}")),
    ];
    let mut passed = zero.passed() && zero_err <= ZERO_CASE_TOL;
    let mut draws = Vec::new();
    let (mut worst_decay, mut worst_pinch) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut n_pass = 0;
    for d in 0..cfg.ode_draws {
        let r = random_pot_system(cfg.seed, d, cfg.ode_bound)
            .and_then(|sys| find_decaying_trajectory(&sys, cfg.ode_n_legs, initial_curve(cfg.ode_beta0)));
        match &r {
            Ok(rep) => {
                if rep.passed() {
                    n_pass += 1;
                }
                worst_decay = worst_decay.max(rep.worst_decay_ratio);
                worst_pinch = worst_pinch.min(rep.worst_pinch_ratio);
                lines.push((
                    format!("draw.{d}"),
                    format!(
                        "verdict {:?} decay_ratio {:.6e} pinch_ratio {:.6e}",
                        rep.verdict, rep.worst_decay_ratio, rep.worst_pinch_ratio
                    ),
                ));
            }
            Err(e) => lines.push((format!("draw.{d}"), format!("error {e}"))),
        }
        draws.push(r.map_err(|e| e.to_string()));
    }
    passed &= n_pass == cfg.ode_draws;
    lines.splice(
        5..5,
        [
            ("draws_passed".to_string(), format!("{n_pass}/{}", cfg.ode_draws)),
            ("worst_decay_ratio".to_string(), format!("{worst_decay:.6e}")),
            ("worst_pinch_ratio".to_string(), format!("{worst_pinch:.6e}")),
        ],
    );
    Ok(DecayOutcome {
        section: CheckSection {
            name: "decay",
            passed,
            lines,
        },
        zero,
        draws,
    })
}

pub fn sequence_term(seq: Sequence, j: usize) -> f64 {
    match seq {
        Sequence::Geometric(r) => r.powi(j as i32),
        Sequence::Power(p) => (j as f64).powf(-p),
    }
}

/// `N⁻² Σ_{j≤N} r^{−j}` in closed form.
pub fn geometric_metric(r: f64, n: usize) -> f64 {
    let q = 1.0 / r;
    q * (q.powi(n as i32) - 1.0) / (q - 1.0) / (n * n) as f64
}

/// Smallest `N` from which the metric increases strictly up to `n_max`, if it
/// increases at least once.
pub fn monotone_from(rows: &[PartialSumRow]) -> Option<usize> {
    let start = match rows.windows(2).rposition(|w| !(w[1].metric > w[0].metric)) {
        None => 0,
        Some(k) => k + 1,
    };
    (start + 1 < rows.len()).then(|| rows[start].n)
}

pub struct ReciprocalOutcome {
    pub section: CheckSection,
    pub rows: Vec<PartialSumRow>,
}

pub fn reciprocal_section(cfg: &RunConfig) -> anyhow::Result<ReciprocalOutcome> {
    let seq = cfg.ode_sequence;
    let rows = reciprocal_partial_sums(|j| sequence_term(seq, j), cfg.ode_n_max)?;
    let closed_err = match seq {
        Sequence::Geometric(r) => rows
            .iter()
            .map(|row| {
                let exact = geometric_metric(r, row.n);
                (row.metric - exact).abs() / exact
            })
            .fold(0.0, f64::max),
        Sequence::Power(_) => 0.0,
    };
    let equality_err = (1..=cfg.ode_n_max)
        .flat_map(|n| [0.3, 1.0, 2.5].map(|sigma| (n, sigma)))
        .map(|(n, sigma)| {
            let xs = vec![sigma / n as f64; n];
            let want = min_reciprocal_sum(sigma, n);
            (reciprocal_sum(&xs) - want).abs() / want
        })
        .fold(0.0, f64::max);
    let dominated = rows.iter().all(|r| r.metric >= r.tail_bound * (1.0 - 1e-12));
    let mono = monotone_from(&rows);
    let passed = closed_err <= CLOSED_FORM_TOL && equality_err <= CLOSED_FORM_TOL && dominated && mono.is_some();
    let label = match seq {
        Sequence::Geometric(r) => format!("geometric ratio {r}"),
        Sequence::Power(p) => format!("power exponent {p}"),
    };
    let lines = vec![
        ("sequence".to_string(), label),
        ("n_max".to_string(), cfg.ode_n_max.to_string()),
        ("closed_form_max_rel_error".to_string(), format!("{closed_err:.3e}")),
        ("equality_case_max_rel_error".to_string(), format!("{equality_err:.3e}")),
        ("metric_dominates_tail_bound".to_string(), dominated.to_string()),
        ("metric_increasing_from_N".to_string(), mono.map_or("never".into(), |n| n.to_string())),
        ("metric_final".to_string(), format!("{:.10e}", rows.last().map_or(f64::NAN, |r| r.metric))),
    ];
    Ok(ReciprocalOutcome {
        section: CheckSection {
            name: "reciprocal",
            passed,
            lines,
        },
        rows,
    })
}

pub fn cmd_ode(cfg: &RunConfig, dir: &RunDir) -> CmdResult {
    let mut sections = Vec::new();
    for check in &cfg.ode_checks {
        match check {
            OdeCheck::Trapping => sections.push(trapping_section(cfg)?),
            OdeCheck::Decay => {
                let out = decay_section(cfg)?;
                dir.write("curves.csv", out.zero.curves_csv())?;
                if let Some(tr) = &out.zero.trajectory {
                    dir.write("trajectory_zero.csv", tr.to_csv())?;
                }
                for (d, r) in out.draws.iter().enumerate() {
                    if let Ok(Some(tr)) = r.as_ref().map(|r| r.trajectory.as_ref()) {
                        dir.write(&format!("trajectories/draw_{d:03}.csv"), tr.to_csv())?;
                    }
                }
                sections.push(out.section);
            }
            OdeCheck::Reciprocal => {
                let out = reciprocal_section(cfg)?;
                dir.write("partial_sums.csv", partial_sums_csv(&out.rows))?;
                sections.push(out.section);
            }
        }
    }
    let passed = sections.iter().all(|s| s.passed);
    let mut report = format!("command=ode\npass={passed}\nseed={}\n\n", cfg.seed);
    for s in &sections {
        s.render(&mut report);
    }
    dir.write("report.txt", &report)?;
    let status = if passed { RunStatus::Complete } else { RunStatus::CheckFailed };
    Ok(Outcome::new(status, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_closed_form_matches_halving() {
        for n in 1..30 {
            let want = (2f64.powi(n as i32 + 1) - 2.0) / (n * n) as f64;
            assert!((geometric_metric(0.5, n) - want).abs() <= 1e-13 * want);
        }
    }

    #[test]
    fn halving_sequence_increases_from_two() {
        let rows = reciprocal_partial_sums(|j| sequence_term(Sequence::Geometric(0.5), j), 20).unwrap();
        assert_eq!(monotone_from(&rows), Some(2));
    }

    #[test]
    fn reciprocal_section_passes_on_defaults() {
        let cfg = RunConfig::default();
        let out = reciprocal_section(&cfg).unwrap();
        assert!(out.section.passed, "{:?}", out.section.lines);
        let mut p = cfg.clone();
        p.ode_sequence = Sequence::Power(2.0);
        assert!(reciprocal_section(&p).unwrap().section.passed);
    }
}
