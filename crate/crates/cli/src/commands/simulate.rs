//! Evolution runs with diagnostics, snapshots and heatmaps.

use std::fmt::Write as _;

use egl_core::diagnostics::to_csv;
use egl_core::field_io::{write_binary, write_pgm};
use egl_core::initial_data::{build_theorem1_data, build_theorem2_data, stationary_theta_star};
use egl_core::spectral::spectral_to_grid;
use egl_core::{
    run_with, Checkpoint, DiagnosticsRecord, GridField, RunOptions, RunSummary, SimState, Theorem1Params,
    Theorem2Params, TimeStep,
};

use super::{CmdResult, Outcome};
use crate::config::{DataFamily, DtSetting, RunConfig};
use crate::manifest::{RunDir, RunStatus};

/// Initial vorticity for the configured data family.
pub fn initial_field(cfg: &RunConfig) -> egl_core::Result<GridField> {
    match cfg.family {
        DataFamily::ThetaStar => stationary_theta_star(cfg.n),
        DataFamily::Thm1 => {
            let p = Theorem1Params::new(cfg.delta)?.with_blend_width(cfg.blend_width)?;
            build_theorem1_data(cfg.n, &p)
        }
        DataFamily::Thm2 => build_theorem2_data(cfg.n, &Theorem2Params::new(cfg.epsilon)?),
    }
}

pub struct SimulationResult {
    pub records: Vec<DiagnosticsRecord>,
    /// Checkpoints selected by the `keep` predicate.
    pub kept: Vec<Checkpoint>,
    pub summary: RunSummary,
}

impl SimulationResult {
    pub fn blew_up(&self) -> bool {
        self.summary.blow_up.is_some()
    }

    pub fn grad_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, r.grad_sup)).collect()
    }
}

/// Runs the configured evolution and writes `diagnostics.csv` plus any
/// requested snapshots into `dir`.
///
/// With `time_scale = s ≠ 1` the solver evolves `θ₀/s` for time `s·t_end`;
/// since `s·θ̃(s·t)` solves the same equation, every checkpoint is mapped back
/// and all outputs refer to the unscaled solution.
pub fn simulate_into(
    cfg: &RunConfig,
    dir: &RunDir,
    keep: impl Fn(f64) -> bool,
) -> anyhow::Result<SimulationResult> {
    let s = cfg.time_scale;
    let grid = initial_field(cfg)?;
    let state = SimState::from_grid(&grid.scaled(1.0 / s), cfg.gamma)?;
    let opts = RunOptions {
        t_end: s * cfg.t_end,
        checkpoint_interval: s * cfg.checkpoint_interval,
        dt: match cfg.dt {
            DtSetting::Auto => TimeStep::Auto,
            DtSetting::Fixed(d) => TimeStep::Fixed(s * d),
        },
    };
    let mut records = Vec::new();
    let mut kept = Vec::new();
    let mut io_error = None;
    let summary = run_with(&state, &opts, |c| {
        let c = if s == 1.0 {
            c
        } else {
            let t = c.t / s;
            let field = c.field.scaled(s);
            let diagnostics = DiagnosticsRecord::measure(t, &field, cfg.gamma)?;
            Checkpoint { t, field, diagnostics }
        };
        records.push(c.diagnostics.clone());
        if cfg.snapshots || cfg.pgm {
            let g = spectral_to_grid(&c.field)?;
            let stem = format!("snapshots/theta_t{:09.4}", c.t);
            if let Err(e) = write_snapshot(dir, &stem, &g, cfg) {
                io_error.get_or_insert(e);
            }
        }
        if keep(c.t) {
            kept.push(c);
        }
        Ok(())
    })?;
    if let Some(e) = io_error {
        return Err(e);
    }
    let mut summary = summary;
    if let Some(t) = summary.blow_up.as_mut() {
        *t /= s;
    }
    summary.dt_min /= s;
    summary.dt_max /= s;
    dir.write("diagnostics.csv", to_csv(&records))?;
    Ok(SimulationResult { records, kept, summary })
}

fn write_snapshot(dir: &RunDir, stem: &str, g: &GridField, cfg: &RunConfig) -> anyhow::Result<()> {
    if cfg.snapshots {
        let mut buf = Vec::new();
        write_binary(g, &mut buf)?;
        dir.write(&format!("{stem}.bin"), buf)?;
    }
    if cfg.pgm {
        let mut buf = Vec::new();
        write_pgm(g, &mut buf)?;
        dir.write(&format!("{stem}.pgm"), buf)?;
    }
    Ok(())
}

/// Report lines shared by every simulation command.
pub fn run_summary_lines(cfg: &RunConfig, sim: &SimulationResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "N={}", cfg.n);
    let _ = writeln!(s, "gamma={}", cfg.gamma);
    let _ = writeln!(s, "checkpoints={}", sim.records.len());
    let _ = writeln!(s, "steps={}", sim.summary.steps);
    let _ = writeln!(s, "dt_min={:.6e}", sim.summary.dt_min);
    let _ = writeln!(s, "dt_max={:.6e}", sim.summary.dt_max);
    match sim.summary.blow_up {
        Some(t) => {
            let _ = writeln!(s, "blow_up_t={t:.6}");
        }
        None => {
            let _ = writeln!(s, "blow_up_t=none");
        }
    }
    if let Some(last) = sim.records.last() {
        let _ = writeln!(s, "t_final={}", last.t);
        let _ = writeln!(s, "grad_sup_final={:.10e}", last.grad_sup);
    }
    if let (Some(a), Some(b)) = (sim.records.first(), sim.records.last()) {
        let drift = |x: f64, y: f64| if x == 0.0 { (y - x).abs() } else { ((y - x) / x).abs() };
        let _ = writeln!(s, "l2_drift={:.3e}", drift(a.l2, b.l2));
        let _ = writeln!(s, "energy_drift={:.3e}", drift(a.energy, b.energy));
        let _ = writeln!(s, "kn_invariant_drift={:.3e}", drift(a.kn_invariant, b.kn_invariant));
        let worst = |f: fn(&DiagnosticsRecord) -> f64| sim.records.iter().map(f).fold(0.0, f64::max);
        let _ = writeln!(s, "max_even_residual={:.3e}", worst(|r| r.even_residual));
        let _ = writeln!(s, "max_rot4_residual={:.3e}", worst(|r| r.rot4_residual));
    }
    for f in cfg.flags() {
        let _ = writeln!(s, "flag={f}");
    }
    s
}

pub fn status_of(sim: &SimulationResult) -> RunStatus {
    if sim.blew_up() {
        RunStatus::BlowUp
    } else {
        RunStatus::Complete
    }
}

pub fn cmd_simulate(cfg: &RunConfig, dir: &RunDir) -> CmdResult {
    let sim = simulate_into(cfg, dir, |_| false)?;
    let report = format!("command=simulate\n{}", run_summary_lines(cfg, &sim));
    dir.write("report.txt", &report)?;
    Ok(Outcome::new(status_of(&sim), report))
}
