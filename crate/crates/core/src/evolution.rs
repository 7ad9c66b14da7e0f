//! Dealiased pseudo-spectral RK4 integration of `θ_t = ∇θ · ∇⊥Δ^{-γ}θ`.

use rustfft::num_complex::Complex64;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{EglError, Result};
use crate::fft::Fft2;
use crate::spectral::{
    check_resolution, deriv_wavenumber, eval_pair, grid_to_spectral, survives_dealiasing,
    wavenumber, GridField, MeanPolicy, SpectralField, MEAN_TOL, TWO_PI,
};

pub const CFL_NUMBER: f64 = 0.5;
const VELOCITY_FLOOR: f64 = 1e-8;
const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Solution at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub field: SpectralField,
    pub gamma: f64,
    pub dt: f64,
}

impl SimState {
    /// Truncates `field` to the dealiased band (which also clears the Nyquist
    /// row and column) and checks the mean.
    pub fn new(field: SpectralField, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let m = field.mean_coeff().norm();
        if m > MEAN_TOL {
            return Err(EglError::NonZeroMean(m));
        }
        let n = field.n();
        let mut field = field.map_modes(|a, b, c| if survives_dealiasing(a, b, n) { c } else { CZERO });
        field.zero_mean();
        Ok(Self {
            t: 0.0,
            field,
            gamma,
            dt: 0.0,
        })
    }

    pub fn from_grid(f: &GridField, gamma: f64) -> Result<Self> {
        Self::new(grid_to_spectral(f, MeanPolicy::Tolerance(1e-12))?, gamma)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(EglError::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// Precomputed multipliers for one resolution and exponent.
pub struct Euler {
    n: usize,
    gamma: f64,
    kd: Vec<f64>,
    inv_lap: Vec<f64>,
    keep: Vec<bool>,
}

struct Rk4Buffers {
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl Euler {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        check_resolution(n)?;
        check_gamma(gamma)?;
        let kd = (0..n).map(|k| deriv_wavenumber(k, n)).collect();
        let mut inv_lap = vec![0.0; n * n];
        let mut keep = vec![false; n * n];
        for k2 in 0..n {
            let b = wavenumber(k2, n);
            for k1 in 0..n {
                let a = wavenumber(k1, n);
                let r2 = (a * a + b * b) as f64;
                if r2 > 0.0 {
                    inv_lap[k2 * n + k1] = r2.powf(-gamma);
                    keep[k2 * n + k1] = survives_dealiasing(a, b, n);
                }
            }
        }
        Ok(Self {
            n,
            gamma,
            kd,
            inv_lap,
            keep,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn check(&self, s: &SpectralField) -> Result<()> {
        if s.n() != self.n {
            return Err(EglError::LengthMismatch {
                expected: self.n * self.n,
                got: s.n() * s.n(),
            });
        }
        let m = s.mean_coeff().norm();
        if m > MEAN_TOL {
            return Err(EglError::NonZeroMean(m));
        }
        Ok(())
    }

    /// Writes the dealiased spectrum of `θ_x ζ_y − θ_y ζ_x` into `out`.
    fn rhs_into(&self, c: &[Complex64], out: &mut [Complex64], a: &mut [Complex64], b: &mut [Complex64]) {
        let n = self.n;
        // a ↦ θ_x + iθ_y, b ↦ u + iv with u = ζ_y, v = −ζ_x.
        for k2 in 0..n {
            let ky = self.kd[k2];
            for k1 in 0..n {
                let k = k2 * n + k1;
                let kx = self.kd[k1];
                let v = c[k];
                a[k] = v * Complex64::new(-ky, kx);
                b[k] = v * Complex64::new(kx * self.inv_lap[k], ky * self.inv_lap[k]);
            }
        }
        let fft = Fft2::get(n);
        fft.inverse(a);
        fft.inverse(b);
        for (o, (p, q)) in out.iter_mut().zip(a.iter().zip(b.iter())) {
            *o = Complex64::new(p.re * q.re + p.im * q.im, 0.0);
        }
        fft.forward(out);
        let scale = 1.0 / (n * n) as f64;
        for (o, &keep) in out.iter_mut().zip(&self.keep) {
            *o = if keep { *o * scale } else { CZERO };
        }
    }

    pub fn rhs(&self, s: &SpectralField) -> Result<SpectralField> {
        self.check(s)?;
        let nn = self.n * self.n;
        let mut out = vec![CZERO; nn];
        let (mut a, mut b) = (vec![CZERO; nn], vec![CZERO; nn]);
        self.rhs_into(s.coeffs(), &mut out, &mut a, &mut b);
        SpectralField::from_coeffs(self.n, out)
    }

    fn buffers(&self) -> Rk4Buffers {
        let nn = self.n * self.n;
        Rk4Buffers {
            k: std::array::from_fn(|_| vec![CZERO; nn]),
            stage: vec![CZERO; nn],
            a: vec![CZERO; nn],
            b: vec![CZERO; nn],
        }
    }

    /// One classical RK4 step in place; returns false on non-finite output.
    fn advance(&self, c: &mut [Complex64], dt: f64, w: &mut Rk4Buffers) -> bool {
        let Rk4Buffers { k, stage, a, b } = w;
        let [k1, k2, k3, k4] = k;
        self.rhs_into(c, k1, a, b);
        for ((s, &x), &d) in stage.iter_mut().zip(c.iter()).zip(k1.iter()) {
            *s = x + d * (0.5 * dt);
        }
        self.rhs_into(stage, k2, a, b);
        for ((s, &x), &d) in stage.iter_mut().zip(c.iter()).zip(k2.iter()) {
            *s = x + d * (0.5 * dt);
        }
        self.rhs_into(stage, k3, a, b);
        for ((s, &x), &d) in stage.iter_mut().zip(c.iter()).zip(k3.iter()) {
            *s = x + d * dt;
        }
        self.rhs_into(stage, k4, a, b);
        let h6 = dt / 6.0;
        let mut finite = true;
        for (i, (x, &keep)) in c.iter_mut().zip(&self.keep).enumerate() {
            if keep {
                *x += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * h6;
                finite &= x.re.is_finite() && x.im.is_finite();
            } else {
                *x = CZERO;
            }
        }
        finite
    }

    /// `C·Δx / max(max-component |u|, 1e−8)` with `|u|` sampled on the factor-2 grid.
    pub fn cfl_dt(&self, s: &SpectralField) -> f64 {
        let n = self.n;
        let (u, v) = eval_pair(
            s,
            2,
            |k1, k2| Complex64::new(0.0, self.kd[k2] * self.inv_lap[k2 * n + k1]),
            |k1, k2| Complex64::new(0.0, -self.kd[k1] * self.inv_lap[k2 * n + k1]),
        );
        let umax = u.iter().chain(&v).fold(0.0f64, |m, x| m.max(x.abs()));
        CFL_NUMBER * (TWO_PI / n as f64) / umax.max(VELOCITY_FLOOR)
    }

    /// Advances `state` by `dt`, rejecting steps above the CFL limit.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        self.check(&state.field)?;
        let limit = self.cfl_dt(&state.field);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(EglError::CflViolation { dt, limit });
        }
        let mut c = state.field.coeffs().to_vec();
        let mut w = self.buffers();
        if !self.advance(&mut c, dt, &mut w) {
            return Err(EglError::BlowUp(state.t + dt));
        }
        Ok(SimState {
            t: state.t + dt,
            field: SpectralField::from_coeffs(self.n, c)?,
            gamma: state.gamma,
            dt,
        })
    }
}

/// Right-hand side `θ_x ζ_y − θ_y ζ_x` in coefficient form.
pub fn rhs(s: &SpectralField, gamma: f64) -> Result<SpectralField> {
    Euler::new(s.n(), gamma)?.rhs(s)
}

pub fn step(state: &SimState, dt: f64) -> Result<SimState> {
    Euler::new(state.field.n(), state.gamma)?.step(state, dt)
}

pub fn cfl_dt(state: &SimState) -> f64 {
    Euler::new(state.field.n(), state.gamma)
        .map(|e| e.cfl_dt(&state.field))
        .unwrap_or(f64::NAN)
}

/// How the step size is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep {
    /// The CFL step, re-evaluated at checkpoints and never increased.
    Auto,
    /// A requested step, halved whenever it exceeds the CFL step at a checkpoint.
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    pub checkpoint_interval: f64,
    pub dt: TimeStep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub field: SpectralField,
    pub diagnostics: DiagnosticsRecord,
}

/// Summary of a finished or aborted run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    /// Time of the first non-finite state, if the run blew up.
    pub blow_up: Option<f64>,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub checkpoints: Vec<Checkpoint>,
    pub summary: RunSummary,
}

impl RunOutcome {
    pub fn is_partial(&self) -> bool {
        self.summary.blow_up.is_some()
    }

    pub fn diagnostics(&self) -> Vec<DiagnosticsRecord> {
        self.checkpoints.iter().map(|c| c.diagnostics.clone()).collect()
    }
}

/// Checkpoint times `t₀ + k·Δ`, the last one clamped to `t_end`.
pub fn checkpoint_times(t0: f64, t_end: f64, interval: f64) -> Vec<f64> {
    let count = ((t_end - t0) / interval - 1e-9).ceil().max(0.0) as usize;
    (0..=count)
        .map(|k| (t0 + k as f64 * interval).min(t_end))
        .collect()
}

/// Runs with automatic step size and keeps every checkpoint.
pub fn run(initial: &SimState, t_end: f64, checkpoint_interval: f64) -> Result<RunOutcome> {
    let opts = RunOptions {
        t_end,
        checkpoint_interval,
        dt: TimeStep::Auto,
    };
    let mut checkpoints = Vec::new();
    let summary = run_with(initial, &opts, |c| {
        checkpoints.push(c);
        Ok(())
    })?;
    Ok(RunOutcome {
        checkpoints,
        summary,
    })
}

/// Integrates to `t_end`, handing each checkpoint to `observe` as it is reached.
///
/// Every interval between checkpoints is split into equal steps no longer than
/// the current step size. A non-finite state stops the run and is reported in
/// the summary rather than as an error.
pub fn run_with(
    initial: &SimState,
    opts: &RunOptions,
    mut observe: impl FnMut(Checkpoint) -> Result<()>,
) -> Result<RunSummary> {
    if !(opts.t_end > initial.t) {
        return Err(EglError::InvalidParameter(format!(
            "t_end = {} must exceed the start time {}",
            opts.t_end, initial.t
        )));
    }
    if !(opts.checkpoint_interval > 0.0) {
        return Err(EglError::InvalidParameter("checkpoint interval must be positive".into()));
    }
    if let TimeStep::Fixed(d) = opts.dt {
        if !(d > 0.0 && d.is_finite()) {
            return Err(EglError::InvalidParameter(format!("dt must be positive, got {d}")));
        }
    }
    let euler = Euler::new(initial.field.n(), initial.gamma)?;
    euler.check(&initial.field)?;
    let n = euler.n;
    let mut w = euler.buffers();
    let mut c = initial.field.coeffs().to_vec();
    let times = checkpoint_times(initial.t, opts.t_end, opts.checkpoint_interval);
    let mut dt = match opts.dt {
        TimeStep::Auto => f64::INFINITY,
        TimeStep::Fixed(d) => d,
    };
    let mut summary = RunSummary {
        blow_up: None,
        steps: 0,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
    };
    for (idx, &t) in times.iter().enumerate() {
        let field = SpectralField::from_coeffs(n, c.clone())?;
        let diagnostics = DiagnosticsRecord::measure(t, &field, initial.gamma)?;
        let limit = euler.cfl_dt(&field);
        observe(Checkpoint {
            t,
            field,
            diagnostics,
        })?;
        let Some(&t_next) = times.get(idx + 1) else {
            break;
        };
        match opts.dt {
            TimeStep::Auto => dt = dt.min(limit),
            TimeStep::Fixed(_) => {
                while dt > limit {
                    dt *= 0.5;
                }
            }
        }
        let span = t_next - t;
        let steps = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        summary.dt_min = summary.dt_min.min(h);
        summary.dt_max = summary.dt_max.max(h);
        for s in 0..steps {
            summary.steps += 1;
            if !euler.advance(&mut c, h, &mut w) {
                summary.blow_up = Some(t + (s + 1) as f64 * h);
                return Ok(summary);
            }
        }
    }
    Ok(summary)
}
