//! Scalar measurements along a trajectory.

use std::fmt::Write as _;

use rustfft::num_complex::Complex64;

use crate::error::{EglError, Result};
use crate::initial_data::{neg_index, rot_index, Symmetry};
use crate::spectral::{
    deriv_wavenumber, eval_pair, spectral_to_grid, theta_star_spectral, wavenumber, GridField,
    SpectralField, MEAN_TOL, TWO_PI,
};

const RESIDUAL_FLOOR: f64 = 1e-14;

/// One row of the diagnostics table.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub grad_sup: f64,
    pub l2: f64,
    pub energy: f64,
    pub kn_invariant: f64,
    pub shell_energy: f64,
    pub even_residual: f64,
    pub rot4_residual: f64,
    pub psi_l2: f64,
    pub hessian_sup: f64,
}

pub const CSV_HEADER: &str =
    "t,grad_sup,l2,energy,kn_invariant,shell_energy,even_residual,rot4_residual,psi_l2,hessian_sup";

impl DiagnosticsRecord {
    /// Measures every quantity for the state `s` at time `t`.
    pub fn measure(t: f64, s: &SpectralField, gamma: f64) -> Result<Self> {
        let grid = spectral_to_grid(s)?;
        let psi = s.sub(&theta_star_spectral(s.n())?);
        Ok(Self {
            t,
            grad_sup: grad_sup_norm(s),
            l2: l2_norm(s),
            energy: energy(s, gamma),
            kn_invariant: kn_invariant(s),
            shell_energy: shell_energy(s),
            even_residual: symmetry_residual(&grid, Symmetry::Even)?,
            rot4_residual: symmetry_residual(&grid, Symmetry::Rot4)?,
            psi_l2: l2_norm(&psi),
            hessian_sup: hessian_sup_norm(&psi, gamma)?,
        })
    }

    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.grad_sup,
            self.l2,
            self.energy,
            self.kn_invariant,
            self.shell_energy,
            self.even_residual,
            self.rot4_residual,
            self.psi_l2,
            self.hessian_sup,
        ]
    }

    /// CSV row with 17 significant digits per value, newline terminated.
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.values().iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v:.16e}");
        }
        s.push('\n');
        s
    }
}

/// Header plus one row per record.
pub fn to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::with_capacity(200 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
    }
    s
}

/// Max Euclidean gradient length over the factor-4 refined grid.
pub fn grad_sup_norm(s: &SpectralField) -> f64 {
    grad_sup_norm_at(s, 4)
}

/// Same as [`grad_sup_norm`] at a chosen refinement factor.
pub fn grad_sup_norm_at(s: &SpectralField, factor: usize) -> f64 {
    let n = s.n();
    let (gx, gy) = eval_pair(
        s,
        factor,
        |k1, _| Complex64::new(0.0, deriv_wavenumber(k1, n)),
        |_, k2| Complex64::new(0.0, deriv_wavenumber(k2, n)),
    );
    gx.iter()
        .zip(&gy)
        .fold(0.0, |m: f64, (a, b)| m.max(a.hypot(*b)))
}

/// Grid quadrature of `(∫|f|^p)^{1/p}`; `p = ∞` gives the max norm.
pub fn lp_norm(f: &GridField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(EglError::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let h = f.spacing();
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((sum * h * h).powf(1.0 / p))
}

/// `‖θ‖₂` from the coefficients, `(2π)(Σ|θ̂|²)^{1/2}`.
pub fn l2_norm(s: &SpectralField) -> f64 {
    TWO_PI * s.norm_sq().sqrt()
}

/// `∫θζ` with `ζ = Δ^{-γ}θ`.
pub fn energy(s: &SpectralField, gamma: f64) -> f64 {
    weighted_sum(s, |r2| r2.powf(-gamma)) * TWO_PI * TWO_PI
}

fn weighted_sum(s: &SpectralField, w: impl Fn(f64) -> f64) -> f64 {
    let n = s.n();
    let c = s.coeffs();
    let mut acc = 0.0;
    for k2 in 0..n {
        let n2 = wavenumber(k2, n);
        for k1 in 0..n {
            let n1 = wavenumber(k1, n);
            let r2 = (n1 * n1 + n2 * n2) as f64;
            if r2 > 0.0 {
                let v = c[k2 * n + k1].norm_sqr();
                if v != 0.0 {
                    acc += w(r2) * v;
                }
            }
        }
    }
    acc
}

/// `Σ_{|n|²>1} (1 − 1/|n|²)|θ̂(n)|²`.
pub fn kn_invariant(s: &SpectralField) -> f64 {
    weighted_sum(s, |r2| if r2 > 1.0 { 1.0 - 1.0 / r2 } else { 0.0 })
}

/// `Σ_{|n|²=1} |θ̂(n)|²`.
pub fn shell_energy(s: &SpectralField) -> f64 {
    [(1, 0), (-1, 0), (0, 1), (0, -1)]
        .iter()
        .map(|&(a, b)| s.coeff(a, b).norm_sqr())
        .sum()
}

/// `‖f − f∘g‖∞ / max(‖f‖∞, 1e−14)` for the even map or the quarter rotation.
pub fn symmetry_residual(f: &GridField, kind: Symmetry) -> Result<f64> {
    let n = f.n();
    if n % 4 != 0 {
        return Err(EglError::InvalidParameter(format!(
            "rotation residual needs N divisible by 4, got {n}"
        )));
    }
    let map = match kind {
        Symmetry::Even => neg_index,
        Symmetry::Rot4 | Symmetry::Both => rot_index,
    };
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (a, b) = map(i, j, n);
            worst = worst.max((f.get(i, j) - f.get(a, b)).abs());
        }
    }
    Ok(worst / f.max_abs().max(RESIDUAL_FLOOR))
}

/// Largest entry of the `(α, β)` Hessian of `Δ^{-γ}ψ` over the factor-4 grid.
pub fn hessian_sup_norm(psi: &SpectralField, gamma: f64) -> Result<f64> {
    let m = psi.mean_coeff().norm();
    if m > MEAN_TOL {
        return Err(EglError::NonZeroMean(m));
    }
    let n = psi.n();
    let sym = |k1: usize, k2: usize| {
        let (a, b) = (wavenumber(k1, n), wavenumber(k2, n));
        let r2 = (a * a + b * b) as f64;
        let w = if r2 == 0.0 { 0.0 } else { r2.powf(-gamma) };
        (deriv_wavenumber(k1, n), deriv_wavenumber(k2, n), w)
    };
    // ∂_α = ∂_x + ∂_y and ∂_β = ∂_y − ∂_x in the A₁ frame; the A₂ frame only
    // permutes these entries up to sign.
    let (aa, bb) = eval_pair(
        psi,
        4,
        |k1, k2| {
            let (a, b, w) = sym(k1, k2);
            Complex64::new(-(a + b) * (a + b) * w, 0.0)
        },
        |k1, k2| {
            let (a, b, w) = sym(k1, k2);
            Complex64::new(-(b - a) * (b - a) * w, 0.0)
        },
    );
    let (ab, _) = eval_pair(
        psi,
        4,
        |k1, k2| {
            let (a, b, w) = sym(k1, k2);
            Complex64::new(-(b * b - a * a) * w, 0.0)
        },
        |_, _| Complex64::new(0.0, 0.0),
    );
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(sup(&aa).max(sup(&bb)).max(sup(&ab)))
}

/// `(1/T²)∫₀ᵀ g dt` by the trapezoid rule, `T` the last sample time.
pub fn superlinear_metric(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 2 {
        return Err(EglError::TooFewSamples(format!(
            "need at least 2 samples, got {}",
            series.len()
        )));
    }
    let mut integral = 0.0;
    for w in series.windows(2) {
        let (t0, g0) = w[0];
        let (t1, g1) = w[1];
        if !(t1 > t0) {
            return Err(EglError::InvalidParameter("sample times must increase".into()));
        }
        integral += 0.5 * (t1 - t0) * (g0 + g1);
    }
    let t_end = series[series.len() - 1].0;
    Ok(integral / (t_end * t_end))
}

/// Least-squares fit of `ln g = ln c + λt` over a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub lambda: f64,
    pub prefactor: f64,
    pub r2: f64,
}

pub fn growth_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 - 1e-12 && t <= window.1 + 1e-12)
        .collect();
    if pts.len() < 3 {
        return Err(EglError::TooFewSamples(format!(
            "need 3 samples in [{}, {}], got {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    if let Some(&(t, g)) = pts.iter().find(|&&(_, g)| !(g > 0.0)) {
        return Err(EglError::InvalidParameter(format!(
            "nonpositive value {g} at t = {t}"
        )));
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, g) in &pts {
        let (dt, dy) = (t - tm, g.ln() - ym);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    let lambda = sty / stt;
    let intercept = ym - lambda * tm;
    let r2 = if syy == 0.0 { 1.0 } else { (sty * sty) / (stt * syy) };
    Ok(GrowthFit {
        lambda,
        prefactor: intercept.exp(),
        r2,
    })
}
