use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::characteristics::velocity::sample_periodic;
use crate::error::{EglError, Result};
use crate::initial_data::SaddleFrame;
use crate::spectral::{deriv_wavenumber, eval_pair, inverse_laplacian, theta_star_spectral, SpectralField};

use super::perturbation::Perturbation;
use super::system::{CheckDomain, PerturbedSaddleSystem, Variant};

/// Inside this radius the coefficients use the Hessian at the saddle itself.
pub const CENTER_RADIUS: f64 = 1e-4;

struct HessianGrid {
    m: usize,
    xx: Vec<f64>,
    yy: Vec<f64>,
    xy: Vec<f64>,
}

impl HessianGrid {
    fn new(theta: &SpectralField, gamma: f64) -> Result<Self> {
        let n = theta.n();
        let psi = theta.sub(&theta_star_spectral(n)?);
        let z = inverse_laplacian(&psi, gamma)?;
        let k = |i: usize| deriv_wavenumber(i, n);
        let (xx, yy) = eval_pair(
            &z,
            2,
            |k1, _| Complex64::new(-k(k1) * k(k1), 0.0),
            |_, k2| Complex64::new(-k(k2) * k(k2), 0.0),
        );
        let (xy, _) = eval_pair(&z, 2, |k1, k2| Complex64::new(-k(k1) * k(k2), 0.0), |_, _| Complex64::new(0.0, 0.0));
        Ok(Self { m: 2 * n, xx, yy, xy })
    }

    fn at(&self, p: [f64; 2]) -> [f64; 3] {
        [
            sample_periodic(&self.xx, self.m, p),
            sample_periodic(&self.yy, self.m, p),
            sample_periodic(&self.xy, self.m, p),
        ]
    }
}

/// Coefficients `f₁, f₂, g₁, g₂` of the perturbed saddle system read off
/// simulation snapshots near a saddle.
///
/// With `ψ = θ − θ*` and `ζ_ψ = Δ^{−γ}ψ`, the perturbation of the
/// characteristic velocity `−∇⊥ζ_ψ` in `(α, β)` coordinates is written as
/// `J(α/2, β/2)·(α, β)`, where `J` is its Jacobian at the midpoint. Between
/// snapshots `J` is interpolated linearly in time and held constant outside
/// the stored span.
pub struct SnapshotPerturbation {
    frame: SaddleFrame,
    times: Vec<f64>,
    grids: Vec<HessianGrid>,
    m: [[f64; 2]; 2],
    m_inv: [[f64; 2]; 2],
}

impl SnapshotPerturbation {
    pub fn new(snapshots: &[(f64, &SpectralField)], frame: SaddleFrame, gamma: f64) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(EglError::TooFewSamples("no snapshots".into()));
        }
        if snapshots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(EglError::InvalidParameter("snapshot times must increase".into()));
        }
        let grids = snapshots
            .iter()
            .map(|(_, s)| HessianGrid::new(s, gamma))
            .collect::<Result<Vec<_>>>()?;
        let c = frame.center();
        let ca = frame.from_alpha_beta([1.0, 0.0]);
        let cb = frame.from_alpha_beta([0.0, 1.0]);
        let m = [[ca[0] - c[0], cb[0] - c[0]], [ca[1] - c[1], cb[1] - c[1]]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let m_inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        Ok(Self {
            frame,
            times: snapshots.iter().map(|s| s.0).collect(),
            grids,
            m,
            m_inv,
        })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    fn hessian(&self, t: f64, p: [f64; 2]) -> [f64; 3] {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return self.grids[0].at(p);
        }
        if k == self.times.len() {
            return self.grids[k - 1].at(p);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (self.grids[k - 1].at(p), self.grids[k].at(p));
        [0, 1, 2].map(|i| (1.0 - w) * a[i] + w * b[i])
    }

    /// `[f₁, f₂, g₁, g₂]` at `(α, β, t)`.
    pub fn coefficients(&self, alpha: f64, beta: f64, t: f64) -> [f64; 4] {
        let mid = if alpha.hypot(beta) < CENTER_RADIUS {
            [0.0, 0.0]
        } else {
            [0.5 * alpha, 0.5 * beta]
        };
        let [zxx, zyy, zxy] = self.hessian(t, self.frame.from_alpha_beta(mid));
        let gw = [[-zxy, -zyy], [zxx, zxy]];
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            [0, 1].map(|i| [0, 1].map(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
        };
        let j = mul(mul(self.m_inv, gw), self.m);
        [j[0][0], j[0][1], j[1][0], j[1][1]]
    }

    /// Largest coefficient magnitude over a lattice of `(α, β)` in
    /// `[−half, half]²` at every stored time.
    pub fn sup_estimate(&self, half: f64, points: usize) -> f64 {
        let m = points.max(2);
        let mut worst: f64 = 0.0;
        for &t in &self.times {
            for a in 0..m {
                for b in 0..m {
                    let al = -half + 2.0 * half * a as f64 / (m - 1) as f64;
                    let be = -half + 2.0 * half * b as f64 / (m - 1) as f64;
                    worst = self.coefficients(al, be, t).iter().fold(worst, |w, c| w.max(c.abs()));
                }
            }
        }
        worst
    }

    /// The perturbed saddle system with these coefficients, spot-checked
    /// against `bound ≤ 0.01` on `[−half, half]²` over the snapshot span.
    pub fn into_system(self, bound: f64, half: f64) -> Result<PerturbedSaddleSystem> {
        if !(bound > 0.0 && bound <= 0.01) {
            return Err(EglError::InvalidParameter(format!(
                "perturbation bound must lie in (0, 0.01], got {bound}"
            )));
        }
        let t_max = self.span().1;
        let me = Arc::new(self);
        let component = |k: usize| {
            let me = Arc::clone(&me);
            Perturbation::custom(move |a, b, t| me.coefficients(a, b, t)[k])
        };
        let perts = (0..4).map(component).collect();
        PerturbedSaddleSystem::build(
            Variant::Flow1,
            perts,
            bound,
            CheckDomain {
                half_width: half,
                t_max,
                points: 9,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode_lab::system::integrate_saddle;

    #[test]
    fn theta_star_gives_zero_coefficients() {
        let ts = theta_star_spectral(32).unwrap();
        let sp = SnapshotPerturbation::new(&[(0.0, &ts)], SaddleFrame::a1(), 1.0).unwrap();
        assert_eq!(sp.sup_estimate(0.2, 5), 0.0);
    }

    #[test]
    fn linear_mode_matches_hand_jacobian() {
        // ψ = −c·cos x, so ζ_ψ = ψ and only ζ_xx = c·cos x is nonzero.
        let n = 32;
        let c = 1e-3;
        let ts = theta_star_spectral(n).unwrap();
        let extra = SpectralField::from_modes(n, &[((1, 0), Complex64::new(-0.5 * c, 0.0))]).unwrap();
        let theta = ts.add(&extra);
        let sp = SnapshotPerturbation::new(&[(0.0, &theta)], SaddleFrame::a1(), 1.0).unwrap();
        // At A₁ the Jacobian in (α, β) is [[a, −a], [a, −a]] / 2 with a = ζ_xx(π, 0) = −c.
        let [f1, f2, g1, g2] = sp.coefficients(0.0, 0.0, 0.0);
        let a = -c;
        for (got, want) in [(f1, a / 2.0), (f2, -a / 2.0), (g1, a / 2.0), (g2, -a / 2.0)] {
            assert!((got - want).abs() < 1e-12, "{got} {want}");
        }
        let sys = sp.into_system(0.01, 0.2).unwrap();
        assert!(integrate_saddle(&sys, [0.01, 0.05], (0.0, 1.0), 1e-3).is_ok());
    }
}
