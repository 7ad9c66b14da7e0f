use rustfft::num_complex::Complex64;

use crate::error::{EglError, Result};
use crate::oracle;
use crate::polyline::Point;
use crate::spectral::{deriv_wavenumber, eval_pair, inverse_laplacian, SpectralField, TWO_PI};

/// Velocity `(ζ_y, −ζ_x)` sampled on the factor-2 refined grid, read off-grid
/// by tensor four-point Lagrange interpolation.
#[derive(Clone, Debug)]
pub struct VelocityGrid {
    m: usize,
    inv_h: f64,
    u: Vec<f64>,
    v: Vec<f64>,
}

#[inline]
fn cubic_weights(f: f64) -> [f64; 4] {
    let (a, b, c, d) = (f + 1.0, f, f - 1.0, f - 2.0);
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

impl VelocityGrid {
    pub fn from_spectral(s: &SpectralField, gamma: f64) -> Result<Self> {
        let zeta = inverse_laplacian(s, gamma)?;
        let n = s.n();
        let (u, v) = eval_pair(
            &zeta,
            2,
            |_, k2| Complex64::new(0.0, deriv_wavenumber(k2, n)),
            |k1, _| Complex64::new(0.0, -deriv_wavenumber(k1, n)),
        );
        let m = 2 * n;
        Ok(Self {
            m,
            inv_h: m as f64 / TWO_PI,
            u,
            v,
        })
    }

    pub fn sample(&self, p: Point) -> [f64; 2] {
        let m = self.m as i64;
        let gx = p[0] * self.inv_h;
        let gy = p[1] * self.inv_h;
        let (ix, iy) = (gx.floor(), gy.floor());
        let wx = cubic_weights(gx - ix);
        let wy = cubic_weights(gy - iy);
        let (ix, iy) = (ix as i64, iy as i64);
        let mut out = [0.0; 2];
        for (b, wyb) in wy.iter().enumerate() {
            let row = (iy + b as i64 - 1).rem_euclid(m) as usize * self.m;
            let (mut su, mut sv) = (0.0, 0.0);
            for (a, wxa) in wx.iter().enumerate() {
                let k = row + (ix + a as i64 - 1).rem_euclid(m) as usize;
                su += wxa * self.u[k];
                sv += wxa * self.v[k];
            }
            out[0] += wyb * su;
            out[1] += wyb * sv;
        }
        out
    }
}

/// Tensor four-point Lagrange interpolation of a periodic `m × m` grid on `[0, 2π)²`.
pub(crate) fn sample_periodic(values: &[f64], m: usize, p: Point) -> f64 {
    let inv_h = m as f64 / TWO_PI;
    let (gx, gy) = (p[0] * inv_h, p[1] * inv_h);
    let (ix, iy) = (gx.floor(), gy.floor());
    let wx = cubic_weights(gx - ix);
    let wy = cubic_weights(gy - iy);
    let (ix, iy, mi) = (ix as i64, iy as i64, m as i64);
    let mut out = 0.0;
    for (b, wyb) in wy.iter().enumerate() {
        let row = (iy + b as i64 - 1).rem_euclid(mi) as usize * m;
        let mut acc = 0.0;
        for (a, wxa) in wx.iter().enumerate() {
            acc += wxa * values[row + (ix + a as i64 - 1).rem_euclid(mi) as usize];
        }
        out += wyb * acc;
    }
    out
}

/// One-off interpolated velocity of `s` at `p`.
pub fn velocity_sample(s: &SpectralField, gamma: f64, p: Point) -> Result<[f64; 2]> {
    Ok(VelocityGrid::from_spectral(s, gamma)?.sample(p))
}

/// Time-dependent velocity source.
pub trait FieldProvider: Sync {
    /// Closed time interval on which the provider is defined.
    fn span(&self) -> (f64, f64);

    /// Velocity at `(t, p)`; `t` must lie in [`span`](Self::span).
    fn velocity(&self, t: f64, p: Point) -> Result<[f64; 2]>;
}

fn check_span(span: (f64, f64), t: f64) -> Result<()> {
    let tol = 1e-9 * (1.0 + span.1.abs());
    if t < span.0 - tol || t > span.1 + tol || t.is_nan() {
        return Err(EglError::ProviderGap(t));
    }
    Ok(())
}

/// A frozen field valid for all times.
pub struct StaticProvider {
    grid: VelocityGrid,
}

impl StaticProvider {
    pub fn new(s: &SpectralField, gamma: f64) -> Result<Self> {
        Ok(Self {
            grid: VelocityGrid::from_spectral(s, gamma)?,
        })
    }
}

impl FieldProvider for StaticProvider {
    fn span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn velocity(&self, _t: f64, p: Point) -> Result<[f64; 2]> {
        Ok(self.grid.sample(p))
    }
}

/// A frozen field evaluated by exact trigonometric summation (slow; for oracles).
pub struct ExactProvider {
    field: SpectralField,
    gamma: f64,
}

impl ExactProvider {
    pub fn new(field: SpectralField, gamma: f64) -> Self {
        Self { field, gamma }
    }
}

impl FieldProvider for ExactProvider {
    fn span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn velocity(&self, _t: f64, p: Point) -> Result<[f64; 2]> {
        Ok(oracle::velocity_at(&self.field, self.gamma, p[0], p[1]))
    }
}

/// Stored snapshots interpolated in time by cubic Lagrange over the four
/// nearest snapshots (fewer when fewer are stored).
pub struct SnapshotProvider {
    times: Vec<f64>,
    grids: Vec<VelocityGrid>,
}

impl SnapshotProvider {
    pub fn new(snapshots: &[(f64, &SpectralField)], gamma: f64) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(EglError::TooFewSamples("no snapshots".into()));
        }
        if snapshots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(EglError::InvalidParameter("snapshot times must increase".into()));
        }
        let grids = snapshots
            .iter()
            .map(|(_, s)| VelocityGrid::from_spectral(s, gamma))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: snapshots.iter().map(|s| s.0).collect(),
            grids,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

impl FieldProvider for SnapshotProvider {
    fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    fn velocity(&self, t: f64, p: Point) -> Result<[f64; 2]> {
        check_span(self.span(), t)?;
        let len = self.times.len();
        let width = len.min(4);
        let upper = self.times.partition_point(|&x| x <= t);
        let first = upper.saturating_sub(2).min(len - width);
        let nodes = &self.times[first..first + width];
        let mut out = [0.0; 2];
        for (a, &ta) in nodes.iter().enumerate() {
            let mut w = 1.0;
            for (b, &tb) in nodes.iter().enumerate() {
                if a != b {
                    w *= (t - tb) / (ta - tb);
                }
            }
            if w != 0.0 {
                let s = self.grids[first + a].sample(p);
                out[0] += w * s[0];
                out[1] += w * s[1];
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::theta_star_spectral;
    use std::f64::consts::PI;

    #[test]
    fn theta_star_samples() {
        let ts = theta_star_spectral(128).unwrap();
        let g = VelocityGrid::from_spectral(&ts, 1.0).unwrap();
        let [u, v] = g.sample([PI / 2.0, 0.0]);
        assert!(u.abs() < 1e-14 && (v - 1.0).abs() < 1e-14);
        let [u, v] = g.sample([PI, 0.0]);
        assert!(u.abs() < 1e-15 && v.abs() < 1e-15);
        let mut worst: f64 = 0.0;
        for k in 0..200 {
            let p = [0.0311 * k as f64 + 0.1, 6.1 - 0.0297 * k as f64];
            let [u, v] = g.sample(p);
            worst = worst.max((u + p[1].sin()).abs()).max((v - p[0].sin()).abs());
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn interpolation_converges_with_resolution() {
        let modes = [((3, 2), Complex64::new(0.3, 0.1)), ((1, -4), Complex64::new(-0.2, 0.25))];
        let err = |n| {
            let s = SpectralField::from_modes(n, &modes).unwrap();
            let g = VelocityGrid::from_spectral(&s, 1.0).unwrap();
            let mut worst: f64 = 0.0;
            for k in 0..50 {
                let p = [0.123 * k as f64, 0.777 + 0.091 * k as f64];
                let exact = oracle::velocity_at(&s, 1.0, p[0], p[1]);
                let got = g.sample(p);
                worst = worst.max((exact[0] - got[0]).abs()).max((exact[1] - got[1]).abs());
            }
            worst
        };
        let (e16, e32) = (err(16), err(32));
        assert!(e16 / e32 > 8.0, "{e16} {e32}");
    }

    #[test]
    fn snapshot_interpolation_is_exact_for_cubic_time_dependence() {
        let ts = theta_star_spectral(16).unwrap();
        let c = |t: f64| 1.0 + 0.5 * t - 0.2 * t * t + 0.05 * t * t * t;
        let fields: Vec<(f64, SpectralField)> =
            (0..6).map(|k| (0.5 * k as f64, ts.scaled(c(0.5 * k as f64)))).collect();
        let refs: Vec<(f64, &SpectralField)> = fields.iter().map(|(t, s)| (*t, s)).collect();
        let prov = SnapshotProvider::new(&refs, 1.0).unwrap();
        let p = [0.4, 1.3];
        let base = VelocityGrid::from_spectral(&ts, 1.0).unwrap().sample(p);
        for t in [0.0, 0.3, 1.1, 2.2, 2.5] {
            let got = prov.velocity(t, p).unwrap();
            assert!((got[0] - c(t) * base[0]).abs() < 1e-12);
            assert!((got[1] - c(t) * base[1]).abs() < 1e-12);
        }
        assert!(matches!(prov.velocity(2.6, p), Err(EglError::ProviderGap(_))));
        assert!(matches!(prov.velocity(-0.1, p), Err(EglError::ProviderGap(_))));
    }
}
