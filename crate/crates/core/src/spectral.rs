//! Periodic fields on `[0, 2π)²` and their Fourier representation.
//!
//! Coefficients follow `θ̂(n) = (2π)⁻² ∫ e^{-i n·z} θ(z) dz`, realized by the DFT
//! divided by `N²`, so Parseval reads `‖θ‖₂² = (2π)² Σ |θ̂(n)|²`. Grids and
//! coefficient arrays are both row-major with the x index fastest; coefficients
//! sit in FFT order, index `k` carrying wavenumber `k` for `k < N/2` and `k − N`
//! otherwise (the Nyquist index `N/2` is read as `−N/2`).

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{EglError, Result};
use crate::fft::Fft2;

pub const TWO_PI: f64 = 2.0 * PI;

/// Largest |θ̂(0,0)| accepted where a zero-mean field is required.
pub const MEAN_TOL: f64 = 1e-12;

/// Relative Hermitian defect tolerated before a spectrum is rejected as non-real.
pub const HERMITIAN_TOL: f64 = 1e-10;

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn check_resolution(n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(EglError::BadResolution(n));
    }
    Ok(())
}

/// Wavenumber carried by FFT index `k` on an `n`-point axis.
#[inline]
pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Wavenumber used for spectral differentiation; the Nyquist index carries none.
#[inline]
pub(crate) fn deriv_wavenumber(k: usize, n: usize) -> f64 {
    if k == n / 2 {
        0.0
    } else {
        wavenumber(k, n) as f64
    }
}

#[inline]
pub(crate) fn mode_index(n1: i64, n2: i64, n: usize) -> usize {
    let w = |m: i64| m.rem_euclid(n as i64) as usize;
    w(n2) * n + w(n1)
}

/// Real samples on the uniform `N × N` torus grid at `(2πi/N, 2πj/N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    n: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_resolution(n)?;
        if values.len() != n * n {
            return Err(EglError::LengthMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EglError::NonFinite(i));
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n * n])
    }

    /// Samples `f(x, y)` at every grid node.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_resolution(n)?;
        let h = TWO_PI / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                values.push(f(h * i as f64, h * j as f64));
            }
        }
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, c: f64) -> GridField {
        GridField {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        if other.n != self.n {
            return Err(EglError::LengthMismatch {
                expected: self.n * self.n,
                got: other.n * other.n,
            });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridField { n: self.n, values })
    }
}

/// How [`grid_to_spectral`] treats the mean of its input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanPolicy {
    /// Drop the mean silently.
    Subtract,
    /// Reject inputs whose mean exceeds the tolerance, then drop it.
    Tolerance(f64),
}

/// Fourier coefficients of a real zero-mean field, FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(n: usize) -> Result<Self> {
        check_resolution(n)?;
        Ok(Self {
            n,
            coeffs: vec![CZERO; n * n],
        })
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        check_resolution(n)?;
        if coeffs.len() != n * n {
            return Err(EglError::LengthMismatch {
                expected: n * n,
                got: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(EglError::NonFinite(i));
        }
        Ok(Self { n, coeffs })
    }

    /// Builds a real field from modes; each mode's conjugate partner is filled in.
    /// Wavenumbers must satisfy `|n_i| < N/2`.
    pub fn from_modes(n: usize, modes: &[((i64, i64), Complex64)]) -> Result<Self> {
        let mut s = Self::zeros(n)?;
        let lim = (n / 2) as i64;
        for &((n1, n2), c) in modes {
            if n1.abs() >= lim || n2.abs() >= lim {
                return Err(EglError::InvalidParameter(format!(
                    "mode ({n1}, {n2}) outside the resolved band of N = {n}"
                )));
            }
            if n1 == 0 && n2 == 0 {
                continue;
            }
            s.coeffs[mode_index(n1, n2, n)] += c;
            s.coeffs[mode_index(-n1, -n2, n)] += c.conj();
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[cfg(test)]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at wavenumber `(n1, n2)`, read periodically.
    pub fn coeff(&self, n1: i64, n2: i64) -> Complex64 {
        self.coeffs[mode_index(n1, n2, self.n)]
    }

    pub fn mean_coeff(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `max |θ̂(−n) − conj θ̂(n)|` over the lattice.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for k2 in 0..n {
            for k1 in 0..n {
                let a = self.coeffs[k2 * n + k1];
                let b = self.coeffs[((n - k2) % n) * n + (n - k1) % n];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    /// `Σ |θ̂(n)|²`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn map_modes(&self, f: impl Fn(i64, i64, Complex64) -> Complex64) -> SpectralField {
        let n = self.n;
        let mut coeffs = self.coeffs.clone();
        for k2 in 0..n {
            let n2 = wavenumber(k2, n);
            for k1 in 0..n {
                let c = &mut coeffs[k2 * n + k1];
                *c = f(wavenumber(k1, n), n2, *c);
            }
        }
        SpectralField { n, coeffs }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.n, other.n, "resolution mismatch");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        SpectralField { n: self.n, coeffs }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.n, other.n, "resolution mismatch");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        SpectralField { n: self.n, coeffs }
    }

    pub fn scaled(&self, c: f64) -> SpectralField {
        SpectralField {
            n: self.n,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn zero_mean(&mut self) {
        self.coeffs[0] = CZERO;
    }

    /// Zeroes the row and column of index `N/2`.
    pub fn zero_nyquist(&mut self) {
        let n = self.n;
        let h = n / 2;
        for k in 0..n {
            self.coeffs[h * n + k] = CZERO;
            self.coeffs[k * n + h] = CZERO;
        }
    }

    fn check_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        if defect > HERMITIAN_TOL * scale {
            return Err(EglError::NotHermitian(defect));
        }
        Ok(())
    }
}

/// `cos x + cos y` in coefficient form.
pub fn theta_star_spectral(n: usize) -> Result<SpectralField> {
    let half = Complex64::new(0.5, 0.0);
    SpectralField::from_modes(n, &[((1, 0), half), ((0, 1), half)])
}

pub fn grid_to_spectral(f: &GridField, policy: MeanPolicy) -> Result<SpectralField> {
    if let MeanPolicy::Tolerance(tol) = policy {
        let m = f.mean();
        if m.abs() > tol {
            return Err(EglError::NonZeroMean(m));
        }
    }
    let n = f.n;
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Fft2::get(n).forward(&mut buf);
    let scale = 1.0 / (n * n) as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
    buf[0] = CZERO;
    Ok(SpectralField { n, coeffs: buf })
}

pub fn spectral_to_grid(s: &SpectralField) -> Result<GridField> {
    s.check_hermitian()?;
    let mut buf = s.coeffs.clone();
    Fft2::get(s.n).inverse(&mut buf);
    Ok(GridField {
        n: s.n,
        values: buf.iter().map(|c| c.re).collect(),
    })
}

/// Index targets on a grid of size `m` for base index `k` on size `n`, with the
/// Nyquist coefficient split evenly between `±n/2` when `m > n`.
fn pad_targets(k: usize, n: usize, m: usize) -> ([(usize, f64); 2], usize) {
    if m == n {
        ([(k, 1.0), (0, 0.0)], 1)
    } else if k == n / 2 {
        ([(m - n / 2, 0.5), (n / 2, 0.5)], 2)
    } else if k < n / 2 {
        ([(k, 1.0), (0, 0.0)], 1)
    } else {
        ([(k + m - n, 1.0), (0, 0.0)], 1)
    }
}

/// Evaluates the two real fields `ma·s` and `mb·s` on the grid refined by
/// `factor` with one complex transform. Multipliers take base FFT indices and
/// must each keep the spectrum Hermitian.
pub(crate) fn eval_pair(
    s: &SpectralField,
    factor: usize,
    ma: impl Fn(usize, usize) -> Complex64,
    mb: impl Fn(usize, usize) -> Complex64,
) -> (Vec<f64>, Vec<f64>) {
    let n = s.n;
    let m = n * factor;
    let mut buf = vec![CZERO; m * m];
    let i = Complex64::new(0.0, 1.0);
    for k2 in 0..n {
        let (t2, c2) = pad_targets(k2, n, m);
        for k1 in 0..n {
            let c = s.coeffs[k2 * n + k1];
            if c == CZERO {
                continue;
            }
            let v = c * ma(k1, k2) + i * (c * mb(k1, k2));
            let (t1, c1) = pad_targets(k1, n, m);
            for &(j2, w2) in &t2[..c2] {
                for &(j1, w1) in &t1[..c1] {
                    buf[j2 * m + j1] += v * (w1 * w2);
                }
            }
        }
    }
    Fft2::get(m).inverse(&mut buf);
    buf.iter().map(|c| (c.re, c.im)).unzip()
}

/// `Δ^{-γ}` in the positive convention: coefficient `θ̂(n) / |n|^{2γ}`.
pub fn inverse_laplacian(s: &SpectralField, gamma: f64) -> Result<SpectralField> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(EglError::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let m = s.mean_coeff().norm();
    if m > MEAN_TOL {
        return Err(EglError::NonZeroMean(m));
    }
    Ok(s.map_modes(|n1, n2, c| {
        if n1 == 0 && n2 == 0 {
            CZERO
        } else {
            c * ((n1 * n1 + n2 * n2) as f64).powf(-gamma)
        }
    }))
}

/// Velocity `u = (ζ_y, −ζ_x)` with `ζ = Δ^{-γ}θ`.
pub fn velocity_from_vorticity(s: &SpectralField, gamma: f64) -> Result<(GridField, GridField)> {
    let zeta = inverse_laplacian(s, gamma)?;
    let n = s.n;
    let (u, v) = eval_pair(
        &zeta,
        1,
        |_, k2| Complex64::new(0.0, deriv_wavenumber(k2, n)),
        |k1, _| Complex64::new(0.0, -deriv_wavenumber(k1, n)),
    );
    Ok((GridField { n, values: u }, GridField { n, values: v }))
}

/// Spectral gradient `(θ_x, θ_y)`.
pub fn gradient(s: &SpectralField) -> (GridField, GridField) {
    let n = s.n;
    let (gx, gy) = eval_pair(
        s,
        1,
        |k1, _| Complex64::new(0.0, deriv_wavenumber(k1, n)),
        |_, k2| Complex64::new(0.0, deriv_wavenumber(k2, n)),
    );
    (GridField { n, values: gx }, GridField { n, values: gy })
}

/// Splits `s` into its unit-shell part (`|n|² = 1`) and the rest (`|n|² > 1`).
pub fn shell_projectors(s: &SpectralField) -> (SpectralField, SpectralField) {
    let on_shell = |n1: i64, n2: i64| n1 * n1 + n2 * n2 == 1;
    let p1 = s.map_modes(|n1, n2, c| if on_shell(n1, n2) { c } else { CZERO });
    let p2 = s.map_modes(|n1, n2, c| if n1 * n1 + n2 * n2 > 1 { c } else { CZERO });
    (p1, p2)
}

/// True for modes kept by the two-thirds rule, `max(|n₁|, |n₂|) ≤ N/3`.
#[inline]
pub fn survives_dealiasing(n1: i64, n2: i64, n: usize) -> bool {
    3 * n1.abs().max(n2.abs()) <= n as i64
}

/// Two-thirds rule truncation.
pub fn dealias(s: &SpectralField) -> SpectralField {
    let n = s.n;
    s.map_modes(|n1, n2, c| if survives_dealiasing(n1, n2, n) { c } else { CZERO })
}

/// Samples the trigonometric polynomial `s` on the `(N·factor)²` grid.
pub fn refine_evaluate(s: &SpectralField, factor: usize) -> Result<GridField> {
    if !matches!(factor, 1 | 2 | 4) {
        return Err(EglError::InvalidParameter(format!(
            "refinement factor must be 1, 2 or 4, got {factor}"
        )));
    }
    s.check_hermitian()?;
    let (values, _) = eval_pair(s, factor, |_, _| Complex64::new(1.0, 0.0), |_, _| CZERO);
    GridField::new(s.n * factor, values)
}
