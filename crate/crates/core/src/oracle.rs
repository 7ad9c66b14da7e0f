//! Direct-summation references for the FFT-based operators.
//!
//! Everything here is O(N⁴) or O(N²) per point and only meant for small grids.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::spectral::{deriv_wavenumber, wavenumber, GridField, SpectralField, TWO_PI};

/// Normalized DFT of grid samples by explicit double sum.
pub fn direct_dft(f: &GridField) -> Vec<Complex64> {
    let n = f.n();
    let w = -2.0 * PI / n as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    let scale = 1.0 / (n * n) as f64;
    for k2 in 0..n {
        for k1 in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                for i in 0..n {
                    let phase = w * (((k1 * i + k2 * j) % n) as f64);
                    acc += f.get(i, j) * Complex64::from_polar(1.0, phase);
                }
            }
            out[k2 * n + k1] = acc * scale;
        }
    }
    out
}

/// Weighted wavenumbers for synthesis off the grid; Nyquist content is split
/// evenly between `±N/2`, which makes the sum real for Hermitian input.
fn synthesis_terms(k: usize, n: usize) -> ([(f64, f64); 2], usize) {
    if k == n / 2 {
        let h = (n / 2) as f64;
        ([(h, 0.5), (-h, 0.5)], 2)
    } else {
        ([(wavenumber(k, n) as f64, 1.0), (0.0, 0.0)], 1)
    }
}

/// `Σ m(k) θ̂(k) e^{i n·z}` at an arbitrary point.
pub fn synthesize_with(
    s: &SpectralField,
    x: f64,
    y: f64,
    m: impl Fn(usize, usize) -> Complex64,
) -> Complex64 {
    let n = s.n();
    let c = s.coeffs();
    let mut acc = Complex64::new(0.0, 0.0);
    for k2 in 0..n {
        let (t2, c2) = synthesis_terms(k2, n);
        for k1 in 0..n {
            let v = c[k2 * n + k1];
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let v = v * m(k1, k2);
            let (t1, c1) = synthesis_terms(k1, n);
            for &(w2, a2) in &t2[..c2] {
                for &(w1, a1) in &t1[..c1] {
                    acc += v * (a1 * a2) * Complex64::from_polar(1.0, w1 * x + w2 * y);
                }
            }
        }
    }
    acc
}

/// Value of the trigonometric polynomial `s` at `(x, y)`.
pub fn synthesize(s: &SpectralField, x: f64, y: f64) -> f64 {
    synthesize_with(s, x, y, |_, _| Complex64::new(1.0, 0.0)).re
}

/// Exact velocity `(ζ_y, −ζ_x)`, `ζ = Δ^{-γ}θ`, at an arbitrary point.
pub fn velocity_at(s: &SpectralField, gamma: f64, x: f64, y: f64) -> [f64; 2] {
    let n = s.n();
    let mult = |k1: usize, k2: usize| {
        let (a, b) = (wavenumber(k1, n), wavenumber(k2, n));
        let r2 = (a * a + b * b) as f64;
        if r2 == 0.0 {
            0.0
        } else {
            r2.powf(-gamma)
        }
    };
    let u = synthesize_with(s, x, y, |k1, k2| {
        Complex64::new(0.0, deriv_wavenumber(k2, n) * mult(k1, k2))
    });
    let v = synthesize_with(s, x, y, |k1, k2| {
        Complex64::new(0.0, -deriv_wavenumber(k1, n) * mult(k1, k2))
    });
    [u.re, v.re]
}

/// Grid values of `Δ^{-γ}f` computed entirely by double sums.
pub fn direct_inverse_laplacian(f: &GridField, gamma: f64) -> Vec<f64> {
    let n = f.n();
    let mut coeffs = direct_dft(f);
    for k2 in 0..n {
        for k1 in 0..n {
            let (a, b) = (wavenumber(k1, n), wavenumber(k2, n));
            let r2 = (a * a + b * b) as f64;
            let c = &mut coeffs[k2 * n + k1];
            *c = if r2 == 0.0 { Complex64::new(0.0, 0.0) } else { *c * r2.powf(-gamma) };
        }
    }
    direct_grid_synthesis(&coeffs, n)
}

/// Real part of `Σ c(k) e^{2πi k·j/N}` at every grid node.
pub fn direct_grid_synthesis(coeffs: &[Complex64], n: usize) -> Vec<f64> {
    let w = 2.0 * PI / n as f64;
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k2 in 0..n {
                for k1 in 0..n {
                    let phase = w * (((k1 * i + k2 * j) % n) as f64);
                    acc += coeffs[k2 * n + k1] * Complex64::from_polar(1.0, phase);
                }
            }
            out[j * n + i] = acc.re;
        }
    }
    out
}

/// One comparison of a fast operator with its direct-summation reference.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn random_grid(n: usize, rng: &mut impl rand::Rng) -> GridField {
    GridField::new(n, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("square grid")
}

fn max_diff(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Transforms, `Δ^{-γ}`, velocity and upsampling against direct sums on 8×8
/// and 16×16 grids of random data, plus interpolated velocity of `θ*` at
/// random points on a 128² grid.
pub fn run_suite(seed: u64) -> crate::Result<Vec<OracleCheck>> {
    use rand::{Rng, SeedableRng};

    use crate::characteristics::VelocityGrid;
    use crate::spectral::{
        grid_to_spectral, inverse_laplacian, refine_evaluate, spectral_to_grid, theta_star_spectral,
        velocity_from_vorticity, MeanPolicy,
    };

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut push = |name: String, error: f64, tolerance: f64| out.push(OracleCheck { name, error, tolerance });
    for n in [8usize, 16] {
        let raw = random_grid(n, &mut rng);
        let mean = raw.mean();
        let f = GridField::new(n, raw.values().iter().map(|v| v - mean).collect())?;
        let s = grid_to_spectral(&f, MeanPolicy::Tolerance(1e-12))?;
        let d = direct_dft(&f);
        let err = s.coeffs().iter().zip(&d).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        push(format!("forward_transform_{n}"), err, 1e-12);

        let back = spectral_to_grid(&s)?;
        push(format!("round_trip_{n}"), max_diff(back.values().iter().copied(), f.values().iter().copied()), 1e-12);
        push(
            format!("inverse_synthesis_{n}"),
            max_diff(back.values().iter().copied(), direct_grid_synthesis(s.coeffs(), n)),
            1e-12,
        );

        for gamma in [0.5, 1.0, 1.5] {
            let fast = spectral_to_grid(&inverse_laplacian(&s, gamma)?)?;
            let slow = direct_inverse_laplacian(&f, gamma);
            push(format!("inverse_laplacian_{n}_gamma{gamma}"), max_diff(fast.values().iter().copied(), slow), 1e-12);
        }

        let (u, v) = velocity_from_vorticity(&s, 1.0)?;
        let h = TWO_PI / n as f64;
        let mut err: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let e = velocity_at(&s, 1.0, i as f64 * h, j as f64 * h);
                err = err.max((e[0] - u.get(i, j)).abs()).max((e[1] - v.get(i, j)).abs());
            }
        }
        push(format!("velocity_{n}"), err, 1e-12);

        for factor in [2usize, 4] {
            let fine = refine_evaluate(&s, factor)?;
            let m = n * factor;
            let hf = TWO_PI / m as f64;
            let mut err: f64 = 0.0;
            for j in 0..m {
                for i in 0..m {
                    err = err.max((fine.get(i, j) - synthesize(&s, i as f64 * hf, j as f64 * hf)).abs());
                }
            }
            push(format!("upsample_{n}_x{factor}"), err, 1e-12);
        }
    }

    let ts = theta_star_spectral(128)?;
    let grid = VelocityGrid::from_spectral(&ts, 1.0)?;
    let mut err: f64 = 0.0;
    for _ in 0..200 {
        let p = [rng.gen_range(0.0..TWO_PI), rng.gen_range(0.0..TWO_PI)];
        let [u, v] = grid.sample(p);
        err = err.max((u + p[1].sin()).abs()).max((v - p[0].sin()).abs());
    }
    push("theta_star_interpolated_velocity_128".into(), err, 1e-6);
    Ok(out)
}
