//! The stationary cellular flow, its saddle frames, and the two families of
//! perturbed initial vorticities built around it.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{EglError, Result};
use crate::polyline::Point;
use crate::spectral::GridField;

/// `cos x + cos y` on the `n × n` grid.
pub fn stationary_theta_star(n: usize) -> Result<GridField> {
    GridField::from_fn(n, |x, y| x.cos() + y.cos())
}

/// A hyperbolic point of `θ*` with its rotated `(ξ, η)` and scaled `(α, β)` axes.
///
/// `ξ` runs along `xi_axis`, `η` along the axis rotated by `+π/2`; `(α, β) = (ξ, η)/√2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleFrame {
    center: Point,
    xi_axis: Point,
}

impl SaddleFrame {
    /// `A₁ = (π, 0)` with `ξ = (y + x − π)/√2`, `η = (y − x + π)/√2`.
    pub fn a1() -> Self {
        Self {
            center: [PI, 0.0],
            xi_axis: [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        }
    }

    /// `A₂ = (0, π)`, the image of the `A₁` frame under rotation by `π/2`.
    pub fn a2() -> Self {
        Self {
            center: [0.0, PI],
            xi_axis: [-FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        }
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn xi_axis(&self) -> Point {
        self.xi_axis
    }

    pub fn eta_axis(&self) -> Point {
        [-self.xi_axis[1], self.xi_axis[0]]
    }

    /// Grid node of the center on an `n × n` grid.
    pub fn center_index(&self, n: usize) -> (usize, usize) {
        let idx = |c: f64| ((c / PI).round() as usize * n / 2) % n;
        (idx(self.center[0]), idx(self.center[1]))
    }

    /// Rotates a displacement from the frame center into `(ξ, η)`.
    #[inline]
    pub fn rotate(&self, d: Point) -> Point {
        let e = self.xi_axis;
        [e[0] * d[0] + e[1] * d[1], -e[1] * d[0] + e[0] * d[1]]
    }

    /// Inverse of [`rotate`](Self::rotate).
    #[inline]
    pub fn unrotate(&self, q: Point) -> Point {
        let e = self.xi_axis;
        [e[0] * q[0] - e[1] * q[1], e[1] * q[0] + e[0] * q[1]]
    }

    /// Exact linear map `(x, y) ↦ (ξ, η)`, no periodic wrap.
    pub fn to_xi_eta(&self, p: Point) -> Point {
        self.rotate([p[0] - self.center[0], p[1] - self.center[1]])
    }

    pub fn from_xi_eta(&self, q: Point) -> Point {
        let d = self.unrotate(q);
        [self.center[0] + d[0], self.center[1] + d[1]]
    }

    pub fn to_alpha_beta(&self, p: Point) -> Point {
        let q = self.to_xi_eta(p);
        [q[0] * FRAC_1_SQRT_2, q[1] * FRAC_1_SQRT_2]
    }

    pub fn from_alpha_beta(&self, a: Point) -> Point {
        self.from_xi_eta([a[0] * SQRT_2, a[1] * SQRT_2])
    }

    /// `((ξ, η), (α, β))` of `p`.
    pub fn to_saddle_coords(&self, p: Point) -> (Point, Point) {
        let q = self.to_xi_eta(p);
        (q, [q[0] * FRAC_1_SQRT_2, q[1] * FRAC_1_SQRT_2])
    }

    /// `(ξ, η)` of grid node `(i, j)` using the periodic image nearest the center.
    pub fn grid_xi_eta(&self, n: usize, i: usize, j: usize) -> Point {
        let (ci, cj) = self.center_index(n);
        let h = 2.0 * PI / n as f64;
        self.rotate([h * wrap_offset(i, ci, n) as f64, h * wrap_offset(j, cj, n) as f64])
    }
}

/// Signed offset `i − c` wrapped into `[−n/2, n/2)`.
#[inline]
pub(crate) fn wrap_offset(i: usize, c: usize, n: usize) -> i64 {
    let d = (i as i64 - c as i64).rem_euclid(n as i64);
    if d >= (n / 2) as i64 {
        d - n as i64
    } else {
        d
    }
}

/// One representative of each saddle class per fundamental cell: `A₁`, `A₂`.
pub fn saddle_points() -> Vec<SaddleFrame> {
    vec![SaddleFrame::a1(), SaddleFrame::a2()]
}

#[inline]
fn step_kernel(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth step, `0` for `u ≤ 0`, `1` for `u ≥ 1`, with `S(u) + S(1 − u) = 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = step_kernel(u);
    a / (a + step_kernel(1.0 - u))
}

/// Radial bump `exp(1 − 1/(1 − r²))` on `r < 1`, zero elsewhere; `φ(0) = 1`.
pub fn bump(r: f64) -> f64 {
    let r2 = r * r;
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

/// Parameters of the first family of initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Params {
    pub delta: f64,
    pub xi_half: f64,
    pub seg_half: f64,
    pub ell_a: f64,
    pub ell_b: f64,
    pub f_max: f64,
    pub f_min: f64,
    /// Relative width of the welding collar inside each rectangle.
    pub blend_width: f64,
}

impl Theorem1Params {
    pub fn new(delta: f64) -> Result<Self> {
        let p = Self {
            delta,
            xi_half: 0.1,
            seg_half: 0.08,
            ell_a: 0.09,
            ell_b: delta / 2.0,
            f_max: 4.0,
            f_min: -1.0,
            blend_width: 0.1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_blend_width(mut self, b: f64) -> Result<Self> {
        self.blend_width = b;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 0.1) {
            return Err(EglError::InvalidParameter(format!(
                "delta must lie in (0, 0.1], got {}",
                self.delta
            )));
        }
        if !(self.blend_width > 0.0 && self.blend_width < 1.0) {
            return Err(EglError::InvalidParameter(format!(
                "blend width must lie in (0, 1), got {}",
                self.blend_width
            )));
        }
        if !(self.seg_half < self.ell_a && self.ell_a < self.xi_half) {
            return Err(EglError::InvalidParameter(
                "need seg_half < ell_a < xi_half".into(),
            ));
        }
        if (self.ell_b - self.delta / 2.0).abs() > 1e-15 {
            return Err(EglError::InvalidParameter("ell_b must equal delta/2".into()));
        }
        Ok(())
    }

    /// Radius of the compensating disc around the origin.
    pub fn disc_radius(&self) -> f64 {
        self.delta.sqrt()
    }
}

const SMOOTHING: f64 = 0.005;
const RAMP_SATURATION: f64 = 3.0;

/// `∫₀ᵗ S(τ/w) dτ`: a convex, smoothed positive part of `t`.
pub fn smoothed_positive_part(t: f64) -> f64 {
    let w = SMOOTHING;
    if t <= 0.0 {
        0.0
    } else if t >= w {
        t - 0.5 * w
    } else {
        // Composite Simpson on [0, t/w]; the integrand is smooth with all
        // derivatives vanishing at 0.
        let u_end = t / w;
        let m = 64;
        let hq = u_end / m as f64;
        let mut acc = smooth_step(0.0) + smooth_step(u_end);
        for k in 1..m {
            let c = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += c * smooth_step(hq * k as f64);
        }
        w * acc * hq / 3.0
    }
}

fn ramp_rate() -> f64 {
    -(0.75 / (1.0 - smooth_step(1.0 / RAMP_SATURATION))).ln()
}

/// Increasing ramp with `h(0) = 0`, `h(1) = 1/5`, `h = 4/5` for `d ≥ 3`.
pub fn ramp(d: f64) -> f64 {
    let k = ramp_rate();
    0.8 * (1.0 - (-k * d).exp() * (1.0 - smooth_step(d / RAMP_SATURATION)))
}

/// Quadratic-form distance whose unit level passes through `(±ell_a, 0)` and `(0, ±ell_b)`.
pub fn profile_distance(xi: f64, eta: f64, p: &Theorem1Params) -> f64 {
    let a = smoothed_positive_part(xi.abs() - p.seg_half)
        / smoothed_positive_part(p.ell_a - p.seg_half);
    let b = eta / p.ell_b;
    a * a + b * b
}

/// The rectangle profile `f = 4 − 5h(d)`.
pub fn profile(xi: f64, eta: f64, p: &Theorem1Params) -> f64 {
    p.f_max - 5.0 * ramp(profile_distance(xi, eta, p))
}

fn cutoff(s: f64, b: f64) -> f64 {
    1.0 - smooth_step((s - (1.0 - b)) / b)
}

/// Welding weight: 1 on the inner part of the rectangle, 0 outside it.
pub fn weld_weight(xi: f64, eta: f64, p: &Theorem1Params) -> f64 {
    cutoff(xi.abs() / p.xi_half, p.blend_width) * cutoff(eta.abs() / p.delta, p.blend_width)
}

/// Which subgroup of the rotation group to average over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Even,
    Rot4,
    Both,
}

/// Grid image of node `(i, j)` under rotation by `π/2`, `(x, y) ↦ (−y, x)`.
#[inline]
pub(crate) fn rot_index(i: usize, j: usize, n: usize) -> (usize, usize) {
    ((n - j) % n, i)
}

#[inline]
pub(crate) fn neg_index(i: usize, j: usize, n: usize) -> (usize, usize) {
    ((n - i) % n, (n - j) % n)
}

/// Group-average projection; the result is exactly invariant and idempotent.
pub fn symmetrize(f: &GridField, group: Symmetry) -> Result<GridField> {
    let n = f.n();
    if n % 4 != 0 {
        return Err(EglError::InvalidParameter(format!(
            "rotation symmetry needs N divisible by 4, got {n}"
        )));
    }
    let v = f.values();
    let mut out = vec![0.0; n * n];
    match group {
        Symmetry::Even => {
            for j in 0..n {
                for i in 0..n {
                    let (a, b) = neg_index(i, j, n);
                    let (k0, k1) = sorted2(j * n + i, b * n + a);
                    out[j * n + i] = (v[k0] + v[k1]) * 0.5;
                }
            }
        }
        // The rotation group already contains the even map.
        Symmetry::Rot4 | Symmetry::Both => {
            for j in 0..n {
                for i in 0..n {
                    let mut idx = [0usize; 4];
                    let (mut a, mut b) = (i, j);
                    for slot in idx.iter_mut() {
                        *slot = b * n + a;
                        (a, b) = rot_index(a, b, n);
                    }
                    idx.sort_unstable();
                    out[j * n + i] = ((v[idx[0]] + v[idx[1]]) + (v[idx[2]] + v[idx[3]])) * 0.25;
                }
            }
        }
    }
    GridField::new(n, out)
}

#[inline]
fn sorted2(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Radial bump of the given radius centred at the origin, sampled with wrapped offsets.
fn origin_bump(n: usize, radius: f64) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        let dy = h * wrap_offset(j, 0, n) as f64;
        for i in 0..n {
            let dx = h * wrap_offset(i, 0, n) as f64;
            out[j * n + i] = bump((dx * dx + dy * dy).sqrt() / radius);
        }
    }
    out
}

/// Subtracts `A·bump` with `A` chosen so the total mean vanishes; returns `A`.
fn cancel_mean(values: &mut [f64], bump: &[f64]) -> f64 {
    let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
    let bump_mean: f64 = bump.iter().sum::<f64>() / bump.len() as f64;
    let amp = mean / bump_mean;
    for (v, b) in values.iter_mut().zip(bump) {
        *v -= amp * b;
    }
    amp
}

/// First family: `θ*` with each rectangle replaced by the welded profile, then a
/// compensating dip at the origin.
pub fn build_theorem1_data(n: usize, p: &Theorem1Params) -> Result<GridField> {
    Ok(build_theorem1_data_with_amplitude(n, p)?.0)
}

/// Like [`build_theorem1_data`], also returning the amplitude of the origin dip.
pub fn build_theorem1_data_with_amplitude(n: usize, p: &Theorem1Params) -> Result<(GridField, f64)> {
    p.validate()?;
    let base = stationary_theta_star(n)?;
    let mut v = base.values().to_vec();
    let h = 2.0 * PI / n as f64;
    for frame in saddle_points() {
        let (ci, cj) = frame.center_index(n);
        let reach = ((p.xi_half.max(p.delta) * SQRT_2) / h).ceil() as i64 + 1;
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let i = (ci as i64 + di).rem_euclid(n as i64) as usize;
                let j = (cj as i64 + dj).rem_euclid(n as i64) as usize;
                let [xi, eta] = frame.rotate([h * di as f64, h * dj as f64]);
                let w = weld_weight(xi, eta, p);
                if w == 0.0 {
                    continue;
                }
                let k = j * n + i;
                v[k] += w * (profile(xi, eta, p) - base.values()[k]);
            }
        }
    }
    let sym = symmetrize(&GridField::new(n, v)?, Symmetry::Both)?;
    let mut v = sym.into_values();
    let amp = cancel_mean(&mut v, &origin_bump(n, p.disc_radius()));
    let out = GridField::new(n, v)?;
    check_symmetric(&out)?;
    Ok((out, amp))
}

fn check_symmetric(f: &GridField) -> Result<()> {
    let n = f.n();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (a, b) = rot_index(i, j, n);
            worst = worst.max((f.get(i, j) - f.get(a, b)).abs());
        }
    }
    if worst > 1e-12 * f.max_abs().max(1e-14) {
        return Err(EglError::SymmetryFailure(worst));
    }
    Ok(())
}

/// Parameters of the second family of initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Params {
    pub epsilon: f64,
    /// Radius of the compensating bump at the origin.
    pub compensator_radius: f64,
}

impl Theorem2Params {
    pub fn new(epsilon: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            compensator_radius: 0.5,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.1) {
            return Err(EglError::InvalidParameter(format!(
                "epsilon must lie in (0, 0.1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Second family: `θ* + εφ(α/ε, β/ε)` at every saddle plus a zero-mean compensator.
pub fn build_theorem2_data(n: usize, p: &Theorem2Params) -> Result<GridField> {
    p.validate()?;
    let mut v = stationary_theta_star(n)?.into_values();
    let h = 2.0 * PI / n as f64;
    let eps = p.epsilon;
    for frame in saddle_points() {
        let (ci, cj) = frame.center_index(n);
        for j in 0..n {
            let dy = h * wrap_offset(j, cj, n) as f64;
            for i in 0..n {
                let dx = h * wrap_offset(i, ci, n) as f64;
                // |(α, β)| = |(x, y) − D| / √2
                let r = (dx * dx + dy * dy).sqrt() * FRAC_1_SQRT_2 / eps;
                v[j * n + i] += eps * bump(r);
            }
        }
    }
    let sym = symmetrize(&GridField::new(n, v)?, Symmetry::Both)?;
    let mut v = sym.into_values();
    cancel_mean(&mut v, &origin_bump(n, p.compensator_radius));
    let out = GridField::new(n, v)?;
    check_symmetric(&out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn theta_star_values() {
        let f = stationary_theta_star(16).unwrap();
        assert_eq!(f.get(0, 0), 2.0);
        assert!(f.get(8, 0).abs() < 1e-15);
        assert!(f.mean().abs() < 1e-15);
    }

    #[test]
    fn saddle_classes() {
        let pts: Vec<Point> = saddle_points().iter().map(|f| f.center()).collect();
        assert!(pts.contains(&[PI, 0.0]) && pts.contains(&[0.0, PI]));
        assert!(!pts.contains(&[0.0, 0.0]) && !pts.contains(&[PI, PI]));
        assert_eq!(SaddleFrame::a1().to_xi_eta([PI, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn a1_coordinate_examples() {
        let f = SaddleFrame::a1();
        let (q, a) = f.to_saddle_coords([PI + FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!((q[0] - 1.0).abs() < 1e-15 && q[1].abs() < 1e-15);
        assert!((a[0] - FRAC_1_SQRT_2).abs() < 1e-15 && a[1].abs() < 1e-15);
        // Agrees with the closed-form expressions.
        let p = [2.5, 0.7];
        let q = f.to_xi_eta(p);
        assert!((q[0] - (p[1] + p[0] - PI) / SQRT_2).abs() < 1e-15);
        assert!((q[1] - (p[1] - p[0] + PI) / SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn a2_frame_is_rotated_a1_frame() {
        let (f1, f2) = (SaddleFrame::a1(), SaddleFrame::a2());
        let rot = |p: Point| [-p[1], p[0]];
        for p in [[3.0, 0.2], [2.9, -0.1], [3.3, 0.05]] {
            let a = f1.to_xi_eta(p);
            let b = f2.to_xi_eta(rot(p));
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn frame_round_trip(x in -7.0f64..7.0, y in -7.0f64..7.0, which in 0usize..2) {
            let f = saddle_points()[which];
            let p = f.from_xi_eta(f.to_xi_eta([x, y]));
            prop_assert!((p[0] - x).abs() < 1e-14 && (p[1] - y).abs() < 1e-14);
            let p = f.from_alpha_beta(f.to_alpha_beta([x, y]));
            prop_assert!((p[0] - x).abs() < 1e-14 && (p[1] - y).abs() < 1e-14);
            // Isometry of the (ξ, η) map.
            let q = f.to_xi_eta([x, y]);
            let c = f.center();
            let d = ((x - c[0]).powi(2) + (y - c[1]).powi(2)).sqrt();
            prop_assert!((q[0].hypot(q[1]) - d).abs() < 1e-13);
        }

        #[test]
        fn symmetrize_is_idempotent_projection(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let f = GridField::new(16, (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            for g in [Symmetry::Even, Symmetry::Rot4, Symmetry::Both] {
                let s = symmetrize(&f, g).unwrap();
                prop_assert_eq!(symmetrize(&s, g).unwrap(), s);
            }
        }
    }

    #[test]
    fn symmetrize_examples() {
        let ts = stationary_theta_star(16).unwrap();
        let s = symmetrize(&ts, Symmetry::Both).unwrap();
        for (a, b) in s.values().iter().zip(ts.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        let odd = GridField::from_fn(16, |x, _| x.sin()).unwrap();
        assert!(symmetrize(&odd, Symmetry::Even).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn smooth_pieces() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert!((ramp(1.0) - 0.2).abs() < 1e-12);
        assert_eq!(ramp(0.0), 0.0);
        assert!((ramp(3.0) - 0.8).abs() < 1e-15);
        // Continuity of the smoothed positive part at the knot.
        let w = SMOOTHING;
        assert!((smoothed_positive_part(w * (1.0 - 1e-9)) - 0.5 * w).abs() < 1e-10);
        let pts: Vec<f64> = (0..40).map(|k| smoothed_positive_part(-0.001 + 0.0002 * k as f64)).collect();
        for k in 1..39 {
            assert!(pts[k + 1] - 2.0 * pts[k] + pts[k - 1] >= -1e-15, "convexity at {k}");
        }
    }

    #[test]
    fn profile_level_sets() {
        let p = Theorem1Params::new(0.05).unwrap();
        for xi in [-0.08, -0.03, 0.0, 0.05, 0.08] {
            assert_eq!(profile(xi, 0.0, &p), 4.0);
        }
        assert!(profile(0.085, 0.0, &p) < 4.0);
        assert!(profile(0.0, 0.001, &p) < 4.0);
        for (xi, eta) in [(0.09, 0.0), (-0.09, 0.0), (0.0, 0.025), (0.0, -0.025)] {
            assert!((profile(xi, eta, &p) - 3.0).abs() < 1e-12, "({xi}, {eta})");
        }
        for xi in [0.0, 0.03, 0.07, 0.095, 0.1] {
            for eta in [0.0, 0.01, 0.03, 0.05] {
                let f = profile(xi, eta, &p);
                assert!((p.f_min..=p.f_max).contains(&f));
            }
        }
    }

    #[test]
    fn theorem1_data_properties() {
        let n = 128;
        let p = Theorem1Params::new(0.1).unwrap();
        let (f, amp) = build_theorem1_data_with_amplitude(n, &p).unwrap();
        assert!(amp > 0.0);
        assert!(f.mean().abs() < 1e-14);
        assert!(f.max_abs() <= 10.0);
        let ts = stationary_theta_star(n).unwrap();
        let h = f.spacing();
        let mut checked = 0;
        for j in 0..n {
            for i in 0..n {
                let far_from_rects = saddle_points().iter().all(|fr| {
                    let [xi, eta] = fr.grid_xi_eta(n, i, j);
                    xi.abs() >= p.xi_half || eta.abs() >= p.delta
                });
                let r = (h * wrap_offset(i, 0, n) as f64).hypot(h * wrap_offset(j, 0, n) as f64);
                if far_from_rects && r >= p.disc_radius() {
                    assert!((f.get(i, j) - ts.get(i, j)).abs() < 1e-12);
                    checked += 1;
                }
            }
        }
        assert!(checked > n * n / 2);
    }

    #[test]
    fn blend_width_moves_only_collars_and_compensator() {
        let n = 256;
        let pa = Theorem1Params::new(0.1).unwrap();
        let pb = pa.clone().with_blend_width(0.4).unwrap();
        let (fa, amp_a) = build_theorem1_data_with_amplitude(n, &pa).unwrap();
        let (fb, amp_b) = build_theorem1_data_with_amplitude(n, &pb).unwrap();
        let h = fa.spacing();
        let radius = pa.disc_radius();
        let (mut outside, mut in_disc) = (0, 0);
        for j in 0..n {
            for i in 0..n {
                let in_collar = saddle_points().iter().any(|fr| {
                    let [xi, eta] = fr.grid_xi_eta(n, i, j);
                    let (wa, wb) = (weld_weight(xi, eta, &pa), weld_weight(xi, eta, &pb));
                    (wa > 0.0 && wa < 1.0) || (wb > 0.0 && wb < 1.0)
                });
                if in_collar {
                    continue;
                }
                let r = (h * wrap_offset(i, 0, n) as f64).hypot(h * wrap_offset(j, 0, n) as f64);
                let want = (amp_b - amp_a) * bump(r / radius);
                assert!((fa.get(i, j) - fb.get(i, j) - want).abs() < 1e-12, "({i}, {j})");
                if r < radius {
                    in_disc += 1;
                } else {
                    outside += 1;
                }
            }
        }
        assert!(amp_a != amp_b);
        assert!(in_disc > 0 && outside > n * n / 2);
    }

    #[test]
    fn theorem1_rejects_bad_delta() {
        assert!(Theorem1Params::new(0.0).is_err());
        assert!(Theorem1Params::new(0.2).is_err());
        assert!(Theorem1Params::new(0.05).unwrap().with_blend_width(1.5).is_err());
    }

    #[test]
    fn theorem2_center_value() {
        let n = 128;
        let eps = 0.05;
        let f = build_theorem2_data(n, &Theorem2Params::new(eps).unwrap()).unwrap();
        assert!(f.mean().abs() < 1e-14);
        let (ci, cj) = SaddleFrame::a1().center_index(n);
        // The compensator has radius 0.5 and does not reach A₁.
        assert!((f.get(ci, cj) - 0.0 - eps).abs() < 1e-14);
        assert!(Theorem2Params::new(0.2).is_err());
    }
}
