use crate::error::{EglError, Result};
use crate::polyline::{Point, Polyline};
use crate::spectral::TWO_PI;

use super::velocity::FieldProvider;

/// Direction of motion for traced points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowSense {
    /// Move with the velocity `u = ∇⊥ζ`.
    Velocity,
    /// Move with `−u`, along which `θ` is carried by `θ_t = ∇θ · u`.
    Characteristic,
}

impl FlowSense {
    fn sign(self) -> f64 {
        match self {
            FlowSense::Velocity => 1.0,
            FlowSense::Characteristic => -1.0,
        }
    }
}

fn check_interval(provider: &dyn FieldProvider, t0: f64, t1: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(EglError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let (lo, hi) = provider.span();
    let tol = 1e-9 * (1.0 + hi.abs().min(1e12));
    let (a, b) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
    if a < lo - tol {
        return Err(EglError::ProviderGap(a));
    }
    if b > hi + tol {
        return Err(EglError::ProviderGap(b));
    }
    Ok(())
}

#[inline]
fn rk4_step(
    provider: &dyn FieldProvider,
    sign: f64,
    t: f64,
    h: f64,
    p: Point,
) -> Result<Point> {
    let f = |t: f64, q: Point| -> Result<Point> {
        let v = provider.velocity(t, q)?;
        Ok([sign * v[0], sign * v[1]])
    };
    let k1 = f(t, p)?;
    let k2 = f(t + 0.5 * h, [p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]])?;
    let k3 = f(t + 0.5 * h, [p[0] + 0.5 * h * k2[0], p[1] + 0.5 * h * k2[1]])?;
    let k4 = f(t + h, [p[0] + h * k3[0], p[1] + h * k3[1]])?;
    Ok([
        p[0] + h / 6.0 * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]),
        p[1] + h / 6.0 * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]),
    ])
}

fn steps_for(t0: f64, t1: f64, dt: f64) -> (usize, f64) {
    let span = t1 - t0;
    if span == 0.0 {
        return (0, 0.0);
    }
    let steps = (span.abs() / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (steps, span / steps as f64)
}

/// Moves points with the velocity from `t0` to `t1` (either order) by RK4
/// with steps no longer than `dt`; results are wrapped onto `[0, 2π)²`.
pub fn trace(
    points: &[Point],
    t0: f64,
    t1: f64,
    provider: &dyn FieldProvider,
    dt: f64,
) -> Result<Vec<Point>> {
    trace_with(points, t0, t1, provider, dt, FlowSense::Velocity, true)
}

pub fn trace_with(
    points: &[Point],
    t0: f64,
    t1: f64,
    provider: &dyn FieldProvider,
    dt: f64,
    sense: FlowSense,
    wrap: bool,
) -> Result<Vec<Point>> {
    check_interval(provider, t0, t1, dt)?;
    let (steps, h) = steps_for(t0, t1, dt);
    let sign = sense.sign();
    points
        .iter()
        .map(|&p| {
            let mut q = p;
            for k in 0..steps {
                q = rk4_step(provider, sign, t0 + k as f64 * h, h, q)?;
            }
            Ok(if wrap {
                [q[0].rem_euclid(TWO_PI), q[1].rem_euclid(TWO_PI)]
            } else {
                q
            })
        })
        .collect()
}

/// Advects every vertex of `poly` without wrapping, re-refining the curve to
/// its `max_seg` after each step.
pub fn advect_polyline(
    poly: &Polyline,
    t0: f64,
    t1: f64,
    provider: &dyn FieldProvider,
    dt: f64,
    sense: FlowSense,
) -> Result<Polyline> {
    check_interval(provider, t0, t1, dt)?;
    let (steps, h) = steps_for(t0, t1, dt);
    let sign = sense.sign();
    let mut cur = poly.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        for v in cur.vertices_mut() {
            *v = rk4_step(provider, sign, t, h, *v)?;
        }
        cur.refine();
    }
    Ok(cur)
}
