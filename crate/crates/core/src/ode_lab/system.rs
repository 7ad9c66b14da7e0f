use std::fmt::Write as _;

use crate::error::{EglError, Result};
use crate::polyline::Point;

use super::perturbation::Perturbation;

/// Largest admissible RK4 step for saddle integrations.
pub const MAX_DT: f64 = 1e-3;

/// Trajectories with `max(|α|, |β|)` above this are treated as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `α̇ = cos β sin α + μ₁`, `β̇ = −cos α sin β + μ₂`.
    Flow3,
    /// `α̇ = α(1 + f₁) + f₂β`, `β̇ = −β(1 + g₁) + g₂α`.
    Pot,
    /// `α̇ = cos β sin α + αf₁ + βf₂`, `β̇ = −cos α sin β + αg₁ + βg₂`.
    Flow1,
}

impl Variant {
    fn names(self) -> &'static [&'static str] {
        match self {
            Variant::Flow3 => &["mu1", "mu2"],
            Variant::Pot | Variant::Flow1 => &["f1", "f2", "g1", "g2"],
        }
    }
}

/// A planar saddle system with bounded perturbations.
#[derive(Clone, Debug)]
pub struct PerturbedSaddleSystem {
    variant: Variant,
    perturbations: Vec<Perturbation>,
    bound: f64,
    all_zero: bool,
}

/// Region on which supplied perturbations are spot-checked at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckDomain {
    pub half_width: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for CheckDomain {
    fn default() -> Self {
        Self {
            half_width: 1.0,
            t_max: 10.0,
            points: 11,
        }
    }
}

impl PerturbedSaddleSystem {
    /// `flow3` with `‖μ‖∞ ≤ 0.01ε`.
    pub fn flow3(eps: f64, mu1: Perturbation, mu2: Perturbation) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(EglError::InvalidParameter(format!("epsilon must be positive, got {eps}")));
        }
        Self::build(Variant::Flow3, vec![mu1, mu2], 0.01 * eps, CheckDomain::default())
    }

    /// Linear saddle with multiplicative perturbations bounded by `bound ≤ 0.01`.
    pub fn pot(bound: f64, fg: [Perturbation; 4]) -> Result<Self> {
        Self::checked_small(Variant::Pot, bound, fg)
    }

    pub fn flow1(bound: f64, fg: [Perturbation; 4]) -> Result<Self> {
        Self::checked_small(Variant::Flow1, bound, fg)
    }

    pub fn unperturbed(variant: Variant) -> Self {
        let k = variant.names().len();
        Self {
            variant,
            perturbations: vec![Perturbation::Zero; k],
            bound: 0.0,
            all_zero: true,
        }
    }

    fn checked_small(variant: Variant, bound: f64, fg: [Perturbation; 4]) -> Result<Self> {
        if !(bound >= 0.0 && bound <= 0.01) {
            return Err(EglError::InvalidParameter(format!(
                "perturbation bound must lie in [0, 0.01], got {bound}"
            )));
        }
        Self::build(variant, fg.into(), bound, CheckDomain::default())
    }

    /// Builds a system after spot-checking the perturbations on `domain`.
    pub fn build(variant: Variant, perturbations: Vec<Perturbation>, bound: f64, domain: CheckDomain) -> Result<Self> {
        if perturbations.len() != variant.names().len() {
            return Err(EglError::LengthMismatch {
                expected: variant.names().len(),
                got: perturbations.len(),
            });
        }
        let sys = Self {
            variant,
            all_zero: perturbations.iter().all(Perturbation::is_zero),
            perturbations,
            bound,
        };
        sys.spot_check(domain)?;
        Ok(sys)
    }

    fn spot_check(&self, d: CheckDomain) -> Result<()> {
        let m = d.points.max(2);
        let at = |k: usize, lo: f64, hi: f64| lo + (hi - lo) * k as f64 / (m - 1) as f64;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let (al, be, t) = (
                        at(a, -d.half_width, d.half_width),
                        at(b, -d.half_width, d.half_width),
                        at(c, 0.0, d.t_max),
                    );
                    self.perturbation_values(t, [al, be])?;
                }
            }
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn perturbations(&self) -> &[Perturbation] {
        &self.perturbations
    }

    /// Perturbation values at `(t, p)`, each checked against the bound.
    #[inline]
    fn perturbation_values(&self, t: f64, p: Point) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        if self.all_zero {
            return Ok(out);
        }
        let limit = self.bound * (1.0 + 1e-12);
        for (k, (pert, name)) in self.perturbations.iter().zip(self.variant.names()).enumerate() {
            let v = pert.eval(p[0], p[1], t);
            if !(v.abs() <= limit) {
                return Err(EglError::PerturbationBound {
                    name,
                    value: v,
                    bound: self.bound,
                    alpha: p[0],
                    beta: p[1],
                    t,
                });
            }
            out[k] = v;
        }
        Ok(out)
    }

    #[inline]
    pub fn rhs(&self, t: f64, p: Point) -> Result<Point> {
        let [a, b] = p;
        let q = self.perturbation_values(t, p)?;
        Ok(match self.variant {
            Variant::Flow3 => [b.cos() * a.sin() + q[0], -a.cos() * b.sin() + q[1]],
            Variant::Pot => [a * (1.0 + q[0]) + q[1] * b, -b * (1.0 + q[2]) + q[3] * a],
            Variant::Flow1 => [
                b.cos() * a.sin() + a * q[0] + b * q[1],
                -a.cos() * b.sin() + a * q[2] + b * q[3],
            ],
        })
    }

    #[inline]
    pub fn rk4_step(&self, t: f64, h: f64, p: Point) -> Result<Point> {
        let k1 = self.rhs(t, p)?;
        let k2 = self.rhs(t + 0.5 * h, [p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]])?;
        let k3 = self.rhs(t + 0.5 * h, [p[0] + 0.5 * h * k2[0], p[1] + 0.5 * h * k2[1]])?;
        let k4 = self.rhs(t + h, [p[0] + h * k3[0], p[1] + h * k3[1]])?;
        Ok([
            p[0] + h / 6.0 * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]),
            p[1] + h / 6.0 * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]),
        ])
    }
}

/// Sampled `(t, α, β)` path.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, t: f64, p: Point) {
        self.t.push(t);
        self.alpha.push(p[0]);
        self.beta.push(p[1]);
    }

    pub fn point(&self, k: usize) -> Point {
        [self.alpha[k], self.beta[k]]
    }

    pub fn last(&self) -> Option<(f64, Point)> {
        let k = self.len().checked_sub(1)?;
        Some((self.t[k], self.point(k)))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,alpha,beta\n");
        for k in 0..self.len() {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", self.t[k], self.alpha[k], self.beta[k]);
        }
        s
    }
}

pub(crate) fn step_plan(t0: f64, t1: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt <= MAX_DT * (1.0 + 1e-12)) {
        return Err(EglError::InvalidParameter(format!("dt must lie in (0, {MAX_DT}], got {dt}")));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(EglError::InvalidParameter("time span must be finite".into()));
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((0, 0.0));
    }
    let steps = (span.abs() / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok((steps, span / steps as f64))
}

/// Steps from `t0` to `t1` calling `visit` after every step; returns the end point.
pub(crate) fn march(
    sys: &PerturbedSaddleSystem,
    init: Point,
    t0: f64,
    t1: f64,
    dt: f64,
    mut visit: impl FnMut(f64, Point),
) -> Result<Point> {
    if !(init[0].is_finite() && init[1].is_finite()) {
        return Err(EglError::InvalidParameter("initial point must be finite".into()));
    }
    let (steps, h) = step_plan(t0, t1, dt)?;
    let mut p = init;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        p = sys.rk4_step(t, h, p)?;
        let tn = if k + 1 == steps { t1 } else { t0 + (k + 1) as f64 * h };
        if !(p[0].abs().max(p[1].abs()) <= DIVERGENCE_LIMIT) {
            return Err(EglError::BlowUp(tn));
        }
        visit(tn, p);
    }
    Ok(p)
}

/// RK4 trajectory from `init` over `t_span` (either direction) with steps of
/// at most `dt ≤ 1e-3`.
pub fn integrate_saddle(sys: &PerturbedSaddleSystem, init: Point, t_span: (f64, f64), dt: f64) -> Result<Trajectory> {
    let mut tr = Trajectory::default();
    tr.push(t_span.0, init);
    march(sys, init, t_span.0, t_span.1, dt, |t, p| tr.push(t, p))?;
    Ok(tr)
}
