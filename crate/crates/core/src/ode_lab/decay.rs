use std::fmt::Write as _;

use crate::error::{EglError, Result};
use crate::polyline::{Point, Polyline};

use super::system::{march, step_plan, PerturbedSaddleSystem, Trajectory, Variant, DIVERGENCE_LIMIT, MAX_DT};

/// Leg duration `(2 ln 2)/3`.
pub const LEG: f64 = 2.0 * std::f64::consts::LN_2 / 3.0;

/// Refinement bound for evolved curves.
pub const CURVE_MAX_SEG: f64 = 1e-3;

const SIDE_TOL: f64 = 1e-12;

/// `S₁ = {β > 2|α|}`.
pub fn in_s1(p: Point) -> bool {
    p[1] > 2.0 * p[0].abs()
}

/// `S₂ = {β > |α|}`.
pub fn in_s2(p: Point) -> bool {
    p[1] > p[0].abs()
}

/// `Ω₊ = {α ≤ β ≤ 2α, α > 0}`, with a relative slack for points placed on its edge.
pub fn in_omega_plus(p: Point) -> bool {
    let tol = SIDE_TOL * p[0].abs();
    p[0] > 0.0 && p[1] >= p[0] - tol && p[1] <= 2.0 * p[0] + tol
}

/// `Ω₋ = {−α ≤ β ≤ −2α, α < 0}`.
pub fn in_omega_minus(p: Point) -> bool {
    in_omega_plus([-p[0], p[1]])
}

/// What happened to the two endpoints during one leg.
#[derive(Clone, Debug, PartialEq)]
pub struct LegReport {
    pub leg: usize,
    /// Time into the leg at which each endpoint first left `Ω₊` / `Ω₋`.
    pub right_omega_exit: Option<f64>,
    pub left_omega_exit: Option<f64>,
    /// Endpoints kept their side and `β > 0`, and ended outside `S₁`.
    pub endpoints_ok: bool,
    pub vertices_before_clip: usize,
    pub vertices: usize,
    pub min_beta: f64,
    pub max_beta: f64,
}

/// Curve `γ_n` spanning `S₁`, stored from its right end to its left end.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveEvolutionState {
    pub curve: Polyline,
    pub n: usize,
    pub legs: Vec<LegReport>,
}

impl CurveEvolutionState {
    pub fn new(curve: Polyline) -> Result<Self> {
        let mut v = curve.into_vertices();
        if v.first().is_some_and(|p| p[0] < 0.0) {
            v.reverse();
        }
        let mut curve = Polyline::new(v, false, CURVE_MAX_SEG);
        curve.refine();
        let s = Self { curve, n: 0, legs: Vec::new() };
        s.check_invariants()?;
        Ok(s)
    }

    /// The segment `β = beta` between the two sides of `S₁`.
    pub fn horizontal(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(EglError::InvalidParameter(format!("curve height must be positive, got {beta}")));
        }
        Self::new(Polyline::segment([beta / 2.0, beta], [-beta / 2.0, beta], CURVE_MAX_SEG))
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * LEG
    }

    /// The curve is open, simple, lies in the closure of `S₁` and has one
    /// endpoint on each side.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |reason: &str| EglError::ReclipFailure {
            leg: self.n,
            reason: reason.into(),
            curve: Box::new(self.curve.clone()),
        };
        let v = self.curve.vertices();
        if v.len() < 2 || self.curve.is_closed() {
            return Err(fail("curve must be open with at least two vertices"));
        }
        let tol = 1e-9;
        if v.iter().any(|p| p[1] < 2.0 * p[0].abs() - tol * (1.0 + p[1].abs())) {
            return Err(fail("curve leaves the sector"));
        }
        let (a, b) = (v[0], v[v.len() - 1]);
        if !(a[0] > 0.0 && b[0] < 0.0) {
            return Err(fail("endpoints are not on opposite sides"));
        }
        if !is_simple(v) {
            return Err(fail("curve intersects itself"));
        }
        Ok(())
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// No two non-adjacent segments of the open polyline cross; sweep by `α`.
pub fn is_simple(v: &[Point]) -> bool {
    let n = v.len();
    if n < 4 {
        return true;
    }
    let mut segs: Vec<(f64, f64, usize)> = (0..n - 1)
        .map(|i| (v[i][0].min(v[i + 1][0]), v[i][0].max(v[i + 1][0]), i))
        .collect();
    segs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut active: Vec<(f64, usize)> = Vec::new();
    for &(lo, hi, i) in &segs {
        active.retain(|&(h, _)| h >= lo);
        for &(_, j) in &active {
            if i.abs_diff(j) > 1 && segments_cross(v[i], v[i + 1], v[j], v[j + 1]) {
                return false;
            }
        }
        active.push((hi, i));
    }
    true
}

struct EndpointWatch {
    right: bool,
    ok: bool,
    exit: Option<f64>,
}

impl EndpointWatch {
    fn new(p: Point) -> Self {
        Self {
            right: p[0] > 0.0,
            ok: true,
            exit: None,
        }
    }

    fn observe(&mut self, t: f64, p: Point) {
        let side = if self.right { p[0] > 0.0 } else { p[0] < 0.0 };
        self.ok &= side && p[1] > 0.0;
        let inside = if self.right { in_omega_plus(p) } else { in_omega_minus(p) };
        if !inside && self.exit.is_none() {
            self.exit = Some(t);
        }
    }
}

fn crossing(outside: Point, inside: Point) -> Point {
    let s = if outside[0] >= 0.0 { 1.0 } else { -1.0 };
    let g = |p: Point| p[1] - 2.0 * s * p[0];
    let (go, gi) = (g(outside), g(inside));
    let l = go / (go - gi);
    [outside[0] + l * (inside[0] - outside[0]), outside[1] + l * (inside[1] - outside[1])]
}

/// Longest-lived arc of `v` inside `S₁` whose two exits lie on opposite
/// sides; ties go to the arc with the largest minimum `β`.
fn reclip(v: &[Point]) -> Option<Vec<Point>> {
    let n = v.len();
    let mut best: Option<(f64, usize, usize)> = None;
    let mut i = 0;
    while i < n {
        if !in_s1(v[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && in_s1(v[j + 1]) {
            j += 1;
        }
        if i > 0 && j + 1 < n && (v[i - 1][0] >= 0.0) != (v[j + 1][0] >= 0.0) {
            let a = crossing(v[i - 1], v[i]);
            let b = crossing(v[j + 1], v[j]);
            let min_beta = v[i..=j].iter().map(|p| p[1]).fold(a[1].min(b[1]), f64::min);
            if best.is_none_or(|(m, _, _)| min_beta > m) {
                best = Some((min_beta, i, j));
            }
        }
        i = j + 1;
    }
    let (_, i, j) = best?;
    let mut out = Vec::with_capacity(j - i + 3);
    out.push(crossing(v[i - 1], v[i]));
    out.extend_from_slice(&v[i..=j]);
    out.push(crossing(v[j + 1], v[j]));
    if out[0][0] < 0.0 {
        out.reverse();
    }
    Some(out)
}

fn require_pot(sys: &PerturbedSaddleSystem) -> Result<()> {
    if sys.variant() != Variant::Pot || !(sys.bound() < 0.01) {
        return Err(EglError::InvalidParameter(
            "curve evolution needs the linear saddle system with perturbation bound below 0.01".into(),
        ));
    }
    Ok(())
}

/// Advances the curve by one leg with refinement after every RK4 step, then
/// keeps the sub-arc inside `S₁` that joins its two sides.
pub fn evolve_curve(state: CurveEvolutionState, sys: &PerturbedSaddleSystem) -> Result<CurveEvolutionState> {
    require_pot(sys)?;
    let t0 = state.time();
    let (steps, h) = step_plan(t0, t0 + LEG, MAX_DT)?;
    let mut curve = state.curve;
    let mut right = EndpointWatch::new(curve.vertices()[0]);
    let mut left = EndpointWatch::new(*curve.vertices().last().unwrap());
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        for v in curve.vertices_mut() {
            *v = sys.rk4_step(t, h, *v)?;
            if !(v[0].abs().max(v[1].abs()) <= DIVERGENCE_LIMIT) {
                return Err(EglError::BlowUp(t + h));
            }
        }
        curve.refine();
        let v = curve.vertices();
        right.observe((k + 1) as f64 * h, v[0]);
        left.observe((k + 1) as f64 * h, v[v.len() - 1]);
    }
    let v = curve.vertices();
    let (re, le) = (v[0], v[v.len() - 1]);
    let endpoints_ok = right.ok && left.ok && !in_s1(re) && !in_s1(le);
    let leg = state.n + 1;
    let Some(kept) = reclip(v) else {
        return Err(EglError::ReclipFailure {
            leg,
            reason: "no arc inside the sector joins both sides".into(),
            curve: Box::new(curve),
        });
    };
    let before = v.len();
    let (min_beta, max_beta) = kept
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[1]), hi.max(p[1])));
    let curve = Polyline::new(kept, false, CURVE_MAX_SEG);
    let mut legs = state.legs;
    legs.push(LegReport {
        leg,
        right_omega_exit: right.exit,
        left_omega_exit: left.exit,
        endpoints_ok,
        vertices_before_clip: before,
        vertices: curve.len(),
        min_beta,
        max_beta,
    });
    Ok(CurveEvolutionState { curve, n: leg, legs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayVerdict {
    Pass,
    BoundViolated,
    NoAxisPoint,
    BackwardDivergence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub verdict: DecayVerdict,
    pub n_legs: usize,
    pub legs: Vec<LegReport>,
    /// `γ_0, …, γ_n`.
    pub curves: Vec<Polyline>,
    pub axis_point: Option<Point>,
    pub initial_point: Option<Point>,
    pub trajectory: Option<Trajectory>,
    /// `max_t max(|α|, |β|) / (β₀ e^{−t/2})`; at most 1 on success.
    pub worst_decay_ratio: f64,
    /// `min_t β / (β₀ e^{−2t})`; at least 1 on success.
    pub worst_pinch_ratio: f64,
    /// Distance between the re-integrated end point and the axis point.
    pub return_error: f64,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.verdict == DecayVerdict::Pass
    }

    pub fn endpoints_ok(&self) -> bool {
        self.legs.iter().all(|l| l.endpoints_ok)
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        let pt = |p: Option<Point>| p.map_or("none".into(), |p| format!("{:.12e};{:.12e}", p[0], p[1]));
        vec![
            ("verdict", format!("{:?}", self.verdict)),
            ("n_legs", self.n_legs.to_string()),
            ("axis_point", pt(self.axis_point)),
            ("initial_point", pt(self.initial_point)),
            ("worst_decay_ratio", format!("{:.6e}", self.worst_decay_ratio)),
            ("worst_pinch_ratio", format!("{:.6e}", self.worst_pinch_ratio)),
            ("return_error", format!("{:.3e}", self.return_error)),
            ("endpoints_ok", self.endpoints_ok().to_string()),
        ]
    }

    /// `leg,vertex,alpha,beta` rows for every stored curve.
    pub fn curves_csv(&self) -> String {
        let mut s = String::from("leg,vertex,alpha,beta\n");
        for (leg, c) in self.curves.iter().enumerate() {
            for (k, p) in c.vertices().iter().enumerate() {
                let _ = writeln!(s, "{leg},{k},{:.16e},{:.16e}", p[0], p[1]);
            }
        }
        s
    }
}

/// First point of the curve (from the right) with `α = 0`.
pub fn axis_crossing(curve: &Polyline) -> Option<Point> {
    let v = curve.vertices();
    for w in v.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a[0] == 0.0 {
            return Some(a);
        }
        if (a[0] > 0.0) != (b[0] > 0.0) && b[0] != 0.0 {
            let s = a[0] / (a[0] - b[0]);
            return Some([0.0, a[1] + s * (b[1] - a[1])]);
        }
    }
    v.last().filter(|p| p[0] == 0.0).copied()
}

/// Runs `n_legs` legs from `gamma0`, takes the `α = 0` point of the last
/// curve, integrates it back to `t = 0` and checks the decay bounds along
/// the forward trajectory from the recovered start.
pub fn find_decaying_trajectory(sys: &PerturbedSaddleSystem, n_legs: usize, gamma0: Polyline) -> Result<DecayReport> {
    require_pot(sys)?;
    if n_legs < 5 {
        return Err(EglError::InvalidParameter(format!("need at least 5 legs, got {n_legs}")));
    }
    let mut state = CurveEvolutionState::new(gamma0)?;
    let mut curves = vec![state.curve.clone()];
    for _ in 0..n_legs {
        state = evolve_curve(state, sys)?;
        curves.push(state.curve.clone());
    }
    let t_end = state.time();
    let mut report = DecayReport {
        verdict: DecayVerdict::NoAxisPoint,
        n_legs,
        legs: state.legs,
        curves,
        axis_point: None,
        initial_point: None,
        trajectory: None,
        worst_decay_ratio: f64::NAN,
        worst_pinch_ratio: f64::NAN,
        return_error: f64::NAN,
    };
    let Some(axis) = axis_crossing(&state.curve) else {
        return Ok(report);
    };
    report.axis_point = Some(axis);
    let start = match march(sys, axis, t_end, 0.0, MAX_DT, |_, _| {}) {
        Ok(p) => p,
        Err(EglError::BlowUp(_)) => {
            report.verdict = DecayVerdict::BackwardDivergence;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.initial_point = Some(start);
    let mut tr = Trajectory::default();
    tr.push(0.0, start);
    let end = march(sys, start, 0.0, t_end, MAX_DT, |t, p| tr.push(t, p))?;
    report.return_error = (end[0] - axis[0]).hypot(end[1] - axis[1]);
    let b0 = start[1];
    let (mut decay, mut pinch) = (0.0f64, f64::INFINITY);
    for k in 0..tr.len() {
        let (t, p) = (tr.t[k], tr.point(k));
        decay = decay.max(p[0].abs().max(p[1].abs()) / (b0 * (-0.5 * t).exp()));
        pinch = pinch.min(p[1] / (b0 * (-2.0 * t).exp()));
    }
    report.worst_decay_ratio = decay;
    report.worst_pinch_ratio = pinch;
    report.verdict = if b0 > 0.0 && decay <= 1.0 + 1e-12 && pinch >= 1.0 - 1e-12 {
        DecayVerdict::Pass
    } else {
        DecayVerdict::BoundViolated
    };
    report.trajectory = Some(tr);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode_lab::perturbation::Perturbation;

    fn zero() -> PerturbedSaddleSystem {
        PerturbedSaddleSystem::pot(0.0, Default::default()).unwrap()
    }

    fn random(seed: u64) -> PerturbedSaddleSystem {
        let p = |k| Perturbation::random(seed * 4 + k, 0.009);
        PerturbedSaddleSystem::pot(0.009, [p(0), p(1), p(2), p(3)]).unwrap()
    }

    #[test]
    fn one_leg_matches_hyperbolic_map() {
        let s0 = CurveEvolutionState::horizontal(1.0).unwrap();
        let s1 = evolve_curve(s0, &zero()).unwrap();
        let b = (-LEG).exp();
        for p in s1.curve.vertices() {
            assert!((p[1] - b).abs() < 1e-8, "{p:?}");
            assert!(p[1] >= 2.0 * p[0].abs() - 1e-9);
        }
        let v = s1.curve.vertices();
        assert!((v[0][0] - b / 2.0).abs() < 1e-8 && (v[v.len() - 1][0] + b / 2.0).abs() < 1e-8);
        s1.check_invariants().unwrap();
        assert!(s1.legs[0].endpoints_ok);
        let exit = s1.legs[0].right_omega_exit.unwrap();
        assert!((exit - std::f64::consts::LN_2 / 2.0).abs() < 2e-3, "{exit}");
    }

    #[test]
    fn vertices_follow_exact_flow() {
        let s0 = CurveEvolutionState::new(Polyline::new(vec![[0.3, 0.6], [0.0, 0.9], [-0.25, 0.5]], false, CURVE_MAX_SEG)).unwrap();
        let before: Vec<Point> = s0.curve.vertices().to_vec();
        let mut c = s0.curve.clone();
        let (steps, h) = step_plan(0.0, LEG, MAX_DT).unwrap();
        for k in 0..steps {
            for v in c.vertices_mut() {
                *v = zero().rk4_step(k as f64 * h, h, *v).unwrap();
            }
        }
        let (e, ei) = (LEG.exp(), (-LEG).exp());
        for (a, b) in before.iter().zip(c.vertices()) {
            assert!((b[0] - a[0] * e).abs() < 1e-8 && (b[1] - a[1] * ei).abs() < 1e-8);
        }
    }

    #[test]
    fn ten_legs_track_exponential_height() {
        let mut s = CurveEvolutionState::horizontal(1.0).unwrap();
        for n in 1..=10 {
            s = evolve_curve(s, &zero()).unwrap();
            let top = s.legs.last().unwrap().max_beta;
            let exact = (-(n as f64) * LEG).exp();
            assert!((top / exact - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn zero_perturbation_trajectory_is_exact() {
        let r = find_decaying_trajectory(&zero(), 10, Polyline::segment([0.5, 1.0], [-0.5, 1.0], CURVE_MAX_SEG)).unwrap();
        assert!(r.passed());
        let tr = r.trajectory.as_ref().unwrap();
        let b0 = r.initial_point.unwrap()[1];
        for k in 0..tr.len() {
            assert!(tr.alpha[k].abs() < 1e-8);
            assert!((tr.beta[k] - b0 * (-tr.t[k]).exp()).abs() < 1e-8);
        }
        assert!((b0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn random_perturbations_decay_and_reproduce() {
        let g0 = || Polyline::segment([0.5, 1.0], [-0.5, 1.0], CURVE_MAX_SEG);
        let a = find_decaying_trajectory(&random(3), 6, g0()).unwrap();
        assert!(a.passed(), "{:?}", a.key_values());
        assert!(a.worst_decay_ratio <= 1.0);
        let b = find_decaying_trajectory(&random(3), 6, g0()).unwrap();
        assert_eq!(a, b);
        for c in &a.curves[1..] {
            assert!(is_simple(c.vertices()));
        }
    }

    #[test]
    fn constant_stretching_still_passes() {
        let sys = PerturbedSaddleSystem::pot(
            0.009,
            [Perturbation::Constant(0.009), Perturbation::Zero, Perturbation::Zero, Perturbation::Zero],
        )
        .unwrap();
        let r = find_decaying_trajectory(&sys, 5, Polyline::segment([0.5, 1.0], [-0.5, 1.0], CURVE_MAX_SEG)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn simple_curve_detection() {
        assert!(is_simple(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]));
        assert!(!is_simple(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]));
    }

    #[test]
    fn wrong_variant_rejected() {
        let sys = PerturbedSaddleSystem::unperturbed(Variant::Flow3);
        let s = CurveEvolutionState::horizontal(1.0).unwrap();
        assert!(evolve_curve(s, &sys).is_err());
    }
}
