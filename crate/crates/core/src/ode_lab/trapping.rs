use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EglError, Result};
use crate::polyline::Point;

use super::perturbation::Perturbation;
use super::system::{march, PerturbedSaddleSystem};

/// Box half-width in `β` and horizon of the trapping/escape statement.
pub const BETA_BOX: f64 = 0.1;
pub const HORIZON: f64 = 1.0;
const DT: f64 = 1e-3;

/// Perturbation strategy for `μ = (μ₁, μ₂)` with `‖μ‖∞ ≤ 0.01ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Adversary {
    Zero,
    /// `μ = (s₁, s₂)·0.01ε` with signs `s₁, s₂ ∈ {−1, 1}`.
    Extreme(f64, f64),
    /// Random trigonometric polynomials drawn from the seed.
    Random(u64),
}

impl Adversary {
    /// Zero, the four extreme constants and `random_draws` random fields.
    pub fn suite(seed: u64, random_draws: usize) -> Vec<Adversary> {
        let mut v = vec![
            Adversary::Zero,
            Adversary::Extreme(1.0, 1.0),
            Adversary::Extreme(1.0, -1.0),
            Adversary::Extreme(-1.0, 1.0),
            Adversary::Extreme(-1.0, -1.0),
        ];
        v.extend((0..random_draws as u64).map(|k| Adversary::Random(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k))));
        v
    }

    pub fn system(&self, eps: f64) -> Result<PerturbedSaddleSystem> {
        let bound = 0.01 * eps;
        let (m1, m2) = match *self {
            Adversary::Zero => (Perturbation::Zero, Perturbation::Zero),
            Adversary::Extreme(a, b) => (
                Perturbation::Constant(a.signum() * bound),
                Perturbation::Constant(b.signum() * bound),
            ),
            Adversary::Random(s) => (
                Perturbation::random(s.wrapping_mul(2), bound),
                Perturbation::random(s.wrapping_mul(2).wrapping_add(1), bound),
            ),
        };
        PerturbedSaddleSystem::flow3(eps, m1, m2)
    }

    pub fn label(&self) -> String {
        match self {
            Adversary::Zero => "zero".into(),
            Adversary::Extreme(a, b) => format!("extreme({:+},{:+})", a.signum(), b.signum()),
            Adversary::Random(s) => format!("random({s})"),
        }
    }
}

/// Counts and worst margins over all `(initial point, adversary)` runs.
/// A margin is positive when the corresponding inequality holds.
#[derive(Clone, Debug, PartialEq)]
pub struct TrapEscapeReport {
    pub eps: f64,
    pub samples: usize,
    pub seed: u64,
    pub adversaries: Vec<String>,
    pub runs: usize,
    pub integration_failures: usize,
    pub trap_checked: usize,
    pub trap_passed: usize,
    pub escape_checked: usize,
    pub escape_passed: usize,
    pub floor_checked: usize,
    pub floor_passed: usize,
    pub ceiling_passed: usize,
    pub worst_trap_margin: f64,
    pub worst_escape_margin: f64,
    pub worst_floor_margin: f64,
    pub worst_ceiling_margin: f64,
}

impl TrapEscapeReport {
    pub fn passed(&self) -> bool {
        self.integration_failures == 0
            && self.trap_passed == self.trap_checked
            && self.escape_passed == self.escape_checked
            && self.floor_passed == self.floor_checked
            && self.ceiling_passed == self.runs
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "trapping/escape check, eps = {}, {} initial points x {} adversaries",
            self.eps,
            self.samples,
            self.adversaries.len()
        );
        let _ = writeln!(s, "  trapping |beta(1)| < 0.1      : {}/{}", self.trap_passed, self.trap_checked);
        let _ = writeln!(s, "  escape   |alpha(1)| > 3 eps   : {}/{}", self.escape_passed, self.escape_checked);
        let _ = writeln!(s, "  growth floor                  : {}/{}", self.floor_passed, self.floor_checked);
        let _ = writeln!(s, "  ceiling  |alpha| <= 4 eps e^t : {}/{}", self.ceiling_passed, self.runs);
        let _ = writeln!(s, "  verdict: {}", if self.passed() { "PASS" } else { "FAIL" });
        s.push('\n');
        for (k, v) in self.key_values() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("check", "trapping".into()),
            ("pass", self.passed().to_string()),
            ("eps", format!("{:e}", self.eps)),
            ("seed", self.seed.to_string()),
            ("samples", self.samples.to_string()),
            ("adversaries", self.adversaries.join(";")),
            ("runs", self.runs.to_string()),
            ("integration_failures", self.integration_failures.to_string()),
            ("trap_passed", format!("{}/{}", self.trap_passed, self.trap_checked)),
            ("escape_passed", format!("{}/{}", self.escape_passed, self.escape_checked)),
            ("floor_passed", format!("{}/{}", self.floor_passed, self.floor_checked)),
            ("ceiling_passed", format!("{}/{}", self.ceiling_passed, self.runs)),
            ("worst_trap_margin", format!("{:.6e}", self.worst_trap_margin)),
            ("worst_escape_margin", format!("{:.6e}", self.worst_escape_margin)),
            ("worst_floor_margin", format!("{:.6e}", self.worst_floor_margin)),
            ("worst_ceiling_margin", format!("{:.6e}", self.worst_ceiling_margin)),
        ]
    }
}

/// Initial point number `i`: four box corners first, then alternately the
/// whole box `|α| ≤ 3ε, |β| ≤ 0.1` and the escape band `2ε < |α| < 3ε`.
pub fn initial_point(seed: u64, i: usize, eps: f64) -> Point {
    let corners = [[3.0, 1.0], [-3.0, -1.0], [3.0, -1.0], [-3.0, 1.0]];
    if i < corners.len() {
        return [corners[i][0] * eps, corners[i][1] * BETA_BOX];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let beta = rng.gen_range(-BETA_BOX..=BETA_BOX);
    if i % 2 == 0 {
        [rng.gen_range(-3.0 * eps..=3.0 * eps), beta]
    } else {
        let mut u: f64 = rng.gen();
        while u == 0.0 {
            u = rng.gen();
        }
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        [sign * (2.0 + u) * eps, beta]
    }
}

#[derive(Default)]
struct Tally {
    runs: usize,
    failures: usize,
    trap: (usize, usize),
    escape: (usize, usize),
    floor: (usize, usize),
    ceiling: usize,
    margins: [f64; 4],
}

impl Tally {
    fn new() -> Self {
        Self {
            margins: [f64::INFINITY; 4],
            ..Default::default()
        }
    }

    fn merge(&mut self, o: &Tally) {
        self.runs += o.runs;
        self.failures += o.failures;
        self.trap = (self.trap.0 + o.trap.0, self.trap.1 + o.trap.1);
        self.escape = (self.escape.0 + o.escape.0, self.escape.1 + o.escape.1);
        self.floor = (self.floor.0 + o.floor.0, self.floor.1 + o.floor.1);
        self.ceiling += o.ceiling;
        for k in 0..4 {
            self.margins[k] = self.margins[k].min(o.margins[k]);
        }
    }

    fn record(&mut self, sys: &PerturbedSaddleSystem, eps: f64, p0: Point) {
        self.runs += 1;
        let sign = if p0[0] < 0.0 { -1.0 } else { 1.0 };
        let (mut in_box, mut keeps_sign) = (true, true);
        let mut ceiling = f64::INFINITY;
        let end = march(sys, p0, 0.0, HORIZON, DT, |t, p| {
            in_box &= p[0].abs() <= 0.1 && p[1].abs() <= 0.1;
            keeps_sign &= sign * p[0] >= 0.0;
            let cap = 4.0 * eps * t.exp();
            ceiling = ceiling.min((cap - p[0].abs()) / cap);
        });
        let end = match end {
            Ok(e) => e,
            Err(_) => {
                self.failures += 1;
                return;
            }
        };
        let m = &mut self.margins;
        m[3] = m[3].min(ceiling);
        if ceiling >= 0.0 {
            self.ceiling += 1;
        }
        self.trap.0 += 1;
        let trap = BETA_BOX - end[1].abs();
        m[0] = m[0].min(trap);
        self.trap.1 += (trap > 0.0) as usize;
        let a0 = p0[0].abs();
        if a0 > 2.0 * eps && a0 < 3.0 * eps {
            self.escape.0 += 1;
            let esc = end[0].abs() - 3.0 * eps;
            m[1] = m[1].min(esc);
            self.escape.1 += (esc > 0.0) as usize;
        }
        if in_box && keeps_sign && a0 > 0.0 {
            let g = 0.9 * HORIZON;
            let floor = a0 * g.exp() - 0.01 * eps * (g.exp() - 1.0) / 0.9;
            self.floor.0 += 1;
            let fm = sign * end[0] - floor;
            m[2] = m[2].min(fm);
            self.floor.1 += (fm >= 0.0) as usize;
        }
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Integrates the `flow3` system from `samples` initial points against every
/// adversary over `t ∈ [0, 1]` and tallies the trapping, escape, growth-floor
/// and ceiling inequalities.
pub fn trapping_escape_check(eps: f64, samples: usize, adversaries: &[Adversary], seed: u64) -> Result<TrapEscapeReport> {
    if !(eps > 0.0 && eps <= 0.01) {
        return Err(EglError::InvalidParameter(format!("epsilon must lie in (0, 0.01], got {eps}")));
    }
    if samples < 100 {
        return Err(EglError::TooFewSamples(format!("{samples} initial points, need at least 100")));
    }
    if adversaries.is_empty() {
        return Err(EglError::InvalidParameter("no adversaries given".into()));
    }
    let systems = adversaries
        .iter()
        .map(|a| a.system(eps))
        .collect::<Result<Vec<_>>>()?;
    let chunk = samples.div_ceil(workers());
    let mut total = Tally::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..samples)
            .step_by(chunk)
            .map(|lo| {
                let systems = &systems;
                scope.spawn(move || {
                    let mut t = Tally::new();
                    for i in lo..(lo + chunk).min(samples) {
                        let p0 = initial_point(seed, i, eps);
                        for sys in systems {
                            t.record(sys, eps, p0);
                        }
                    }
                    t
                })
            })
            .collect();
        for h in handles {
            total.merge(&h.join().expect("worker panicked"));
        }
    });
    let m = total.margins;
    Ok(TrapEscapeReport {
        eps,
        samples,
        seed,
        adversaries: adversaries.iter().map(Adversary::label).collect(),
        runs: total.runs,
        integration_failures: total.failures,
        trap_checked: total.trap.0,
        trap_passed: total.trap.1,
        escape_checked: total.escape.0,
        escape_passed: total.escape.1,
        floor_checked: total.floor.0,
        floor_passed: total.floor.1,
        ceiling_passed: total.ceiling,
        worst_trap_margin: m[0],
        worst_escape_margin: m[1],
        worst_floor_margin: m[2],
        worst_ceiling_margin: m[3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode_lab::system::integrate_saddle;

    #[test]
    fn unperturbed_grid_passes() {
        let r = trapping_escape_check(0.01, 100, &[Adversary::Zero], 3).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert!(r.escape_checked > 40 && r.worst_escape_margin > 0.0);
        assert!(r.summary().contains("pass=true"));
    }

    #[test]
    fn anti_escape_constant_still_escapes() {
        let sys = Adversary::Extreme(-1.0, 1.0).system(0.01).unwrap();
        let tr = integrate_saddle(&sys, [0.021, 0.0], (0.0, 1.0), 1e-3).unwrap();
        let a1 = tr.last().unwrap().1[0];
        let floor = 0.021 * 0.9f64.exp() - 1e-4 * (0.9f64.exp() - 1.0) / 0.9;
        assert!(a1 > 0.03 && a1 >= floor);
    }

    #[test]
    fn invariant_axis_stays_trapped() {
        let sys = Adversary::Zero.system(0.01).unwrap();
        let tr = integrate_saddle(&sys, [0.015, 0.0], (0.0, 1.0), 1e-3).unwrap();
        assert_eq!(tr.last().unwrap().1[1], 0.0);
    }

    #[test]
    fn report_does_not_depend_on_thread_split() {
        let adv = Adversary::suite(11, 2);
        let a = trapping_escape_check(0.01, 120, &adv, 5).unwrap();
        let b = trapping_escape_check(0.01, 120, &adv, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
    }

    #[test]
    fn preconditions() {
        assert!(trapping_escape_check(0.02, 100, &[Adversary::Zero], 0).is_err());
        assert!(trapping_escape_check(0.01, 99, &[Adversary::Zero], 0).is_err());
    }
}
