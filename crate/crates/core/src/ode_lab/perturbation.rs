use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type FieldFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// One term `a cos(kα α + kβ β + kt t + φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub k_alpha: f64,
    pub k_beta: f64,
    pub k_t: f64,
    pub phase: f64,
}

/// Trigonometric polynomial in `(α, β, t)` whose amplitudes sum to at most `sup`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    /// Draws `terms` random modes with integer wavenumbers in `0..=max_k`
    /// and rescales so that `Σ|a| = sup`.
    pub fn random(seed: u64, terms: usize, max_k: i32, sup: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<TrigTerm> = (0..terms.max(1))
            .map(|_| TrigTerm {
                amplitude: rng.gen_range(-1.0..1.0),
                k_alpha: rng.gen_range(-max_k..=max_k) as f64,
                k_beta: rng.gen_range(-max_k..=max_k) as f64,
                k_t: rng.gen_range(0..=max_k) as f64,
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            })
            .collect();
        let total: f64 = out.iter().map(|t| t.amplitude.abs()).sum();
        let scale = if total > 0.0 { sup / total } else { 0.0 };
        for t in &mut out {
            t.amplitude *= scale;
        }
        Self { terms: out }
    }

    pub fn from_terms(terms: Vec<TrigTerm>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    /// Upper bound `Σ|a|` on the sup norm.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }

    #[inline]
    pub fn eval(&self, a: f64, b: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|m| m.amplitude * (m.k_alpha * a + m.k_beta * b + m.k_t * t + m.phase).cos())
            .sum()
    }
}

/// A scalar perturbation field `(α, β, t) ↦ value`.
#[derive(Clone)]
pub enum Perturbation {
    Zero,
    Constant(f64),
    Trig(TrigPolynomial),
    Custom(Arc<FieldFn>),
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation::Zero
    }
}

impl Perturbation {
    pub fn custom(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Perturbation::Custom(Arc::new(f))
    }

    pub fn random(seed: u64, sup: f64) -> Self {
        Perturbation::Trig(TrigPolynomial::random(seed, 6, 3, sup))
    }

    #[inline]
    pub fn eval(&self, a: f64, b: f64, t: f64) -> f64 {
        match self {
            Perturbation::Zero => 0.0,
            Perturbation::Constant(c) => *c,
            Perturbation::Trig(p) => p.eval(a, b, t),
            Perturbation::Custom(f) => f(a, b, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Perturbation::Zero)
    }
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Zero => f.write_str("Zero"),
            Perturbation::Constant(c) => write!(f, "Constant({c})"),
            Perturbation::Trig(p) => write!(f, "Trig({} terms, sup ≤ {:e})", p.terms.len(), p.sup_bound()),
            Perturbation::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn random_trig_respects_its_sup(seed in any::<u64>(), a in -1.0f64..1.0, b in -1.0f64..1.0, t in 0.0f64..20.0) {
            let p = Perturbation::random(seed, 0.009);
            prop_assert!(p.eval(a, b, t).abs() <= 0.009 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn random_draws_are_reproducible() {
        let a = TrigPolynomial::random(7, 6, 3, 1.0);
        assert_eq!(a, TrigPolynomial::random(7, 6, 3, 1.0));
        assert_ne!(a, TrigPolynomial::random(8, 6, 3, 1.0));
        assert!((a.sup_bound() - 1.0).abs() < 1e-15);
    }
}
