use std::fmt::Write as _;

use crate::error::{EglError, Result};

/// `metric = N^{-2} Σ_{j≤N} 1/a_j` and the lower bound `1/(4τ_N)` with
/// `τ_N = Σ_{N/2 ≤ j ≤ N} a_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialSumRow {
    pub n: usize,
    pub metric: f64,
    pub tail_bound: f64,
}

/// Rows for `N = 1..=n_max` of the sequence `a(1), a(2), …`.
pub fn reciprocal_partial_sums(a: impl Fn(usize) -> f64, n_max: usize) -> Result<Vec<PartialSumRow>> {
    let seq: Vec<f64> = (1..=n_max).map(a).collect();
    reciprocal_partial_sums_of(&seq)
}

/// Same as [`reciprocal_partial_sums`] with `seq[j − 1] = a_j`.
pub fn reciprocal_partial_sums_of(seq: &[f64]) -> Result<Vec<PartialSumRow>> {
    if let Some(j) = seq.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(EglError::InvalidParameter(format!(
            "term {} = {} is not positive",
            j + 1,
            seq[j]
        )));
    }
    let mut prefix = Vec::with_capacity(seq.len() + 1);
    prefix.push(0.0);
    for &x in seq {
        prefix.push(prefix.last().unwrap() + x);
    }
    let mut recip = 0.0;
    Ok(seq
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let n = k + 1;
            recip += 1.0 / x;
            let lo = (n / 2).max(1);
            let tau = prefix[n] - prefix[lo - 1];
            PartialSumRow {
                n,
                metric: recip / (n * n) as f64,
                tail_bound: 1.0 / (4.0 * tau),
            }
        })
        .collect())
}

/// `Σ 1/x_j`.
pub fn reciprocal_sum(xs: &[f64]) -> f64 {
    xs.iter().map(|x| 1.0 / x).sum()
}

/// `min Σ_{j≤n} 1/x_j` over positive `x` with `Σ x_j = σ`, attained at `x_j = σ/n`.
pub fn min_reciprocal_sum(sigma: f64, n: usize) -> f64 {
    (n * n) as f64 / sigma
}

pub fn partial_sums_csv(rows: &[PartialSumRow]) -> String {
    let mut s = String::from("N,metric,tail_bound\n");
    for r in rows {
        let _ = writeln!(s, "{},{:.16e},{:.16e}", r.n, r.metric, r.tail_bound);
    }
    s
}
