//! Plug-in (maximum likelihood) estimators over integer-coded columns.
//!
//! Every quantity here is a weighted sum of logarithms of count ratios. Terms
//! are grouped by the exact ratio before summation, and the groups are summed
//! in ascending ratio order. The result is therefore a function of the
//! contingency table alone: it does not depend on row order, on symbol
//! labels, or on hash iteration order. Grouping also makes symmetric cases
//! exact, e.g. `I(x, x) == H(x)` bit for bit and `I(x, y) == 0.0` for an
//! exactly balanced independent design.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Largest magnitude that is converted to an integer code without loss.
const MAX_EXACT: f64 = 9_007_199_254_740_992.0;

/// Converts a discrete column to integer codes, rejecting fractional values.
pub(crate) fn codes(values: &[f64]) -> Result<Vec<i64>> {
    values
        .iter()
        .enumerate()
        .map(|(row, &v)| {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col: 0 });
            }
            if v.fract() != 0.0 || v.abs() > MAX_EXACT {
                return Err(Error::NonIntegerDiscrete { row, value: v });
            }
            Ok(v as i64)
        })
        .collect()
}

fn histogram(xs: &[i64]) -> HashMap<i64, u64> {
    let mut counts = HashMap::new();
    for &x in xs {
        *counts.entry(x).or_insert(0u64) += 1;
    }
    counts
}

fn joint_histogram(xs: &[i64], ys: &[i64]) -> HashMap<(i64, i64), u64> {
    let mut counts = HashMap::new();
    for (&x, &y) in xs.iter().zip(ys) {
        *counts.entry((x, y)).or_insert(0u64) += 1;
    }
    counts
}

/// Accumulates `Σ (weight / n) · ln(num / den)` with grouping by exact ratio.
#[derive(Default)]
struct LogRatioSum {
    groups: BTreeMap<u64, u64>,
}

impl LogRatioSum {
    fn add(&mut self, weight: u64, num: u128, den: u128) {
        let ratio = num as f64 / den as f64;
        // Ratios are positive, so the bit pattern orders like the value.
        *self.groups.entry(ratio.to_bits()).or_insert(0) += weight;
    }

    fn finish(&self, n: u64) -> f64 {
        let n = n as f64;
        self.groups
            .iter()
            .map(|(&bits, &w)| (w as f64 / n) * f64::from_bits(bits).ln())
            .sum()
    }
}

/// Shannon entropy of the empirical distribution, in nats.
pub(crate) fn entropy(xs: &[i64]) -> f64 {
    let n = xs.len() as u64;
    let mut acc = LogRatioSum::default();
    for &c in histogram(xs).values() {
        acc.add(c, n as u128, c as u128);
    }
    acc.finish(n).max(0.0)
}

/// Plug-in mutual information, clamped to `[0, min(H(x), H(y))]`.
pub(crate) fn mutual_info(xs: &[i64], ys: &[i64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as u64;
    let cx = histogram(xs);
    let cy = histogram(ys);
    let mut acc = LogRatioSum::default();
    for (&(x, y), &c) in &joint_histogram(xs, ys) {
        acc.add(c, c as u128 * n as u128, cx[&x] as u128 * cy[&y] as u128);
    }
    let bound = entropy(xs).min(entropy(ys));
    acc.finish(n).clamp(0.0, bound)
}

/// Plug-in conditional entropy `H(a | b) = H(a, b) - H(b)`, clamped at 0.
pub(crate) fn conditional_entropy(a: &[i64], b: &[i64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as u64;
    let cb = histogram(b);
    let mut acc = LogRatioSum::default();
    for (&(_, y), &c) in &joint_histogram(a, b) {
        acc.add(c, cb[&y] as u128, c as u128);
    }
    acc.finish(n).max(0.0)
}
