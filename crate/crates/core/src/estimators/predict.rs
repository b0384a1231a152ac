//! Single-latent predictability scores used by SAP.

use std::collections::BTreeMap;

use super::{check_finite, discrete, jitter::cmp_pair, Kind};
use crate::error::{Error, Result};

/// How well one latent column predicts an attribute, in `[0, 1]`.
///
/// Continuous attributes use the R² of the least-squares line `a ~ z`; a
/// constant latent column scores 0. Discrete attributes use the balanced
/// accuracy of the best single threshold on `z` (one-vs-rest and
/// macro-averaged for more than two classes). Scores are in-sample.
pub fn predictability_score(z_col: &[f64], a: &[f64], a_kind: Kind) -> Result<f64> {
    if z_col.len() != a.len() {
        return Err(Error::LengthMismatch(z_col.len(), a.len()));
    }
    if a.len() < 4 {
        return Err(Error::TooFewSamples { required: 4, actual: a.len() });
    }
    check_finite(z_col)?;
    match a_kind {
        Kind::Continuous => {
            check_finite(a)?;
            r_squared(z_col, a)
        }
        Kind::Discrete => threshold_accuracy(z_col, &discrete::codes(a)?),
    }
}

fn r_squared(z: &[f64], a: &[f64]) -> Result<f64> {
    let mut pairs: Vec<(f64, f64)> = z.iter().copied().zip(a.iter().copied()).collect();
    pairs.sort_by(cmp_pair);
    let n = pairs.len() as f64;
    let mz = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let ma = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut szz, mut saa, mut sza) = (0.0, 0.0, 0.0);
    for &(zi, ai) in &pairs {
        let (dz, da) = (zi - mz, ai - ma);
        szz += dz * dz;
        saa += da * da;
        sza += dz * da;
    }
    if saa == 0.0 {
        return Err(Error::Degenerate("attribute is constant".into()));
    }
    if szz == 0.0 {
        return Ok(0.0);
    }
    Ok((sza * sza / (szz * saa)).clamp(0.0, 1.0))
}

fn threshold_accuracy(z: &[f64], labels: &[i64]) -> Result<f64> {
    let mut pairs: Vec<(f64, i64)> = z.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut classes = BTreeMap::new();
    for &(_, l) in &pairs {
        *classes.entry(l).or_insert(0u64) += 1;
    }
    match classes.len() {
        0 | 1 => Err(Error::Degenerate("attribute has a single class".into())),
        2 => {
            let first = *classes.keys().next().unwrap();
            Ok(best_split(&pairs, first))
        }
        k => Ok(classes.keys().map(|&c| best_split(&pairs, c)).sum::<f64>() / k as f64),
    }
}

/// Best balanced accuracy of `label == positive` over all thresholds on the
/// sorted latent values and both orientations.
fn best_split(sorted: &[(f64, i64)], positive: i64) -> f64 {
    let pos = sorted.iter().filter(|p| p.1 == positive).count() as u128;
    let neg = sorted.len() as u128 - pos;
    // Numerator of balanced accuracy over the common denominator 2·pos·neg,
    // for "left of the cut is negative"; the flipped rule scores 2·pos·neg - s.
    let score = |pos_right: u128, neg_left: u128| pos_right * neg + neg_left * pos;
    let total = 2 * pos * neg;
    let (mut pos_right, mut neg_left) = (pos, 0u128);
    let mut best = total / 2;
    for i in 0..sorted.len() {
        if sorted[i].1 == positive {
            pos_right -= 1;
        } else {
            neg_left += 1;
        }
        let at_boundary = i + 1 == sorted.len() || sorted[i].0 < sorted[i + 1].0;
        if at_boundary {
            let s = score(pos_right, neg_left);
            best = best.max(s).max(total - s);
        }
    }
    best as f64 / total as f64
}
