//! Deterministic tie-breaking noise for continuous columns.
//!
//! The noise added to a value depends only on the seed and on the rank of
//! that value within its column, never on the row it came from. Rows are
//! first put into a canonical order (lexicographic on the paired values),
//! so estimates are invariant under row permutations and batch splits.

use std::cmp::Ordering;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based uniform draw in the open interval (-1, 1).
pub(crate) fn unit_noise(seed: u64, rank: u64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(rank));
    let u = ((h >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    2.0 * u - 1.0
}

/// Population standard deviation, summed in the given order.
pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// Lexicographic total order on value pairs.
pub(crate) fn cmp_pair(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// Ranks of `xs` under `total_cmp`, ties resolved by position.
///
/// `xs` is expected in canonical row order; the stable sort keeps fully
/// identical rows paired consistently across both columns.
pub(crate) fn ranks(xs: &[f64]) -> Vec<u64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![0u64; xs.len()];
    for (r, i) in idx.into_iter().enumerate() {
        out[i] = r as u64;
    }
    out
}

/// Adds `scale · std(xs) · u(seed, rank)` to every value.
pub(crate) fn jitter(xs: &[f64], ranks: &[u64], seed: u64, scale: f64) -> Vec<f64> {
    let amp = scale * std_dev(xs);
    xs.iter()
        .zip(ranks)
        .map(|(&x, &r)| x + amp * unit_noise(seed, r))
        .collect()
}

/// Jitters and rescales to unit variance (when the column is not constant).
pub(crate) fn jitter_standardized(xs: &[f64], ranks: &[u64], seed: u64, scale: f64) -> Vec<f64> {
    let sd = std_dev(xs);
    let mut out = jitter(xs, ranks, seed, scale);
    if sd > 0.0 {
        out.iter_mut().for_each(|v| *v /= sd);
    }
    out
}
