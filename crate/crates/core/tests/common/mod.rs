//! Shared fixtures and reference implementations for the integration tests.
//!
//! The reference code counts joint histograms with hash maps and sums
//! `-p ln p` directly. It shares nothing with the library's estimators.
#![allow(dead_code)]

use std::collections::HashMap;
use std::hash::Hash;

use latent_eval::{AttributeBatch, Kind, LatentBatch, RegularizationMap};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tolerance used to treat two oracle quantities as tied.
pub const TIE: f64 = 1e-12;

pub fn plugin_entropy<T: Eq + Hash>(xs: impl IntoIterator<Item = T>) -> f64 {
    let mut counts: HashMap<T, usize> = HashMap::new();
    let mut n = 0usize;
    for x in xs {
        *counts.entry(x).or_default() += 1;
        n += 1;
    }
    -counts.values().map(|&c| {
        let p = c as f64 / n as f64;
        p * p.ln()
    }).sum::<f64>()
}

pub fn h(x: &[i64]) -> f64 {
    plugin_entropy(x.iter().copied())
}

pub fn h_joint(x: &[i64], y: &[i64]) -> f64 {
    plugin_entropy(x.iter().copied().zip(y.iter().copied()))
}

pub fn mi(x: &[i64], y: &[i64]) -> f64 {
    (h(x) + h(y) - h_joint(x, y)).max(0.0)
}

pub fn h_cond(x: &[i64], given: &[i64]) -> f64 {
    (h_joint(x, given) - h(given)).max(0.0)
}

/// All-integer dataset with attributes as columns and latents as columns.
#[derive(Debug, Clone)]
pub struct DiscreteFixture {
    pub z: Vec<Vec<i64>>,
    pub a: Vec<Vec<i64>>,
    pub reg: Vec<usize>,
}

impl DiscreteFixture {
    pub fn n(&self) -> usize {
        self.a[0].len()
    }

    pub fn latents(&self) -> LatentBatch {
        LatentBatch::with_kind(columns_to_array(&self.z), Kind::Discrete).unwrap()
    }

    pub fn attributes(&self) -> AttributeBatch {
        AttributeBatch::uniform(columns_to_array(&self.a), Kind::Discrete).unwrap()
    }

    pub fn reg_map(&self) -> RegularizationMap {
        RegularizationMap::new(self.reg.clone(), self.z.len()).unwrap()
    }

    pub fn oracle(&self) -> Oracle {
        Oracle::new(self)
    }
}

pub fn columns_to_array(cols: &[Vec<i64>]) -> Array2<f64> {
    Array2::from_shape_fn((cols[0].len(), cols.len()), |(r, c)| cols[c][r] as f64)
}

/// Random all-discrete fixture with up to `max_n` rows, `max_d` latents,
/// `max_a` attributes and `max_symbols` symbols per column. Latents are
/// drawn as copies, coarsenings or noisy mixes of attributes, or as noise.
pub fn random_discrete(rng: &mut impl Rng, max_n: usize, max_d: usize, max_a: usize, max_symbols: i64) -> DiscreteFixture {
    let n = rng.random_range(4..=max_n);
    let na = rng.random_range(2..=max_a);
    let nd = rng.random_range(na.max(2)..=max_d.max(na));
    let a: Vec<Vec<i64>> = (0..na)
        .map(|i| {
            let s = rng.random_range(1..=max_symbols);
            if i > 0 && rng.random_bool(0.3) {
                (0..n).map(|r| r as i64 % s).collect()
            } else {
                (0..n).map(|_| rng.random_range(0..s)).collect()
            }
        })
        .collect();
    let z: Vec<Vec<i64>> = (0..nd)
        .map(|_| {
            let src = &a[rng.random_range(0..na)];
            match rng.random_range(0..4) {
                0 => src.clone(),
                1 => src.iter().map(|v| v / 2).collect(),
                2 => src.iter().map(|v| v + rng.random_range(0..2)).collect(),
                _ => (0..n).map(|_| rng.random_range(0..max_symbols)).collect(),
            }
        })
        .collect();
    let mut dims: Vec<usize> = (0..nd).collect();
    dims.shuffle(rng);
    let reg = dims[..na].to_vec();
    DiscreteFixture { z, a, reg }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Index of the largest value, treating values within [`TIE`] as equal and
/// preferring the lowest index.
fn argmax(values: &[(usize, f64)]) -> Option<usize> {
    let best = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    values.iter().find(|v| v.1 >= best - TIE).map(|v| v.0)
}

fn top_two(values: &[(usize, f64)]) -> (usize, usize) {
    let j = argmax(values).unwrap();
    let rest: Vec<(usize, f64)> = values.iter().copied().filter(|v| v.0 != j).collect();
    (j, argmax(&rest).unwrap())
}

/// Top-two indices of `row` under the tolerant lowest-index rule.
pub fn top_two_of(row: &[f64]) -> (usize, usize) {
    top_two(&row.iter().copied().enumerate().collect::<Vec<_>>())
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 1e-9).then(|| num / den)
}

/// Reference values for every metric on one discrete fixture.
pub struct Oracle {
    pub mi: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub h_cond: Vec<Vec<f64>>,
    fixture: DiscreteFixture,
}

impl Oracle {
    pub fn new(f: &DiscreteFixture) -> Self {
        let mi = f.a.iter().map(|ai| f.z.iter().map(|zd| mi(ai, zd)).collect()).collect();
        let hs = f.a.iter().map(|ai| h(ai)).collect();
        let hc = f.a.iter().map(|ai| f.a.iter().map(|al| h_cond(ai, al)).collect()).collect();
        Self { mi, h: hs, h_cond: hc, fixture: f.clone() }
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        self.mi[i].iter().copied().enumerate().collect()
    }

    fn col(&self, d: usize) -> Vec<(usize, f64)> {
        self.mi.iter().map(|r| r[d]).enumerate().collect()
    }

    pub fn mig(&self) -> Vec<Option<f64>> {
        (0..self.mi.len())
            .map(|i| {
                let (j, k) = top_two(&self.row(i));
                ratio(self.mi[i][j] - self.mi[i][k], self.h[i])
            })
            .collect()
    }

    pub fn dmig(&self) -> Vec<Option<f64>> {
        let reg = &self.fixture.reg;
        (0..self.mi.len())
            .map(|i| {
                let (j, k) = top_two(&self.row(i));
                let gap = self.mi[i][j] - self.mi[i][k];
                match reg.iter().position(|&d| d == k) {
                    Some(l) if l != i => ratio(gap, self.h_cond[i][l]),
                    _ => ratio(gap, self.h[i]),
                }
            })
            .collect()
    }

    /// `None` when no latent dimension is unregularized.
    pub fn xmig(&self) -> Option<Vec<Option<f64>>> {
        let reg = &self.fixture.reg;
        let blind: Vec<usize> = (0..self.fixture.z.len()).filter(|d| !reg.contains(d)).collect();
        if blind.is_empty() {
            return None;
        }
        Some(
            (0..self.mi.len())
                .map(|i| {
                    let j = argmax(&self.row(i)).unwrap();
                    let cands: Vec<(usize, f64)> =
                        blind.iter().filter(|&&d| d != j).map(|&d| (d, self.mi[i][d])).collect();
                    let k = argmax(&cands)?;
                    ratio(self.mi[i][j] - self.mi[i][k], self.h[i])
                })
                .collect(),
        )
    }

    pub fn dlig(&self) -> Vec<Option<f64>> {
        self.fixture
            .reg
            .iter()
            .map(|&d| {
                let (j, k) = top_two(&self.col(d));
                ratio(self.mi[j][d] - self.mi[k][d], self.h_cond[j][k])
            })
            .collect()
    }

    pub fn modularity(&self) -> Vec<f64> {
        let na = self.mi.len();
        (0..self.fixture.z.len())
            .map(|d| {
                let col = self.col(d);
                let j = argmax(&col).unwrap();
                let top = self.mi[j][d];
                if top < TIE {
                    return 1.0;
                }
                let spread: f64 = col.iter().filter(|v| v.0 != j).map(|v| (v.1 / top).powi(2)).sum();
                (1.0 - spread / (na - 1) as f64).max(0.0)
            })
            .collect()
    }

    pub fn sap(&self) -> Vec<Option<f64>> {
        self.fixture
            .a
            .iter()
            .map(|ai| {
                let scores: Option<Vec<(usize, f64)>> =
                    self.fixture.z.iter().enumerate().map(|(d, zd)| threshold_score(zd, ai).map(|s| (d, s))).collect();
                let scores = scores?;
                let (j, k) = top_two(&scores);
                Some(scores[j].1 - scores[k].1)
            })
            .collect()
    }
}

/// Best balanced accuracy of a single threshold on `z` for predicting each
/// class against the rest, averaged over classes; `None` for one class.
pub fn threshold_score(z: &[i64], labels: &[i64]) -> Option<f64> {
    let mut classes: Vec<i64> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return None;
    }
    let mut cuts: Vec<i64> = z.to_vec();
    cuts.sort_unstable();
    cuts.dedup();
    let per_class: Vec<f64> = classes
        .iter()
        .map(|&c| {
            let pos = labels.iter().filter(|&&l| l == c).count() as f64;
            let neg = labels.len() as f64 - pos;
            let mut best = 0.5f64;
            // Predict "positive" for z > cut; the lowest cut minus one predicts all positive.
            for cut in std::iter::once(cuts[0] - 1).chain(cuts.iter().copied()) {
                let tp = z.iter().zip(labels).filter(|(zv, l)| **zv > cut && **l == c).count() as f64;
                let tn = z.iter().zip(labels).filter(|(zv, l)| **zv <= cut && **l != c).count() as f64;
                let ba = 0.5 * (tp / pos + tn / neg);
                best = best.max(ba).max(1.0 - ba);
            }
            best
        })
        .collect();
    if classes.len() == 2 {
        Some(per_class[0])
    } else {
        Some(per_class.iter().sum::<f64>() / per_class.len() as f64)
    }
}

/// Compares library values against oracle values; `None` means the
/// library must report no value for that target.
pub fn matches(got: &[Option<f64>], want: &[Option<f64>], tol: f64) -> bool {
    got.len() == want.len()
        && got.iter().zip(want).all(|(g, w)| match (g, w) {
            (Some(g), Some(w)) => (g - w).abs() <= tol,
            (None, None) => true,
            _ => false,
        })
}

/// Relabels every value through a random injective map.
pub fn relabel(col: &[i64], rng: &mut impl Rng) -> Vec<i64> {
    let mut mapping: HashMap<i64, i64> = HashMap::new();
    let mut used = std::collections::HashSet::new();
    col.iter()
        .map(|v| {
            *mapping.entry(*v).or_insert_with(|| loop {
                let cand = rng.random_range(-1000..1000);
                if used.insert(cand) {
                    break cand;
                }
            })
        })
        .collect()
}

/// Bivariate standard Gaussian sample with correlation `rho`.
pub fn gaussian_pair(n: usize, rho: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = StandardNormal.sample(&mut r);
        let v: f64 = StandardNormal.sample(&mut r);
        xs.push(u);
        ys.push(rho * u + (1.0 - rho * rho).sqrt() * v);
    }
    (xs, ys)
}

/// Continuous latents and attributes with some shared structure.
pub fn random_continuous(seed: u64, n: usize, nd: usize, na: usize) -> (LatentBatch, AttributeBatch) {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    let a = Array2::from_shape_fn((n, na), |_| StandardNormal.sample(&mut r));
    let z = Array2::from_shape_fn((n, nd), |(row, d)| {
        let noise: f64 = StandardNormal.sample(&mut r);
        if d < na { a[[row, d]] + 0.3 * noise } else { noise }
    });
    (LatentBatch::new(z).unwrap(), AttributeBatch::uniform(a, Kind::Continuous).unwrap())
}
