//! k-nearest-neighbour estimators under the max-coordinate (Chebyshev) metric.
//!
//! * [`ksg`]: Kraskov–Stögbauer–Grassberger mutual information, variant 1.
//! * [`kl_entropy`]: Kozachenko–Leonenko differential entropy of a 1-D sample.
//! * [`ross`]: Ross mutual information between a discrete and a continuous column.
//!
//! All functions expect already-jittered input in canonical order and sum
//! their digamma terms in that order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use statrs::function::gamma::digamma;

/// Largest float strictly below `d` (or 0 for `d == 0`).
fn shrink(d: f64) -> f64 {
    if d > 0.0 {
        f64::from_bits(d.to_bits() - 1)
    } else {
        0.0
    }
}

/// Number of entries of the sorted slice within `radius` of `center` (inclusive).
///
/// Float subtraction is monotone, so both predicates below are monotone over
/// a sorted slice and agree exactly with a brute-force `|v - center| <= radius`.
pub(crate) fn count_within(sorted: &[f64], center: f64, radius: f64) -> usize {
    let lo = sorted.partition_point(|&v| center - v > radius);
    let hi = sorted.partition_point(|&v| v - center <= radius);
    hi.saturating_sub(lo)
}

/// Distance from `sorted[i]` to its k-th nearest other entry.
fn kth_gap_1d(sorted: &[f64], i: usize, k: usize) -> f64 {
    let x = sorted[i];
    let (mut l, mut r) = (i, i + 1);
    let mut d = 0.0;
    for _ in 0..k {
        let dl = if l > 0 { x - sorted[l - 1] } else { f64::INFINITY };
        let dr = if r < sorted.len() { sorted[r] - x } else { f64::INFINITY };
        if dl <= dr {
            d = dl;
            l -= 1;
        } else {
            d = dr;
            r += 1;
        }
    }
    d
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Static 2-D kd-tree answering k-th neighbour distance queries.
pub(crate) struct KdTree2 {
    points: Vec<[f64; 2]>,
    order: Vec<usize>,
}

impl KdTree2 {
    pub(crate) fn new(points: Vec<[f64; 2]>) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        Self::build(&points, &mut order, 0);
        Self { points, order }
    }

    fn build(points: &[[f64; 2]], idx: &mut [usize], depth: usize) {
        if idx.len() <= 1 {
            return;
        }
        let axis = depth % 2;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
        let (left, right) = idx.split_at_mut(mid);
        Self::build(points, left, depth + 1);
        Self::build(points, &mut right[1..], depth + 1);
    }

    /// Chebyshev distance from point `i` to its k-th nearest other point.
    pub(crate) fn kth_distance(&self, i: usize, k: usize) -> f64 {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(&self.order, 0, i, k, &mut heap);
        heap.peek().map_or(f64::INFINITY, |d| d.0)
    }

    fn search(&self, idx: &[usize], depth: usize, query: usize, k: usize, heap: &mut BinaryHeap<Dist>) {
        if idx.is_empty() {
            return;
        }
        let mid = idx.len() / 2;
        let node = idx[mid];
        let q = self.points[query];
        let p = self.points[node];
        if node != query {
            let d = (q[0] - p[0]).abs().max((q[1] - p[1]).abs());
            if heap.len() < k {
                heap.push(Dist(d));
            } else if d < heap.peek().unwrap().0 {
                heap.pop();
                heap.push(Dist(d));
            }
        }
        let axis = depth % 2;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            (&idx[..mid], &idx[mid + 1..])
        } else {
            (&idx[mid + 1..], &idx[..mid])
        };
        self.search(near, depth + 1, query, k, heap);
        if heap.len() < k || diff.abs() <= heap.peek().unwrap().0 {
            self.search(far, depth + 1, query, k, heap);
        }
    }
}

/// KSG (variant 1) estimate of `I(x; y)` in nats, before clamping.
pub(crate) fn ksg(x: &[f64], y: &[f64], k: usize) -> f64 {
    let n = x.len();
    let tree = KdTree2::new(x.iter().zip(y).map(|(&a, &b)| [a, b]).collect());
    let xs = sorted_copy(x);
    let ys = sorted_copy(y);
    let mut acc = 0.0;
    for i in 0..n {
        let r = shrink(tree.kth_distance(i, k));
        let nx = count_within(&xs, x[i], r);
        let ny = count_within(&ys, y[i], r);
        acc += digamma(nx as f64) + digamma(ny as f64);
    }
    digamma(n as f64) + digamma(k as f64) - acc / n as f64
}

/// Kozachenko–Leonenko differential entropy of a 1-D sample, in nats.
///
/// The unit ball of the max-norm in one dimension has volume 2. Returns
/// negative infinity when some k-th neighbour distance is zero.
pub(crate) fn kl_entropy(x: &[f64], k: usize) -> f64 {
    let n = x.len();
    let xs = sorted_copy(x);
    let mean_log = (0..n).map(|i| kth_gap_1d(&xs, i, k).ln()).sum::<f64>() / n as f64;
    digamma(n as f64) - digamma(k as f64) + std::f64::consts::LN_2 + mean_log
}

/// Ross estimate of `I(label; c)` in nats, before clamping.
///
/// Points whose label occurs once are dropped, and `k` is reduced to
/// `count - 1` for small classes.
pub(crate) fn ross(labels: &[i64], c: &[f64], k: usize) -> f64 {
    let mut classes: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (&l, &v) in labels.iter().zip(c) {
        classes.entry(l).or_default().push(v);
    }
    classes.retain(|_, v| v.len() > 1);
    let pooled = sorted_copy(&classes.values().flatten().copied().collect::<Vec<_>>());
    let n = pooled.len();
    if n == 0 {
        return 0.0;
    }

    let (mut sum_k, mut sum_count, mut sum_m) = (0.0, 0.0, 0.0);
    for members in classes.values_mut() {
        members.sort_by(f64::total_cmp);
        let count = members.len();
        let ki = k.min(count - 1);
        let (psi_k, psi_count) = (digamma(ki as f64), digamma(count as f64));
        for i in 0..count {
            let r = shrink(kth_gap_1d(members, i, ki));
            let m = count_within(&pooled, members[i], r);
            sum_k += psi_k;
            sum_count += psi_count;
            sum_m += digamma(m as f64);
        }
    }
    let nf = n as f64;
    digamma(nf) + (sum_k - sum_count - sum_m) / nf
}
