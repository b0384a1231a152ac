//! Interpolatability metrics computed from attribute measurements taken on
//! equally spaced latent grids.
//!
//! Entry `(s, i, k)` of a trace is attribute `i` measured on the sample
//! generated from `z_s + k·delta·e_d`, where `d` is the latent dimension
//! regularizing attribute `i`. Producing those measurements is up to the
//! caller.

use ndarray::{Array2, Array3, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Relative spread of first differences treated as rounding noise.
const FLATNESS_ULPS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationTrace {
    measurements: Array3<f64>,
    delta: f64,
    epsilon: f64,
}

impl InterpolationTrace {
    /// `measurements` has shape `(samples, attributes, grid points)`.
    pub fn new(measurements: Array3<f64>, delta: f64, epsilon: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::Config(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        let (s, a, k) = measurements.dim();
        if s == 0 || a == 0 || k == 0 {
            return Err(Error::Shape(format!("trace must be non-empty, got {s}x{a}x{k}")));
        }
        for ((row, attr, _), v) in measurements.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col: attr });
            }
        }
        Ok(Self { measurements, delta, epsilon })
    }

    /// Builds a trace from a row-major `(samples * attributes) x points` buffer.
    pub fn from_flat(data: Vec<f64>, samples: usize, attributes: usize, points: usize, delta: f64, epsilon: f64) -> Result<Self> {
        let m = Array3::from_shape_vec((samples, attributes, points), data).map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(m, delta, epsilon)
    }

    pub fn measurements(&self) -> &Array3<f64> {
        &self.measurements
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_samples(&self) -> usize {
        self.measurements.dim().0
    }

    pub fn n_attributes(&self) -> usize {
        self.measurements.dim().1
    }

    pub fn n_points(&self) -> usize {
        self.measurements.dim().2
    }

    fn per_sequence<T>(&self, f: impl Fn(ArrayView1<'_, f64>) -> T) -> Array2<T> {
        let (s, a, _) = self.measurements.dim();
        Array2::from_shape_fn((s, a), |(si, ai)| f(self.measurements.index_axis(Axis(0), si).row(ai)))
    }
}

/// Forward differences of `xs` divided by `delta`, applied `order` times.
pub fn liad_sequence(xs: &[f64], delta: f64, order: usize) -> Vec<f64> {
    let mut cur = xs.to_vec();
    for _ in 0..order {
        cur = cur.windows(2).map(|w| (w[1] - w[0]) / delta).collect();
    }
    cur
}

/// Latent-induced attribute differences of order 1 or 2, shape `(S, A, K - order)`.
pub fn liad(trace: &InterpolationTrace, order: usize) -> Result<Array3<f64>> {
    if !(order == 1 || order == 2) {
        return Err(Error::Config(format!("LIAD order must be 1 or 2, got {order}")));
    }
    let (s, a, k) = trace.measurements.dim();
    if k <= order {
        return Err(Error::Shape(format!("order-{order} LIAD needs more than {order} grid points, got {k}")));
    }
    let mut out = Array3::zeros((s, a, k - order));
    for si in 0..s {
        for ai in 0..a {
            let seq = trace.measurements.index_axis(Axis(0), si).row(ai).to_vec();
            for (kk, v) in liad_sequence(&seq, trace.delta, order).into_iter().enumerate() {
                out[[si, ai, kk]] = v;
            }
        }
    }
    Ok(out)
}

/// `Σx² / Σx` for nonnegative inputs; 0 when the sum is 0. Sums run in
/// ascending order, so the result does not depend on input order.
pub fn contraharmonic_mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Shape("contraharmonic mean of an empty sequence".into()));
    }
    if let Some(bad) = xs.iter().find(|&&x| x.is_nan() || x < 0.0) {
        return Err(Error::Config(format!("contraharmonic mean needs nonnegative inputs, got {bad}")));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sum: f64 = sorted.iter().sum();
    if sum == 0.0 {
        return Ok(0.0);
    }
    Ok(sorted.iter().map(|x| x * x).sum::<f64>() / sum)
}

fn range(xs: &[f64]) -> f64 {
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// Smoothness of one measurement sequence, in `[0, 1]`.
///
/// The contraharmonic mean runs over all `K - 2` absolute second-order
/// LIADs, the range over all `K - 1` first-order LIADs. A response whose
/// first differences agree up to rounding of the measurements (flat or
/// affine) scores 1.
pub fn smoothness_sequence(xs: &[f64], delta: f64) -> f64 {
    let d1 = liad_sequence(xs, delta, 1);
    let d2: Vec<f64> = liad_sequence(&d1, delta, 1).iter().map(|v| v.abs()).collect();
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let spread = range(&d1);
    if spread * delta <= FLATNESS_ULPS * f64::EPSILON * scale {
        return 1.0;
    }
    let chm = contraharmonic_mean(&d2).expect("absolute values are nonnegative");
    (1.0 - chm / (spread / delta)).clamp(0.0, 1.0)
}

/// Monotonicity of one measurement sequence, `None` when no first-order
/// LIAD exceeds `epsilon` in magnitude.
pub fn monotonicity_sequence(xs: &[f64], delta: f64, epsilon: f64) -> Option<f64> {
    let (mut signed, mut counted) = (0i64, 0i64);
    for d in liad_sequence(xs, delta, 1) {
        if d.abs() > epsilon {
            counted += 1;
            signed += if d > 0.0 { 1 } else { -1 };
        }
    }
    (counted > 0).then(|| signed as f64 / counted as f64)
}

/// Per `(sample, attribute)` smoothness; needs at least 4 grid points.
pub fn smoothness(trace: &InterpolationTrace) -> Result<Array2<f64>> {
    if trace.n_points() < 4 {
        return Err(Error::Shape(format!("smoothness needs at least 4 grid points, got {}", trace.n_points())));
    }
    Ok(trace.per_sequence(|row| smoothness_sequence(&row.to_vec(), trace.delta)))
}

/// Per `(sample, attribute)` monotonicity; needs at least 2 grid points.
pub fn monotonicity(trace: &InterpolationTrace) -> Result<Array2<Option<f64>>> {
    if trace.n_points() < 2 {
        return Err(Error::Shape(format!("monotonicity needs at least 2 grid points, got {}", trace.n_points())));
    }
    Ok(trace.per_sequence(|row| monotonicity_sequence(&row.to_vec(), trace.delta, trace.epsilon)))
}
