//! Entropy, conditional entropy and mutual information estimators.
//!
//! All quantities are in nats. Discrete pairs use plug-in estimates over the
//! contingency table; continuous columns use kNN estimators (KSG for
//! continuous–continuous, Ross for mixed pairs, Kozachenko–Leonenko for
//! entropy) with `k = cfg.k_neighbors` and seeded tie-breaking jitter.

mod discrete;
mod jitter;
mod knn;
mod predict;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use predict::predictability_score;

/// Whether a column holds integer-coded categories or real values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Discrete,
    Continuous,
}

/// Latent codes, one row per sample and one column per latent dimension.
///
/// Latents are continuous unless built with [`LatentBatch::with_kind`];
/// discrete latents (integer codes) switch every estimate that involves
/// them to the plug-in estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentBatch {
    values: Array2<f64>,
    kind: Kind,
}

impl LatentBatch {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        Self::with_kind(values, Kind::Continuous)
    }

    pub fn with_kind(values: Array2<f64>, kind: Kind) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Shape(format!(
                "latent batch must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        check_matrix_finite(&values)?;
        if kind == Kind::Discrete {
            for col in values.columns() {
                discrete::codes(&col.to_vec())?;
            }
        }
        Ok(Self { values, kind })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_array(rows)?)
    }

    pub fn discrete_from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::with_kind(rows_to_array(rows)?, Kind::Discrete)
    }

    /// True when every entry is an integer, i.e. the batch could be discrete.
    pub fn is_integer_valued(values: &Array2<f64>) -> bool {
        values.iter().all(|v| v.is_finite() && v.fract() == 0.0)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_dims(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column(&self, d: usize) -> ArrayView1<'_, f64> {
        self.values.column(d)
    }
}

/// Attribute values with a per-column kind.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeBatch {
    values: Array2<f64>,
    kinds: Vec<Kind>,
}

impl AttributeBatch {
    pub fn new(values: Array2<f64>, kinds: Vec<Kind>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Shape(format!(
                "attribute batch must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if kinds.len() != values.ncols() {
            return Err(Error::Shape(format!(
                "{} attribute kinds given for {} attribute columns",
                kinds.len(),
                values.ncols()
            )));
        }
        check_matrix_finite(&values)?;
        for (i, kind) in kinds.iter().enumerate() {
            if *kind == Kind::Discrete {
                discrete::codes(&values.column(i).to_vec())?;
            }
        }
        Ok(Self { values, kinds })
    }

    /// All columns share one kind.
    pub fn uniform(values: Array2<f64>, kind: Kind) -> Result<Self> {
        let n = values.ncols();
        Self::new(values, vec![kind; n])
    }

    pub fn from_rows(rows: &[Vec<f64>], kinds: Vec<Kind>) -> Result<Self> {
        Self::new(rows_to_array(rows)?, kinds)
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_attributes(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn kinds(&self) -> &[Kind] {
        &self.kinds
    }

    pub fn kind(&self, i: usize) -> Kind {
        self.kinds[i]
    }

    pub fn column(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.column(i)
    }
}

/// Assignment of each attribute to the latent dimension that regularizes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularizationMap {
    reg_dim: Vec<usize>,
    n_latents: usize,
}

impl RegularizationMap {
    pub fn new(reg_dim: Vec<usize>, n_latents: usize) -> Result<Self> {
        for (i, &d) in reg_dim.iter().enumerate() {
            if d >= n_latents {
                return Err(Error::Regularization(format!(
                    "attribute {i} mapped to latent {d}, but there are only {n_latents} latent dimensions"
                )));
            }
            if reg_dim[..i].contains(&d) {
                return Err(Error::Regularization(format!(
                    "latent dimension {d} regularizes more than one attribute"
                )));
            }
        }
        Ok(Self { reg_dim, n_latents })
    }

    /// Attribute `i` is regularized by latent dimension `i`.
    pub fn identity(n_attributes: usize, n_latents: usize) -> Result<Self> {
        Self::new((0..n_attributes).collect(), n_latents)
    }

    pub fn reg_dim(&self) -> &[usize] {
        &self.reg_dim
    }

    pub fn n_latents(&self) -> usize {
        self.n_latents
    }

    pub fn n_attributes(&self) -> usize {
        self.reg_dim.len()
    }

    /// Latent dimensions that regularize no attribute, ascending.
    pub fn blind_dims(&self) -> Vec<usize> {
        (0..self.n_latents).filter(|d| !self.reg_dim.contains(d)).collect()
    }

    /// The attribute regularized by latent dimension `d`, if any.
    pub fn attribute_for(&self, d: usize) -> Option<usize> {
        self.reg_dim.iter().position(|&x| x == d)
    }

    pub(crate) fn check_against(&self, n_attributes: usize, n_latents: usize) -> Result<()> {
        if self.reg_dim.len() != n_attributes {
            return Err(Error::Regularization(format!(
                "reg_dim has {} entries but there are {n_attributes} attributes",
                self.reg_dim.len()
            )));
        }
        if self.n_latents != n_latents {
            return Err(Error::Regularization(format!(
                "map built for {} latent dimensions, data has {n_latents}",
                self.n_latents
            )));
        }
        Ok(())
    }
}

/// Estimator settings shared by every metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// `None` draws a fresh seed from the OS on every estimate.
    pub seed: Option<u64>,
    pub k_neighbors: usize,
    /// Tie-breaking noise amplitude relative to the column standard deviation.
    pub jitter_scale: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { seed: Some(42), k_neighbors: 3, jitter_scale: 1e-10 }
    }
}

impl EstimatorConfig {
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_k_neighbors(mut self, k: usize) -> Self {
        self.k_neighbors = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::Config("k_neighbors must be positive".into()));
        }
        if !(self.jitter_scale.is_finite() && self.jitter_scale >= 0.0) {
            return Err(Error::Config("jitter_scale must be a nonnegative finite number".into()));
        }
        Ok(())
    }

    /// A copy with a concrete seed, drawing one if none is set.
    pub fn resolved(&self) -> Self {
        Self { seed: Some(self.seed.unwrap_or_else(rand::random)), ..*self }
    }
}

pub(crate) fn check_finite(xs: &[f64]) -> Result<()> {
    match xs.iter().position(|v| !v.is_finite()) {
        Some(row) => Err(Error::NonFinite { row, col: 0 }),
        None => Ok(()),
    }
}

fn check_matrix_finite(m: &Array2<f64>) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

fn rows_to_array(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Shape(format!(
            "row {bad} has {} values, expected {ncols}",
            rows[bad].len()
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat).map_err(|e| Error::Shape(e.to_string()))
}

enum Column<'a> {
    Discrete(Vec<i64>),
    Continuous(&'a [f64]),
}

fn prepare(xs: &[f64], kind: Kind) -> Result<Column<'_>> {
    match kind {
        Kind::Discrete => Ok(Column::Discrete(discrete::codes(xs)?)),
        Kind::Continuous => {
            check_finite(xs)?;
            Ok(Column::Continuous(xs))
        }
    }
}

fn check_sizes(n: usize, any_continuous: bool, cfg: &EstimatorConfig) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewSamples { required: 2, actual: n });
    }
    cfg.validate()?;
    if any_continuous && cfg.k_neighbors >= n {
        return Err(Error::TooManyNeighbors { k: cfg.k_neighbors, n });
    }
    Ok(())
}

/// Mutual information `I(x; y)` in nats, clamped at 0.
pub fn mutual_info(x: &[f64], x_kind: Kind, y: &[f64], y_kind: Kind, cfg: &EstimatorConfig) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let any_continuous = x_kind == Kind::Continuous || y_kind == Kind::Continuous;
    check_sizes(x.len(), any_continuous, cfg)?;
    let cx = prepare(x, x_kind)?;
    let cy = prepare(y, y_kind)?;
    let seed = cfg.resolved().seed.unwrap_or_default();
    let k = cfg.k_neighbors;
    let mi = match (cx, cy) {
        (Column::Discrete(a), Column::Discrete(b)) => discrete::mutual_info(&a, &b),
        (Column::Continuous(a), Column::Continuous(b)) => {
            let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
            pairs.sort_by(jitter::cmp_pair);
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let xj = jitter::jitter_standardized(&xs, &jitter::ranks(&xs), seed, cfg.jitter_scale);
            let yj = jitter::jitter_standardized(&ys, &jitter::ranks(&ys), seed, cfg.jitter_scale);
            knn::ksg(&xj, &yj, k)
        }
        (Column::Discrete(labels), Column::Continuous(c)) | (Column::Continuous(c), Column::Discrete(labels)) => {
            let mut pairs: Vec<(f64, i64)> = c.iter().copied().zip(labels).collect();
            pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            let (cs, ls): (Vec<f64>, Vec<i64>) = pairs.into_iter().unzip();
            let cj = jitter::jitter(&cs, &jitter::ranks(&cs), seed, cfg.jitter_scale);
            knn::ross(&ls, &cj, k)
        }
    };
    Ok(mi.max(0.0))
}

/// Entropy in nats: plug-in Shannon entropy for discrete columns,
/// Kozachenko–Leonenko differential entropy (possibly negative) otherwise.
pub fn entropy(x: &[f64], x_kind: Kind, cfg: &EstimatorConfig) -> Result<f64> {
    check_sizes(x.len(), x_kind == Kind::Continuous, cfg)?;
    match prepare(x, x_kind)? {
        Column::Discrete(codes) => Ok(discrete::entropy(&codes)),
        Column::Continuous(c) => {
            let mut xs = c.to_vec();
            xs.sort_by(f64::total_cmp);
            let seed = cfg.resolved().seed.unwrap_or_default();
            let xj = jitter::jitter(&xs, &jitter::ranks(&xs), seed, cfg.jitter_scale);
            Ok(knn::kl_entropy(&xj, cfg.k_neighbors))
        }
    }
}

/// Conditional entropy `H(a | b)` in nats.
///
/// Discrete pairs use the plug-in `H(a, b) - H(b)` (never negative); any
/// continuous argument falls back to `H(a) - I(a; b)`.
pub fn conditional_entropy(a: &[f64], a_kind: Kind, b: &[f64], b_kind: Kind, cfg: &EstimatorConfig) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a_kind == Kind::Discrete && b_kind == Kind::Discrete {
        check_sizes(a.len(), false, cfg)?;
        return Ok(discrete::conditional_entropy(&discrete::codes(a)?, &discrete::codes(b)?));
    }
    let cfg = cfg.resolved();
    Ok(entropy(a, a_kind, &cfg)? - mutual_info(a, a_kind, b, b_kind, &cfg)?)
}

/// `A x D` matrix whose entry `(i, d)` is `mutual_info(a_i, z_d)`.
///
/// Entries are computed in parallel, each independently of the others, so
/// the result is bit-identical to the sequential per-pair calls.
pub fn mi_matrix(z: &LatentBatch, a: &AttributeBatch, cfg: &EstimatorConfig) -> Result<Array2<f64>> {
    if z.n_samples() != a.n_samples() {
        return Err(Error::LengthMismatch(z.n_samples(), a.n_samples()));
    }
    let cfg = cfg.resolved();
    let (na, nd) = (a.n_attributes(), z.n_dims());
    let attrs: Vec<Vec<f64>> = (0..na).map(|i| a.column(i).to_vec()).collect();
    let lats: Vec<Vec<f64>> = (0..nd).map(|d| z.column(d).to_vec()).collect();
    let entries = (0..na * nd)
        .into_par_iter()
        .map(|p| {
            let (i, d) = (p / nd, p % nd);
            mutual_info(&attrs[i], a.kind(i), &lats[d], z.kind(), &cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    Array2::from_shape_vec((na, nd), entries).map_err(|e| Error::Shape(e.to_string()))
}
