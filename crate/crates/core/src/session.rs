//! Streaming accumulators: buffer batches with `update`, evaluate with `compute`.
//!
//! Sessions keep every row they are given and run the metrics on the
//! concatenation, so any split of a dataset into batches yields the same
//! report as a single call. `compute` does not consume the buffer; more
//! batches may be added afterwards.

use ndarray::{Array2, Array3, ArrayView3};

use crate::disentanglement::{sap, InfoContext};
use crate::error::{Error, Result};
use crate::estimators::{AttributeBatch, EstimatorConfig, Kind, LatentBatch, RegularizationMap};
use crate::interpolatability::{monotonicity, smoothness, InterpolationTrace};
use crate::report::{MetricId, MetricReport, MetricResult, TargetKind, TargetValue};

/// Default cap on buffered scalar entries.
pub const DEFAULT_MAX_ENTRIES: usize = 10_000_000;

/// Step size and noise threshold of interpolation traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub delta: f64,
    pub epsilon: f64,
}

/// A single metric with its settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub metric: MetricId,
    pub reg: Option<RegularizationMap>,
    pub cfg: EstimatorConfig,
    pub trace: Option<TraceParams>,
}

impl MetricSpec {
    pub fn new(metric: MetricId) -> Self {
        Self { metric, reg: None, cfg: EstimatorConfig::default(), trace: None }
    }

    pub fn with_reg(mut self, reg: RegularizationMap) -> Self {
        self.reg = Some(reg);
        self
    }

    pub fn with_cfg(mut self, cfg: EstimatorConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn with_trace(mut self, delta: f64, epsilon: f64) -> Self {
        self.trace = Some(TraceParams { delta, epsilon });
        self
    }
}

/// Several metrics sharing one regularization map and one estimator config.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleSpec {
    pub name: String,
    pub metrics: Vec<MetricId>,
    pub reg: Option<RegularizationMap>,
    pub cfg: EstimatorConfig,
    pub trace: Option<TraceParams>,
}

impl BundleSpec {
    pub const DAMI: [MetricId; 4] = [MetricId::Mig, MetricId::Dmig, MetricId::Xmig, MetricId::Dlig];

    pub fn new(name: impl Into<String>, metrics: Vec<MetricId>, reg: Option<RegularizationMap>, cfg: EstimatorConfig) -> Self {
        Self { name: name.into(), metrics, reg, cfg, trace: None }
    }

    /// The dependency-aware mutual information bundle: MIG, DMIG, XMIG and DLIG.
    pub fn dami(reg: RegularizationMap, cfg: EstimatorConfig) -> Self {
        Self::new("dami", Self::DAMI.to_vec(), Some(reg), cfg)
    }

    /// Looks up a built-in bundle by name.
    pub fn builtin(name: &str, reg: RegularizationMap, cfg: EstimatorConfig) -> Result<Self> {
        match name {
            "dami" => Ok(Self::dami(reg, cfg)),
            other => Err(Error::Config(format!("unknown bundle '{other}'; available bundles: dami"))),
        }
    }

    pub fn with_trace(mut self, delta: f64, epsilon: f64) -> Self {
        self.trace = Some(TraceParams { delta, epsilon });
        self
    }
}

impl From<MetricSpec> for BundleSpec {
    fn from(spec: MetricSpec) -> Self {
        Self { name: spec.metric.name().to_owned(), metrics: vec![spec.metric], reg: spec.reg, cfg: spec.cfg, trace: spec.trace }
    }
}

#[derive(Debug, Clone)]
enum Buffer {
    Empty,
    Pairs {
        latents: Vec<f64>,
        attributes: Vec<f64>,
        n_dims: usize,
        latent_kind: Kind,
        kinds: Vec<Kind>,
        rows: usize,
    },
    Traces {
        data: Vec<f64>,
        attributes: usize,
        points: usize,
        samples: usize,
    },
}

/// Buffered state of one metric or bundle. Single writer.
#[derive(Debug, Clone)]
pub struct Session {
    spec: BundleSpec,
    buffer: Buffer,
    max_entries: usize,
}

impl Session {
    /// Validates the metric settings and returns an empty session.
    pub fn create(spec: impl Into<BundleSpec>) -> Result<Self> {
        let spec = spec.into();
        if spec.metrics.is_empty() {
            return Err(Error::Config("a session needs at least one metric".into()));
        }
        spec.cfg.validate()?;
        let interp = spec.metrics.iter().filter(|m| m.is_interpolation()).count();
        if interp != 0 && interp != spec.metrics.len() {
            return Err(Error::Config(
                "interpolatability and disentanglement metrics cannot share a session".into(),
            ));
        }
        for m in &spec.metrics {
            if m.needs_reg() && spec.reg.is_none() {
                return Err(Error::Config(format!("{m} requires a regularization map")));
            }
            if m.is_interpolation() {
                match spec.trace {
                    None => return Err(Error::Config(format!("{m} requires delta and epsilon"))),
                    Some(t) => {
                        if !(t.delta.is_finite() && t.delta > 0.0) {
                            return Err(Error::Config(format!("delta must be positive, got {}", t.delta)));
                        }
                        if !(t.epsilon.is_finite() && t.epsilon >= 0.0) {
                            return Err(Error::Config(format!("epsilon must be nonnegative, got {}", t.epsilon)));
                        }
                    }
                }
            }
        }
        if spec.metrics.contains(&MetricId::Xmig) {
            if let Some(reg) = &spec.reg {
                if reg.blind_dims().is_empty() {
                    return Err(Error::Undefined(
                        "xmig needs at least one latent dimension that regularizes no attribute".into(),
                    ));
                }
            }
        }
        Ok(Self { spec, buffer: Buffer::Empty, max_entries: DEFAULT_MAX_ENTRIES })
    }

    /// Overrides the cap on buffered scalar entries.
    pub fn with_max_entries(mut self, max_entries: usize) -> Self {
        self.max_entries = max_entries;
        self
    }

    pub fn spec(&self) -> &BundleSpec {
        &self.spec
    }

    /// Buffered rows (samples for trace sessions).
    pub fn row_count(&self) -> usize {
        match &self.buffer {
            Buffer::Empty => 0,
            Buffer::Pairs { rows, .. } => *rows,
            Buffer::Traces { samples, .. } => *samples,
        }
    }

    fn buffered_entries(&self) -> usize {
        match &self.buffer {
            Buffer::Empty => 0,
            Buffer::Pairs { latents, attributes, .. } => latents.len() + attributes.len(),
            Buffer::Traces { data, .. } => data.len(),
        }
    }

    fn reserve(&self, extra: usize) -> Result<()> {
        let requested = self.buffered_entries() + extra;
        if requested > self.max_entries {
            return Err(Error::BufferOverflow { requested, limit: self.max_entries });
        }
        Ok(())
    }

    /// Appends a batch of latent codes and attribute values.
    pub fn update(&mut self, z: &LatentBatch, a: &AttributeBatch) -> Result<()> {
        if self.spec.metrics[0].is_interpolation() {
            return Err(Error::Config("this session expects interpolation traces".into()));
        }
        if z.n_samples() != a.n_samples() {
            return Err(Error::LengthMismatch(z.n_samples(), a.n_samples()));
        }
        if let Some(reg) = &self.spec.reg {
            reg.check_against(a.n_attributes(), z.n_dims())?;
        }
        if let Buffer::Pairs { n_dims, latent_kind, kinds, .. } = &self.buffer {
            if *n_dims != z.n_dims() {
                return Err(Error::Shape(format!("batch has {} latent dimensions, expected {n_dims}", z.n_dims())));
            }
            if *latent_kind != z.kind() {
                return Err(Error::Shape("latent kind differs from earlier batches".into()));
            }
            if kinds.as_slice() != a.kinds() {
                return Err(Error::Shape(format!(
                    "attribute kinds {:?} differ from earlier batches {kinds:?}",
                    a.kinds()
                )));
            }
        }
        self.reserve(z.values().len() + a.values().len())?;
        if let Buffer::Empty = self.buffer {
            self.buffer = Buffer::Pairs {
                latents: Vec::new(),
                attributes: Vec::new(),
                n_dims: z.n_dims(),
                latent_kind: z.kind(),
                kinds: a.kinds().to_vec(),
                rows: 0,
            };
        }
        if let Buffer::Pairs { latents, attributes, rows, .. } = &mut self.buffer {
            latents.extend(z.values().iter());
            attributes.extend(a.values().iter());
            *rows += z.n_samples();
        }
        Ok(())
    }

    /// Appends a slab of trace measurements shaped `(samples, attributes, points)`.
    pub fn update_trace(&mut self, slab: ArrayView3<'_, f64>) -> Result<()> {
        if !self.spec.metrics[0].is_interpolation() {
            return Err(Error::Config("this session expects latent/attribute batches".into()));
        }
        let (s, a, k) = slab.dim();
        if s == 0 || a == 0 || k == 0 {
            return Err(Error::Shape(format!("trace slab must be non-empty, got {s}x{a}x{k}")));
        }
        for ((row, attr, _), v) in slab.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col: attr });
            }
        }
        if let Buffer::Traces { attributes, points, .. } = &self.buffer {
            if (*attributes, *points) != (a, k) {
                return Err(Error::Shape(format!(
                    "slab has {a} attributes x {k} points, expected {attributes} x {points}"
                )));
            }
        }
        self.reserve(slab.len())?;
        if let Buffer::Empty = self.buffer {
            self.buffer = Buffer::Traces { data: Vec::new(), attributes: a, points: k, samples: 0 };
        }
        if let Buffer::Traces { data, samples, .. } = &mut self.buffer {
            data.extend(slab.iter());
            *samples += s;
        }
        Ok(())
    }

    /// Evaluates every member metric on all buffered data, in member order.
    pub fn compute(&self) -> Result<MetricReport> {
        match &self.buffer {
            Buffer::Empty => Err(Error::TooFewSamples { required: 1, actual: 0 }),
            Buffer::Pairs { latents, attributes, n_dims, latent_kind, kinds, rows } => {
                let z = LatentBatch::with_kind(to_matrix(latents, *rows, *n_dims)?, *latent_kind)?;
                let a = AttributeBatch::new(to_matrix(attributes, *rows, kinds.len())?, kinds.clone())?;
                self.compute_pairs(&z, &a)
            }
            Buffer::Traces { data, attributes, points, samples } => {
                let t = self.spec.trace.expect("validated at create");
                let m = Array3::from_shape_vec((*samples, *attributes, *points), data.clone())
                    .map_err(|e| Error::Shape(e.to_string()))?;
                self.compute_traces(&InterpolationTrace::new(m, t.delta, t.epsilon)?)
            }
        }
    }

    fn compute_pairs(&self, z: &LatentBatch, a: &AttributeBatch) -> Result<MetricReport> {
        let needs_info = self.spec.metrics.iter().any(|&m| m != MetricId::Sap);
        let ctx = if needs_info { Some(InfoContext::new(z, a, &self.spec.cfg)?) } else { None };
        let reg = self.spec.reg.as_ref();
        let mut results = Vec::with_capacity(self.spec.metrics.len());
        for &m in &self.spec.metrics {
            let r = match m {
                MetricId::Sap => sap(z, a, &self.spec.cfg)?,
                MetricId::Mig => ctx.as_ref().unwrap().mig()?,
                MetricId::Modularity => ctx.as_ref().unwrap().modularity()?,
                MetricId::Dmig => ctx.as_ref().unwrap().dmig(reg.unwrap())?,
                MetricId::Xmig => ctx.as_ref().unwrap().xmig(reg.unwrap())?,
                MetricId::Dlig => ctx.as_ref().unwrap().dlig(reg.unwrap())?,
                MetricId::Smoothness | MetricId::Monotonicity => unreachable!("rejected at create"),
            };
            results.push(r);
        }
        Ok(MetricReport { results })
    }

    fn compute_traces(&self, trace: &InterpolationTrace) -> Result<MetricReport> {
        let mut results = Vec::with_capacity(self.spec.metrics.len());
        for &m in &self.spec.metrics {
            let grid = match m {
                MetricId::Smoothness => smoothness(trace)?.mapv(TargetValue::Value),
                MetricId::Monotonicity => monotonicity(trace)?.mapv(|v| v.map_or(TargetValue::Undefined, TargetValue::Value)),
                _ => unreachable!("rejected at create"),
            };
            results.push(grid_result(m, grid));
        }
        Ok(MetricReport { results })
    }
}

fn to_matrix(flat: &[f64], rows: usize, cols: usize) -> Result<Array2<f64>> {
    Array2::from_shape_vec((rows, cols), flat.to_vec()).map_err(|e| Error::Shape(e.to_string()))
}

/// Wraps an `(S, A)` grid of values as a row-major metric result.
pub fn grid_result(metric: MetricId, grid: Array2<TargetValue>) -> MetricResult {
    let (s, a) = grid.dim();
    let values: Vec<TargetValue> = grid.into_iter().collect();
    let mut r = MetricResult::new(metric, TargetKind::SampleAttribute, (0..s * a).collect(), values);
    r.shape = vec![s, a];
    r
}
