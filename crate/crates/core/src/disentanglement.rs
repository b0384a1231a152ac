//! Gap-based disentanglement metrics: MIG, SAP, Modularity, DMIG, XMIG, DLIG.
//!
//! Every argmax breaks ties toward the lowest index, counting values within
//! [`TIE_TOLERANCE`] of each other as tied. Normalizers (entropies
//! and conditional entropies) at or below [`DENOMINATOR_FLOOR`] produce an
//! error entry for that target instead of an unbounded value.

use std::cell::RefCell;
use std::collections::HashMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::estimators::{
    conditional_entropy, entropy, mi_matrix, predictability_score, AttributeBatch, EstimatorConfig,
    LatentBatch, RegularizationMap,
};
use crate::report::{MetricId, MetricResult, TargetKind, TargetValue};

/// Smallest usable normalizer, in nats.
pub const DENOMINATOR_FLOOR: f64 = 1e-9;

pub type DisentanglementResult = MetricResult;

/// Values this close are ties. Estimates of mathematically equal
/// quantities can differ in the last few bits.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Lowest-index candidate within [`TIE_TOLERANCE`] of the maximum.
fn argmax(values: &impl Fn(usize) -> f64, candidates: &[usize]) -> Option<usize> {
    let best = candidates.iter().map(|&c| values(c)).fold(f64::NEG_INFINITY, f64::max);
    candidates.iter().copied().find(|&c| values(c) >= best - TIE_TOLERANCE)
}

/// Indices of the largest and second-largest values among `candidates`.
fn top_two(values: impl Fn(usize) -> f64, candidates: impl IntoIterator<Item = usize>) -> (Option<usize>, Option<usize>) {
    let mut pool: Vec<usize> = candidates.into_iter().collect();
    pool.sort_unstable();
    let first = argmax(&values, &pool);
    pool.retain(|&c| Some(c) != first);
    (first, argmax(&values, &pool))
}

fn normalized(numerator: f64, denominator: Result<f64>, what: impl FnOnce() -> String) -> TargetValue {
    match denominator {
        Err(e) => TargetValue::Error(format!("{}: {e}", what())),
        Ok(h) if h.is_nan() || h <= DENOMINATOR_FLOOR => {
            TargetValue::Error(format!("{} is {h:e} nats, at or below the {DENOMINATOR_FLOOR:e} floor", what()))
        }
        Ok(h) => TargetValue::Value(numerator / h),
    }
}

fn check_pair(z: &LatentBatch, a: &AttributeBatch) -> Result<()> {
    if z.n_samples() != a.n_samples() {
        return Err(Error::LengthMismatch(z.n_samples(), a.n_samples()));
    }
    Ok(())
}

fn need_latents(z: &LatentBatch, min: usize, metric: MetricId) -> Result<()> {
    if z.n_dims() < min {
        return Err(Error::Shape(format!("{metric} needs at least {min} latent dimensions, got {}", z.n_dims())));
    }
    Ok(())
}

fn need_attributes(a: &AttributeBatch, min: usize, metric: MetricId) -> Result<()> {
    if a.n_attributes() < min {
        return Err(Error::Shape(format!("{metric} needs at least {min} attributes, got {}", a.n_attributes())));
    }
    Ok(())
}

/// Shared mutual-information matrix and entropy terms for one dataset.
///
/// Building the context once and evaluating several metrics on it gives the
/// same values as calling the standalone metric functions separately.
pub struct InfoContext<'a> {
    z: &'a LatentBatch,
    a: &'a AttributeBatch,
    cfg: EstimatorConfig,
    mi: Array2<f64>,
    entropies: Vec<std::result::Result<f64, String>>,
    conditional: RefCell<HashMap<(usize, usize), std::result::Result<f64, String>>>,
}

impl<'a> InfoContext<'a> {
    pub fn new(z: &'a LatentBatch, a: &'a AttributeBatch, cfg: &EstimatorConfig) -> Result<Self> {
        check_pair(z, a)?;
        let cfg = cfg.resolved();
        let mi = mi_matrix(z, a, &cfg)?;
        let entropies = (0..a.n_attributes())
            .map(|i| entropy(&a.column(i).to_vec(), a.kind(i), &cfg).map_err(|e| e.to_string()))
            .collect();
        Ok(Self { z, a, cfg, mi, entropies, conditional: RefCell::default() })
    }

    /// The `A x D` mutual information matrix in nats.
    pub fn mi(&self) -> &Array2<f64> {
        &self.mi
    }

    fn entropy_of(&self, i: usize) -> Result<f64> {
        self.entropies[i].clone().map_err(Error::Degenerate)
    }

    fn conditional_entropy_of(&self, i: usize, given: usize) -> Result<f64> {
        let mut cache = self.conditional.borrow_mut();
        let entry = cache.entry((i, given)).or_insert_with(|| {
            let (ai, al) = (self.a.column(i).to_vec(), self.a.column(given).to_vec());
            conditional_entropy(&ai, self.a.kind(i), &al, self.a.kind(given), &self.cfg).map_err(|e| e.to_string())
        });
        entry.clone().map_err(Error::Degenerate)
    }

    fn n_attr(&self) -> usize {
        self.a.n_attributes()
    }

    fn n_dims(&self) -> usize {
        self.z.n_dims()
    }

    /// Top-two latent dimensions of attribute `i` by mutual information.
    fn latent_top_two(&self, i: usize) -> (usize, usize) {
        let (j, k) = top_two(|d| self.mi[[i, d]], 0..self.n_dims());
        (j.unwrap(), k.unwrap())
    }

    fn per_attribute(&self, metric: MetricId, values: Vec<TargetValue>) -> MetricResult {
        MetricResult::new(metric, TargetKind::Attribute, (0..self.n_attr()).collect(), values)
    }

    pub fn mig(&self) -> Result<MetricResult> {
        need_latents(self.z, 2, MetricId::Mig)?;
        let values = (0..self.n_attr())
            .map(|i| {
                let (j, k) = self.latent_top_two(i);
                let gap = (self.mi[[i, j]] - self.mi[[i, k]]).max(0.0);
                normalized(gap, self.entropy_of(i), || format!("entropy of attribute {i}"))
            })
            .collect();
        Ok(self.per_attribute(MetricId::Mig, values))
    }

    pub fn modularity(&self) -> Result<MetricResult> {
        need_attributes(self.a, 2, MetricId::Modularity)?;
        let na = self.n_attr();
        let mut warnings = Vec::new();
        let values = (0..self.n_dims())
            .map(|d| {
                let (j, _) = top_two(|i| self.mi[[i, d]], 0..na);
                let j = j.unwrap();
                let top = self.mi[[j, d]];
                if top == 0.0 {
                    warnings.push(format!("latent {d} carries no information about any attribute; modularity set to 1"));
                    return TargetValue::Value(1.0);
                }
                let spread: f64 = (0..na).filter(|&i| i != j).map(|i| (self.mi[[i, d]] / top).powi(2)).sum();
                TargetValue::Value((1.0 - spread / (na - 1) as f64).max(0.0))
            })
            .collect();
        let mut result = MetricResult::new(MetricId::Modularity, TargetKind::Latent, (0..self.n_dims()).collect(), values);
        result.warnings = warnings;
        Ok(result)
    }

    pub fn dmig(&self, reg: &RegularizationMap) -> Result<MetricResult> {
        need_latents(self.z, 2, MetricId::Dmig)?;
        reg.check_against(self.n_attr(), self.n_dims())?;
        let values = (0..self.n_attr())
            .map(|i| {
                let (j, k) = self.latent_top_two(i);
                let gap = (self.mi[[i, j]] - self.mi[[i, k]]).max(0.0);
                match reg.attribute_for(k) {
                    Some(l) if l != i => normalized(gap, self.conditional_entropy_of(i, l), || {
                        format!("conditional entropy of attribute {i} given attribute {l}")
                    }),
                    _ => normalized(gap, self.entropy_of(i), || format!("entropy of attribute {i}")),
                }
            })
            .collect();
        Ok(self.per_attribute(MetricId::Dmig, values))
    }

    pub fn xmig(&self, reg: &RegularizationMap) -> Result<MetricResult> {
        reg.check_against(self.n_attr(), self.n_dims())?;
        let blind = reg.blind_dims();
        if blind.is_empty() {
            return Err(Error::Undefined("xmig needs at least one latent dimension that regularizes no attribute".into()));
        }
        let values = (0..self.n_attr())
            .map(|i| {
                let (j, _) = top_two(|d| self.mi[[i, d]], 0..self.n_dims());
                let j = j.unwrap();
                let (k, _) = top_two(|d| self.mi[[i, d]], blind.iter().copied().filter(|&d| d != j));
                match k {
                    None => TargetValue::Error(format!(
                        "attribute {i}: the only unregularized dimension is its most informative one"
                    )),
                    Some(k) => {
                        let gap = (self.mi[[i, j]] - self.mi[[i, k]]).max(0.0);
                        normalized(gap, self.entropy_of(i), || format!("entropy of attribute {i}"))
                    }
                }
            })
            .collect();
        Ok(self.per_attribute(MetricId::Xmig, values))
    }

    /// One value per regularized latent dimension, in `reg_dim` order.
    pub fn dlig(&self, reg: &RegularizationMap) -> Result<MetricResult> {
        need_attributes(self.a, 2, MetricId::Dlig)?;
        reg.check_against(self.n_attr(), self.n_dims())?;
        let values = reg
            .reg_dim()
            .iter()
            .map(|&d| {
                let (j, k) = top_two(|i| self.mi[[i, d]], 0..self.n_attr());
                let (j, k) = (j.unwrap(), k.unwrap());
                let gap = (self.mi[[j, d]] - self.mi[[k, d]]).max(0.0);
                normalized(gap, self.conditional_entropy_of(j, k), || {
                    format!("latent {d}: conditional entropy of attribute {j} given attribute {k}")
                })
            })
            .collect();
        Ok(MetricResult::new(MetricId::Dlig, TargetKind::Latent, reg.reg_dim().to_vec(), values))
    }
}

/// Mutual Information Gap, one value per attribute.
pub fn mig(z: &LatentBatch, a: &AttributeBatch, cfg: &EstimatorConfig) -> Result<DisentanglementResult> {
    need_latents(z, 2, MetricId::Mig)?;
    InfoContext::new(z, a, cfg)?.mig()
}

/// Modularity, one value per latent dimension.
pub fn modularity(z: &LatentBatch, a: &AttributeBatch, cfg: &EstimatorConfig) -> Result<DisentanglementResult> {
    need_attributes(a, 2, MetricId::Modularity)?;
    InfoContext::new(z, a, cfg)?.modularity()
}

/// Dependency-aware MIG, one value per attribute.
pub fn dmig(z: &LatentBatch, a: &AttributeBatch, reg: &RegularizationMap, cfg: &EstimatorConfig) -> Result<DisentanglementResult> {
    need_latents(z, 2, MetricId::Dmig)?;
    reg.check_against(a.n_attributes(), z.n_dims())?;
    InfoContext::new(z, a, cfg)?.dmig(reg)
}

/// Dependency-blind MIG, one value per attribute.
pub fn xmig(z: &LatentBatch, a: &AttributeBatch, reg: &RegularizationMap, cfg: &EstimatorConfig) -> Result<DisentanglementResult> {
    reg.check_against(a.n_attributes(), z.n_dims())?;
    if reg.blind_dims().is_empty() {
        return Err(Error::Undefined("xmig needs at least one latent dimension that regularizes no attribute".into()));
    }
    InfoContext::new(z, a, cfg)?.xmig(reg)
}

/// Dependency-aware Latent Information Gap, one value per regularized dimension.
pub fn dlig(z: &LatentBatch, a: &AttributeBatch, reg: &RegularizationMap, cfg: &EstimatorConfig) -> Result<DisentanglementResult> {
    need_attributes(a, 2, MetricId::Dlig)?;
    reg.check_against(a.n_attributes(), z.n_dims())?;
    InfoContext::new(z, a, cfg)?.dlig(reg)
}

/// Separate Attribute Predictability, one value per attribute.
pub fn sap(z: &LatentBatch, a: &AttributeBatch, _cfg: &EstimatorConfig) -> Result<DisentanglementResult> {
    check_pair(z, a)?;
    need_latents(z, 2, MetricId::Sap)?;
    if z.n_samples() < 4 {
        return Err(Error::TooFewSamples { required: 4, actual: z.n_samples() });
    }
    let lats: Vec<Vec<f64>> = (0..z.n_dims()).map(|d| z.column(d).to_vec()).collect();
    let values = (0..a.n_attributes())
        .map(|i| {
            let ai = a.column(i).to_vec();
            let scores: Result<Vec<f64>> = lats.iter().map(|zd| predictability_score(zd, &ai, a.kind(i))).collect();
            match scores {
                Err(e) => TargetValue::Error(format!("attribute {i}: {e}")),
                Ok(s) => {
                    let (j, k) = top_two(|d| s[d], 0..s.len());
                    TargetValue::Value((s[j.unwrap()] - s[k.unwrap()]).max(0.0))
                }
            }
        })
        .collect();
    Ok(MetricResult::new(MetricId::Sap, TargetKind::Attribute, (0..a.n_attributes()).collect(), values))
}
