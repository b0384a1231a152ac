//! Metric identifiers and result containers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricId {
    Mig,
    Sap,
    Modularity,
    Dmig,
    Xmig,
    Dlig,
    Smoothness,
    Monotonicity,
}

impl MetricId {
    pub const ALL: [MetricId; 8] = [
        MetricId::Mig,
        MetricId::Sap,
        MetricId::Modularity,
        MetricId::Dmig,
        MetricId::Xmig,
        MetricId::Dlig,
        MetricId::Smoothness,
        MetricId::Monotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricId::Mig => "mig",
            MetricId::Sap => "sap",
            MetricId::Modularity => "modularity",
            MetricId::Dmig => "dmig",
            MetricId::Xmig => "xmig",
            MetricId::Dlig => "dlig",
            MetricId::Smoothness => "smoothness",
            MetricId::Monotonicity => "monotonicity",
        }
    }

    /// Metrics that need a regularization map.
    pub fn needs_reg(self) -> bool {
        matches!(self, MetricId::Dmig | MetricId::Xmig | MetricId::Dlig)
    }

    /// Metrics computed from interpolation traces rather than latent/attribute pairs.
    pub fn is_interpolation(self) -> bool {
        matches!(self, MetricId::Smoothness | MetricId::Monotonicity)
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown metric '{s}'; valid metrics are: {}", Self::valid_names())))
    }
}

/// What a metric's per-target entries are indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Attribute,
    Latent,
    /// Row-major `(sample, attribute)` grid.
    SampleAttribute,
}

/// One per-target entry.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetValue {
    Value(f64),
    /// Defined as "no value", e.g. monotonicity of a flat trace.
    Undefined,
    /// Normalization or input was degenerate for this target.
    Error(String),
}

impl TargetValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            TargetValue::Value(v) => Some(*v),
            _ => None,
        }
    }
}

/// Per-target values of one metric plus their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub metric: MetricId,
    pub target_kind: TargetKind,
    /// Attribute or latent index of each target; flat index for grids.
    pub target_ids: Vec<usize>,
    pub shape: Vec<usize>,
    pub values: Vec<TargetValue>,
    pub warnings: Vec<String>,
    /// Arithmetic mean of the defined values, `None` if there are none.
    pub aggregate: Option<f64>,
}

impl MetricResult {
    pub(crate) fn new(metric: MetricId, target_kind: TargetKind, target_ids: Vec<usize>, values: Vec<TargetValue>) -> Self {
        let shape = vec![values.len()];
        let aggregate = mean_defined(&values);
        Self { metric, target_kind, target_ids, shape, values, warnings: Vec::new(), aggregate }
    }

    /// Value of the target with the given attribute/latent index.
    pub fn get(&self, target: usize) -> Option<&TargetValue> {
        self.target_ids.iter().position(|&t| t == target).map(|p| &self.values[p])
    }

    pub fn defined_values(&self) -> Vec<f64> {
        self.values.iter().filter_map(TargetValue::value).collect()
    }
}

pub(crate) fn mean_defined(values: &[TargetValue]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().filter_map(TargetValue::value).collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Results of several metrics, in member order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    pub results: Vec<MetricResult>,
}

impl MetricReport {
    pub fn get(&self, metric: MetricId) -> Option<&MetricResult> {
        self.results.iter().find(|r| r.metric == metric)
    }

    pub fn metrics(&self) -> Vec<MetricId> {
        self.results.iter().map(|r| r.metric).collect()
    }
}
