//! JSON report documents.
//!
//! Every number is written with 17 significant digits (`%.17g` style), which
//! is enough to read back the exact same `f64`.

use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::estimators::Kind;
use crate::report::{MetricId, MetricReport, MetricResult, TargetKind, TargetValue};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a finite float like C's `%.17g`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s.to_owned()
        }
    };
    if (-5..17).contains(&exp) {
        trim(&format!("{x:.*}", (16 - exp) as usize))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn raw<S: Serializer>(x: f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return Err(S::Error::custom(format!("cannot serialize non-finite number {x}")));
    }
    RawValue::from_string(format_g17(x)).map_err(S::Error::custom)?.serialize(s)
}

mod g17 {
    use super::*;

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
            match x {
                Some(v) => raw(*v, s),
                None => s.serialize_none(),
            }
        }
    }

    pub mod option_vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Option<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
            struct Item(Option<f64>);
            impl Serialize for Item {
                fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                    option::serialize(&self.0, s)
                }
            }
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for &x in xs {
                seq.serialize_element(&Item(x))?;
            }
            seq.end()
        }
    }
}

/// Settings the report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: Option<u64>,
    pub k_neighbors: Option<usize>,
    pub reg_dim: Option<Vec<usize>>,
    #[serde(serialize_with = "g17::option::serialize")]
    pub delta: Option<f64>,
    #[serde(serialize_with = "g17::option::serialize")]
    pub epsilon: Option<f64>,
    pub metrics: Vec<MetricId>,
    pub bundle: Option<String>,
    pub latent_kind: Option<Kind>,
    pub attribute_kinds: Option<Vec<Kind>>,
}

/// One metric's values. `values[t]` is null for undefined or failed targets;
/// `errors[t]` carries the reason for failed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub id: MetricId,
    pub target_kind: TargetKind,
    pub target_ids: Vec<usize>,
    pub shape: Vec<usize>,
    #[serde(serialize_with = "g17::option_vec::serialize")]
    pub values: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
    pub warnings: Vec<String>,
    #[serde(serialize_with = "g17::option::serialize")]
    pub aggregate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub metrics: Vec<MetricEntry>,
}

impl From<&MetricResult> for MetricEntry {
    fn from(r: &MetricResult) -> Self {
        let (values, errors) = r
            .values
            .iter()
            .map(|v| match v {
                TargetValue::Value(x) => (Some(*x), None),
                TargetValue::Undefined => (None, None),
                TargetValue::Error(e) => (None, Some(e.clone())),
            })
            .unzip();
        Self {
            id: r.metric,
            target_kind: r.target_kind,
            target_ids: r.target_ids.clone(),
            shape: r.shape.clone(),
            values,
            errors,
            warnings: r.warnings.clone(),
            aggregate: r.aggregate,
        }
    }
}

impl From<&MetricEntry> for MetricResult {
    fn from(e: &MetricEntry) -> Self {
        let values = e
            .values
            .iter()
            .zip(&e.errors)
            .map(|(v, err)| match (v, err) {
                (Some(x), _) => TargetValue::Value(*x),
                (None, Some(msg)) => TargetValue::Error(msg.clone()),
                (None, None) => TargetValue::Undefined,
            })
            .collect();
        MetricResult {
            metric: e.id,
            target_kind: e.target_kind,
            target_ids: e.target_ids.clone(),
            shape: e.shape.clone(),
            values,
            warnings: e.warnings.clone(),
            aggregate: e.aggregate,
        }
    }
}

impl ReportDocument {
    pub fn new(config: ConfigEcho, report: &MetricReport) -> Self {
        Self { schema_version: SCHEMA_VERSION, config, metrics: report.results.iter().map(MetricEntry::from).collect() }
    }

    pub fn to_report(&self) -> MetricReport {
        MetricReport { results: self.metrics.iter().map(MetricResult::from).collect() }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid report document: {e}")))
    }
}
