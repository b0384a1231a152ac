//! # latent-eval
//!
//! Disentanglement and interpolatability metrics for latent-based generative
//! models, computed from plain arrays with deterministic, seeded estimators.
//!
//! | Metric | Targets | Module |
//! |--------|---------|--------|
//! | MIG, SAP, DMIG, XMIG | attributes | [`disentanglement`] |
//! | Modularity | latent dimensions | [`disentanglement`] |
//! | DLIG | regularized latent dimensions | [`disentanglement`] |
//! | Smoothness, Monotonicity | (sample, attribute) pairs | [`interpolatability`] |
//!
//! Functions can be called directly on whole datasets, or through a
//! [`Session`] that buffers batches during evaluation loops:
//!
//! ```
//! use latent_eval::{AttributeBatch, EstimatorConfig, Kind, LatentBatch, MetricId, MetricSpec, Session};
//!
//! let rows: Vec<Vec<f64>> = (0..64).map(|r| vec![(r % 4) as f64, (r / 16) as f64]).collect();
//! let z = LatentBatch::discrete_from_rows(&rows)?;
//! let a = AttributeBatch::from_rows(&rows.iter().map(|r| vec![r[0]]).collect::<Vec<_>>(), vec![Kind::Discrete])?;
//!
//! let mut session = Session::create(MetricSpec::new(MetricId::Mig))?;
//! session.update(&z, &a)?;
//! let report = session.compute()?;
//! assert_eq!(report.get(MetricId::Mig).unwrap().aggregate, Some(1.0));
//! # Ok::<(), latent_eval::Error>(())
//! ```

pub mod cli;
pub mod disentanglement;
pub mod error;
pub mod estimators;
pub mod interpolatability;
pub mod io;
pub mod report;
pub mod session;

pub use disentanglement::{dlig, dmig, mig, modularity, sap, xmig, DisentanglementResult, InfoContext};
pub use error::{Error, Result};
pub use estimators::{
    conditional_entropy, entropy, mi_matrix, mutual_info, predictability_score, AttributeBatch, EstimatorConfig,
    Kind, LatentBatch, RegularizationMap,
};
pub use interpolatability::{contraharmonic_mean, liad, monotonicity, smoothness, InterpolationTrace};
pub use report::{MetricId, MetricReport, MetricResult, TargetKind, TargetValue};
pub use session::{BundleSpec, MetricSpec, Session, TraceParams};
