//! Command-line driver: reads matrices from CSV/NPY files and writes a JSON report.
//!
//! Exit codes: 0 on success, 1 on invalid arguments or data, 2 on file system errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array3;

use crate::error::{Error, Result};
use crate::estimators::{AttributeBatch, EstimatorConfig, Kind, LatentBatch, RegularizationMap};
use crate::io::{load_table_auto, ConfigEcho, ReportDocument};
use crate::report::{MetricId, MetricReport};
use crate::session::{BundleSpec, Session};

#[derive(Debug, Parser)]
#[command(name = "latent-eval", version, about = "Disentanglement and interpolatability metrics for latent codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Disentanglement metrics from latent codes and attribute values.
    Disent(DisentArgs),
    /// Smoothness and monotonicity from interpolation traces.
    Interp(InterpArgs),
    /// A named metric bundle sharing one mutual information matrix.
    Bundle(BundleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LatentKindArg {
    /// Discrete when every latent entry is an integer.
    Auto,
    Discrete,
    Continuous,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Latent codes, one row per sample (.csv or .npy).
    #[arg(long, value_name = "PATH")]
    latents: PathBuf,
    /// Attribute values, one row per sample (.csv or .npy).
    #[arg(long, value_name = "PATH")]
    attributes: PathBuf,
    /// Latent dimension regularizing each attribute; defaults to attribute i -> dimension i.
    #[arg(long, value_name = "CSV-INTS")]
    reg_dim: Option<String>,
    /// Whether attributes are discrete: one boolean or one per attribute.
    #[arg(long, value_name = "BOOL|CSV-BOOLS", default_value = "false")]
    discrete: String,
    #[arg(long, value_enum, default_value_t = LatentKindArg::Auto)]
    latent_kind: LatentKindArg,
    /// Estimator seed, or `none` for a fresh seed on every run.
    #[arg(long, value_name = "INT|none", default_value = "42")]
    seed: String,
    #[arg(long, value_name = "INT", default_value_t = 3)]
    k_neighbors: usize,
    /// Report destination, `-` for standard output.
    #[arg(long, value_name = "PATH|-", default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct DisentArgs {
    /// Comma-separated metric names.
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true, value_parser = parse_metric)]
    metrics: Vec<MetricId>,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Debug, Args)]
struct BundleArgs {
    #[arg(long, value_name = "NAME")]
    bundle: String,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Debug, Args)]
struct InterpArgs {
    /// Measurements as a (samples * attributes) x points matrix, sample-major.
    #[arg(long, value_name = "PATH")]
    trace: PathBuf,
    /// Number of samples; inferred from the row count when omitted.
    #[arg(long, value_name = "INT")]
    samples: Option<usize>,
    /// Number of attributes per sample.
    #[arg(long, value_name = "INT", default_value_t = 1)]
    attributes: usize,
    /// Grid step in latent space.
    #[arg(long, value_name = "FLOAT")]
    delta: f64,
    /// Differences at or below this magnitude are ignored by monotonicity.
    #[arg(long, value_name = "FLOAT", default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "smoothness,monotonicity", value_parser = parse_metric)]
    metrics: Vec<MetricId>,
    #[arg(long, value_name = "PATH|-", default_value = "-")]
    output: String,
}

fn parse_metric(s: &str) -> std::result::Result<MetricId, String> {
    s.parse::<MetricId>().map_err(|e| match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    })
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                1
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let outcome = match cli.command {
        Command::Disent(a) => run_pairs(a.metrics, None, a.data, out),
        Command::Bundle(a) => run_pairs(Vec::new(), Some(a.bundle), a.data, out),
        Command::Interp(a) => run_interp(a, out),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io() { 2 } else { 1 }
        }
    }
}

fn parse_seed(s: &str) -> Result<Option<u64>> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    s.trim().parse().map(Some).map_err(|_| Error::Config(format!("--seed must be a nonnegative integer or 'none', got '{s}'")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!("expected a boolean, got '{other}'"))),
    }
}

fn parse_kinds(s: &str, n_attributes: usize) -> Result<Vec<Kind>> {
    let flags = s.split(',').map(parse_bool).collect::<Result<Vec<_>>>()?;
    let kind = |d: bool| if d { Kind::Discrete } else { Kind::Continuous };
    match flags.len() {
        1 => Ok(vec![kind(flags[0]); n_attributes]),
        n if n == n_attributes => Ok(flags.into_iter().map(kind).collect()),
        n => Err(Error::Config(format!("--discrete lists {n} flags for {n_attributes} attributes"))),
    }
}

fn parse_reg_dim(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Config(format!("--reg-dim entries must be nonnegative integers, got '{t}'"))))
        .collect()
}

fn run_pairs(metrics: Vec<MetricId>, bundle: Option<String>, data: DataArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(m) = metrics.iter().find(|m| m.is_interpolation()) {
        return Err(Error::Config(format!("{m} is an interpolatability metric; use the interp subcommand")));
    }
    let seed = parse_seed(&data.seed)?;
    let cfg = EstimatorConfig::default().with_seed(seed).with_k_neighbors(data.k_neighbors);
    cfg.validate()?;

    let latents = load_table_auto(&data.latents)?;
    let attributes = load_table_auto(&data.attributes)?;
    let latent_kind = match data.latent_kind {
        LatentKindArg::Discrete => Kind::Discrete,
        LatentKindArg::Continuous => Kind::Continuous,
        LatentKindArg::Auto if LatentBatch::is_integer_valued(&latents.values) => Kind::Discrete,
        LatentKindArg::Auto => Kind::Continuous,
    };
    let kinds = parse_kinds(&data.discrete, attributes.n_cols())?;
    let z = LatentBatch::with_kind(latents.values, latent_kind)?;
    let a = AttributeBatch::new(attributes.values, kinds.clone())?;
    if z.n_samples() != a.n_samples() {
        return Err(Error::Config(format!(
            "latents have {} rows but attributes have {}",
            z.n_samples(),
            a.n_samples()
        )));
    }

    let reg = match &data.reg_dim {
        Some(s) => {
            let reg_dim = parse_reg_dim(s)?;
            if reg_dim.len() != a.n_attributes() {
                return Err(Error::Config(format!(
                    "--reg-dim has {} entries but there are {} attributes",
                    reg_dim.len(),
                    a.n_attributes()
                )));
            }
            Some(RegularizationMap::new(reg_dim, z.n_dims())?)
        }
        None if bundle.is_some() || metrics.iter().any(|m| m.needs_reg()) => {
            Some(RegularizationMap::identity(a.n_attributes(), z.n_dims())?)
        }
        None => None,
    };

    let spec = match &bundle {
        Some(name) => {
            let reg = reg.clone().expect("set for bundles");
            BundleSpec::builtin(name, reg, cfg)?
        }
        None => BundleSpec::new("cli", metrics, reg.clone(), cfg),
    };
    let mut session = Session::create(spec.clone())?;
    session.update(&z, &a)?;
    let report = session.compute()?;

    let echo = ConfigEcho {
        seed,
        k_neighbors: Some(cfg.k_neighbors),
        reg_dim: reg.map(|r| r.reg_dim().to_vec()),
        delta: None,
        epsilon: None,
        metrics: spec.metrics,
        bundle,
        latent_kind: Some(latent_kind),
        attribute_kinds: Some(kinds),
    };
    emit(echo, &report, &data.output, out)
}

fn run_interp(args: InterpArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(m) = args.metrics.iter().find(|m| !m.is_interpolation()) {
        return Err(Error::Config(format!("{m} is a disentanglement metric; use the disent subcommand")));
    }
    if args.attributes == 0 {
        return Err(Error::Config("--attributes must be positive".into()));
    }
    let table = load_table_auto(&args.trace)?;
    let (rows, points) = table.values.dim();
    if rows % args.attributes != 0 {
        return Err(Error::Shape(format!("{rows} trace rows are not a multiple of {} attributes", args.attributes)));
    }
    let samples = rows / args.attributes;
    if let Some(s) = args.samples {
        if s != samples {
            return Err(Error::Shape(format!(
                "trace has {rows} rows, expected {s} samples x {} attributes",
                args.attributes
            )));
        }
    }
    let slab = Array3::from_shape_vec((samples, args.attributes, points), table.values.into_iter().collect())
        .map_err(|e| Error::Shape(e.to_string()))?;

    let spec = BundleSpec::new("cli", args.metrics.clone(), None, EstimatorConfig::default())
        .with_trace(args.delta, args.epsilon);
    let mut session = Session::create(spec)?;
    session.update_trace(slab.view())?;
    let report = session.compute()?;

    let echo = ConfigEcho {
        seed: None,
        k_neighbors: None,
        reg_dim: None,
        delta: Some(args.delta),
        epsilon: Some(args.epsilon),
        metrics: args.metrics,
        bundle: None,
        latent_kind: None,
        attribute_kinds: None,
    };
    emit(echo, &report, &args.output, out)
}

fn emit(echo: ConfigEcho, report: &MetricReport, output: &str, out: &mut dyn Write) -> Result<()> {
    let json = ReportDocument::new(echo, report).to_json()?;
    if output == "-" {
        out.write_all(json.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
    } else {
        fs::write(output, json).map_err(|source| Error::Io { path: output.into(), source })
    }
}
