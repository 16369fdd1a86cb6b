//! Scenario files in, key-rate tables and plots out.

pub mod config;
pub mod output;
pub mod plot;

use config::{ConfigError, RunConfig};
use qkdleak_core::{KeyRatePoint, PointStatus};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Uncertified(String),
}

impl CliError {
    /// Process exit status for the error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Uncertified(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    config::parse(&text).map_err(|source| CliError::Config { path: path.display().to_string(), source })
}

pub fn compute(cfg: &RunConfig) -> Result<Vec<KeyRatePoint>, CliError> {
    qkdleak_core::sweep(&cfg.scenario, &cfg.engine, &cfg.distances.points())
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, text).map_err(io(&path))?;
    Ok(path)
}

fn certification(label: &str, points: &[KeyRatePoint]) -> Result<(), CliError> {
    let bad: Vec<String> = points
        .iter()
        .filter(|p| matches!(p.status, PointStatus::Uncertified | PointStatus::Infeasible))
        .map(|p| format!("{} km ({})", p.distance_km, p.status.as_str()))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Uncertified(format!("{label}: uncertified points at {}", bad.join(", "))))
    }
}

pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub no_plot: bool,
}

/// Runs one sweep and writes `rates.csv` (and `rates.svg`).  Outputs are
/// written even when some points fail certification.
pub fn run(opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = load(&opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.engine.seed = seed;
    }
    if opts.no_plot {
        cfg.plot = false;
    }
    let points = compute(&cfg)?;
    fs::create_dir_all(&opts.out).map_err(io(&opts.out))?;
    let mut written = vec![write(opts.out.join("rates.csv"), &output::rates_csv(&cfg, &points))?];
    if cfg.plot {
        let series = plot::Series {
            label: "rate",
            points: points.iter().map(|p| (p.distance_km, p.rate)).collect(),
        };
        let title = format!("{}", opts.config.display());
        written.push(write(opts.out.join("rates.svg"), &plot::svg(&title, &[series]))?);
    }
    certification(&opts.config.display().to_string(), &points)?;
    Ok(written)
}

pub struct CompareOptions {
    pub a: PathBuf,
    pub b: PathBuf,
    pub out: PathBuf,
    pub no_plot: bool,
}

pub struct Comparison {
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
    pub csv: String,
    pub written: Vec<PathBuf>,
}

/// Runs both scenarios over their common distance grid and reports the
/// pointwise rate ratio a/b.
pub fn compare(opts: &CompareOptions) -> Result<Comparison, CliError> {
    let a = load(&opts.a)?;
    let b = load(&opts.b)?;
    let (da, db) = (a.distances.points(), b.distances.points());
    if da != db {
        return Err(CliError::Usage(format!(
            "distance grids differ: {} has {} points from {} to {} km, {} has {} points from {} to {} km",
            opts.a.display(),
            da.len(),
            a.distances.start,
            a.distances.stop,
            opts.b.display(),
            db.len(),
            b.distances.start,
            b.distances.stop
        )));
    }
    let pa = compute(&a)?;
    let pb = compute(&b)?;
    let csv = output::compare_csv(&a, &b, &pa, &pb);
    fs::create_dir_all(&opts.out).map_err(io(&opts.out))?;
    let mut written = vec![write(opts.out.join("compare.csv"), &csv)?];
    if !opts.no_plot {
        let (la, lb) = (opts.a.display().to_string(), opts.b.display().to_string());
        let series = [
            plot::Series { label: &la, points: pa.iter().map(|p| (p.distance_km, p.rate)).collect() },
            plot::Series { label: &lb, points: pb.iter().map(|p| (p.distance_km, p.rate)).collect() },
        ];
        written.push(write(opts.out.join("compare.svg"), &plot::svg("key rate comparison", &series))?);
    }
    certification(&opts.a.display().to_string(), &pa)?;
    certification(&opts.b.display().to_string(), &pb)?;
    let ratios = pa.iter().zip(&pb).map(|(x, y)| output::ratio(x.rate, y.rate)).collect();
    Ok(Comparison { distances: da, ratios, csv, written })
}
