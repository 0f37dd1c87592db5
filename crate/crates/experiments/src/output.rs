//! Long-form result records and their CSV / JSON encodings.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::Result;

/// One output row. Fields that do not apply to a record kind are left empty.
///
/// Record kinds:
/// - `magnetization`: `⟨j_z,k⟩` of one site at one time.
/// - `collective`: collective moments of the whole register at one time.
/// - `curve`: squeezing observables at one time, averaged over realizations.
/// - `minimum`: minimum of ξ² over time.
/// - `variance_minimum`: minimum of the θ-optimized variance over time.
/// - `slope`: initial slope of `(ΔJ_{−π/4})²`, simulated and predicted.
/// - `fit`: log-log slope of the variance minimum against N.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Record {
    pub record: &'static str,
    pub coupling: &'static str,
    pub atoms: usize,
    pub sites: usize,
    pub range: Option<usize>,
    pub time: Option<f64>,
    pub site: Option<usize>,
    /// `⟨j_z,k⟩` for magnetization rows, otherwise `⟨J_z⟩`.
    pub jz: Option<f64>,
    pub theta_opt: Option<f64>,
    /// `(ΔJ_θ)²` minimized over θ.
    pub variance: Option<f64>,
    pub variance_sem: Option<f64>,
    /// `(ΔJ_{−π/4})²`.
    pub variance_quarter: Option<f64>,
    pub xi2: Option<f64>,
    pub xi2_sem: Option<f64>,
    /// `false` where ⟨J_z⟩ vanishes and ξ² is undefined.
    pub xi2_defined: Option<bool>,
    pub realizations: usize,
    /// Simulated slope, fitted exponent, or other scalar result.
    pub value: Option<f64>,
    pub value_sem: Option<f64>,
    /// Prediction that `value` is compared against.
    pub reference: Option<f64>,
    /// Grid spacing the minimum was bracketed with.
    pub grid_step: Option<f64>,
}

impl Record {
    pub fn new(record: &'static str, coupling: &'static str, atoms: usize, sites: usize) -> Self {
        Self {
            record,
            coupling,
            atoms,
            sites,
            realizations: 1,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metadata {
    pub t_max: f64,
    pub dt: f64,
    pub grid_points: usize,
    pub grid_step: f64,
    pub lattice_sites: usize,
    pub boundary: &'static str,
    /// `N(N−1)/(M(M−1))` for exact-count placement.
    pub hypergeometric_pair_correlation: Option<f64>,
    pub bernoulli_pair_correlation: Option<f64>,
    pub slope_convention: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub metadata: Metadata,
    pub records: Vec<Record>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a ExperimentConfig,
    metadata: &'a Metadata,
}

#[derive(Serialize)]
struct Document<'a> {
    config: &'a ExperimentConfig,
    metadata: &'a Metadata,
    records: &'a [Record],
}

pub fn to_csv(records: &[Record]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        writer.serialize(Record::default())?;
        let bytes = writer.into_inner().map_err(|e| e.into_error())?;
        // header only
        let header_end = bytes.iter().position(|&b| b == b'\n').map_or(0, |i| i + 1);
        return Ok(bytes[..header_end].to_vec());
    }
    for r in records {
        writer.serialize(r)?;
    }
    Ok(writer.into_inner().map_err(|e| e.into_error())?)
}

/// Path of the JSON sidecar written next to a CSV file.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path
        .file_stem()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".meta.json");
    csv_path.with_file_name(name)
}

/// Writes the results to `config.out` (or stdout when unset). CSV output gets
/// a JSON sidecar holding the configuration and metadata. Returns the paths
/// written.
pub fn write_output(config: &ExperimentConfig, output: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    let (body, sidecar) = match config.format {
        OutputFormat::Csv => {
            let sidecar = serde_json::to_vec_pretty(&Sidecar {
                config,
                metadata: &output.metadata,
            })?;
            (to_csv(&output.records)?, Some(sidecar))
        }
        OutputFormat::Json => {
            let mut doc = serde_json::to_vec_pretty(&Document {
                config,
                metadata: &output.metadata,
                records: &output.records,
            })?;
            doc.push(b'\n');
            (doc, None)
        }
    };
    let Some(path) = &config.out else {
        std::io::stdout().write_all(&body)?;
        return Ok(Vec::new());
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, &body)?;
    let mut written = vec![path.clone()];
    if let Some(mut meta) = sidecar {
        meta.push(b'\n');
        let meta_path = sidecar_path(path);
        fs::write(&meta_path, meta)?;
        written.push(meta_path);
    }
    Ok(written)
}
