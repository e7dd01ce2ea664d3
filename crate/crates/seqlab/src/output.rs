//! CSV and JSON artifacts.
//!
//! Floats are written as the shortest decimal that reads back to the same
//! value, columns in a fixed order, LF line endings. JSON uses the CSV
//! column names as field names.

use std::io::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qutrit_core::photostats::{FitResult, G2Estimate, ShotRecord};
use qutrit_core::ramsey::{FringePoint, FringeScan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(name: &str) -> Option<Format> {
        match name {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    /// Guesses from the file extension, falling back to the first byte.
    pub fn detect(path: &Path, bytes: &[u8]) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            _ if bytes.iter().find(|b| !b.is_ascii_whitespace()).is_some_and(|&b| b == b'[' || b == b'{') => {
                Format::Json
            }
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("non-finite value in column `{0}`")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub delta_rad_s: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiRow {
    pub t_mu2_s: f64,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "P3")]
    pub p3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutRow {
    pub bin: u8,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Row {
    pub g2: f64,
    pub stderr: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ShotRow {
    pub trial: u64,
    pub binA1: u32,
    pub binB1: u32,
    pub binA2: u32,
    pub binB2: u32,
    pub binA3: u32,
    pub binB3: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub visibility: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
    pub frequency_warning: bool,
}

impl From<&FringePoint> for ScanRow {
    fn from(p: &FringePoint) -> Self {
        ScanRow { delta_rad_s: p.delta, intensity: p.intensity }
    }
}

impl From<G2Estimate> for G2Row {
    fn from(g: G2Estimate) -> Self {
        G2Row { g2: g.value, stderr: g.stderr, n_trials: g.n_trials }
    }
}

impl From<&ShotRecord> for ShotRow {
    fn from(r: &ShotRecord) -> Self {
        let [[a1, b1], [a2, b2], [a3, b3]] = r.counts;
        ShotRow { trial: r.trial, binA1: a1, binB1: b1, binA2: a2, binB2: b2, binA3: a3, binB3: b3 }
    }
}

impl From<&ShotRow> for ShotRecord {
    fn from(r: &ShotRow) -> Self {
        ShotRecord { trial: r.trial, counts: [[r.binA1, r.binB1], [r.binA2, r.binB2], [r.binA3, r.binB3]] }
    }
}

impl From<FitResult> for FitRow {
    fn from(f: FitResult) -> Self {
        FitRow {
            offset: f.offset,
            amplitude: f.amplitude,
            frequency: f.frequency,
            phase: f.phase,
            visibility: f.visibility,
            residual_rms: f.residual_rms,
            iterations: f.iterations,
            converged: f.converged,
            degenerate: f.degenerate,
            frequency_warning: f.frequency_warning,
        }
    }
}

/// Rows whose float columns must be finite before they are written.
pub trait Finite {
    fn check_finite(&self) -> Result<(), OutputError>;
}

fn finite(name: &'static str, v: f64) -> Result<(), OutputError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(OutputError::NonFinite(name))
    }
}

impl Finite for ScanRow {
    fn check_finite(&self) -> Result<(), OutputError> {
        finite("delta_rad_s", self.delta_rad_s)?;
        finite("intensity", self.intensity)
    }
}

impl Finite for RabiRow {
    fn check_finite(&self) -> Result<(), OutputError> {
        finite("t_mu2_s", self.t_mu2_s)?;
        finite("P1", self.p1)?;
        finite("P2", self.p2)?;
        finite("P3", self.p3)
    }
}

impl Finite for ReadoutRow {
    fn check_finite(&self) -> Result<(), OutputError> {
        finite("probability", self.probability)
    }
}

impl Finite for G2Row {
    fn check_finite(&self) -> Result<(), OutputError> {
        finite("g2", self.g2)?;
        finite("stderr", self.stderr)
    }
}

impl Finite for ShotRow {
    fn check_finite(&self) -> Result<(), OutputError> {
        Ok(())
    }
}

impl Finite for FitRow {
    fn check_finite(&self) -> Result<(), OutputError> {
        for (name, v) in [
            ("offset", self.offset),
            ("amplitude", self.amplitude),
            ("frequency", self.frequency),
            ("phase", self.phase),
            ("visibility", self.visibility),
            ("residual_rms", self.residual_rms),
        ] {
            finite(name, v)?;
        }
        Ok(())
    }
}

/// Renders a table. JSON gives an array of objects.
pub fn render_rows<T: Serialize + Finite>(rows: &[T], format: Format) -> Result<Vec<u8>, OutputError> {
    for row in rows {
        row.check_finite()?;
    }
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            w.into_inner().map_err(|e| OutputError::Io(e.into_error()))
        }
        Format::Json => json_bytes(rows),
    }
}

/// Renders a single record. JSON gives one object.
pub fn render_record<T: Serialize + Finite>(row: &T, format: Format) -> Result<Vec<u8>, OutputError> {
    match format {
        Format::Csv => render_rows(std::slice::from_ref(row), format),
        Format::Json => {
            row.check_finite()?;
            json_bytes(row)
        }
    }
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, OutputError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_rows<T: DeserializeOwned>(bytes: &[u8], format: Format) -> Result<Vec<T>, OutputError> {
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_reader(bytes);
            Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
        }
        Format::Json => Ok(serde_json::from_slice(bytes)?),
    }
}

pub fn read_record<T: DeserializeOwned>(bytes: &[u8], format: Format) -> Result<T, OutputError> {
    match format {
        Format::Csv => read_rows::<T>(bytes, format)?
            .into_iter()
            .next()
            .ok_or_else(|| OutputError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, "no data row"))),
        Format::Json => Ok(serde_json::from_slice(bytes)?),
    }
}

pub fn scan_rows(scan: &FringeScan) -> Vec<ScanRow> {
    scan.points.iter().map(ScanRow::from).collect()
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
