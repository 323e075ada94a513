//! File formats: state descriptions (JSON), shot records (CSV plus JSON
//! sidecar), histogram and sweep tables (CSV).
//!
//! CSV numbers use Rust's shortest round-trip `Display` formatting, so
//! output is locale independent and reproducible byte for byte.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Histogram, SCHEMA_VERSION, SweepRow};
use crate::gaussian::{GaussianState, ModeQuadrature};
use crate::measurement::{SamplingPlan, ShotBatch};

/// JSON description of a Gaussian state.
///
/// ```json
/// { "schema_version": "1", "n_modes": 1, "mean": [0, 0], "cov": [[1, 0], [0, 1]] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default = "default_schema")]
    pub schema_version: String,
    pub n_modes: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    /// Rounding error of `cov`, present when the state was computed with
    /// compensated arithmetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov_correction: Option<Vec<Vec<f64>>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn default_schema() -> String {
    SCHEMA_VERSION.to_string()
}

impl StateFile {
    pub fn from_state(s: &GaussianState) -> Self {
        Self {
            schema_version: default_schema(),
            n_modes: s.n_modes(),
            mean: s.mean().iter().copied().collect(),
            cov: rows(s.cov()),
            cov_correction: s
                .cov_correction()
                .iter()
                .any(|&v| v != 0.0)
                .then(|| rows(s.cov_correction())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Raw moments with shapes checked against `n_modes`. Symmetry and
    /// physicality are left to the caller.
    pub fn moments(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let dim = 2 * self.n_modes;
        if self.n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
        }
        if self.mean.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "mean has {} entries, expected {dim}",
                self.mean.len()
            )));
        }
        if self.cov.len() != dim || self.cov.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(format!("cov must be {dim}x{dim}")));
        }
        let mean = DVector::from_column_slice(&self.mean);
        let cov = DMatrix::from_fn(dim, dim, |r, c| self.cov[r][c]);
        Ok((mean, cov))
    }

    /// The covariance correction, zero when absent.
    pub fn correction(&self) -> Result<DMatrix<f64>> {
        let dim = 2 * self.n_modes;
        match &self.cov_correction {
            None => Ok(DMatrix::zeros(dim, dim)),
            Some(m) if m.len() != dim || m.iter().any(|r| r.len() != dim) => Err(
                Error::InvalidArgument(format!("cov_correction must be {dim}x{dim}")),
            ),
            Some(m) => Ok(DMatrix::from_fn(dim, dim, |r, c| m[r][c])),
        }
    }

    pub fn to_state(&self) -> Result<GaussianState> {
        let (mean, cov) = self.moments()?;
        GaussianState::new_compensated(mean, cov, self.correction()?)
    }
}

/// JSON sidecar written next to a shot CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSidecar {
    pub schema_version: String,
    pub plan: SamplingPlan,
    pub columns: Vec<String>,
    pub seed: u64,
    pub chunk_size: usize,
    pub state_hash: String,
}

impl ShotSidecar {
    pub fn for_batch(batch: &ShotBatch) -> Self {
        Self {
            schema_version: default_schema(),
            plan: batch.plan().clone(),
            columns: batch.labels(),
            seed: batch.provenance().seed,
            chunk_size: batch.provenance().chunk_size,
            state_hash: batch.provenance().state_hash.clone(),
        }
    }
}

/// `shot,<mode:quad>...` header then one row per shot, shots numbered from 0.
pub fn write_shots_csv<W: Write>(batch: &ShotBatch, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["shot".to_string()];
    header.extend(batch.labels());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(batch.width() + 1);
    for (i, row) in batch.rows().enumerate() {
        record.clear();
        record.push(i.to_string());
        record.extend(row.iter().map(f64::to_string));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a shot CSV back into its column labels and row-major samples.
pub fn read_shots_csv(text: &str) -> Result<(Vec<ModeQuadratureLabel>, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("shot") {
        return Err(Error::InvalidArgument("first column must be `shot`".into()));
    }
    let labels: Vec<ModeQuadratureLabel> = headers.iter().skip(1).map(|h| h.to_string()).collect();
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        for field in rec.iter().skip(1) {
            samples.push(
                field
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad sample `{field}`: {e}")))?,
            );
        }
    }
    Ok((labels, samples))
}

/// Column label in `mode:quad` form, e.g. `0:X`.
pub type ModeQuadratureLabel = String;

pub fn label(q: ModeQuadrature) -> ModeQuadratureLabel {
    q.to_string()
}

/// `bin_lo,bin_hi,count`.
pub fn write_histogram_csv<W: Write>(hist: &Histogram, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_lo", "bin_hi", "count"])?;
    for (lo, hi, c) in hist.rows() {
        w.write_record([lo.to_string(), hi.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `r,duan_analytic,duan_sampled,duan_se,reid,heisenberg`; a missing
/// standard error is written as an empty field.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "r",
        "duan_analytic",
        "duan_sampled",
        "duan_se",
        "reid",
        "heisenberg",
    ])?;
    for row in rows {
        w.write_record([
            row.r.to_string(),
            row.duan_analytic.to_string(),
            row.duan_sampled.to_string(),
            row.duan_se.map(|v| v.to_string()).unwrap_or_default(),
            row.reid.to_string(),
            row.heisenberg.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
