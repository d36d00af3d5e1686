//! Line-delimited JSON sample files.
//!
//! One object per line with fields `id`, `ensemble` or `counts` (an S×k
//! matrix), and optional `true_label` (1-based) and `is_ood`. Blank lines are
//! skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use credal_core::{posterior_predictive, validate_pmf, PredictiveEnsemble, VirtualCounts, DEFAULT_PMF_TOLERANCE};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Probabilities(Vec<Vec<f64>>),
    Counts(Vec<Vec<f64>>),
}

impl Rows {
    pub fn rows(&self) -> &[Vec<f64>] {
        match self {
            Rows::Probabilities(r) | Rows::Counts(r) => r,
        }
    }

    pub fn is_counts(&self) -> bool {
        matches!(self, Rows::Counts(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub id: String,
    pub rows: Rows,
    /// 0-based; the file stores it 1-based.
    pub true_label: Option<usize>,
    pub is_ood: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ensemble: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    true_label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    is_ood: Option<bool>,
}

impl SampleRecord {
    pub fn members(&self) -> usize {
        self.rows.rows().len()
    }

    pub fn k(&self) -> usize {
        self.rows.rows()[0].len()
    }

    /// The member pmfs, converting counts through the posterior predictive.
    pub fn ensemble(&self) -> credal_core::Result<PredictiveEnsemble> {
        match &self.rows {
            Rows::Probabilities(rows) => PredictiveEnsemble::from_rows(rows.iter().cloned(), DEFAULT_PMF_TOLERANCE),
            Rows::Counts(rows) => {
                let pmfs = rows
                    .iter()
                    .map(|r| VirtualCounts::new(r.clone()).and_then(|c| posterior_predictive(&c)))
                    .collect::<credal_core::Result<Vec<_>>>()?;
                PredictiveEnsemble::new(pmfs)
            }
        }
    }

    /// The same record restricted to its first `s` members.
    pub fn prefix(&self, s: usize) -> SampleRecord {
        let cut = |r: &Vec<Vec<f64>>| r[..s.min(r.len())].to_vec();
        let rows = match &self.rows {
            Rows::Probabilities(r) => Rows::Probabilities(cut(r)),
            Rows::Counts(r) => Rows::Counts(cut(r)),
        };
        SampleRecord { rows, ..self.clone() }
    }

    fn into_raw(self) -> RawRecord {
        let (ensemble, counts) = match self.rows {
            Rows::Probabilities(r) => (Some(r), None),
            Rows::Counts(r) => (None, Some(r)),
        };
        RawRecord { id: self.id, ensemble, counts, true_label: self.true_label.map(|l| l + 1), is_ood: self.is_ood }
    }

    fn from_raw(raw: RawRecord, line: usize) -> Result<Self> {
        let schema = |field, message: String| Error::Schema { line, id: raw.id.clone(), field, message };
        let (field, rows) = match (&raw.ensemble, &raw.counts) {
            (Some(r), None) => ("ensemble", Rows::Probabilities(r.clone())),
            (None, Some(r)) => ("counts", Rows::Counts(r.clone())),
            (Some(_), Some(_)) => return Err(schema("ensemble", "both `ensemble` and `counts` given".into())),
            (None, None) => return Err(schema("ensemble", "one of `ensemble` or `counts` is required".into())),
        };
        let matrix = rows.rows();
        let Some(first) = matrix.first() else {
            return Err(schema(field, "no members".into()));
        };
        let k = first.len();
        if k < 2 {
            return Err(schema(field, format!("rows need at least 2 classes, found {k}")));
        }
        for (s, row) in matrix.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InconsistentDimensions { line, id: raw.id.clone(), expected: k, found: row.len() });
            }
            match &rows {
                Rows::Probabilities(_) => {
                    validate_pmf(row.clone(), DEFAULT_PMF_TOLERANCE)
                        .map_err(|e| schema(field, format!("member {}: {e}", s + 1)))?;
                }
                Rows::Counts(_) => {
                    if let Some(bad) = row.iter().find(|c| !c.is_finite() || **c < 0.0) {
                        return Err(schema(
                            field,
                            format!("member {}: count {bad} is not a nonnegative number", s + 1),
                        ));
                    }
                }
            }
        }
        let true_label = match raw.true_label {
            None => None,
            Some(l) if (1..=k).contains(&l) => Some(l - 1),
            Some(l) => return Err(schema("true_label", format!("label {l} outside 1..={k}"))),
        };
        Ok(SampleRecord { id: raw.id, rows, true_label, is_ood: raw.is_ood })
    }
}

/// Parses a sample file, checking that every record has the same number of
/// classes.
pub fn read_samples(reader: impl BufRead) -> Result<Vec<SampleRecord>> {
    let mut out: Vec<SampleRecord> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        if text.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&text).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        let rec = SampleRecord::from_raw(raw, line_no)?;
        if let Some(first) = out.first() {
            if rec.k() != first.k() {
                return Err(Error::InconsistentDimensions {
                    line: line_no,
                    expected: first.k(),
                    found: rec.k(),
                    id: rec.id,
                });
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_samples(path: &Path) -> Result<Vec<SampleRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_samples(BufReader::new(file))
}

pub fn write_samples_to(mut w: impl Write, records: &[SampleRecord]) -> std::io::Result<()> {
    for rec in records {
        serde_json::to_writer(&mut w, &rec.clone().into_raw())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_samples(path: &Path, records: &[SampleRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_samples_to(BufWriter::new(file), records).map_err(|e| Error::io(path, e))
}
