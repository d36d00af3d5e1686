//! Report files: one JSON object per sample in input order, then a summary
//! object whose `id` is [`SUMMARY_ID`]. Labels are 1-based and non-finite
//! numbers are written as `null`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use credal_core::metrics::{
    ece, ood_report, region_stats, CalibrationReport, OodReport, RegionStats, ScoreKind, ScoredSample,
};
use credal_core::DecisionKind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SUMMARY_ID: &str = "__summary__";
pub const METRICS_ID: &str = "__metrics__";

/// Per-sample output. Fields that do not apply to the mode are omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_ood: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<DecisionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The prediction set; present only when the sample is predicted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<usize>>,
    /// The `(1 - gamma)` region whether or not the sample was predicted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ihdr: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub achieved_lower_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_prediction: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub au: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eu_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tu_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tu_upper_tight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tu_exact: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_extremes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conservativeness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinite_inflation: Option<bool>,
}

impl ReportRecord {
    /// The record as metric input, with labels shifted back to 0-based.
    pub fn scored(&self) -> ScoredSample {
        let zero = |l: usize| l.saturating_sub(1);
        ScoredSample {
            id: self.id.clone(),
            au: self.au,
            eu: self.eu,
            tu: self.tu,
            conf: self.confidence,
            is_ood: self.is_ood.unwrap_or(false),
            true_label: self.true_label.map(zero),
            predicted_label: self.predicted_label.map(zero),
            region: self.ihdr.as_ref().map(|r| r.iter().copied().map(zero).collect()),
        }
    }
}

pub(crate) fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Metrics that can be computed from a batch of report records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ood: Option<OodReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ihdr_id: Option<RegionStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ihdr_ood: Option<RegionStats>,
}

impl Metrics {
    /// Computes whatever the records support and skips the rest.
    pub fn best_effort(records: &[ReportRecord], n_bins: usize) -> Metrics {
        let ok: Vec<ScoredSample> = records.iter().filter(|r| r.error.is_none()).map(ReportRecord::scored).collect();
        let (ood, id): (Vec<_>, Vec<_>) = ok.iter().cloned().partition(|s| s.is_ood);
        let kinds: Vec<ScoreKind> =
            ScoreKind::ALL.into_iter().filter(|&k| ok.iter().all(|s| s.score(k).is_some())).collect();
        Metrics {
            calibration: ece(&ok, n_bins).ok(),
            ood: if kinds.is_empty() { None } else { ood_report(&ok, &kinds).ok() },
            ihdr_id: region_stats(&id).ok(),
            ihdr_ood: region_stats(&ood).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub id: String,
    pub mode: String,
    pub n_samples: usize,
    pub n_errors: usize,
    pub failed_ids: Vec<String>,
    pub n_predict: usize,
    pub n_abstain_aleatoric: usize,
    pub n_abstain_epistemic: usize,
    pub abstention_rate_aleatoric: f64,
    pub abstention_rate_epistemic: f64,
    /// Over predicted samples only.
    pub mean_region_size: Option<f64>,
    /// Fraction of predicted regions holding the true label.
    pub coverage: Option<f64>,
    pub mean_au: Option<f64>,
    pub mean_eu: Option<f64>,
    pub mean_tu: Option<f64>,
    pub metrics: Metrics,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl Summary {
    pub fn from_records(mode: &str, records: &[ReportRecord], n_bins: usize) -> Summary {
        let ok: Vec<&ReportRecord> = records.iter().filter(|r| r.error.is_none()).collect();
        let count = |k: DecisionKind| ok.iter().filter(|r| r.kind == Some(k)).count();
        let rate = |c: usize| if ok.is_empty() { 0.0 } else { c as f64 / ok.len() as f64 };
        let (n_al, n_ep) = (count(DecisionKind::AbstainAleatoric), count(DecisionKind::AbstainEpistemic));
        let regions: Vec<(&Vec<usize>, Option<usize>)> =
            ok.iter().filter_map(|r| r.region.as_ref().map(|g| (g, r.true_label))).collect();
        let labelled: Vec<bool> = regions.iter().filter_map(|(g, t)| t.map(|t| g.contains(&t))).collect();
        Summary {
            id: SUMMARY_ID.into(),
            mode: mode.into(),
            n_samples: records.len(),
            n_errors: records.len() - ok.len(),
            failed_ids: records.iter().filter(|r| r.error.is_some()).map(|r| r.id.clone()).collect(),
            n_predict: count(DecisionKind::Predict),
            n_abstain_aleatoric: n_al,
            n_abstain_epistemic: n_ep,
            abstention_rate_aleatoric: rate(n_al),
            abstention_rate_epistemic: rate(n_ep),
            mean_region_size: mean(regions.iter().map(|(g, _)| g.len() as f64)),
            coverage: mean(labelled.iter().map(|&c| f64::from(u8::from(c)))),
            mean_au: mean(ok.iter().filter_map(|r| r.au)),
            mean_eu: mean(ok.iter().filter_map(|r| r.eu)),
            mean_tu: mean(ok.iter().filter_map(|r| r.tu)),
            metrics: Metrics::best_effort(records, n_bins),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub records: Vec<ReportRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(mode: &str, records: Vec<ReportRecord>, n_bins: usize) -> Report {
        let summary = Summary::from_records(mode, &records, n_bins);
        Report { records, summary }
    }
}

pub fn write_report_to(mut w: impl Write, report: &Report) -> std::io::Result<()> {
    for rec in &report.records {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut w, &report.summary)?;
    w.write_all(b"\n")?;
    w.flush()
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_report_to(BufWriter::new(file), report).map_err(|e| Error::io(path, e))
}

pub fn read_report(reader: impl BufRead) -> Result<Report> {
    let mut records = Vec::new();
    let mut summary = None;
    for (i, line) in reader.lines().enumerate() {
        let parse = |message: String| Error::Parse { line: i + 1, message };
        let text = line.map_err(|e| parse(e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        if summary.is_some() {
            return Err(parse("record after the summary".into()));
        }
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?;
        if value.get("id").and_then(|v| v.as_str()) == Some(SUMMARY_ID) {
            summary = Some(serde_json::from_value(value).map_err(|e| parse(e.to_string()))?);
        } else {
            records.push(serde_json::from_value(value).map_err(|e| parse(e.to_string()))?);
        }
    }
    let summary = summary.ok_or(Error::Parse { line: 0, message: "report has no summary record".into() })?;
    Ok(Report { records, summary })
}

pub fn load_report(path: &Path) -> Result<Report> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_report(BufReader::new(file))
}
