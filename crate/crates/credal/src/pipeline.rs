//! Batch drivers behind the CLI verbs.
//!
//! Samples are processed in parallel on the current rayon pool; results keep
//! input order. A failing sample becomes a record carrying its error.

use credal_core::metrics::{ece, ood_report, region_stats, ScoreKind, ScoredSample};
use credal_core::{cdec_decide, idec_decide, optimal_d, precise_hdr, xi_of_d, CategoricalPmf, PredictiveEnsemble};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::records::SampleRecord;
use crate::report::{finite, Metrics, Report, ReportRecord, METRICS_ID};

/// The outcome of a decision batch: the report plus every per-sample error.
#[derive(Debug)]
pub struct Batch {
    pub report: Report,
    pub failures: Vec<(String, Error)>,
}

impl Batch {
    /// 0 when every sample succeeded, otherwise the most severe error code.
    pub fn exit_code(&self) -> u8 {
        self.failures.iter().map(|(_, e)| e.exit_code()).max().unwrap_or(0)
    }
}

fn one_based(labels: &[usize]) -> Vec<usize> {
    labels.iter().map(|l| l + 1).collect()
}

fn argmax(p: &[f64]) -> (usize, f64) {
    p.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (j, &v)| if v > best.1 { (j, v) } else { best })
}

fn mean_pmf(e: &PredictiveEnsemble) -> Vec<f64> {
    let mut acc = vec![0.0; e.k()];
    for m in e.members() {
        for (a, p) in acc.iter_mut().zip(m.probs()) {
            *a += p;
        }
    }
    let n = e.len() as f64;
    acc.iter().map(|a| a / n).collect()
}

fn base_record(rec: &SampleRecord) -> ReportRecord {
    ReportRecord {
        id: rec.id.clone(),
        is_ood: rec.is_ood,
        true_label: rec.true_label.map(|l| l + 1),
        ..Default::default()
    }
}

/// CDEC on one sample. `eu` is the upper EU bound and `tu` the loose upper
/// TU bound; prediction and confidence come from the ensemble mean.
pub fn cdec_record(rec: &SampleRecord, cfg: &RunConfig) -> Result<ReportRecord> {
    let ctx = |e| Error::engine(format!("record {:?}", rec.id), e);
    let ensemble = rec.ensemble().map_err(ctx)?;
    let d = cdec_decide(&ensemble, cfg.gamma, cfg.epsilon, &cfg.cdec_options()).map_err(ctx)?;
    let (pred, conf) = argmax(&mean_pmf(&ensemble));
    let u = d.decomposition;
    Ok(ReportRecord {
        kind: Some(d.kind),
        region: d.region.as_ref().map(|r| one_based(&r.labels)),
        ihdr: Some(one_based(&d.ihdr.labels)),
        achieved_lower_prob: Some(d.ihdr.achieved_lower_prob),
        point_prediction: Some(one_based(&d.point_prediction)),
        predicted_label: Some(pred + 1),
        confidence: Some(conf),
        au: Some(u.au),
        eu: Some(u.eu_upper),
        tu: Some(u.tu_upper_loose),
        eu_lower: Some(u.eu_lower),
        tu_lower: Some(u.tu_lower),
        tu_upper_tight: Some(u.tu_upper_tight),
        tu_exact: u.tu_exact,
        n_extremes: Some(d.n_extremes),
        slack: Some(d.slack),
        ..base_record(rec)
    })
}

/// IDEC on one sample. Multi-member records are rejected unless `collapse`
/// is set, in which case only the first member is used.
pub fn idec_record(rec: &SampleRecord, cfg: &RunConfig, collapse: bool) -> Result<ReportRecord> {
    if rec.members() > 1 && !collapse {
        return Err(Error::Shape { id: rec.id.clone(), members: rec.members() });
    }
    let ctx = |e| Error::engine(format!("record {:?}", rec.id), e);
    let p: CategoricalPmf = rec.prefix(1).ensemble().map_err(ctx)?.members()[0].clone();
    let d = idec_decide(&p, cfg.gamma, cfg.epsilon).map_err(ctx)?;
    let (pred, conf) = argmax(p.probs());
    let (ihdr, lower) = match &d.region {
        Some(r) => (Some(r.labels.clone()), Some(r.achieved_lower_prob)),
        None if !d.infinite_inflation => {
            let d_star = optimal_d(&p, cfg.gamma).map_err(ctx)?.d_star;
            (Some(precise_hdr(&p, xi_of_d(cfg.gamma, d_star))), None)
        }
        None => (None, None),
    };
    Ok(ReportRecord {
        kind: Some(d.kind),
        region: d.region.as_ref().map(|r| one_based(&r.labels)),
        ihdr: ihdr.as_deref().map(one_based),
        achieved_lower_prob: lower,
        predicted_label: Some(pred + 1),
        confidence: Some(conf),
        au: finite(d.decomposition.au),
        eu: finite(d.decomposition.eu),
        tu: finite(d.decomposition.tu),
        slack: finite(d.slack),
        d_star: finite(d.d_star),
        xi: Some(d.xi),
        conservativeness: finite(d.conservativeness),
        infinite_inflation: Some(d.infinite_inflation),
        ..base_record(rec)
    })
}

/// Runs the configured mode over every sample.
pub fn run_decisions(samples: &[SampleRecord], cfg: &RunConfig, collapse: bool) -> Batch {
    let results: Vec<Result<ReportRecord>> = samples
        .par_iter()
        .map(|rec| match cfg.mode {
            Mode::Cdec => cdec_record(rec, cfg),
            Mode::Idec => idec_record(rec, cfg, collapse),
        })
        .collect();
    let mut failures = Vec::new();
    let records = results
        .into_iter()
        .zip(samples)
        .map(|(res, rec)| match res {
            Ok(r) => r,
            Err(e) => {
                let out = ReportRecord { error: Some(e.to_string()), ..base_record(rec) };
                failures.push((rec.id.clone(), e));
                out
            }
        })
        .collect();
    let mode = match cfg.mode {
        Mode::Cdec => "cdec",
        Mode::Idec => "idec",
    };
    Batch { report: Report::new(mode, records, cfg.n_bins), failures }
}

pub fn run_cdec(samples: &[SampleRecord], cfg: &RunConfig) -> Batch {
    run_decisions(samples, &RunConfig { mode: Mode::Cdec, ..cfg.clone() }, false)
}

pub fn run_idec(samples: &[SampleRecord], cfg: &RunConfig, collapse: bool) -> Batch {
    run_decisions(samples, &RunConfig { mode: Mode::Idec, ..cfg.clone() }, collapse)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Ece,
    Ood,
    Regions,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Ece, MetricKind::Ood, MetricKind::Regions];

    pub fn parse(name: &str) -> Option<MetricKind> {
        match name {
            "ece" => Some(MetricKind::Ece),
            "ood" | "auroc" | "auprc" => Some(MetricKind::Ood),
            "regions" | "region" => Some(MetricKind::Regions),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            MetricKind::Ece => "ece",
            MetricKind::Ood => "ood",
            MetricKind::Regions => "regions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub id: String,
    pub n: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

fn metric_error(metric: MetricKind, e: credal_core::Error) -> Error {
    match e {
        credal_core::Error::MissingField { field } => Error::MissingField { metric: metric.name(), field },
        other => Error::engine(metric.name(), other),
    }
}

/// Computes the requested metrics over report records. Records that carry an
/// error are skipped. Any requested metric that cannot be computed is an
/// error.
pub fn run_metrics(records: &[ReportRecord], n_bins: usize, wanted: &[MetricKind]) -> Result<MetricsRecord> {
    let samples: Vec<ScoredSample> = records.iter().filter(|r| r.error.is_none()).map(ReportRecord::scored).collect();
    let mut metrics = Metrics { calibration: None, ood: None, ihdr_id: None, ihdr_ood: None };
    for &m in wanted {
        match m {
            MetricKind::Ece => metrics.calibration = Some(ece(&samples, n_bins).map_err(|e| metric_error(m, e))?),
            MetricKind::Ood => {
                metrics.ood = Some(ood_report(&samples, &ScoreKind::ALL).map_err(|e| metric_error(m, e))?)
            }
            MetricKind::Regions => {
                let (ood, id): (Vec<_>, Vec<_>) = samples.iter().cloned().partition(|s| s.is_ood);
                let stats = |part: &[ScoredSample]| {
                    if part.is_empty() {
                        Ok(None)
                    } else {
                        region_stats(part).map(Some).map_err(|e| metric_error(m, e))
                    }
                };
                metrics.ihdr_id = stats(&id)?;
                metrics.ihdr_ood = stats(&ood)?;
                if samples.is_empty() {
                    return Err(metric_error(m, credal_core::Error::EmptyInput));
                }
            }
        }
    }
    Ok(MetricsRecord { id: METRICS_ID.into(), n: samples.len(), metrics })
}

/// One row of the ensemble-size ablation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub s: usize,
    pub n: usize,
    pub mean_ihdr_size: Option<f64>,
    pub coverage: Option<f64>,
    pub mean_au: Option<f64>,
    pub mean_eu: Option<f64>,
    pub mean_tu: Option<f64>,
    pub abstention_rate: f64,
    pub mean_ihdr_size_id: Option<f64>,
    pub mean_ihdr_size_ood: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Runs CDEC on the first `s` members of every sample for each `s` in `grid`.
pub fn run_ablate(samples: &[SampleRecord], cfg: &RunConfig, grid: &[usize]) -> Result<Vec<AblationRow>> {
    let cdec = RunConfig { mode: Mode::Cdec, ..cfg.clone() };
    let mut rows = Vec::with_capacity(grid.len());
    for &s in grid {
        if s == 0 {
            return Err(Error::Config("ensemble size 0 in grid".into()));
        }
        if let Some(short) = samples.iter().find(|r| r.members() < s) {
            let shape = Error::Shape { id: short.id.clone(), members: short.members() };
            return Err(Error::Ablation { s, source: Box::new(shape) });
        }
        let subset: Vec<SampleRecord> = samples.iter().map(|r| r.prefix(s)).collect();
        let batch = run_decisions(&subset, &cdec, false);
        if let Some((_, e)) = batch.failures.into_iter().next() {
            return Err(Error::Ablation { s, source: Box::new(e) });
        }
        let ok: Vec<&ReportRecord> = batch.report.records.iter().collect();
        let size = |pick: &dyn Fn(&ReportRecord) -> bool| {
            mean(ok.iter().filter(|r| pick(r)).filter_map(|r| r.ihdr.as_ref().map(|g| g.len() as f64)))
        };
        let covered =
            ok.iter().filter_map(|r| Some(r.ihdr.as_ref()?.contains(&r.true_label?))).map(|c| f64::from(u8::from(c)));
        rows.push(AblationRow {
            s,
            n: ok.len(),
            mean_ihdr_size: size(&|_| true),
            coverage: mean(covered),
            mean_au: mean(ok.iter().filter_map(|r| r.au)),
            mean_eu: mean(ok.iter().filter_map(|r| r.eu)),
            mean_tu: mean(ok.iter().filter_map(|r| r.tu)),
            abstention_rate: if ok.is_empty() {
                0.0
            } else {
                ok.iter().filter(|r| r.kind.is_some_and(|k| k.is_abstention())).count() as f64 / ok.len() as f64
            },
            mean_ihdr_size_id: size(&|r| r.is_ood != Some(true)),
            mean_ihdr_size_ood: size(&|r| r.is_ood == Some(true)),
        });
    }
    Ok(rows)
}
