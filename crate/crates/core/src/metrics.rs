//! Evaluation metrics: expected calibration error, AUROC/AUPRC of
//! uncertainty scores for separating out-of-distribution inputs, and
//! region size/coverage statistics.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScoreKind {
    Au,
    Eu,
    Tu,
    /// Confidence; ranked as `-conf` so that higher means more uncertain.
    Conf,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 4] = [ScoreKind::Au, ScoreKind::Eu, ScoreKind::Tu, ScoreKind::Conf];

    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::Au => "au",
            ScoreKind::Eu => "eu",
            ScoreKind::Tu => "tu",
            ScoreKind::Conf => "conf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredSample {
    pub id: String,
    pub au: Option<f64>,
    pub eu: Option<f64>,
    pub tu: Option<f64>,
    pub conf: Option<f64>,
    pub is_ood: bool,
    pub true_label: Option<usize>,
    pub predicted_label: Option<usize>,
    pub region: Option<Vec<usize>>,
}

impl ScoredSample {
    pub fn score(&self, kind: ScoreKind) -> Option<f64> {
        match kind {
            ScoreKind::Au => self.au,
            ScoreKind::Eu => self.eu,
            ScoreKind::Tu => self.tu,
            ScoreKind::Conf => self.conf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationBin {
    pub index: usize,
    pub count: usize,
    pub mean_conf: f64,
    pub accuracy: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationReport {
    pub ece: f64,
    /// Nonempty bins only.
    pub bins: Vec<CalibrationBin>,
    pub n_bins: usize,
}

/// Expected calibration error over `n_bins` equal-width confidence bins on
/// `[0, 1]`. The last bin is closed on the right.
pub fn ece(samples: &[ScoredSample], n_bins: usize) -> Result<CalibrationReport> {
    if n_bins == 0 {
        return Err(Error::InvalidParameter { name: "n_bins", value: 0.0 });
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut count = alloc::vec![0usize; n_bins];
    let mut conf_sum = alloc::vec![0.0; n_bins];
    let mut correct = alloc::vec![0usize; n_bins];
    for s in samples {
        let conf = s.conf.ok_or(Error::MissingField { field: "conf" })?;
        let pred = s.predicted_label.ok_or(Error::MissingField { field: "predicted_label" })?;
        let truth = s.true_label.ok_or(Error::MissingField { field: "true_label" })?;
        if !(0.0..=1.0).contains(&conf) {
            return Err(Error::InvalidParameter { name: "conf", value: conf });
        }
        let b = ((conf * n_bins as f64) as usize).min(n_bins - 1);
        count[b] += 1;
        conf_sum[b] += conf;
        correct[b] += usize::from(pred == truth);
    }
    let n = samples.len() as f64;
    let mut bins = Vec::new();
    let mut total = 0.0;
    for b in 0..n_bins {
        if count[b] == 0 {
            continue;
        }
        let c = count[b] as f64;
        let bin = CalibrationBin {
            index: b,
            count: count[b],
            mean_conf: conf_sum[b] / c,
            accuracy: correct[b] as f64 / c,
            weight: c / n,
        };
        total += bin.weight * libm::fabs(bin.accuracy - bin.mean_conf);
        bins.push(bin);
    }
    Ok(CalibrationReport { ece: total, bins, n_bins })
}

/// AUROC and AUPRC for ranking out-of-distribution samples (positives) above
/// in-distribution ones by the chosen score.
///
/// AUROC uses the Mann-Whitney statistic with half credit for ties. AUPRC is
/// average precision: precision at each distinct threshold weighted by the
/// recall gained there.
pub fn auroc_auprc(samples: &[ScoredSample], kind: ScoreKind) -> Result<(f64, f64)> {
    let mut scored: Vec<(f64, bool)> = Vec::with_capacity(samples.len());
    for s in samples {
        let v = s.score(kind).ok_or(Error::MissingField { field: kind.name() })?;
        if v.is_nan() {
            return Err(Error::NonFinite);
        }
        scored.push((if kind == ScoreKind::Conf { -v } else { v }, s.is_ood));
    }
    ranking_metrics(&mut scored)
}

/// AUROC and average precision of raw `(score, is_positive)` pairs.
pub fn ranking_metrics(scored: &mut [(f64, bool)]) -> Result<(f64, f64)> {
    let n_pos = scored.iter().filter(|s| s.1).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Walk tie groups from the highest score down.
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut concordant = 0.0;
    let mut ap_sum = 0.0;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        let (mut gp, mut gn) = (0usize, 0usize);
        while j < scored.len() && scored[j].0 == scored[i].0 {
            if scored[j].1 {
                gp += 1;
            } else {
                gn += 1;
            }
            j += 1;
        }
        // Positives in this group beat every negative below it and tie with
        // the negatives inside it.
        concordant += gp as f64 * (n_neg - fp - gn) as f64 + 0.5 * (gp * gn) as f64;
        tp += gp;
        fp += gn;
        if gp > 0 {
            ap_sum += gp as f64 * tp as f64 / (tp + fp) as f64;
        }
        i = j;
    }
    let auroc = concordant / (n_pos as f64 * n_neg as f64);
    Ok((auroc, ap_sum / n_pos as f64))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OodScore {
    pub kind: ScoreKind,
    pub auroc: f64,
    pub auprc: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OodReport {
    pub scores: Vec<OodScore>,
    pub n_id: usize,
    pub n_ood: usize,
}

pub fn ood_report(samples: &[ScoredSample], kinds: &[ScoreKind]) -> Result<OodReport> {
    let n_ood = samples.iter().filter(|s| s.is_ood).count();
    let scores = kinds
        .iter()
        .map(|&kind| auroc_auprc(samples, kind).map(|(auroc, auprc)| OodScore { kind, auroc, auprc }))
        .collect::<Result<Vec<_>>>()?;
    Ok(OodReport { scores, n_id: samples.len() - n_ood, n_ood })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionStats {
    pub mean_size: f64,
    pub coverage: f64,
    pub n: usize,
}

/// Mean region cardinality and the fraction of regions holding the true label.
pub fn region_stats(samples: &[ScoredSample]) -> Result<RegionStats> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (mut size, mut hits) = (0usize, 0usize);
    for s in samples {
        let region = s.region.as_ref().ok_or(Error::MissingField { field: "region" })?;
        let truth = s.true_label.ok_or(Error::MissingField { field: "true_label" })?;
        size += region.len();
        hits += usize::from(region.contains(&truth));
    }
    let n = samples.len() as f64;
    Ok(RegionStats { mean_size: size as f64 / n, coverage: hits as f64 / n, n: samples.len() })
}

/// Squared error between a pmf and the one-hot encoding of `label`, summed
/// over classes.
pub fn brier_score(probs: &[f64], label: usize) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let t = if j == label { 1.0 } else { 0.0 };
            (p - t) * (p - t)
        })
        .sum()
}
