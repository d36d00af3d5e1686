//! Imprecise highest-density regions over credal sets and the credal
//! predict-or-abstain rule.
//!
//! A `(1 - gamma)` imprecise highest-density region is a smallest label set
//! whose lower probability is at least `1 - gamma`, so every distribution in
//! the credal set gives it at least that much mass.

use alloc::vec::Vec;

use crate::credal::{entropy_decomposition_with, label_mask, CredalSet, UncertaintyDecomposition};
use crate::error::{Error, Result};
use crate::hull::{reduce_to_extremes, HullOptions};
use crate::maxent::MaxEntOptions;
use crate::pmf::PredictiveEnsemble;

/// Slack allowed when comparing a lower probability to `1 - gamma`.
pub const COVERAGE_TOL: f64 = 1e-12;

/// Largest label count accepted by [`ihdr_exact`].
pub const MAX_EXACT_CLASSES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum IhdrMethod {
    Greedy,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ihdr {
    /// Sorted ascending.
    pub labels: Vec<usize>,
    pub achieved_lower_prob: f64,
    pub gamma: f64,
    pub method: IhdrMethod,
}

impl Ihdr {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: usize) -> bool {
        self.labels.binary_search(&label).is_ok()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "gamma", value: gamma })
    }
}

fn covers(lower: f64, gamma: f64) -> bool {
    lower >= 1.0 - gamma - COVERAGE_TOL
}

/// Labels sorted by decreasing singleton lower probability; ties go to the
/// larger singleton upper probability, then to the smaller index.
fn greedy_order(cs: &CredalSet) -> Vec<usize> {
    let lower = cs.singleton_lower();
    let upper = cs.singleton_upper();
    let mut order: Vec<usize> = (0..cs.k()).collect();
    order.sort_by(|&a, &b| lower[b].total_cmp(&lower[a]).then(upper[b].total_cmp(&upper[a])).then(a.cmp(&b)));
    order
}

/// Adds labels in [`greedy_order`] until the set's lower probability reaches
/// `1 - gamma`. Always covers; not guaranteed minimal. `gamma = 1` yields the
/// top label.
pub fn ihdr_greedy(cs: &CredalSet, gamma: f64) -> Result<Ihdr> {
    check_gamma(gamma)?;
    let k = cs.k();
    let mut mask = alloc::vec![false; k];
    let mut achieved = 0.0;
    for &label in &greedy_order(cs) {
        mask[label] = true;
        achieved = cs.lower_of_mask(&mask);
        if covers(achieved, gamma) {
            break;
        }
    }
    let labels = (0..k).filter(|&j| mask[j]).collect();
    Ok(Ihdr { labels, achieved_lower_prob: achieved, gamma, method: IhdrMethod::Greedy })
}

/// A minimum-cardinality covering set found by enumeration. Among sets of
/// the minimum size, the one with the largest lower probability wins, then
/// the lexicographically smallest.
pub fn ihdr_exact(cs: &CredalSet, gamma: f64) -> Result<Ihdr> {
    check_gamma(gamma)?;
    let k = cs.k();
    if k > MAX_EXACT_CLASSES {
        return Err(Error::TooManyClasses { k, max: MAX_EXACT_CLASSES });
    }
    // Descending copies of each extreme: the top-c mass of every extreme
    // bounds the lower probability of any c-set from above.
    let sorted: Vec<Vec<f64>> = cs
        .extremes()
        .iter()
        .map(|p| {
            let mut v = p.probs().to_vec();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        })
        .collect();

    for size in 1..=k {
        let cap = sorted.iter().map(|v| v[..size].iter().sum::<f64>()).fold(f64::INFINITY, f64::min);
        if size < k && !covers(cap, gamma) {
            continue;
        }
        let mut best: Option<(u32, f64)> = None;
        for_each_combination(k, size, |bits| {
            let lower = cs.lower_of_bits(bits);
            if covers(lower, gamma) && best.is_none_or(|(_, b)| lower > b) {
                best = Some((bits, lower));
            }
        });
        if let Some((bits, lower)) = best {
            let labels = (0..k).filter(|&j| bits >> j & 1 == 1).collect();
            return Ok(Ihdr { labels, achieved_lower_prob: lower, gamma, method: IhdrMethod::Exact });
        }
    }
    unreachable!("the full label set always covers")
}

/// Visits every `size`-subset of `0..k` as a bitmask, in lexicographic order
/// of the sorted label lists.
fn for_each_combination(k: usize, size: usize, mut f: impl FnMut(u32)) {
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(idx.iter().fold(0u32, |acc, &j| acc | 1 << j));
        let mut i = size;
        while i > 0 && idx[i - 1] == i - 1 + k - size {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        i -= 1;
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Sum of singleton lower probabilities over `subset`, a lower bound on the
/// lower probability of the set by superadditivity.
pub fn ihdr_lower_bound(cs: &CredalSet, subset: &[usize]) -> Result<f64> {
    let mask = label_mask(cs.k(), subset)?;
    let lower = cs.singleton_lower();
    Ok(lower.iter().zip(&mask).filter(|(_, &m)| m).map(|(x, _)| x).sum())
}

/// Labels with the highest singleton lower probability; all of them on ties.
pub fn cdec_point_prediction(cs: &CredalSet) -> Vec<usize> {
    let lower = cs.singleton_lower();
    let best = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..lower.len()).filter(|&j| lower[j] >= best - COVERAGE_TOL).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DecisionKind {
    Predict,
    AbstainAleatoric,
    AbstainEpistemic,
}

impl DecisionKind {
    pub fn is_abstention(self) -> bool {
        !matches!(self, DecisionKind::Predict)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CdecOptions {
    pub hull: HullOptions,
    /// Use [`ihdr_exact`] when `k <= 20`.
    pub exact_ihdr: bool,
    /// Also compute the exact upper entropy for reporting.
    pub exact_tu: Option<MaxEntOptions>,
}

/// Outcome of the credal procedure for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub kind: DecisionKind,
    /// The emitted region; present iff `kind` is `Predict`.
    pub region: Option<Ihdr>,
    /// The region the credal set supports, computed whether or not the rule
    /// predicts. Used for region statistics across abstentions.
    pub ihdr: Ihdr,
    pub decomposition: UncertaintyDecomposition,
    /// `log2 k - u[TU]`.
    pub slack: f64,
    pub n_extremes: usize,
    pub point_prediction: Vec<usize>,
}

/// Reduces the ensemble, bounds the total uncertainty, and either returns the
/// `(1 - gamma)` region or abstains. Abstentions are aleatoric when AU is at
/// least half of the loose TU bound, epistemic otherwise.
pub fn cdec_decide(ensemble: &PredictiveEnsemble, gamma: f64, epsilon: f64, opts: &CdecOptions) -> Result<Decision> {
    check_gamma(gamma)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
    }
    let cs = reduce_to_extremes(ensemble, opts.hull)?;
    let decomposition = entropy_decomposition_with(&cs, opts.exact_tu)?;
    let k = cs.k();
    let slack = libm::log2(k as f64) - decomposition.tu_upper_loose;
    let ihdr =
        if opts.exact_ihdr && k <= MAX_EXACT_CLASSES { ihdr_exact(&cs, gamma)? } else { ihdr_greedy(&cs, gamma)? };
    let kind = if slack >= epsilon {
        DecisionKind::Predict
    } else if decomposition.au_ratio() >= 0.5 {
        DecisionKind::AbstainAleatoric
    } else {
        DecisionKind::AbstainEpistemic
    };
    Ok(Decision {
        kind,
        region: (kind == DecisionKind::Predict).then(|| ihdr.clone()),
        ihdr,
        decomposition,
        slack,
        n_extremes: cs.len(),
        point_prediction: cdec_point_prediction(&cs),
    })
}
