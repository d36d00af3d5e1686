//! The predictive credal set spanned by an ensemble, its lower and upper
//! probabilities, and the entropy-based decomposition of predictive
//! uncertainty.
//!
//! With `h_s` the entropy of extreme point `s` and `M` the number of extremes:
//!
//! | Quantity | Value |
//! |----------|-------|
//! | AU (lower entropy) | `min_s h_s` |
//! | TU lower bound | `max_s h_s` |
//! | TU upper bound, tight | `log2 sum_s 2^h_s` |
//! | TU upper bound, loose `u[TU]` | `max_s h_s + log2 M` |
//! | TU exact (optional) | `max_beta H(sum_s beta_s P_s)` |
//! | EU bounds | `[max(0, TU_lower - AU), u[TU] - AU]` |
//!
//! The tight bound maximizes `sum_s beta_s h_s + H(beta)` over the simplex,
//! which upper-bounds the entropy of any mixture.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hull::{reduce_to_extremes, HullOptions};
use crate::maxent::{exact_upper_entropy, MaxEntOptions};
use crate::pmf::{entropy, CategoricalPmf, PredictiveEnsemble};

/// A finitely generated credal set, stored as its extreme points.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalSet {
    extremes: Vec<CategoricalPmf>,
    source_indices: Vec<usize>,
}

impl CredalSet {
    pub(crate) fn from_parts(extremes: Vec<CategoricalPmf>, source_indices: Vec<usize>) -> Self {
        debug_assert!(!extremes.is_empty());
        debug_assert_eq!(extremes.len(), source_indices.len());
        Self { extremes, source_indices }
    }

    /// Reduces `ensemble` to its extreme points with default tolerances.
    pub fn from_ensemble(ensemble: &PredictiveEnsemble) -> Result<Self> {
        reduce_to_extremes(ensemble, HullOptions::default())
    }

    /// The credal set of a single precise distribution.
    pub fn precise(p: CategoricalPmf) -> Self {
        Self { extremes: alloc::vec![p], source_indices: alloc::vec![0] }
    }

    pub fn extremes(&self) -> &[CategoricalPmf] {
        &self.extremes
    }

    /// Index of each extreme in the ensemble it was reduced from.
    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    pub fn len(&self) -> usize {
        self.extremes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.extremes.is_empty()
    }

    pub fn k(&self) -> usize {
        self.extremes[0].k()
    }

    /// The extremes as an ensemble, e.g. to reduce them again.
    pub fn to_ensemble(&self) -> PredictiveEnsemble {
        PredictiveEnsemble::new(self.extremes.clone()).expect("credal sets are nonempty and share k")
    }

    /// `min_s P_s({label})` for every label.
    pub fn singleton_lower(&self) -> Vec<f64> {
        (0..self.k()).map(|j| self.extremes.iter().map(|p| p.get(j)).fold(f64::INFINITY, f64::min)).collect()
    }

    /// `max_s P_s({label})` for every label.
    pub fn singleton_upper(&self) -> Vec<f64> {
        (0..self.k()).map(|j| self.extremes.iter().map(|p| p.get(j)).fold(0.0, f64::max)).collect()
    }

    /// Lower probability of the labels selected by `mask`. Callers guarantee
    /// `mask.len() == k`.
    pub(crate) fn lower_of_mask(&self, mask: &[bool]) -> f64 {
        let count = mask.iter().filter(|&&b| b).count();
        if count == 0 {
            return 0.0;
        }
        if count == mask.len() {
            return 1.0;
        }
        self.extremes
            .iter()
            .map(|p| p.probs().iter().zip(mask).filter(|(_, &m)| m).map(|(x, _)| x).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower probability of the set encoded by the low `k` bits of `bits`.
    pub(crate) fn lower_of_bits(&self, bits: u32) -> f64 {
        let k = self.k();
        let full = (1u32 << k) - 1;
        if bits == 0 {
            return 0.0;
        }
        if bits == full {
            return 1.0;
        }
        self.extremes
            .iter()
            .map(|p| p.probs().iter().enumerate().filter(|(j, _)| bits >> j & 1 == 1).map(|(_, x)| x).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn label_mask(k: usize, subset: &[usize]) -> Result<Vec<bool>> {
    let mut mask = alloc::vec![false; k];
    for &label in subset {
        if label >= k {
            return Err(Error::LabelOutOfRange { label, k });
        }
        mask[label] = true;
    }
    Ok(mask)
}

/// `min` over the extremes of the mass they assign to `subset`.
pub fn lower_probability(cs: &CredalSet, subset: &[usize]) -> Result<f64> {
    Ok(cs.lower_of_mask(&label_mask(cs.k(), subset)?))
}

/// Upper probability, computed through conjugacy as `1 - lower(complement)`.
pub fn upper_probability(cs: &CredalSet, subset: &[usize]) -> Result<f64> {
    let mut mask = label_mask(cs.k(), subset)?;
    if mask.iter().all(|&b| !b) {
        return Ok(0.0);
    }
    mask.iter_mut().for_each(|b| *b = !*b);
    Ok(1.0 - cs.lower_of_mask(&mask))
}

/// Which measure produced a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum UncertaintyMeasure {
    Entropy,
    Hartley,
}

/// Aleatoric, epistemic and total uncertainty of a credal set, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UncertaintyDecomposition {
    pub au: f64,
    pub tu_lower: f64,
    pub tu_upper_loose: f64,
    pub tu_upper_tight: f64,
    pub tu_exact: Option<f64>,
    pub eu_lower: f64,
    pub eu_upper: f64,
    pub measure: UncertaintyMeasure,
}

impl UncertaintyDecomposition {
    /// AU as a share of the loose TU bound; 1 when the bound is zero.
    pub fn au_ratio(&self) -> f64 {
        if self.tu_upper_loose > 0.0 {
            self.au / self.tu_upper_loose
        } else {
            1.0
        }
    }

    /// AU as a share of the tight TU bound; 1 when the bound is zero.
    pub fn au_ratio_tight(&self) -> f64 {
        if self.tu_upper_tight > 0.0 {
            self.au / self.tu_upper_tight
        } else {
            1.0
        }
    }
}

/// Entropy-based decomposition. With `exact` set, also maximizes the entropy
/// over the credal set with default solver options.
pub fn entropy_decomposition(cs: &CredalSet, exact: bool) -> Result<UncertaintyDecomposition> {
    entropy_decomposition_with(cs, exact.then(MaxEntOptions::default))
}

pub fn entropy_decomposition_with(cs: &CredalSet, exact: Option<MaxEntOptions>) -> Result<UncertaintyDecomposition> {
    let h: Vec<f64> = cs.extremes.iter().map(entropy).collect();
    let au = h.iter().copied().fold(f64::INFINITY, f64::min);
    let h_max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = h.len() as f64;
    let tu_upper_tight = h_max + libm::log2(h.iter().map(|&x| libm::exp2(x - h_max)).sum::<f64>());
    let tu_upper_loose = h_max + libm::log2(m);
    let tu_exact = match exact {
        Some(opts) => Some(exact_upper_entropy(cs, opts)?),
        None => None,
    };
    Ok(UncertaintyDecomposition {
        au,
        tu_lower: h_max,
        tu_upper_loose,
        tu_upper_tight,
        tu_exact,
        eu_lower: f64::max(0.0, h_max - au),
        eu_upper: tu_upper_loose - au,
        measure: UncertaintyMeasure::Entropy,
    })
}
