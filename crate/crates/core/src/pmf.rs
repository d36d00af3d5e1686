//! Probability vectors over a finite label set and the scalar kernels that
//! act on them: Shannon entropy, entropy of unnormalized measures, categorical
//! variance and the Dirichlet posterior predictive from virtual counts.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default tolerance for accepting a raw vector as a probability vector.
pub const DEFAULT_PMF_TOLERANCE: f64 = 1e-9;

/// The label space `{0, .., k-1}` with optional human-readable names.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelSet {
    k: usize,
    names: Option<Vec<String>>,
}

impl LabelSet {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Dimension { len: k });
        }
        Ok(Self { k, names: None })
    }

    /// Names are mapped to label indices in the order given.
    pub fn with_names(names: Vec<String>) -> Result<Self> {
        let k = names.len();
        if k < 2 {
            return Err(Error::Dimension { len: k });
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidLabels("duplicate name"));
            }
        }
        Ok(Self { k, names: Some(names) })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.as_ref()?.iter().position(|n| n == name)
    }
}

/// A validated probability vector of length `k >= 2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct CategoricalPmf {
    probs: Vec<f64>,
}

impl CategoricalPmf {
    /// Validates `raw` with the default tolerance.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        validate_pmf(raw, DEFAULT_PMF_TOLERANCE)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Dimension { len: k });
        }
        Ok(Self { probs: alloc::vec![1.0 / k as f64; k] })
    }

    pub fn point_mass(k: usize, label: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Dimension { len: k });
        }
        if label >= k {
            return Err(Error::LabelOutOfRange { label, k });
        }
        let mut probs = alloc::vec![0.0; k];
        probs[label] = 1.0;
        Ok(Self { probs })
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, label: usize) -> f64 {
        self.probs[label]
    }

    /// Probability mass of a set of labels. Labels must be in range and
    /// distinct.
    pub fn mass(&self, labels: &[usize]) -> f64 {
        labels.iter().map(|&j| self.probs[j]).sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for CategoricalPmf {
    type Error = Error;

    fn try_from(raw: Vec<f64>) -> Result<Self> {
        Self::new(raw)
    }
}

impl From<CategoricalPmf> for Vec<f64> {
    fn from(p: CategoricalPmf) -> Self {
        p.probs
    }
}

impl AsRef<[f64]> for CategoricalPmf {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// Nonnegative, finite per-class evidence counts.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VirtualCounts {
    counts: Vec<f64>,
}

impl VirtualCounts {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Dimension { len: counts.len() });
        }
        if counts.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(&c) = counts.iter().find(|&&c| c < 0.0) {
            return Err(Error::InvalidParameter { name: "counts", value: c });
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }
}

/// `S >= 1` predictive pmfs over the same label set, e.g. one per random seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveEnsemble {
    members: Vec<CategoricalPmf>,
    member_ids: Option<Vec<String>>,
}

impl PredictiveEnsemble {
    pub fn new(members: Vec<CategoricalPmf>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyEnsemble)?;
        let k = first.k();
        if let Some(bad) = members.iter().find(|m| m.k() != k) {
            return Err(Error::DimensionMismatch { expected: k, found: bad.k() });
        }
        Ok(Self { members, member_ids: None })
    }

    pub fn with_ids(members: Vec<CategoricalPmf>, ids: Vec<String>) -> Result<Self> {
        if ids.len() != members.len() {
            return Err(Error::DimensionMismatch { expected: members.len(), found: ids.len() });
        }
        let mut e = Self::new(members)?;
        e.member_ids = Some(ids);
        Ok(e)
    }

    /// Builds an ensemble from raw rows, validating each with `tolerance`.
    pub fn from_rows<I, R>(rows: I, tolerance: f64) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: Into<Vec<f64>>,
    {
        let members = rows.into_iter().map(|r| validate_pmf(r.into(), tolerance)).collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[CategoricalPmf] {
        &self.members
    }

    pub fn member_ids(&self) -> Option<&[String]> {
        self.member_ids.as_deref()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn k(&self) -> usize {
        self.members[0].k()
    }

    /// The ensemble made of the first `s` members.
    pub fn prefix(&self, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::EmptyEnsemble);
        }
        if s > self.members.len() {
            return Err(Error::DimensionMismatch { expected: s, found: self.members.len() });
        }
        Ok(Self {
            members: self.members[..s].to_vec(),
            member_ids: self.member_ids.as_ref().map(|ids| ids[..s].to_vec()),
        })
    }
}

/// Checks that `raw` is a probability vector up to `tolerance` and returns it
/// renormalized.
///
/// Entries in `[-tolerance, 0)` are clamped to zero before renormalizing.
/// Vectors whose sum is already one up to rounding are returned unchanged, so
/// validating a validated vector is the identity.
pub fn validate_pmf(raw: Vec<f64>, tolerance: f64) -> Result<CategoricalPmf> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidParameter { name: "tolerance", value: tolerance });
    }
    if raw.len() < 2 {
        return Err(Error::Dimension { len: raw.len() });
    }
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let sum: f64 = raw.iter().sum();
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tolerance || libm::fabs(sum - 1.0) > tolerance {
        return Err(Error::NotAPmf { sum, min });
    }
    let mut probs = raw;
    for p in probs.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let sum: f64 = probs.iter().sum();
    if sum <= 0.0 {
        return Err(Error::NotAPmf { sum, min });
    }
    let rounding = 4.0 * probs.len() as f64 * f64::EPSILON;
    if libm::fabs(sum - 1.0) > rounding {
        for p in probs.iter_mut() {
            *p /= sum;
        }
    }
    Ok(CategoricalPmf { probs })
}

/// Posterior predictive of a Dirichlet with a flat prior updated by virtual
/// counts: `(1 + n_j) / sum_l (1 + n_l)`.
pub fn posterior_predictive(counts: &VirtualCounts) -> Result<CategoricalPmf> {
    let alpha: Vec<f64> = counts.counts.iter().map(|c| 1.0 + c).collect();
    let total: f64 = alpha.iter().sum();
    if !total.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(CategoricalPmf { probs: alpha.into_iter().map(|a| a / total).collect() })
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &CategoricalPmf) -> f64 {
    entropy_bits(&p.probs)
}

pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&x| x > 0.0).map(|&x| x * libm::log2(x)).sum::<f64>()
}

/// `-sum w_j log2 w_j` for a nonnegative measure that need not be normalized.
/// Negative once the weights exceed one.
pub fn measure_entropy(weights: &[f64]) -> Result<f64> {
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
        return Err(Error::InvalidParameter { name: "weights", value: w });
    }
    Ok(entropy_bits(weights))
}

/// Variance of the label treated as the integer `j + 1`.
pub fn categorical_variance(p: &CategoricalPmf) -> f64 {
    let mean: f64 = p.probs.iter().enumerate().map(|(j, &x)| (j + 1) as f64 * x).sum();
    p.probs
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let dev = (j + 1) as f64 - mean;
            x * dev * dev
        })
        .sum()
}

/// `(k^2 - 1) / 12`, the variance of the uniform pmf on `k` labels.
///
/// Used as the reference variance in interval decisions. It is not the true
/// maximum over all pmfs, which is `(k - 1)^2 / 4` (half the mass on each end).
pub fn max_categorical_variance(k: usize) -> f64 {
    let k = k as f64;
    (k + 1.0) * (k - 1.0) / 12.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pmf(v: &[f64]) -> CategoricalPmf {
        CategoricalPmf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validate_accepts_and_rejects() {
        assert_eq!(pmf(&[0.5, 0.5]).probs(), &[0.5, 0.5]);
        assert_eq!(pmf(&[0.7, 0.2, 0.08, 0.02]).probs(), &[0.7, 0.2, 0.08, 0.02]);
        assert!(matches!(validate_pmf(vec![0.5, 0.6], 1e-9), Err(Error::NotAPmf { .. })));
        assert!(matches!(validate_pmf(vec![1.0], 1e-9), Err(Error::Dimension { len: 1 })));
        assert!(matches!(validate_pmf(vec![f64::NAN, 1.0], 1e-9), Err(Error::NonFinite)));
        assert!(matches!(validate_pmf(vec![-0.1, 1.1], 1e-9), Err(Error::NotAPmf { .. })));
    }

    #[test]
    fn validate_clamps_small_negatives() {
        let p = validate_pmf(vec![-1e-12, 0.5, 0.5 + 1e-12], 1e-9).unwrap();
        assert_eq!(p.get(0), 0.0);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn posterior_predictive_examples() {
        let p = posterior_predictive(&VirtualCounts::new(vec![0.0, 0.0, 0.0]).unwrap()).unwrap();
        for &x in p.probs() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = posterior_predictive(&VirtualCounts::new(vec![9.0, 0.0]).unwrap()).unwrap();
        // (1 + 9) / ((1 + 9) + (1 + 0))
        assert!((p.get(0) - 10.0 / 11.0).abs() < 1e-15);
        assert!((p.get(1) - 1.0 / 11.0).abs() < 1e-15);
        let p = posterior_predictive(&VirtualCounts::new(vec![1.0; 4]).unwrap()).unwrap();
        assert_eq!(p.probs(), &[0.25; 4]);
        assert!(VirtualCounts::new(vec![f64::INFINITY, 0.0]).is_err());
        assert!(VirtualCounts::new(vec![-1.0, 0.0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&CategoricalPmf::uniform(4).unwrap()) - 2.0).abs() < 1e-12);
        assert_eq!(entropy(&CategoricalPmf::point_mass(5, 0).unwrap()), 0.0);
        let h = entropy(&pmf(&[0.7, 0.2, 0.08, 0.02]));
        assert!((h - 1.23).abs() < 0.01, "{h}");
    }

    #[test]
    fn measure_entropy_examples() {
        let w: Vec<f64> = [0.7, 0.2, 0.08, 0.02].iter().map(|x| x * 2.58).collect();
        let h = measure_entropy(&w).unwrap();
        assert!((h + 0.36).abs() < 0.01, "{h}");
        let p = pmf(&[0.1, 0.6, 0.3]);
        assert_eq!(measure_entropy(p.probs()).unwrap(), entropy(&p));
        assert_eq!(measure_entropy(&[0.0; 3]).unwrap(), 0.0);
        assert_eq!(measure_entropy(&[f64::NAN, 1.0]), Err(Error::NonFinite));
    }

    #[test]
    fn variance_examples() {
        assert_eq!(categorical_variance(&pmf(&[0.0, 1.0, 0.0])), 0.0);
        assert_eq!(categorical_variance(&CategoricalPmf::uniform(10).unwrap()), 8.25);
        assert_eq!(categorical_variance(&pmf(&[0.5, 0.5])), 0.25);
    }

    #[test]
    fn label_set_rules() {
        assert!(LabelSet::new(1).is_err());
        let names = vec![String::from("cat"), String::from("dog")];
        let ls = LabelSet::with_names(names).unwrap();
        assert_eq!(ls.index_of("dog"), Some(1));
        assert!(LabelSet::with_names(vec![String::from("a"), String::from("a")]).is_err());
    }

    #[test]
    fn ensemble_rejects_mixed_dimensions() {
        let e = PredictiveEnsemble::new(vec![pmf(&[0.5, 0.5]), pmf(&[0.2, 0.3, 0.5])]);
        assert_eq!(e, Err(Error::DimensionMismatch { expected: 2, found: 3 }));
        assert_eq!(PredictiveEnsemble::new(vec![]), Err(Error::EmptyEnsemble));
    }
}
