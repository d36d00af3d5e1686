//! Interval-of-measures model around a single predictive pmf.
//!
//! The model `I(l, (1+d) l)` contains every pmf obtained by normalizing a
//! measure sandwiched between `l` and `(1+d) l`. Its lower and upper
//! probabilities have closed forms, its imprecise highest-density region at
//! level `gamma` is the precise highest-density region of `l` at the reduced
//! level `xi(d) = gamma / (1 + (1-gamma) d)`, and its uncertainty is measured
//! by the variance of the inflated label, `(1+d)^2 V[Y]`.

use alloc::vec::Vec;

use crate::credal::label_mask;
use crate::error::{Error, Result};
use crate::ihdr::{DecisionKind, Ihdr, IhdrMethod, COVERAGE_TOL};
use crate::pmf::{categorical_variance, max_categorical_variance, CategoricalPmf};

/// Tolerance for deciding that a region's mass equals `1 - gamma` exactly.
pub const EQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalModel {
    base: CategoricalPmf,
    d: f64,
}

impl IntervalModel {
    pub fn new(base: CategoricalPmf, d: f64) -> Result<Self> {
        if !d.is_finite() || d < 0.0 {
            return Err(Error::InvalidParameter { name: "d", value: d });
        }
        Ok(Self { base, d })
    }

    pub fn base(&self) -> &CategoricalPmf {
        &self.base
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// Lower and upper probability of `subset` under the interval model:
///
/// ```text
/// lower(A) = l(A) / (l(A) + (1+d) l(A^c))
/// upper(A) = (1+d) l(A) / ((1+d) l(A) + l(A^c))
/// ```
///
/// A nonempty set with `l(A) = 0` gets `(0, 0)`, the limit as its mass
/// vanishes; its complement then gets `(1, 1)`, so conjugacy holds.
pub fn interval_lower_upper(model: &IntervalModel, subset: &[usize]) -> Result<(f64, f64)> {
    let mask = label_mask(model.base.k(), subset)?;
    let (mut inside, mut outside) = (0.0, 0.0);
    for (&p, &m) in model.base.probs().iter().zip(&mask) {
        if m {
            inside += p;
        } else {
            outside += p;
        }
    }
    if mask.iter().all(|&m| !m) {
        return Ok((0.0, 0.0));
    }
    if mask.iter().all(|&m| m) {
        return Ok((1.0, 1.0));
    }
    if inside == 0.0 {
        return Ok((0.0, 0.0));
    }
    let s = 1.0 + model.d;
    Ok((inside / (inside + s * outside), s * inside / (s * inside + outside)))
}

/// Reduced miscoverage `gamma / (1 + (1 - gamma) d)`.
pub fn xi_of_d(gamma: f64, d: f64) -> f64 {
    gamma / (1.0 + (1.0 - gamma) * d)
}

/// Labels by descending probability, ties ascending by index.
fn by_probability(p: &CategoricalPmf) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.k()).collect();
    order.sort_by(|&a, &b| p.get(b).total_cmp(&p.get(a)).then(a.cmp(&b)));
    order
}

/// Smallest set of most probable labels with mass at least `1 - xi`, sorted
/// ascending. Never empty: `xi = 1` gives the top label.
pub fn precise_hdr(p: &CategoricalPmf, xi: f64) -> Vec<usize> {
    let mut labels = Vec::new();
    let mut mass = 0.0;
    for j in by_probability(p) {
        labels.push(j);
        mass += p.get(j);
        if mass >= 1.0 - xi - COVERAGE_TOL {
            break;
        }
    }
    labels.sort_unstable();
    labels
}

/// The `(1 - gamma)` region of `p`, plus the next most probable label when
/// its mass equals `1 - gamma` exactly.
pub fn augmented_region(p: &CategoricalPmf, gamma: f64) -> Vec<usize> {
    let mut region = precise_hdr(p, gamma);
    let mass = p.mass(&region);
    if mass > 1.0 - gamma + EQUALITY_TOL {
        return region;
    }
    let next = by_probability(p).into_iter().find(|j| !region.contains(j));
    if let Some(j) = next {
        let pos = region.partition_point(|&x| x < j);
        region.insert(pos, j);
    }
    region
}

/// The inflation factor that aligns the interval model's coverage with the
/// actual coverage of the augmented region.
#[derive(Debug, Clone, PartialEq)]
pub struct Inflation {
    pub d_star: f64,
    /// Mass outside `region`.
    pub xi: f64,
    pub region: Vec<usize>,
}

/// Solves `xi = gamma / (1 + (1 - gamma) d*)` where `1 - xi` is the mass of
/// [`augmented_region`]. Fails with `DegenerateCoverage` when that region
/// carries all the mass.
pub fn optimal_d(p: &CategoricalPmf, gamma: f64) -> Result<Inflation> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter { name: "gamma", value: gamma });
    }
    let region = augmented_region(p, gamma);
    let xi: f64 = (0..p.k()).filter(|j| !region.contains(j)).map(|j| p.get(j)).sum();
    if xi <= 0.0 {
        return Err(Error::DegenerateCoverage);
    }
    let d_star = f64::max(0.0, (gamma - xi) / (xi * (1.0 - gamma)));
    Ok(Inflation { d_star, xi, region })
}

/// Variance-based uncertainty of the inflated label.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntervalDecomposition {
    pub au: f64,
    pub eu: f64,
    pub tu: f64,
    pub d_used: f64,
}

/// `AU = V[Y]`, `TU = (1+d)^2 AU`, `EU = (d^2 + 2d) AU`.
pub fn variance_decomposition(p: &CategoricalPmf, d: f64) -> IntervalDecomposition {
    let au = categorical_variance(p);
    let s = 1.0 + d;
    IntervalDecomposition { au, eu: (d * d + 2.0 * d) * au, tu: s * s * au, d_used: d }
}

/// How far the interval model's upper probability of its own region exceeds
/// `1 - gamma`. Zero at `d = 0`, tends to `gamma` as `d` grows.
pub fn conservativeness(gamma: f64, d: f64) -> f64 {
    if d.is_infinite() {
        return gamma;
    }
    // Divided through by (1 + d)^2 so large d cannot overflow.
    let t = 1.0 / ((1.0 + d) * (1.0 + d));
    gamma * (1.0 - gamma) * (1.0 - t) / ((1.0 - gamma) + gamma * t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDecision {
    pub kind: DecisionKind,
    pub region: Option<Ihdr>,
    pub decomposition: IntervalDecomposition,
    /// Infinite when `infinite_inflation` is set.
    pub d_star: f64,
    pub xi: f64,
    /// `V[(1+d*) Y_max] - V[(1+d*) Y]`; `-inf` under infinite inflation.
    pub slack: f64,
    pub conservativeness: f64,
    /// The augmented region carried all the mass, so `d*` is unbounded.
    pub infinite_inflation: bool,
}

/// Fits `d*`, compares the inflated variance with its maximum over all pmfs,
/// and either returns the region `R_xi(d*)` or abstains. Abstentions are
/// aleatoric when `(1+d*)^-2 >= 1/2`, epistemic otherwise. Degenerate
/// coverage is reported as an epistemic abstention with infinite inflation.
pub fn idec_decide(p: &CategoricalPmf, gamma: f64, epsilon: f64) -> Result<IntervalDecision> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
    }
    let inflation = match optimal_d(p, gamma) {
        Ok(inf) => inf,
        Err(Error::DegenerateCoverage) => {
            let au = categorical_variance(p);
            let unbounded = if au > 0.0 { f64::INFINITY } else { 0.0 };
            return Ok(IntervalDecision {
                kind: DecisionKind::AbstainEpistemic,
                region: None,
                decomposition: IntervalDecomposition { au, eu: unbounded, tu: unbounded, d_used: f64::INFINITY },
                d_star: f64::INFINITY,
                xi: 0.0,
                slack: f64::NEG_INFINITY,
                conservativeness: gamma,
                infinite_inflation: true,
            });
        }
        Err(e) => return Err(e),
    };
    let d = inflation.d_star;
    let decomposition = variance_decomposition(p, d);
    let s2 = (1.0 + d) * (1.0 + d);
    // Equal to s2 * V_max - tu, factored so it stays finite when s2 overflows.
    let slack = s2 * (max_categorical_variance(p.k()) - decomposition.au);
    let xi = xi_of_d(gamma, d);
    let kind = if slack >= epsilon {
        DecisionKind::Predict
    } else if 1.0 / s2 >= 0.5 {
        DecisionKind::AbstainAleatoric
    } else {
        DecisionKind::AbstainEpistemic
    };
    let region = (kind == DecisionKind::Predict)
        .then(|| {
            let labels = precise_hdr(p, xi);
            let model = IntervalModel::new(p.clone(), d)?;
            let (lower, _) = interval_lower_upper(&model, &labels)?;
            Ok::<_, Error>(Ihdr { labels, achieved_lower_prob: lower, gamma, method: IhdrMethod::Exact })
        })
        .transpose()?;
    Ok(IntervalDecision {
        kind,
        region,
        decomposition,
        d_star: d,
        xi,
        slack,
        conservativeness: conservativeness(gamma, d),
        infinite_inflation: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ell() -> CategoricalPmf {
        CategoricalPmf::new(vec![0.7, 0.2, 0.08, 0.02]).unwrap()
    }

    #[test]
    fn worked_singleton_bounds() {
        let m = IntervalModel::new(ell(), 1.58).unwrap();
        let (lo, hi) = interval_lower_upper(&m, &[0]).unwrap();
        assert!((lo - 0.4749).abs() < 5e-5 && (hi - 0.8575).abs() < 5e-5, "{lo} {hi}");
        let (lo, hi) = interval_lower_upper(&m, &[3]).unwrap();
        assert!((lo - 0.0078).abs() < 5e-5 && (hi - 0.05).abs() < 5e-4, "{lo} {hi}");
    }

    #[test]
    fn precise_limit() {
        let m = IntervalModel::new(ell(), 0.0).unwrap();
        let (lo, hi) = interval_lower_upper(&m, &[1, 2]).unwrap();
        assert!((lo - 0.28).abs() < 1e-15 && (hi - 0.28).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_set() {
        let p = CategoricalPmf::new(vec![0.5, 0.5, 0.0]).unwrap();
        let m = IntervalModel::new(p, 2.0).unwrap();
        assert_eq!(interval_lower_upper(&m, &[2]).unwrap(), (0.0, 0.0));
        assert_eq!(interval_lower_upper(&m, &[0, 1]).unwrap(), (1.0, 1.0));
        assert!(IntervalModel::new(ell(), -1.0).is_err());
    }

    #[test]
    fn xi_examples() {
        assert!((xi_of_d(0.05, 1.58) - 0.0199).abs() < 1e-4);
        assert_eq!(xi_of_d(0.05, 0.0), 0.05);
        assert_eq!(xi_of_d(0.0, 3.0), 0.0);
    }

    #[test]
    fn hdr_examples() {
        assert_eq!(precise_hdr(&ell(), 0.05), vec![0, 1, 2]);
        assert_eq!(precise_hdr(&ell(), 1.0), vec![0]);
        assert_eq!(precise_hdr(&CategoricalPmf::uniform(4).unwrap(), 0.3), vec![0, 1, 2]);
    }

    #[test]
    fn augmented_examples() {
        assert_eq!(augmented_region(&ell(), 0.05), vec![0, 1, 2]);
        let p = CategoricalPmf::new(vec![0.95, 0.05]).unwrap();
        assert_eq!(augmented_region(&p, 0.05), vec![0, 1]);
        assert_eq!(augmented_region(&CategoricalPmf::point_mass(3, 0).unwrap(), 0.1), vec![0]);
    }

    #[test]
    fn optimal_d_worked_example() {
        let inf = optimal_d(&ell(), 0.05).unwrap();
        assert_eq!(inf.region, vec![0, 1, 2]);
        assert!((inf.xi - 0.02).abs() < 1e-12);
        assert!((inf.d_star - 30.0 / 19.0).abs() < 1e-9);
        assert!((xi_of_d(0.05, inf.d_star) - inf.xi).abs() < 1e-12);
    }

    #[test]
    fn optimal_d_degenerate() {
        let p = CategoricalPmf::uniform(2).unwrap();
        assert_eq!(optimal_d(&p, 0.25), Err(Error::DegenerateCoverage));
    }

    #[test]
    fn optimal_d_near_equality_is_large() {
        // Region {0} has mass 0.9 + delta against 1 - gamma = 0.9.
        let delta = 1e-6;
        let p = CategoricalPmf::new(vec![0.9 + delta, 0.1 - delta]).unwrap();
        let inf = optimal_d(&p, 0.1).unwrap();
        let xi = 0.1 - delta;
        assert!((inf.d_star - (0.1 - xi) / (xi * 0.9)).abs() < 1e-9);
    }

    #[test]
    fn variance_examples() {
        let d = variance_decomposition(&ell(), 0.0);
        assert_eq!(d.eu, 0.0);
        assert_eq!(d.tu, d.au);
        let d = variance_decomposition(&CategoricalPmf::point_mass(4, 2).unwrap(), 3.0);
        assert_eq!((d.au, d.eu, d.tu), (0.0, 0.0, 0.0));
        let d = variance_decomposition(&CategoricalPmf::uniform(10).unwrap(), 1.0);
        assert_eq!((d.au, d.tu, d.eu), (8.25, 33.0, 24.75));
    }

    #[test]
    fn conservativeness_examples() {
        assert_eq!(conservativeness(0.05, 0.0), 0.0);
        let c = conservativeness(0.05, 1.58);
        assert!(c > 0.0 && c < 0.05);
        assert!((conservativeness(0.1, 1e6) - 0.1).abs() < 1e-4);
        assert_eq!(conservativeness(0.1, 1e300), 0.1);
    }

    #[test]
    fn near_point_mass_stays_finite() {
        let p = CategoricalPmf::new(vec![1.0 - 1e-300, 1e-300, 0.0]).unwrap();
        let dec = idec_decide(&p, 0.05, 1.0).unwrap();
        assert!(dec.d_star.is_finite() && dec.d_star > 1e290);
        assert_eq!(dec.kind, DecisionKind::Predict);
        assert_eq!(dec.region.unwrap().labels, vec![0]);
        assert!((dec.conservativeness - 0.05).abs() < 1e-15);
    }

    #[test]
    fn idec_worked_example_predicts() {
        let dec = idec_decide(&ell(), 0.05, 1.0).unwrap();
        assert_eq!(dec.kind, DecisionKind::Predict);
        let r = dec.region.unwrap();
        assert_eq!(r.labels, vec![0, 1, 2]);
        assert!((r.achieved_lower_prob - 0.95).abs() < 1e-12);
        assert!((dec.d_star - 30.0 / 19.0).abs() < 1e-9);
    }

    #[test]
    fn idec_uniform_is_degenerate() {
        let dec = idec_decide(&CategoricalPmf::uniform(4).unwrap(), 0.05, 1.0).unwrap();
        assert_eq!(dec.kind, DecisionKind::AbstainEpistemic);
        assert!(dec.infinite_inflation);
        assert!(dec.region.is_none());
    }

    #[test]
    fn idec_small_inflation_abstains_aleatoric() {
        // Region {0, 1} has mass 0.955, so xi = 0.045 and d* = 0.005 / (0.045 * 0.95).
        let p = CategoricalPmf::new(vec![0.48, 0.475, 0.045]).unwrap();
        let dec = idec_decide(&p, 0.05, 1e6).unwrap();
        assert!(dec.d_star <= core::f64::consts::SQRT_2 - 1.0, "{}", dec.d_star);
        assert_eq!(dec.kind, DecisionKind::AbstainAleatoric);
    }
}
