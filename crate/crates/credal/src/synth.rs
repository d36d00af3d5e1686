//! Synthetic ensembles standing in for trained networks.
//!
//! Every sample draws a base pmf `pi ~ Dir(concentration * 1)`, then each of
//! its `s` members from `Dir(spread * k * pi)`, and a label from `pi`. The
//! in-distribution block comes first, then the out-of-distribution block,
//! each with its own concentration and spread. The generator is ChaCha8
//! seeded with `seed` through `SeedableRng::seed_from_u64`.

use std::path::Path;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{Rows, SampleRecord};

/// Shape parameters below this are raised to it so every Gamma draw is valid.
const MIN_SHAPE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub k: usize,
    pub s: usize,
    pub n_id: usize,
    pub n_ood: usize,
    pub concentration_id: f64,
    pub concentration_ood: f64,
    pub spread_id: f64,
    pub spread_ood: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// The reference corpus: ten classes, three members, 2000 samples per
    /// population, with sharp agreeing members in distribution and flat
    /// disagreeing members out of it.
    fn default() -> Self {
        SyntheticSpec {
            k: 10,
            s: 3,
            n_id: 2000,
            n_ood: 2000,
            concentration_id: 0.1,
            concentration_ood: 1.0,
            spread_id: 50.0,
            spread_ood: 0.5,
            seed: 20240917,
        }
    }
}

impl SyntheticSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SyntheticSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        for (name, n) in [("s", self.s), ("n_id", self.n_id), ("n_ood", self.n_ood)] {
            if n == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        for (name, v) in [
            ("concentration_id", self.concentration_id),
            ("concentration_ood", self.concentration_ood),
            ("spread_id", self.spread_id),
            ("spread_ood", self.spread_ood),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

fn dirichlet<R: Rng>(rng: &mut R, alpha: impl Iterator<Item = f64>) -> Vec<f64> {
    let alpha: Vec<f64> = alpha.map(|a| a.max(MIN_SHAPE)).collect();
    let draws: Vec<f64> = alpha.iter().map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        return draws.iter().map(|x| x / total).collect();
    }
    // Every draw underflowed: fall back to a point mass on the largest shape.
    let top = (0..alpha.len()).fold(0, |best, j| if alpha[j] > alpha[best] { j } else { best });
    (0..alpha.len()).map(|j| if j == top { 1.0 } else { 0.0 }).collect()
}

fn sample<R: Rng>(rng: &mut R, k: usize, s: usize, concentration: f64, spread: f64) -> (Vec<Vec<f64>>, usize) {
    let base = dirichlet(rng, std::iter::repeat_n(concentration, k));
    let members = (0..s).map(|_| dirichlet(rng, base.iter().map(|&p| spread * k as f64 * p))).collect();
    let label = WeightedIndex::new(&base).expect("base pmf has positive mass").sample(rng);
    (members, label)
}

/// Generates `n_id + n_ood` records. The output is a pure function of `spec`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<SampleRecord>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.n_id + spec.n_ood);
    let populations = [
        ("id", spec.n_id, spec.concentration_id, spec.spread_id, false),
        ("ood", spec.n_ood, spec.concentration_ood, spec.spread_ood, true),
    ];
    for (prefix, n, conc, spread, is_ood) in populations {
        for i in 0..n {
            let (members, label) = sample(&mut rng, spec.k, spec.s, conc, spread);
            out.push(SampleRecord {
                id: format!("{prefix}-{i:05}"),
                rows: Rows::Probabilities(members),
                true_label: Some(label),
                is_ood: Some(is_ood),
            });
        }
    }
    Ok(out)
}
