use std::path::Path;

use credal_core::{CdecOptions, HullOptions, MaxEntOptions};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cdec,
    Idec,
}

/// Parameters shared by the decision verbs. Read from a flat TOML document;
/// missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub mode: Mode,
    pub exact_ihdr: bool,
    /// Also maximize the entropy over each credal set (CDEC).
    pub exact_tu: bool,
    pub n_bins: usize,
    pub dup_tol: f64,
    pub hull_tol: f64,
    pub opt_tol: f64,
    pub seed: u64,
    /// Ensemble sizes for `ablate`.
    pub grid: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let hull = HullOptions::default();
        RunConfig {
            gamma: 0.05,
            epsilon: 0.5,
            mode: Mode::Cdec,
            exact_ihdr: false,
            exact_tu: false,
            n_bins: 15,
            dup_tol: hull.dup_tol,
            hull_tol: hull.hull_tol,
            opt_tol: MaxEntOptions::default().tol,
            seed: 0,
            grid: vec![1, 3, 5, 7, 10],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        for (name, v) in [("dup_tol", self.dup_tol), ("hull_tol", self.hull_tol), ("opt_tol", self.opt_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.n_bins == 0 {
            return bad("n_bins must be at least 1".into());
        }
        if self.grid.is_empty() || self.grid.contains(&0) {
            return bad("grid needs at least one positive ensemble size".into());
        }
        Ok(())
    }

    pub fn cdec_options(&self) -> CdecOptions {
        CdecOptions {
            hull: HullOptions { dup_tol: self.dup_tol, hull_tol: self.hull_tol },
            exact_ihdr: self.exact_ihdr,
            exact_tu: self.exact_tu.then(|| MaxEntOptions { tol: self.opt_tol, ..MaxEntOptions::default() }),
        }
    }
}
