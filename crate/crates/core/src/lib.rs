//! Credal and interval evidential classification.
//!
//! Given an ensemble of categorical predictive distributions for a single
//! input, this crate builds the finitely generated credal set spanned by the
//! ensemble, decomposes predictive uncertainty into aleatoric and epistemic
//! parts, decides between emitting an imprecise highest-density label region
//! and abstaining, and evaluates calibration and out-of-distribution
//! separation over batches of such decisions.
//!
//! Two procedures are provided:
//!
//! | Procedure | Input | Uncertainty measure | Decision |
//! |-----------|-------|---------------------|----------|
//! | [`cdec_decide`] | ensemble of S pmfs | lower / upper entropy (bits) | `log2 k - u[TU] >= eps` |
//! | [`idec_decide`] | one pmf | inflated categorical variance | `V_max - V[(1+d*)Y] >= eps` |
//!
//! The crate is `no_std` and only needs `alloc`. Every operation is a pure
//! function of its inputs.
//!
//! Labels are 0-based indices internally. Variance computations treat label
//! `j` as the integer `j + 1`, so label order matters for the interval
//! procedure.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod credal;
mod error;
pub mod hartley;
pub mod hull;
pub mod ihdr;
pub mod interval;
mod linalg;
pub mod maxent;
pub mod metrics;
pub mod pmf;

pub use credal::{
    entropy_decomposition, lower_probability, upper_probability, CredalSet, UncertaintyDecomposition,
    UncertaintyMeasure,
};
pub use error::{Error, Result};
pub use hartley::generalized_hartley;
pub use hull::{reduce_to_extremes, reduce_with_certificates, HullOptions, MemberCertificate, Reduction};
pub use ihdr::{
    cdec_decide, cdec_point_prediction, ihdr_exact, ihdr_greedy, ihdr_lower_bound, CdecOptions, Decision, DecisionKind,
    Ihdr, IhdrMethod,
};
pub use interval::{
    augmented_region, conservativeness, idec_decide, interval_lower_upper, optimal_d, precise_hdr,
    variance_decomposition, xi_of_d, Inflation, IntervalDecision, IntervalDecomposition, IntervalModel,
};
pub use maxent::{exact_upper_entropy, MaxEntOptions};
pub use pmf::{
    categorical_variance, entropy, measure_entropy, posterior_predictive, validate_pmf, CategoricalPmf, LabelSet,
    PredictiveEnsemble, VirtualCounts, DEFAULT_PMF_TOLERANCE,
};
