//! Generalized Hartley measure: a nonspecificity measure of a credal set
//! computed from the Möbius inverse of its lower probability,
//! `GH = sum_A log2|A| m(A)` with `m(A) = sum_{B ⊆ A} (-1)^{|A \ B|} lower(B)`.
//!
//! The measure enumerates the power set of the labels, so it is limited to
//! [`MAX_HARTLEY_CLASSES`] classes.

use alloc::vec::Vec;

use crate::credal::{CredalSet, UncertaintyDecomposition, UncertaintyMeasure};
use crate::error::{Error, Result};
use crate::maxent::{exact_upper_entropy, MaxEntOptions};

pub const MAX_HARTLEY_CLASSES: usize = 12;

/// Möbius masses of the lower probability, indexed by label bitmask.
pub fn mobius_masses(cs: &CredalSet) -> Result<Vec<f64>> {
    let k = cs.k();
    if k > MAX_HARTLEY_CLASSES {
        return Err(Error::TooManyClasses { k, max: MAX_HARTLEY_CLASSES });
    }
    let n = 1usize << k;
    let mut m: Vec<f64> = (0..n as u32).map(|bits| cs.lower_of_bits(bits)).collect();
    for i in 0..k {
        let bit = 1usize << i;
        for mask in 0..n {
            if mask & bit != 0 {
                m[mask] -= m[mask ^ bit];
            }
        }
    }
    Ok(m)
}

pub fn generalized_hartley(cs: &CredalSet) -> Result<f64> {
    let m = mobius_masses(cs)?;
    Ok(m.iter().enumerate().skip(1).map(|(mask, &mass)| libm::log2(mask.count_ones() as f64) * mass).sum())
}

/// Decomposition with the Hartley measure as EU and `upper entropy - GH` as
/// AU. All TU fields carry the upper entropy.
pub fn hartley_decomposition(cs: &CredalSet, opts: MaxEntOptions) -> Result<UncertaintyDecomposition> {
    let gh = generalized_hartley(cs)?;
    let tu = exact_upper_entropy(cs, opts)?;
    Ok(UncertaintyDecomposition {
        au: tu - gh,
        tu_lower: tu,
        tu_upper_loose: tu,
        tu_upper_tight: tu,
        tu_exact: Some(tu),
        eu_lower: gh,
        eu_upper: gh,
        measure: UncertaintyMeasure::Hartley,
    })
}
