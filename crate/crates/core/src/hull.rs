//! Reduction of an ensemble to the extreme points of its convex hull.
//!
//! Each member is tested for redundancy by projecting it onto the convex hull
//! of the other candidates with Wolfe's minimum-norm-point algorithm. The
//! projection doubles as a certificate either way: a convex combination that
//! reconstructs the member (redundant), or a separating hyperplane with
//! positive margin (extreme).

use alloc::vec::Vec;

use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::linalg::{dot, solve};
use crate::pmf::{CategoricalPmf, PredictiveEnsemble};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullOptions {
    /// Members within this max-abs distance of an earlier member are duplicates.
    pub dup_tol: f64,
    /// Members reconstructed by a convex combination of others to within this
    /// max-abs error are redundant.
    pub hull_tol: f64,
}

impl Default for HullOptions {
    fn default() -> Self {
        Self { dup_tol: 1e-9, hull_tol: 1e-8 }
    }
}

/// Why a member was kept or dropped.
#[derive(Debug, Clone, PartialEq)]
pub enum MemberCertificate {
    /// Kept. `distance` is the max-abs distance to the hull of the other
    /// extremes (infinite when it is the only one) and `margin` is
    /// `w.p - max_j w.q_j` for the separating direction `w` from the
    /// projection, which is positive.
    Extreme { distance: f64, margin: f64 },
    /// Dropped as a copy of the member at index `of`.
    Duplicate { of: usize },
    /// Dropped as the convex combination `sum weight * member[index]` of
    /// extremes, reconstructing it to within `residual` (max-abs).
    Interior { weights: Vec<(usize, f64)>, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub credal_set: CredalSet,
    /// One certificate per ensemble member, in ensemble order.
    pub certificates: Vec<MemberCertificate>,
}

/// The extreme points of the convex hull of the ensemble members.
pub fn reduce_to_extremes(ensemble: &PredictiveEnsemble, opts: HullOptions) -> Result<CredalSet> {
    reduce_with_certificates(ensemble, opts).map(|r| r.credal_set)
}

pub fn reduce_with_certificates(ensemble: &PredictiveEnsemble, opts: HullOptions) -> Result<Reduction> {
    if opts.dup_tol.is_nan() || opts.dup_tol <= 0.0 {
        return Err(Error::InvalidParameter { name: "dup_tol", value: opts.dup_tol });
    }
    if opts.hull_tol.is_nan() || opts.hull_tol <= 0.0 {
        return Err(Error::InvalidParameter { name: "hull_tol", value: opts.hull_tol });
    }
    let members = ensemble.members();
    let n = members.len();
    let mut certs: Vec<Option<MemberCertificate>> = alloc::vec![None; n];

    let mut unique: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        match unique.iter().find(|&&u| members[u].max_abs_diff(&members[i]) <= opts.dup_tol) {
            Some(&u) => certs[i] = Some(MemberCertificate::Duplicate { of: u }),
            None => unique.push(i),
        }
    }

    // Sequential elimination against the surviving candidates.
    let mut retained = unique.clone();
    for &i in &unique {
        let others: Vec<usize> = retained.iter().copied().filter(|&j| j != i).collect();
        if others.is_empty() {
            continue;
        }
        let proj = project(members, i, &others);
        if proj.residual <= opts.hull_tol {
            retained.retain(|&j| j != i);
        }
    }

    // Re-certify against the final set. A dropped member that was only
    // reconstructible through another dropped member is restored; a kept
    // member that became redundant is dropped. Bounded by the member count.
    for _ in 0..=n {
        let mut changed = false;
        for &i in &unique {
            if retained.contains(&i) {
                continue;
            }
            let proj = project(members, i, &retained);
            if proj.residual > opts.hull_tol {
                insert_sorted(&mut retained, i);
                changed = true;
            }
        }
        let snapshot = retained.clone();
        for &i in &snapshot {
            let others: Vec<usize> = retained.iter().copied().filter(|&j| j != i).collect();
            if others.is_empty() {
                continue;
            }
            if project(members, i, &others).residual <= opts.hull_tol {
                retained.retain(|&j| j != i);
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }

    for &i in &unique {
        if retained.contains(&i) {
            let others: Vec<usize> = retained.iter().copied().filter(|&j| j != i).collect();
            certs[i] = Some(if others.is_empty() {
                MemberCertificate::Extreme { distance: f64::INFINITY, margin: f64::INFINITY }
            } else {
                let proj = project(members, i, &others);
                MemberCertificate::Extreme { distance: proj.residual, margin: proj.margin }
            });
        } else {
            let proj = project(members, i, &retained);
            certs[i] = Some(MemberCertificate::Interior { weights: proj.weights, residual: proj.residual });
        }
    }

    let extremes: Vec<CategoricalPmf> = retained.iter().map(|&i| members[i].clone()).collect();
    Ok(Reduction {
        credal_set: CredalSet::from_parts(extremes, retained),
        certificates: certs.into_iter().map(|c| c.expect("every member certified")).collect(),
    })
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    let pos = v.partition_point(|&y| y < x);
    v.insert(pos, x);
}

struct Projection {
    weights: Vec<(usize, f64)>,
    residual: f64,
    margin: f64,
}

/// Projects `members[target]` onto the hull of `members[others]`.
fn project(members: &[CategoricalPmf], target: usize, others: &[usize]) -> Projection {
    let p = members[target].probs();
    let shifted: Vec<Vec<f64>> =
        others.iter().map(|&j| members[j].probs().iter().zip(p).map(|(a, b)| a - b).collect()).collect();
    let (lambda, x) = min_norm_point(&shifted);
    let residual = x.iter().fold(0.0, |m, v| f64::max(m, libm::fabs(*v)));
    // Separating direction w = -x: w.p = 0 and w.q_j = -x.q_j.
    let margin = shifted.iter().map(|q| dot(&x, q)).fold(f64::INFINITY, f64::min);
    let weights = others.iter().zip(lambda).filter(|(_, w)| *w > 0.0).map(|(&j, w)| (j, w)).collect();
    Projection { weights, residual, margin }
}

/// Wolfe's minimum-norm-point algorithm: the point of `conv(points)` nearest
/// the origin, with its convex weights.
pub(crate) fn min_norm_point(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = points.len();
    let dim = points[0].len();
    let norms: Vec<f64> = points.iter().map(|q| dot(q, q)).collect();
    let scale = norms.iter().copied().fold(1e-300, f64::max);
    let start = (0..n).fold(0, |b, j| if norms[j] < norms[b] { j } else { b });

    let mut active: Vec<usize> = alloc::vec![start];
    let mut lam: Vec<f64> = alloc::vec![1.0];
    let mut x = points[start].clone();

    let combine = |active: &[usize], lam: &[f64]| -> Vec<f64> {
        let mut x = alloc::vec![0.0; dim];
        for (&j, &l) in active.iter().zip(lam) {
            for (xi, qi) in x.iter_mut().zip(&points[j]) {
                *xi += l * qi;
            }
        }
        x
    };

    'major: for _ in 0..(10 * n + 50) {
        let xx = dot(&x, &x);
        let (j, xq) =
            (0..n).map(|j| (j, dot(&x, &points[j]))).fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        if xx - xq <= 1e-14 * scale || active.contains(&j) {
            break;
        }
        active.push(j);
        lam.push(0.0);
        loop {
            let Some(alpha) = affine_minimizer(points, &active) else {
                active.pop();
                lam.pop();
                break 'major;
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                lam = alpha;
                x = combine(&active, &lam);
                break;
            }
            let theta = lam
                .iter()
                .zip(&alpha)
                .filter(|(_, &a)| a <= 1e-14)
                .map(|(&l, &a)| if l - a > 0.0 { l / (l - a) } else { 0.0 })
                .fold(1.0, f64::min);
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let mut k = 0;
            while k < active.len() {
                if lam[k] <= 1e-14 {
                    active.remove(k);
                    lam.remove(k);
                } else {
                    k += 1;
                }
            }
            if active.is_empty() {
                // Numerical breakdown; fall back to the start vertex.
                active.push(start);
                lam.push(1.0);
            }
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= s);
            x = combine(&active, &lam);
        }
    }

    let mut weights = alloc::vec![0.0; n];
    for (&j, &l) in active.iter().zip(&lam) {
        weights[j] = l;
    }
    (weights, x)
}

/// Affine weights (summing to one) of the minimum-norm point of the affine
/// hull of `points[active]`.
fn affine_minimizer(points: &[Vec<f64>], active: &[usize]) -> Option<Vec<f64>> {
    let m = active.len();
    let n = m + 1;
    let mut a = alloc::vec![0.0; n * n];
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            a[r * n + c] = dot(&points[i], &points[j]);
        }
        a[r * n + m] = 1.0;
        a[m * n + r] = 1.0;
    }
    let mut b = alloc::vec![0.0; n];
    b[m] = 1.0;
    let sol = solve(a, b, 1e-15)?;
    Some(sol[..m].to_vec())
}
