//! Upper entropy of a finitely generated credal set.
//!
//! Maximizes the concave function `beta -> H(sum_s beta_s P_s)` over the
//! probability simplex with pairwise Frank-Wolfe and exact line search. The
//! Frank-Wolfe duality gap bounds the distance to the optimum and is the
//! stopping criterion.

use alloc::vec::Vec;

use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::pmf::entropy_bits;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEntOptions {
    /// Required duality gap, in bits.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for MaxEntOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iters: 10_000 }
    }
}

/// `sup H(P)` over the credal set, to within `opts.tol` bits.
pub fn exact_upper_entropy(cs: &CredalSet, opts: MaxEntOptions) -> Result<f64> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParameter { name: "tol", value: opts.tol });
    }
    let ext: Vec<&[f64]> = cs.extremes().iter().map(|p| p.probs()).collect();
    let vertex_best = ext.iter().map(|p| entropy_bits(p)).fold(f64::NEG_INFINITY, f64::max);
    let m = ext.len();
    if m == 1 {
        return Ok(vertex_best);
    }
    let k = ext[0].len();

    let mut beta = alloc::vec![1.0 / m as f64; m];
    let mut q = alloc::vec![0.0; k];
    mix(&ext, &beta, &mut q);

    let mut gap = f64::INFINITY;
    for _ in 0..opts.max_iters {
        let grad: Vec<f64> = ext.iter().map(|p| gradient(p, &q)).collect();
        let fw = argmax(&grad);
        let avg: f64 = grad.iter().zip(&beta).map(|(g, b)| g * b).sum();
        gap = grad[fw] - avg;
        if gap <= opts.tol {
            break;
        }
        // Away vertex: the active vertex with the smallest gradient.
        let away = (0..m).filter(|&s| beta[s] > 0.0 && s != fw).fold(None, |best: Option<usize>, s| match best {
            Some(b) if grad[b] <= grad[s] => Some(b),
            _ => Some(s),
        });
        let Some(away) = away else {
            // All weight already on the FW vertex.
            gap = 0.0;
            break;
        };
        let dir: Vec<f64> = ext[fw].iter().zip(ext[away]).map(|(a, b)| a - b).collect();
        let t = line_search(&q, &dir, beta[away]);
        if t <= 0.0 {
            break;
        }
        beta[fw] += t;
        beta[away] -= t;
        if beta[away] < 1e-16 {
            beta[away] = 0.0;
        }
        mix(&ext, &beta, &mut q);
    }

    if gap > opts.tol {
        return Err(Error::ConvergenceFailure { gap, iterations: opts.max_iters });
    }
    Ok(f64::max(entropy_bits(&q), vertex_best))
}

fn mix(ext: &[&[f64]], beta: &[f64], q: &mut [f64]) {
    q.iter_mut().for_each(|v| *v = 0.0);
    for (p, &b) in ext.iter().zip(beta) {
        if b > 0.0 {
            for (qj, pj) in q.iter_mut().zip(p.iter()) {
                *qj += b * pj;
            }
        }
    }
}

/// Partial derivative of `H(q)` along vertex `p`, up to the additive constant
/// `-1/ln 2` shared by every vertex.
fn gradient(p: &[f64], q: &[f64]) -> f64 {
    let mut g = 0.0;
    for (&pj, &qj) in p.iter().zip(q) {
        if pj > 0.0 {
            if qj <= 0.0 {
                return f64::INFINITY;
            }
            g -= pj * libm::log2(qj);
        }
    }
    g
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

/// Derivative of `t -> H(q + t dir)` for a direction summing to zero.
fn directional(q: &[f64], dir: &[f64], t: f64) -> f64 {
    let mut d = 0.0;
    for (&qj, &dj) in q.iter().zip(dir) {
        if dj == 0.0 {
            continue;
        }
        let v = qj + t * dj;
        if v <= 0.0 {
            return if dj < 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        d -= dj * libm::log2(v);
    }
    d
}

/// Maximizer of the concave univariate restriction on `[0, t_max]`.
fn line_search(q: &[f64], dir: &[f64], t_max: f64) -> f64 {
    if directional(q, dir, 0.0) <= 0.0 {
        return 0.0;
    }
    if directional(q, dir, t_max) >= 0.0 {
        return t_max;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if directional(q, dir, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
