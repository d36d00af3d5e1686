//! Independent oracles shared by the property tests. None of these call into
//! the solver paths they check.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

fn mixture(rows: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let k = rows[0].len();
    (0..k).map(|j| rows.iter().zip(w).map(|(r, b)| b * r[j]).sum()).collect()
}

/// Maximum mixture entropy over a regular grid on the weight simplex, for up
/// to three mixture components.
pub fn grid_max_entropy(rows: &[Vec<f64>], step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    match rows.len() {
        1 => entropy_bits(&rows[0]),
        2 => (0..=n)
            .map(|i| {
                let a = i as f64 / n as f64;
                entropy_bits(&mixture(rows, &[a, 1.0 - a]))
            })
            .fold(f64::NEG_INFINITY, f64::max),
        3 => {
            let mut best = f64::NEG_INFINITY;
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let a = i as f64 / n as f64;
                    let b = j as f64 / n as f64;
                    best = best.max(entropy_bits(&mixture(rows, &[a, b, (1.0 - a - b).max(0.0)])));
                }
            }
            best
        }
        m => panic!("grid oracle supports up to 3 components, got {m}"),
    }
}

pub fn lower_of(rows: &[Vec<f64>], bits: u32) -> f64 {
    let k = rows[0].len();
    if bits == 0 {
        return 0.0;
    }
    if bits == (1u32 << k) - 1 {
        return 1.0;
    }
    rows.iter().map(|r| (0..k).filter(|j| bits >> j & 1 == 1).map(|j| r[j]).sum::<f64>()).fold(f64::INFINITY, f64::min)
}

/// The literal double sum over `A` and `B ⊆ A`.
pub fn hartley_double_sum(rows: &[Vec<f64>]) -> f64 {
    let k = rows[0].len();
    let mut total = 0.0;
    for a in 1u32..(1 << k) {
        let mut inner = 0.0;
        let mut b = a;
        loop {
            let sign = if (a & !b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            inner += sign * lower_of(rows, b);
            if b == 0 {
                break;
            }
            b = (b - 1) & a;
        }
        total += (a.count_ones() as f64).log2() * inner;
    }
    total
}

/// Minimum cardinality of a label set whose lower probability reaches
/// `1 - gamma - 1e-12`, by scanning all subsets.
pub fn brute_min_cover(rows: &[Vec<f64>], gamma: f64) -> usize {
    let k = rows[0].len();
    (1u32..(1 << k))
        .filter(|&b| lower_of(rows, b) >= 1.0 - gamma - 1e-12)
        .map(|b| b.count_ones() as usize)
        .min()
        .unwrap()
}

/// A random pmf: Dirichlet(alpha) with occasional exact zeros.
pub fn random_pmf(rng: &mut ChaCha8Rng, k: usize, alpha: f64) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).unwrap();
    let mut v: Vec<f64> = (0..k).map(|_| g.sample(rng)).collect();
    if rng.random_bool(0.1) {
        let j = rng.random_range(0..k);
        v[j] = 0.0;
    }
    if v.iter().sum::<f64>() <= 0.0 {
        v[0] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

pub fn random_rows(rng: &mut ChaCha8Rng, k: usize, s: usize) -> Vec<Vec<f64>> {
    let alpha = [0.3, 1.0, 5.0][rng.random_range(0..3)];
    (0..s).map(|_| random_pmf(rng, k, alpha)).collect()
}
