use alloc::vec::Vec;

/// Solves the dense square system `a x = b` by Gaussian elimination with
/// partial pivoting. `a` is row-major `n x n`. Returns `None` when a pivot
/// falls below `pivot_tol`.
pub(crate) fn solve(mut a: Vec<f64>, mut b: Vec<f64>, pivot_tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let (piv, best) =
            (col..n)
                .map(|r| (r, libm::fabs(a[r * n + col])))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < pivot_tol {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = alloc::vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r * n + c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
