//! Tridiagonal solves for the implicit line sweeps.

/// Solves `lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k]` in
/// place with the Thomas algorithm. `lower[0]` and `upper[n-1]` are ignored.
///
/// No pivoting: the matrices assembled by the implicit collision step are
/// column diagonally dominant M-matrices, for which elimination is stable.
/// `scratch` must have at least `rhs.len()` entries.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(lower.len() >= n && diag.len() >= n && upper.len() >= n && scratch.len() >= n);
    if n == 0 {
        return;
    }
    let mut beta = diag[0];
    rhs[0] /= beta;
    for k in 1..n {
        scratch[k] = upper[k - 1] / beta;
        beta = diag[k] - lower[k] * scratch[k];
        rhs[k] = (rhs[k] - lower[k] * rhs[k - 1]) / beta;
    }
    for k in (0..n - 1).rev() {
        rhs[k] -= scratch[k + 1] * rhs[k + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn solves_diagonally_dominant_systems(
            n in 1usize..40,
            seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 40),
        ) {
            let lower: Vec<f64> = (0..n).map(|k| seed[k].0).collect();
            let upper: Vec<f64> = (0..n).map(|k| seed[k].1).collect();
            let diag: Vec<f64> = (0..n).map(|k| 2.5 + seed[k].2).collect();
            let x: Vec<f64> = (0..n).map(|k| (k as f64 * 0.37).sin()).collect();
            let mut rhs: Vec<f64> = (0..n)
                .map(|k| {
                    let mut r = diag[k] * x[k];
                    if k > 0 { r += lower[k] * x[k - 1]; }
                    if k + 1 < n { r += upper[k] * x[k + 1]; }
                    r
                })
                .collect();
            let mut scratch = vec![0.0; n];
            solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch);
            for k in 0..n {
                prop_assert!((rhs[k] - x[k]).abs() < 1e-12);
            }
        }
    }
}
