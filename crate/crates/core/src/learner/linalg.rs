//! Small dense symmetric positive definite solves via Cholesky.
//!
//! The systems here are normal equations of modest width (tens of columns),
//! so a plain unblocked factorization is plenty.

/// Cholesky factorization of a symmetric positive definite matrix stored
/// row-major. Returns the lower factor, or None when a pivot falls below
/// `1e-10 * max_diag` (treated as singular).
fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let max_diag = (0..d).map(|i| a[i * d + i].abs()).fold(0.0f64, f64::max);
    let tol = 1e-10 * max_diag.max(1e-300);
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if sum <= tol {
                    return None;
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Solve `a x = b` for symmetric positive definite `a` (row-major, d x d).
/// Returns None when the matrix is numerically singular.
pub(crate) fn solve_spd(a: &[f64], b: &[f64], d: usize) -> Option<Vec<f64>> {
    let l = cholesky(a, d)?;
    // Forward substitution: L y = b.
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * d + k] * y[k];
        }
        y[i] = sum / l[i * d + i];
    }
    // Back substitution: L^T x = y.
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let mut sum = y[i];
        for k in (i + 1)..d {
            sum -= l[k * d + i] * x[k];
        }
        x[i] = sum / l[i * d + i];
    }
    Some(x)
}
