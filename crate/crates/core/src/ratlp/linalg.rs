//! Dense exact Gaussian elimination.

use crate::scalar::Scalar;

/// Solves `a · x = b` for a square, nonsingular `a`.
///
/// Returns `None` when the matrix is singular. Pivots are chosen as the first
/// nonzero entry in each column, so the result is deterministic.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    assert_eq!(a.len(), n, "matrix/vector size mismatch");
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for j in col..n {
            a[col][j] = a[col][j].clone() / p.clone();
        }
        b[col] = b[col].clone() / p;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n {
                if !a[col][j].is_zero() {
                    a[r][j] = a[r][j].clone() - f.clone() * a[col][j].clone();
                }
            }
            b[r] = b[r].clone() - f * b[col].clone();
        }
    }
    Some(b)
}
