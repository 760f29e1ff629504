use nalgebra::{DMatrix, SymmetricEigen};

use super::GramMatrix;
use crate::error::{Error, Result};

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
///
/// Orders one and two use the closed form; larger orders use a dense
/// symmetric eigensolver. Power iteration is not used because its stopping
/// test is unreliable when the top two eigenvalues nearly coincide. The
/// result is never below the largest diagonal entry.
pub fn largest_eigenvalue(g: &GramMatrix) -> Result<f64> {
    let n = g.order();
    let diag_max = (0..n).map(|i| g.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    if n > 0 && !diag_max.is_finite() {
        return Err(Error::Numerical("non-finite Gram matrix".into()));
    }
    match n {
        0 => Err(Error::dim("eigenvalue of an empty matrix")),
        1 => Ok(g.get(0, 0)),
        2 => {
            let (a, b, d) = (g.get(0, 0), g.get(0, 1), g.get(1, 1));
            let half_trace = 0.5 * (a + d);
            let half_diff = 0.5 * (a - d);
            Ok((half_trace + half_diff.hypot(b)).max(diag_max))
        }
        _ => {
            let dense = DMatrix::from_fn(n, n, |i, j| g.get(i, j));
            let top = SymmetricEigen::new(dense).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                return Err(Error::Numerical("eigenvalue of a non-finite matrix".into()));
            }
            Ok(top.max(diag_max))
        }
    }
}
