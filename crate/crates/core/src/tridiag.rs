//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `A x = rhs` where `A` has sub-diagonal `lower` (`lower[0]` unused),
/// diagonal `diag` and super-diagonal `upper` (`upper[n-1]` unused).
///
/// No pivoting: callers supply diagonally dominant or SPD systems.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut cp = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::SingularSystem { row: 0 });
    }
    cp[0] = upper[0] / beta;
    x[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * cp[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        cp[i] = upper[i] / beta;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    Ok(x)
}

/// `(D2 v)_i` with mirrored ghost cells `v_0 = v_1`, `v_{N+1} = v_N`, unscaled
/// (the caller divides by dx²).
pub fn neumann_second_difference(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 { v[0] } else { v[i - 1] };
            let right = if i + 1 == n { v[n - 1] } else { v[i + 1] };
            (right - v[i]) - (v[i] - left)
        })
        .collect()
}

/// Solves `(a I - b D2) x = rhs` with Neumann ghost reflection, `D2` unscaled.
pub fn solve_shifted_neumann_laplacian(a: f64, b: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut lower = vec![-b; n];
    let mut upper = vec![-b; n];
    let mut diag = vec![a + 2.0 * b; n];
    lower[0] = 0.0;
    upper[n.saturating_sub(1)] = 0.0;
    if n == 1 {
        diag[0] = a;
    } else {
        diag[0] = a + b;
        diag[n - 1] = a + b;
    }
    solve(&lower, &diag, &upper, rhs)
}
