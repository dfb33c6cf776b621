//! Dense solves for the small equilibrium systems. Factorization comes from
//! nalgebra; the residual is recomputed here without it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn solve(rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            what: "linear system",
            expected: n,
            got: rows.len(),
        });
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = m.lu();
    let x = lu
        .solve(&DVector::from_column_slice(rhs))
        .ok_or(Error::SingularSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x.iter().copied().collect())
}

/// `||A x - b||_2`.
pub fn residual_norm(rows: &[Vec<f64>], x: &[f64], rhs: &[f64]) -> f64 {
    rows.iter()
        .zip(rhs)
        .map(|(row, b)| {
            let ax: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
            (ax - b).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}
