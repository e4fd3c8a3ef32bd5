//! Tridiagonal linear systems.

use crate::error::{Error, Result};

/// Pivots smaller than this hand the system to the pivoting solver.
const PIVOT_FLOOR: f64 = 1e-300;

/// Tridiagonal matrix stored by diagonals. `lower[0]` and `upper[n - 1]` are
/// ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solves `A x = rhs` by Thomas elimination, falling back to elimination
    /// with partial pivoting when a pivot underflows.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(rhs.len(), self.len());
        match self.thomas(rhs) {
            Some(x) => Ok(x),
            None => self.solve_pivoted(rhs),
        }
    }

    fn thomas(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut den = self.diag[0];
        if den.abs() < PIVOT_FLOOR {
            return None;
        }
        if n > 1 {
            c[0] = self.upper[0] / den;
        }
        d[0] = rhs[0] / den;
        for i in 1..n {
            den = self.diag[i] - self.lower[i] * c[i - 1];
            if den.abs() < PIVOT_FLOOR || !den.is_finite() {
                return None;
            }
            if i + 1 < n {
                c[i] = self.upper[i] / den;
            }
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / den;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Some(x)
    }

    /// Gaussian elimination with row interchanges (the banded analogue of a
    /// dense partially pivoted LU; fill-in is one extra super-diagonal).
    pub fn solve_pivoted(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut du2 = vec![0.0; n];
        let mut sub: Vec<f64> = (1..n).map(|i| self.lower[i]).collect();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= sub[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::Singular { row: i, pivot: 0.0 });
                }
                let fact = sub[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
            } else {
                let fact = d[i] / sub[i];
                d[i] = sub[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                du[i] = temp;
                sub[i] = 0.0;
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - fact * b[i + 1];
            }
        }
        if d[n - 1] == 0.0 || !d[n - 1].is_finite() {
            return Err(Error::Singular {
                row: n - 1,
                pivot: d[n - 1],
            });
        }
        let mut x = vec![0.0; n];
        x[n - 1] = b[n - 1] / d[n - 1];
        if n > 1 {
            x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        Ok(x)
    }
}
