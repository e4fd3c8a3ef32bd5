//! Composite Newton-Cotes rules on uniformly spaced samples.

use crate::error::{domain, Result};

/// Composite Simpson rule for samples `values` spaced `h` apart.
///
/// An even number of samples is handled by closing the last three intervals
/// with Simpson's 3/8 rule, which keeps fourth-order accuracy.
pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let w = simpson_weights(values.len(), h)?;
    Ok(values.iter().zip(&w).map(|(f, w)| f * w).sum())
}

/// Quadrature weights matching [`simpson`].
pub fn simpson_weights(m: usize, h: f64) -> Result<Vec<f64>> {
    if m < 3 {
        return domain(format!(
            "Simpson quadrature needs at least 3 nodes, got {m}"
        ));
    }
    let mut w = vec![0.0; m];
    let simpson_end = if m % 2 == 1 { m - 1 } else { m - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if m.is_multiple_of(2) {
        let s = m - 4;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    Ok(w)
}
