//! Gauss hypergeometric function by direct series summation.

use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-14;
const MAX_TERMS: usize = 10_000_000;

/// `₂F₁(a, b; c; z) = Σ_k (a)_k (b)_k / (c)_k · z^k / k!` for `|z| < 1`.
///
/// Summation stops once the geometric tail bound `|t_k| |z| / (1 − |z|)`
/// falls below `1e-14` of the partial sum; the bound holds once the term
/// ratio `(a+k)(b+k)/((c+k)(k+1))` is at most one, which is the case for
/// the `a = b = 1/2, c > 1` arguments used here.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z.is_nan() || z.abs() >= 1.0 {
        return Err(Error::Domain {
            name: "z",
            value: z,
            bound: "the series requires |z| < 1".into(),
        });
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Domain {
            name: "c",
            value: c,
            bound: "c must not be a non-positive integer".into(),
        });
    }
    let tail_factor = z.abs() / (1.0 - z.abs());
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        let ratio_bounded = (a + kf + 1.0) * (b + kf + 1.0) <= (c + kf + 1.0) * (kf + 2.0);
        if term == 0.0 || (ratio_bounded && term.abs() * tail_factor <= REL_TOL * sum.abs()) {
            return Ok(sum);
        }
    }
    Err(Error::InvalidInput(format!(
        "2F1 series did not converge within {MAX_TERMS} terms"
    )))
}
