//! Closed-form divergences and their large-`p` approximations.
//!
//! All values are per observation, in nats. Differences such as
//! `(1−ρ²)/√(1−2ρ²) − 1` are evaluated in rationalized form so that they
//! keep full relative precision as `ρ → 0`.

use crate::error::{check_rho, Error, Result};
use crate::kld::KldResult;
use crate::regime::RhoRegime;

/// Divergence of the single-edge precision model from the identity when the
/// edge position is known: `½ log(1−ρ²) + ρ²/(1−ρ²)`.
pub fn kld_single_edge(rho: f64) -> Result<KldResult> {
    check_rho(rho)?;
    let r2 = rho * rho;
    let value = 0.5 * (-r2).ln_1p() + r2 / (1.0 - r2);
    Ok(KldResult::exact(value.max(0.0), Some(RhoRegime::of(rho))))
}

/// `(1−ρ²)/√(1−2ρ²) − 1`, written as `ρ⁴ / (√(1−2ρ²) ((1−ρ²) + √(1−2ρ²)))`.
///
/// NaN once `2ρ² > 1`, where the moment behind it is infinite.
pub(crate) fn mixture_gain(rho: f64) -> f64 {
    let r2 = rho * rho;
    let s = (1.0 - 2.0 * r2).sqrt();
    r2 * r2 / (s * ((1.0 - r2) + s))
}

fn check_p(p: usize, min: usize) -> Result<()> {
    if p >= min {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "p",
            value: p as f64,
            bound: format!("p must be >= {min}"),
        })
    }
}

/// Leading-order divergence of the unknown-placement mixture (one edge
/// somewhere among the `p(p−1)/2` pairs): `(4/p)((1−ρ²)/√(1−2ρ²) − 1)`.
///
/// Outside `|ρ| < 1/√2` the result carries `valid = false`; its value is
/// `+∞` on the boundary and NaN beyond it.
///
/// Only the mean of the minor summands enters this term. Their covariance
/// contributes `−½ Var` at the same order in `1/p`, and Monte Carlo
/// estimates settle near half this value as `p` grows.
pub fn kld_mixture_approx(rho: f64, p: usize) -> Result<KldResult> {
    check_rho(rho)?;
    check_p(p, 3)?;
    let regime = RhoRegime::of(rho);
    let value = 4.0 * mixture_gain(rho) / p as f64;
    Ok(KldResult::asymptotic(
        value,
        regime,
        regime.approximation_valid(),
    ))
}

/// Leading-order divergence with two disjoint edges of equal strength:
/// four times the single-edge mixture value.
pub fn kld_two_edges_approx(rho: f64, p: usize) -> Result<KldResult> {
    check_p(p, 5)?;
    let single = kld_mixture_approx(rho, p)?;
    Ok(KldResult {
        value: 4.0 * single.value,
        ..single
    })
}

/// Leading-order divergence when a single covariance entry (rather than a
/// precision entry) is perturbed at an unknown position:
/// `(2/p²)(1/√(1−ρ²) − 1)`.
pub fn kld_covariance_approx(rho: f64, p: usize) -> Result<KldResult> {
    check_rho(rho)?;
    check_p(p, 2)?;
    let r2 = rho * rho;
    let s = (1.0 - r2).sqrt();
    let gain = r2 / (s * (1.0 + s));
    let pf = p as f64;
    Ok(KldResult::asymptotic(
        2.0 * gain / (pf * pf),
        RhoRegime::of(rho),
        true,
    ))
}

/// `E[Y^γ]` for `Y = exp(−ρ Z1 Z2)` (`scaled = false`) or
/// `Y = exp(−ρ (1−ρ²)^{−1/2} Z1 Z2)` (`scaled = true`), with `Z1, Z2`
/// independent standard normals. Returns `+∞` where the moment diverges.
pub fn exp_product_moment(rho: f64, gamma: f64, scaled: bool) -> Result<f64> {
    check_rho(rho)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Domain {
            name: "gamma",
            value: gamma,
            bound: "gamma must be > 0".into(),
        });
    }
    let r2 = rho * rho;
    let g2 = gamma * gamma;
    Ok(if scaled {
        if r2 * (1.0 + g2) < 1.0 {
            ((1.0 - r2) / (1.0 - r2 * (1.0 + g2))).sqrt()
        } else {
            f64::INFINITY
        }
    } else if r2 * g2 < 1.0 {
        1.0 / (1.0 - r2 * g2).sqrt()
    } else {
        f64::INFINITY
    })
}
