//! Bonferroni-corrected asymptotic power and the two competing sample-size
//! rules: the classical one, `n = (z_{1−α/m}/ρ)²`, and the divergence one,
//! which asks that `n · D` reach `z²_{1−α}` (power of about one half).
//!
//! Testing is one-sided throughout (`ρ > 0` alternatives). Every size is
//! returned as a real number; rounding is left to the caller.

use serde::{Deserialize, Serialize};

use crate::analytic::kld_mixture_approx;
use crate::error::{Error, Result};
use crate::hypergeometric::hyp2f1;
use crate::normal::{normal_cdf, normal_upper_quantile};
use crate::regime::{classify_regime, RhoRegime};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Number of pairwise tests among `p` variables, `p(p−1)/2`.
pub fn pair_count(p: u64) -> u64 {
    p * p.saturating_sub(1) / 2
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "alpha",
            value: alpha,
            bound: "alpha must lie strictly between 0 and 1".into(),
        })
    }
}

fn check_m(m: u64) -> Result<()> {
    if m >= 1 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "m",
            value: 0.0,
            bound: "at least one test is required".into(),
        })
    }
}

fn check_positive_rho(rho: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { rho >= 0.0 } else { rho > 0.0 };
    if ok && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "rho",
            value: rho,
            bound: if allow_zero {
                "rho must lie in [0, 1) for one-sided testing".into()
            } else {
                "rho must lie in (0, 1) for one-sided testing".into()
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerQuery {
    pub n: u64,
    pub p: u64,
    /// Alternative partial correlation.
    pub rho: f64,
    pub alpha: f64,
    /// Number of tests; `p(p−1)/2` unless overridden.
    pub m: u64,
}

impl PowerQuery {
    pub fn new(n: u64, p: u64, rho: f64, alpha: f64) -> Result<Self> {
        Self::with_tests(n, p, rho, alpha, pair_count(p))
    }

    pub fn with_tests(n: u64, p: u64, rho: f64, alpha: f64, m: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain {
                name: "n",
                value: 0.0,
                bound: "n must be positive".into(),
            });
        }
        check_positive_rho(rho, true)?;
        check_alpha(alpha)?;
        check_m(m)?;
        Ok(PowerQuery {
            n,
            p,
            rho,
            alpha,
            m,
        })
    }
}

/// `z_{1−α/m}`, either exact or through `√(2 log(m/α))`.
pub fn bonferroni_quantile(alpha: f64, m: u64, approximate: bool) -> Result<f64> {
    check_alpha(alpha)?;
    check_m(m)?;
    let level = alpha / m as f64;
    if approximate {
        Ok((2.0 * (m as f64 / alpha).ln()).sqrt())
    } else {
        normal_upper_quantile(level)
    }
}

/// `Φ(√n ρ − z_{1−α/m})`
pub fn asymptotic_power(q: &PowerQuery, approximate_quantile: bool) -> Result<f64> {
    let z = bonferroni_quantile(q.alpha, q.m, approximate_quantile)?;
    Ok(normal_cdf((q.n as f64).sqrt() * q.rho - z))
}

/// `(z_{1−α/m}/ρ)²` with `m = p(p−1)/2`: the size at which the asymptotic
/// power reaches one half.
pub fn sample_size_asymptotic(rho: f64, p: u64, alpha: f64) -> Result<f64> {
    sample_size_asymptotic_with_tests(rho, pair_count(p), alpha)
}

pub fn sample_size_asymptotic_with_tests(rho: f64, m: u64, alpha: f64) -> Result<f64> {
    check_positive_rho(rho, false)?;
    let z = bonferroni_quantile(alpha, m, false)?;
    Ok((z / rho).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyPlan {
    /// Size at which `n · D` reaches `z²_{1−α}`; `None` outside `|ρ| < 1/√2`.
    pub n_kld: Option<f64>,
    pub n_asymptotic: f64,
    /// Per-observation divergence of the unknown-placement mixture.
    pub kld_per_obs: Option<f64>,
    pub regime: RhoRegime,
    pub valid: bool,
    pub alpha: f64,
    pub m: u64,
}

/// Both study-size routes with `m = p(p−1)/2` tests.
pub fn sample_size_kld(rho: f64, p: u64, alpha: f64) -> Result<StudyPlan> {
    plan_study(rho, p, alpha, pair_count(p))
}

/// Both study-size routes with an explicit test count for the classical route.
pub fn plan_study(rho: f64, p: u64, alpha: f64, m: u64) -> Result<StudyPlan> {
    check_positive_rho(rho, false)?;
    check_alpha(alpha)?;
    let regime = classify_regime(rho)?;
    let n_asymptotic = sample_size_asymptotic_with_tests(rho, m, alpha)?;
    let d = kld_mixture_approx(rho, p as usize)?;
    let z = normal_upper_quantile(alpha)?;
    let (n_kld, kld_per_obs) = if d.valid {
        (Some(z * z / d.value), Some(d.value))
    } else {
        (None, None)
    };
    Ok(StudyPlan {
        n_kld,
        n_asymptotic,
        kld_per_obs,
        regime,
        valid: d.valid,
        alpha,
        m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    /// Degrees of freedom `n + 1 − p`.
    pub f: u64,
    /// Mean of the sample partial correlation,
    /// `(2/f)(Γ((f+1)/2)/Γ(f/2))² ρ ₂F₁(½, ½; (f+2)/2; ρ²)`.
    pub expected_value: f64,
    /// Derivative of `expected_value` with respect to `ρ` at zero,
    /// `(2/f)(Γ((f+1)/2)/Γ(f/2))²`.
    pub mean_slope_at_null: f64,
    /// `(f/2)(Γ(f/2)/Γ((f+1)/2))²`: equals `4/π` at `f = 2` and decreases
    /// to 1 as `f → ∞`.
    pub efficacy: f64,
}

/// Mean of the sample partial correlation with `f = n + 1 − p` degrees of
/// freedom. Requires `n ≥ p`, unlike the divergence route.
pub fn expected_partial_correlation(rho: f64, n: u64, p: u64) -> Result<EstimatorSummary> {
    crate::error::check_rho(rho)?;
    let f = n as i64 + 1 - p as i64;
    if f < 1 {
        return Err(Error::TooFewObservations { f });
    }
    let ff = f as f64;
    // log Γ((f+1)/2) − log Γ(f/2)
    let lr = libm::lgamma(0.5 * (ff + 1.0)) - libm::lgamma(0.5 * ff);
    let mean_slope_at_null = 2.0 / ff * (2.0 * lr).exp();
    let series = hyp2f1(0.5, 0.5, 0.5 * (ff + 2.0), rho * rho)?;
    Ok(EstimatorSummary {
        f: f as u64,
        expected_value: mean_slope_at_null * rho * series,
        mean_slope_at_null,
        efficacy: 0.5 * ff * (-2.0 * lr).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const Z_95: f64 = 1.644_853_626_951_472_2;

    #[test]
    fn quantile_examples() {
        let z = bonferroni_quantile(0.05, 1, false).unwrap();
        assert!((z - Z_95).abs() < 1e-12);
        let m = pair_count(1000);
        assert_eq!(m, 499_500);
        let exact = bonferroni_quantile(0.05, m, false).unwrap();
        let approx = bonferroni_quantile(0.05, m, true).unwrap();
        assert!((exact - 5.199).abs() < 1e-3, "{exact}");
        assert!((approx - 5.678).abs() < 1e-3, "{approx}");
        assert!(approx > exact);
    }

    #[test]
    fn approximate_quantile_is_monotone() {
        let mut prev = 0.0;
        for m in [1u64, 2, 5, 10, 100, 10_000, 1_000_000] {
            let z = bonferroni_quantile(0.05, m, true).unwrap();
            assert!(z > prev);
            prev = z;
        }
    }

    #[test]
    fn power_examples() {
        let null = PowerQuery::new(50, 10, 0.0, 0.05).unwrap();
        let z = bonferroni_quantile(0.05, 45, false).unwrap();
        assert!((asymptotic_power(&null, false).unwrap() - normal_cdf(-z)).abs() < 1e-15);
        assert!((asymptotic_power(&null, false).unwrap() - 0.05 / 45.0).abs() < 1e-12);

        let q = PowerQuery::new(135, 1000, 0.447, 0.05).unwrap();
        let exact = asymptotic_power(&q, false).unwrap();
        assert!((exact - 0.5).abs() < 0.02, "{exact}");
        assert!(asymptotic_power(&q, true).unwrap() < exact);
    }

    #[test]
    fn sample_size_examples() {
        let n = sample_size_asymptotic(0.447, 1000, 0.05).unwrap();
        assert!((n - 135.0).abs() < 2.0, "{n}");
        let n2 = sample_size_asymptotic(0.894, 1000, 0.05).unwrap();
        assert!((n / n2 - 4.0).abs() < 1e-12);
        let small = sample_size_asymptotic(0.5, 2, 0.05).unwrap();
        assert!((small - (Z_95 / 0.5).powi(2)).abs() < 1e-10);
        assert!((small - 10.8).abs() < 0.05);
        assert!(sample_size_asymptotic(0.0, 10, 0.05).is_err());
    }

    #[test]
    fn study_plan_examples() {
        let plan = sample_size_kld(0.447, 1000, 0.05).unwrap();
        assert!(plan.valid);
        let n_kld = plan.n_kld.unwrap();
        assert!((n_kld - 20_700.0).abs() < 700.0, "{n_kld}");
        assert!((plan.n_asymptotic - 135.0).abs() < 2.0);

        let a = sample_size_kld(0.3, 50, 0.05).unwrap().n_kld.unwrap();
        let b = sample_size_kld(0.3, 100, 0.05).unwrap().n_kld.unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);

        let bad = sample_size_kld(0.75, 100, 0.05).unwrap();
        assert!(!bad.valid);
        assert!(bad.n_kld.is_none());
        assert!(bad.n_asymptotic > 0.0);
    }

    #[test]
    fn estimator_summary_examples() {
        let s = expected_partial_correlation(0.0, 100, 10).unwrap();
        assert_eq!(s.expected_value, 0.0);
        assert_eq!(s.f, 91);
        let s = expected_partial_correlation(0.3, 11, 10).unwrap();
        assert_eq!(s.f, 2);
        assert!((s.efficacy - 4.0 / PI).abs() < 1e-12);
        assert!((s.mean_slope_at_null - PI / 4.0).abs() < 1e-12);
        let s = expected_partial_correlation(0.3, 1009, 10).unwrap();
        assert!((s.efficacy - 1.0).abs() < 1e-3);
        assert!(matches!(
            expected_partial_correlation(0.3, 5, 10),
            Err(Error::TooFewObservations { f: -4 })
        ));
    }

    #[test]
    fn estimator_envelope() {
        for f in [1u64, 2, 3, 10, 100, 1000] {
            for i in 1..20 {
                let rho = i as f64 / 20.0;
                for sign in [1.0, -1.0] {
                    let s = expected_partial_correlation(sign * rho, f + 9, 10).unwrap();
                    assert_eq!(s.expected_value.signum(), sign);
                    assert!(s.expected_value.abs() <= rho * s.efficacy * 1.01);
                    assert!(s.efficacy > 0.0 && s.efficacy <= 2.0);
                }
            }
        }
    }
}
