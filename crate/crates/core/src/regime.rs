//! Tail regimes of the likelihood-ratio summands as a function of `rho`.
//!
//! The major summand `exp(−ρ Z1 Z2)` has finite variance iff `ρ² < 1/4`.
//! The minor summand `exp(−ρ X1 Z)`, with `Var X1 = 1/(1−ρ²)`, has finite
//! variance iff `ρ² < 1/5` and finite mean iff `ρ² < 1/2`. All comparisons
//! are done on `ρ²` so the boundaries are not blurred by square roots.

use serde::{Deserialize, Serialize};

use crate::error::{check_rho, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoRegime {
    pub rho: f64,
    /// `|ρ| < 1/2`
    pub major_term_finite_variance: bool,
    /// `|ρ| < 1/√5`
    pub minor_term_finite_variance: bool,
    /// `|ρ| < 1/√2`; the large-`p` approximations are valid only here.
    pub minor_term_finite_mean: bool,
    /// Upper bound `2(1 − ρ²)` on the decay exponent of the divergence in
    /// `p`, present once the minor summand loses its mean.
    pub tau_upper_bound: Option<f64>,
}

impl RhoRegime {
    /// Classification without range checking; `|rho| < 1` is the caller's job.
    pub(crate) fn of(rho: f64) -> Self {
        let r2 = rho * rho;
        // Same expressions as the finiteness tests in `exp_product_moment`
        // (γ = 2 unscaled, γ = 2 and γ = 1 scaled).
        let finite_mean = r2 * 2.0 < 1.0;
        RhoRegime {
            rho,
            major_term_finite_variance: r2 * 4.0 < 1.0,
            minor_term_finite_variance: r2 * 5.0 < 1.0,
            minor_term_finite_mean: finite_mean,
            tau_upper_bound: (!finite_mean).then_some(2.0 * (1.0 - r2)),
        }
    }

    /// Whether the large-`p` closed forms apply.
    pub fn approximation_valid(&self) -> bool {
        self.minor_term_finite_mean
    }

    /// Human-readable summary of which approximations apply.
    pub fn explain(&self) -> Vec<String> {
        let mut out = Vec::new();
        out.push(if self.major_term_finite_variance {
            "major summand exp(-rho Z1 Z2) has finite variance (|rho| < 1/2)".to_string()
        } else {
            "major summand exp(-rho Z1 Z2) has infinite variance (|rho| >= 1/2)".to_string()
        });
        out.push(if self.minor_term_finite_variance {
            "minor summand exp(-rho X1 Z) has finite variance (|rho| < 1/sqrt(5)); Monte Carlo standard errors are reliable".to_string()
        } else {
            "minor summand exp(-rho X1 Z) has infinite variance (|rho| >= 1/sqrt(5)); Monte Carlo standard errors are unreliable".to_string()
        });
        if self.minor_term_finite_mean {
            out.push(
                "large-p approximations (mixture, two-edge) are valid (|rho| < 1/sqrt(2))"
                    .to_string(),
            );
        } else {
            out.push(format!(
                "minor summand has infinite mean (|rho| >= 1/sqrt(2)); large-p approximations are invalid and the divergence decays as p^-tau with 0 < tau < {:.6}",
                self.tau_upper_bound.unwrap_or(f64::NAN)
            ));
        }
        out
    }
}

/// Classifies `rho` into its tail regime.
pub fn classify_regime(rho: f64) -> Result<RhoRegime> {
    check_rho(rho)?;
    Ok(RhoRegime::of(rho))
}
