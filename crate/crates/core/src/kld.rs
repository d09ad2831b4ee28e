use serde::{Deserialize, Serialize};

use crate::regime::RhoRegime;

/// How a divergence value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    AsymptoticInP,
    MonteCarlo,
}

/// Spread diagnostics attached to Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McDiagnostics {
    pub n_samples: usize,
    pub seed: u64,
    /// Interquartile range / 1.349 / √n, a tail-insensitive counterpart of `stderr`.
    pub robust_stderr: f64,
    /// Set when the summands are known to have infinite variance, making
    /// `stderr` unreliable.
    pub heavy_tail: bool,
}

/// A divergence value in nats together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KldResult {
    pub value: f64,
    pub stderr: Option<f64>,
    pub method: Method,
    pub regime: Option<RhoRegime>,
    /// False when an approximation was evaluated outside its stated domain.
    pub valid: bool,
    pub mc: Option<McDiagnostics>,
}

impl KldResult {
    pub fn exact(value: f64, regime: Option<RhoRegime>) -> Self {
        KldResult {
            value,
            stderr: None,
            method: Method::Exact,
            regime,
            valid: true,
            mc: None,
        }
    }

    pub fn asymptotic(value: f64, regime: RhoRegime, valid: bool) -> Self {
        KldResult {
            value,
            stderr: None,
            method: Method::AsymptoticInP,
            regime: Some(regime),
            valid,
            mc: None,
        }
    }

    pub fn monte_carlo(
        value: f64,
        stderr: f64,
        regime: Option<RhoRegime>,
        diagnostics: McDiagnostics,
    ) -> Self {
        KldResult {
            value,
            stderr: Some(stderr),
            method: Method::MonteCarlo,
            regime,
            valid: true,
            mc: Some(diagnostics),
        }
    }

    /// The value converted to bits.
    pub fn value_bits(&self) -> f64 {
        self.value / std::f64::consts::LN_2
    }
}
