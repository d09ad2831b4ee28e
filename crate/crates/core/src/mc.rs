//! Monte Carlo divergence estimators and log-log slope fitting.
//!
//! Draw `i` always comes from stream `(seed, i)` and per-draw values are
//! reduced in index order, so estimates depend only on the model, the
//! sample count and the seed, never on `chunk_size` or the thread count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{check_rho, Error, Result};
use crate::kld::{KldResult, McDiagnostics};
use crate::model::{fill_edge12_draw, mixing_coefficients, DEFAULT_MAX_DIM};
use crate::regime::RhoRegime;
use crate::rng::{self, StreamRng};

pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Draws per parallel work item; has no effect on the result.
    pub chunk_size: usize,
    /// Largest dimension the O(p²)-per-draw estimators accept.
    pub max_dim: usize,
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        McConfig {
            n_samples,
            seed,
            chunk_size: 1024,
            max_dim: DEFAULT_MAX_DIM,
        }
    }

    pub fn with_chunk_size(mut self, chunk_size: usize) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::Domain {
                name: "n_samples",
                value: self.n_samples as f64,
                bound: format!("at least {MIN_SAMPLES} samples are required"),
            });
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidInput("chunk_size must be positive".into()));
        }
        if dim > self.max_dim {
            return Err(Error::DenseCapExceeded {
                dim,
                cap: self.max_dim,
            });
        }
        Ok(())
    }
}

/// Evaluates `draw` once per sample index and returns the values in index order.
fn per_draw_values<F>(cfg: &McConfig, dim: usize, draw: F) -> Vec<f64>
where
    F: Fn(&mut StreamRng, &mut [f64]) -> f64 + Sync,
{
    let n = cfg.n_samples;
    let chunk = cfg.chunk_size;
    let n_chunks = n.div_ceil(chunk);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = vec![0.0; dim];
            (c * chunk..((c + 1) * chunk).min(n))
                .map(|i| {
                    let mut r = rng::stream(cfg.seed, i as u64);
                    draw(&mut r, &mut buf)
                })
                .collect()
        })
        .collect();
    chunks.concat()
}

/// Mean, standard error and IQR-based standard error of per-draw values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub robust_stderr: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let var = if values.len() > 1 {
        ss / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    // IQR of a normal distribution is 1.349 σ.
    Summary {
        mean,
        stderr: (var / n).sqrt(),
        robust_stderr: iqr / 1.348_979_500_392_163 / n.sqrt(),
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `log L(x)` for the unknown-placement mixture against the identity,
/// where `L = √(1−ρ²)/C(p,2) · Σ_{u<v} exp(−ρ x_u x_v)`.
///
/// The exponents are shifted by their exact maximum, found in O(p) from the
/// two largest and two smallest coordinates.
pub fn mixture_log_ratio(x: &[f64], rho: f64, log_norm: f64) -> f64 {
    let c = -rho;
    let (mut a1, mut a2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut b1, mut b2) = (f64::INFINITY, f64::INFINITY);
    for &t in x {
        if t > a1 {
            a2 = a1;
            a1 = t;
        } else if t > a2 {
            a2 = t;
        }
        if t < b1 {
            b2 = b1;
            b1 = t;
        } else if t < b2 {
            b2 = t;
        }
    }
    let shift = (c * (a1 * a2)).max(c * (b1 * b2)).max(c * (a1 * b1));
    let mut total = 0.0;
    for (u, &xu) in x.iter().enumerate() {
        let a = c * xu;
        let mut row = 0.0;
        for &xv in &x[u + 1..] {
            row += (a * xv - shift).exp();
        }
        total += row;
    }
    log_norm + shift + total.ln()
}

/// `½ log(1−ρ²) − log C(p,2)`
fn mixture_log_norm(p: usize, rho: f64) -> f64 {
    let pairs = (p * (p - 1) / 2) as f64;
    0.5 * (-rho * rho).ln_1p() - pairs.ln()
}

fn diagnostics(cfg: &McConfig, summary: &Summary, heavy_tail: bool) -> McDiagnostics {
    McDiagnostics {
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        robust_stderr: summary.robust_stderr,
        heavy_tail,
    }
}

/// Monte Carlo divergence of the unknown-placement mixture from independent
/// standard normals.
///
/// The log likelihood ratio is invariant under permutations of the
/// coordinates, so draws come from the single-edge model at (1, 2) only.
/// Each draw costs O(p²).
pub fn estimate_mixture_kld(p: usize, rho: f64, cfg: &McConfig) -> Result<KldResult> {
    if p < 3 {
        return Err(Error::Domain {
            name: "p",
            value: p as f64,
            bound: "p must be >= 3".into(),
        });
    }
    check_rho(rho)?;
    cfg.validate(p)?;
    let (a, b) = mixing_coefficients(rho);
    let log_norm = mixture_log_norm(p, rho);
    let values = per_draw_values(cfg, p, |r, x| {
        fill_edge12_draw(r, a, b, x);
        mixture_log_ratio(x, rho, log_norm)
    });
    let s = summarize(&values);
    let regime = RhoRegime::of(rho);
    let heavy = !regime.minor_term_finite_variance;
    Ok(KldResult::monte_carlo(
        s.mean,
        s.stderr,
        Some(regime),
        diagnostics(cfg, &s, heavy),
    ))
}

/// Ground-truth estimator of `E_{f1}[log f1(X) − log f0(X)]` for any pair
/// of evaluable, samplable densities.
pub fn estimate_kld_oracle<F1, F0>(f1: &F1, f0: &F0, cfg: &McConfig) -> Result<KldResult>
where
    F1: Density + ?Sized,
    F0: Density + ?Sized,
{
    let p = f1.dim();
    if f0.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: f0.dim(),
        });
    }
    cfg.validate(p)?;
    let values = per_draw_values(cfg, p, |r, x| {
        f1.sample_into(r, x);
        f1.log_density(x) - f0.log_density(x)
    });
    let s = summarize(&values);
    Ok(KldResult::monte_carlo(
        s.mean,
        s.stderr,
        None,
        diagnostics(cfg, &s, false),
    ))
}

/// Sample mean of `exp(−γ ρ Z1 Z2)` (or the scaled variant with `ρ`
/// replaced by `ρ/√(1−ρ²)`), for checking the closed-form moments.
pub fn estimate_exp_product_moment(
    rho: f64,
    gamma: f64,
    scaled: bool,
    cfg: &McConfig,
) -> Result<Summary> {
    check_rho(rho)?;
    cfg.validate(2)?;
    let coef = if scaled {
        gamma * rho / (1.0 - rho * rho).sqrt()
    } else {
        gamma * rho
    };
    let values = per_draw_values(cfg, 0, |r, _| {
        let z1: f64 = r.sample(StandardNormal);
        let z2: f64 = r.sample(StandardNormal);
        (-coef * z1 * z2).exp()
    });
    Ok(summarize(&values))
}

/// Ordinary least-squares line through `(ln p, ln KLD)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

impl SlopeFit {
    /// The fitted divergence at dimension `p`.
    pub fn predict(&self, p: f64) -> f64 {
        (self.intercept + self.slope * p.ln()).exp()
    }
}

pub fn fit_loglog_slope(series: &[(usize, KldResult)]) -> Result<SlopeFit> {
    let mut ps: Vec<usize> = series.iter().map(|(p, _)| *p).collect();
    ps.sort_unstable();
    ps.dedup();
    if ps.len() < 3 {
        return Err(Error::InvalidInput(
            "a log-log fit needs at least 3 distinct p values".into(),
        ));
    }
    if let Some((p, r)) = series
        .iter()
        .find(|(p, r)| r.value.is_nan() || r.value <= 0.0 || *p == 0)
    {
        return Err(Error::Domain {
            name: "kld",
            value: r.value,
            bound: format!("divergence at p = {p} must be positive to take logs"),
        });
    }
    let points: Vec<(f64, f64)> = series
        .iter()
        .map(|(p, r)| ((*p as f64).ln(), r.value.ln()))
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|q| q.0).sum::<f64>() / n;
    let my = points.iter().map(|q| q.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|q| (q.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|q| (q.1 - intercept - slope * q.0).powi(2))
        .sum();
    let slope_stderr = if points.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        points,
        slope,
        intercept,
        slope_stderr,
    })
}
