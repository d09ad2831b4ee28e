//! Densities that can be both evaluated and sampled, as consumed by the
//! generic Monte Carlo divergence oracle.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_rho, Error, Result};
use crate::model::{materialize, mixing_coefficients, GaussianModel, PrecisionPerturbation};
use crate::rng::StreamRng;

pub trait Density: Sync {
    fn dim(&self) -> usize;
    fn log_density(&self, x: &[f64]) -> f64;
    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]);
}

impl Density for GaussianModel {
    fn dim(&self) -> usize {
        GaussianModel::dim(self)
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        GaussianModel::log_density(self, x)
    }

    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) {
        GaussianModel::sample_into(self, rng, out)
    }
}

/// `log Σ exp(v)`, shifted by the maximum.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// A finite mixture of Gaussians with every component stored explicitly.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    log_weights: Vec<f64>,
    cumulative: Vec<f64>,
    components: Vec<GaussianModel>,
}

impl GaussianMixture {
    /// Weights need not be normalized but must be positive.
    pub fn new(weights: Vec<f64>, components: Vec<GaussianModel>) -> Result<Self> {
        if components.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidInput(
                "a mixture needs one positive weight per component".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput(
                "mixture weights must be positive".into(),
            ));
        }
        let dim = components[0].dim();
        if let Some(c) = components.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.dim(),
            });
        }
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Ok(GaussianMixture {
            log_weights: weights.iter().map(|w| (w / total).ln()).collect(),
            cumulative,
            components,
        })
    }

    /// The uniform mixture over every single-edge model of the given kind,
    /// one materialized component per pair `u < v`.
    pub fn all_single_edges(covariance_kind: bool, p: usize, rho: f64) -> Result<Self> {
        let mut components = Vec::with_capacity(p * p.saturating_sub(1) / 2);
        for u in 1..=p {
            for v in u + 1..=p {
                let pert = if covariance_kind {
                    PrecisionPerturbation::single_edge_covariance(p, rho, u, v)?
                } else {
                    PrecisionPerturbation::single_edge_precision(p, rho, u, v)?
                };
                components.push(materialize(&pert)?);
            }
        }
        let n = components.len();
        Self::new(vec![1.0; n], components)
    }

    pub fn components(&self) -> &[GaussianModel] {
        &self.components
    }
}

impl Density for GaussianMixture {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .components
            .iter()
            .zip(&self.log_weights)
            .map(|(c, lw)| lw + c.log_density(x))
            .collect();
        log_sum_exp(&terms)
    }

    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let t: f64 = rng.random();
        let k = self
            .cumulative
            .iter()
            .position(|&c| t < c)
            .unwrap_or(self.components.len() - 1);
        self.components[k].sample_into(rng, out);
    }
}

/// Which matrix a single-edge perturbation touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeTarget {
    Precision,
    Covariance,
}

/// The uniform mixture over all `p(p−1)/2` single-edge perturbations of the
/// identity, evaluated through the 2×2 block structure of each component
/// rather than through `p × p` factorizations.
#[derive(Debug, Clone)]
pub struct EdgeMixture {
    target: EdgeTarget,
    dim: usize,
    rho: f64,
}

impl EdgeMixture {
    pub fn new(target: EdgeTarget, dim: usize, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        if dim < 2 {
            return Err(Error::Domain {
                name: "p",
                value: dim as f64,
                bound: "p must be >= 2".into(),
            });
        }
        Ok(EdgeMixture { target, dim, rho })
    }

    /// `log f_uv(x) − log f0(x)` for the component at `(u, v)`.
    fn component_log_ratio(&self, xu: f64, xv: f64) -> f64 {
        let r = self.rho;
        let one_m = 1.0 - r * r;
        match self.target {
            EdgeTarget::Precision => 0.5 * one_m.ln() - r * xu * xv,
            EdgeTarget::Covariance => {
                -0.5 * one_m.ln()
                    - (r * r * (xu * xu + xv * xv) - 2.0 * r * xu * xv) / (2.0 * one_m)
            }
        }
    }
}

impl Density for EdgeMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let p = self.dim;
        let mut terms = Vec::with_capacity(p * (p - 1) / 2);
        for u in 0..p {
            for v in u + 1..p {
                terms.push(self.component_log_ratio(x[u], x[v]));
            }
        }
        let pairs = (p * (p - 1) / 2) as f64;
        let base = -0.5 * (p as f64 * (2.0 * PI).ln() + x.iter().map(|t| t * t).sum::<f64>());
        base + log_sum_exp(&terms) - pairs.ln()
    }

    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let p = self.dim;
        let u = rng.random_range(0..p);
        let mut v = rng.random_range(0..p - 1);
        if v >= u {
            v += 1;
        }
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let (zu, zv) = (out[u], out[v]);
        match self.target {
            EdgeTarget::Precision => {
                let (a, b) = mixing_coefficients(self.rho);
                out[u] = a * zu + b * zv;
                out[v] = a * zv + b * zu;
            }
            EdgeTarget::Covariance => {
                out[v] = self.rho * zu + (1.0 - self.rho * self.rho).sqrt() * zv;
            }
        }
    }
}
