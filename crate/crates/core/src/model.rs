//! Structured Gaussian models: single- and two-edge perturbations of the
//! identity, their closed-form determinant and trace, partial correlations,
//! the two-Gaussian divergence, and seeded samplers.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_rho, Error, Result};
use crate::kld::KldResult;
use crate::rng;

/// Largest dimension accepted by the dense-matrix code paths.
pub const DEFAULT_MAX_DIM: usize = 5_000;

const SYMMETRY_RTOL: f64 = 1e-12;

/// An unordered pair of variables, stored 1-based with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Self {
        if u <= v {
            Edge { u, v }
        } else {
            Edge { u: v, v: u }
        }
    }

    fn zero_based(self) -> (usize, usize) {
        (self.u - 1, self.v - 1)
    }

    fn check(self, dim: usize) -> Result<()> {
        let reason = if self.u == self.v {
            "indices must differ"
        } else if self.u == 0 || self.v > dim {
            "indices must lie in 1..=p"
        } else {
            return Ok(());
        };
        Err(Error::InvalidEdge {
            u: self.u,
            v: self.v,
            dim,
            reason,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationKind {
    /// One off-diagonal precision entry set to `rho`.
    SingleEdgePrecision,
    /// Two disjoint off-diagonal precision entries set to `rho`.
    TwoEdgePrecision,
    /// One off-diagonal covariance entry set to `rho`.
    SingleEdgeCovariance,
}

impl PerturbationKind {
    pub fn edge_count(self) -> usize {
        match self {
            PerturbationKind::TwoEdgePrecision => 2,
            _ => 1,
        }
    }
}

/// Declarative description of an alternative model: which matrix of the
/// identity is perturbed, at which positions, and by how much.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPerturbation {
    kind: PerturbationKind,
    dim: usize,
    rho: f64,
    edges: Vec<Edge>,
}

impl PrecisionPerturbation {
    pub fn new(kind: PerturbationKind, dim: usize, rho: f64, edges: Vec<Edge>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain {
                name: "p",
                value: dim as f64,
                bound: "an edge model needs p >= 2".into(),
            });
        }
        check_rho(rho)?;
        if edges.len() != kind.edge_count() {
            return Err(Error::InvalidInput(format!(
                "{kind:?} requires exactly {} edge(s), got {}",
                kind.edge_count(),
                edges.len()
            )));
        }
        for e in &edges {
            e.check(dim)?;
        }
        if let [a, b] = edges.as_slice() {
            if a.u == b.u || a.u == b.v || a.v == b.u || a.v == b.v {
                return Err(Error::InvalidEdge {
                    u: b.u,
                    v: b.v,
                    dim,
                    reason: "the two edges must be disjoint",
                });
            }
        }
        Ok(PrecisionPerturbation {
            kind,
            dim,
            rho,
            edges,
        })
    }

    pub fn single_edge_precision(dim: usize, rho: f64, u: usize, v: usize) -> Result<Self> {
        Self::new(
            PerturbationKind::SingleEdgePrecision,
            dim,
            rho,
            vec![Edge::new(u, v)],
        )
    }

    pub fn two_edge_precision(dim: usize, rho: f64, first: Edge, second: Edge) -> Result<Self> {
        Self::new(
            PerturbationKind::TwoEdgePrecision,
            dim,
            rho,
            vec![first, second],
        )
    }

    pub fn single_edge_covariance(dim: usize, rho: f64, u: usize, v: usize) -> Result<Self> {
        Self::new(
            PerturbationKind::SingleEdgeCovariance,
            dim,
            rho,
            vec![Edge::new(u, v)],
        )
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The perturbed matrix itself: `I` plus `rho` at every listed edge.
    fn perturbed_identity(&self) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.dim, self.dim);
        for e in &self.edges {
            let (u, v) = e.zero_based();
            m[(u, v)] = self.rho;
            m[(v, u)] = self.rho;
        }
        m
    }
}

/// A multivariate normal distribution with cached factorization.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    /// Lower Cholesky factor of the covariance.
    chol: DMatrix<f64>,
    log_det: f64,
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    for i in 0..m.nrows() {
        for j in 0..i {
            let diff = (m[(i, j)] - m[(j, i)]).abs();
            if diff > SYMMETRY_RTOL * scale {
                return Err(Error::NotSymmetric {
                    row: i + 1,
                    col: j + 1,
                    diff,
                });
            }
        }
    }
    Ok(())
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Returns the lower Cholesky factor and the inverse of a symmetric matrix.
fn factor_and_invert(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let inv = symmetrize(&chol.inverse());
    Ok((chol.l(), inv))
}

fn log_det_from_factor(l: &DMatrix<f64>) -> f64 {
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

impl GaussianModel {
    /// Builds a model from a mean vector and a covariance matrix.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let p = covariance.nrows();
        if covariance.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: covariance.ncols(),
            });
        }
        if mean.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: mean.len(),
            });
        }
        if p == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        check_symmetric(&covariance)?;
        let covariance = symmetrize(&covariance);
        let (chol, precision) = factor_and_invert(&covariance)?;
        let log_det = log_det_from_factor(&chol);
        Ok(GaussianModel {
            mean,
            covariance,
            precision,
            chol,
            log_det,
        })
    }

    /// Builds a model from a mean vector and a precision (inverse covariance) matrix.
    pub fn from_precision(mean: DVector<f64>, precision: DMatrix<f64>) -> Result<Self> {
        let p = precision.nrows();
        if precision.ncols() != p || mean.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: if precision.ncols() != p {
                    precision.ncols()
                } else {
                    mean.len()
                },
            });
        }
        check_symmetric(&precision)?;
        let precision = symmetrize(&precision);
        let (_, covariance) = factor_and_invert(&precision)?;
        let mut model = GaussianModel::new(mean, covariance)?;
        model.precision = precision;
        Ok(model)
    }

    /// Zero-mean model with a given covariance.
    pub fn centered(covariance: DMatrix<f64>) -> Result<Self> {
        let p = covariance.nrows();
        Self::new(DVector::zeros(p), covariance)
    }

    /// Independent standard normals in `dim` coordinates.
    pub fn standard(dim: usize) -> Self {
        GaussianModel {
            mean: DVector::zeros(dim),
            covariance: DMatrix::identity(dim, dim),
            precision: DMatrix::identity(dim, dim),
            chol: DMatrix::identity(dim, dim),
            log_det: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// Lower-triangular `L` with `L Lᵀ = Σ`.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Natural log of `|Σ|`.
    pub fn log_det_covariance(&self) -> f64 {
        self.log_det
    }

    /// Log density at `x`, using forward substitution against the cached factor.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let p = self.dim();
        debug_assert_eq!(x.len(), p);
        let mut w = vec![0.0; p];
        let mut quad = 0.0;
        for i in 0..p {
            let mut acc = x[i] - self.mean[i];
            for (j, wj) in w.iter().enumerate().take(i) {
                acc -= self.chol[(i, j)] * wj;
            }
            let wi = acc / self.chol[(i, i)];
            w[i] = wi;
            quad += wi * wi;
        }
        -0.5 * (p as f64 * (2.0 * PI).ln() + self.log_det + quad)
    }

    /// Writes one draw into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let p = self.dim();
        let z: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        for (i, o) in out.iter_mut().enumerate().take(p) {
            let mut acc = self.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                acc += self.chol[(i, j)] * zj;
            }
            *o = acc;
        }
    }
}

/// Builds the model described by `perturbation`, with zero mean.
///
/// Precision kinds set `Σ⁻¹ = I + U` and invert explicitly; the covariance
/// kind sets `Σ = I + U` directly.
pub fn materialize(perturbation: &PrecisionPerturbation) -> Result<GaussianModel> {
    let dim = perturbation.dim();
    if dim > DEFAULT_MAX_DIM {
        return Err(Error::DenseCapExceeded {
            dim,
            cap: DEFAULT_MAX_DIM,
        });
    }
    let m = perturbation.perturbed_identity();
    let mean = DVector::zeros(dim);
    match perturbation.kind() {
        PerturbationKind::SingleEdgePrecision | PerturbationKind::TwoEdgePrecision => {
            GaussianModel::from_precision(mean, m)
        }
        PerturbationKind::SingleEdgeCovariance => GaussianModel::new(mean, m),
    }
}

/// Determinant of the single-edge precision matrix, `1 − ρ²`, for any `p`
/// and any edge position.
pub fn edge_determinant(rho: f64) -> f64 {
    1.0 - rho * rho
}

/// Trace of the single-edge covariance (the inverse of the perturbed
/// precision): `p − 2 + 2/(1 − ρ²)`.
pub fn edge_trace_of_inverse(p: usize, rho: f64) -> f64 {
    p as f64 - 2.0 + 2.0 / (1.0 - rho * rho)
}

/// Partial correlation of variables `u` and `v` (1-based) given all others,
/// `−σ^{uv} / √(σ^{uu} σ^{vv})` read off the precision matrix.
pub fn partial_correlation(model: &GaussianModel, u: usize, v: usize) -> Result<f64> {
    Edge::new(u, v).check(model.dim())?;
    let k = model.precision();
    let (i, j) = (u - 1, v - 1);
    let denom = (k[(i, i)] * k[(j, j)]).sqrt();
    if !(denom.is_finite() && denom > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(-k[(i, j)] / denom)
}

/// Exact divergence `D(f1‖f0) = E_{f1}[log f1/f0]` between two Gaussians:
///
/// `½ [tr(Σ0⁻¹Σ1) − p + (μ1−μ0)ᵀΣ0⁻¹(μ1−μ0) + log|Σ0| − log|Σ1|]`.
pub fn kld_gaussian(f1: &GaussianModel, f0: &GaussianModel) -> Result<KldResult> {
    let p = f1.dim();
    if f0.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: f0.dim(),
        });
    }
    let trace = f0.precision().component_mul(f1.covariance()).sum();
    let delta = f1.mean() - f0.mean();
    let maha = (delta.transpose() * f0.precision() * &delta)[(0, 0)];
    let value = 0.5 * (trace - p as f64 + maha + f0.log_det_covariance() - f1.log_det_covariance());
    Ok(KldResult::exact(value.max(0.0), None))
}

/// Coefficients `(A, B)` with `X1 = A Z1 + B Z2`, `X2 = A Z2 + B Z1`
/// reproducing the single-edge model at edge (1, 2) from independent
/// standard normals.
pub fn mixing_coefficients(rho: f64) -> (f64, f64) {
    let r = ((1.0 + rho) / (1.0 - rho)).sqrt();
    let s = 2.0 * (1.0 + rho).sqrt();
    ((1.0 + r) / s, (1.0 - r) / s)
}

/// Fills `out` with one draw from the single-edge precision model at edge (1, 2).
pub(crate) fn fill_edge12_draw<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64, out: &mut [f64]) {
    for x in out.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
    let (z1, z2) = (out[0], out[1]);
    out[0] = a * z1 + b * z2;
    out[1] = a * z2 + b * z1;
}

/// `n` draws of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub n: usize,
    pub dim: usize,
    pub data: Vec<f64>,
    pub seed: u64,
}

impl SampleBatch {
    fn generate<F>(n: usize, dim: usize, seed: u64, draw: F) -> Self
    where
        F: Fn(&mut rng::StreamRng, &mut [f64]) + Sync,
    {
        let mut data = vec![0.0; n * dim];
        if dim > 0 {
            data.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
                let mut r = rng::stream(seed, i as u64);
                draw(&mut r, row);
            });
        }
        SampleBatch { n, dim, data, seed }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim.max(1)).take(self.n)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for row in self.rows() {
            for (acc, x) in m.iter_mut().zip(row) {
                *acc += x;
            }
        }
        m.iter_mut().for_each(|x| *x /= self.n as f64);
        m
    }

    /// Unbiased sample covariance.
    pub fn empirical_covariance(&self) -> DMatrix<f64> {
        let mean = self.column_means();
        let mut c = DMatrix::zeros(self.dim, self.dim);
        for row in self.rows() {
            for i in 0..self.dim {
                let di = row[i] - mean[i];
                for j in 0..=i {
                    c[(i, j)] += di * (row[j] - mean[j]);
                }
            }
        }
        let denom = (self.n.max(2) - 1) as f64;
        for i in 0..self.dim {
            for j in 0..=i {
                let v = c[(i, j)] / denom;
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        c
    }
}

/// Draws from the single-edge precision model at edge (1, 2) through the
/// `A`/`B` mixing representation.
pub fn sample_mixture_conditional(p: usize, rho: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    if p < 2 {
        return Err(Error::Domain {
            name: "p",
            value: p as f64,
            bound: "p must be >= 2".into(),
        });
    }
    check_rho(rho)?;
    let (a, b) = mixing_coefficients(rho);
    Ok(SampleBatch::generate(n, p, seed, |r, row| {
        fill_edge12_draw(r, a, b, row)
    }))
}

/// Draws from an arbitrary model via its Cholesky factor.
pub fn sample_model(model: &GaussianModel, n: usize, seed: u64) -> SampleBatch {
    SampleBatch::generate(n, model.dim(), seed, |r, row| model.sample_into(r, row))
}
