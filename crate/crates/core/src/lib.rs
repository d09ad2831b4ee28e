//! Detectability of nonzero partial correlations in Gaussian graphical
//! models, measured by the Kullback-Leibler divergence between a perturbed
//! model and independent standard normals.
//!
//! - [`model`]: structured Gaussian models, the two-Gaussian divergence and samplers
//! - [`analytic`]: closed forms and large-`p` approximations
//! - [`regime`]: tail regimes of the likelihood-ratio summands
//! - [`mc`]: Monte Carlo estimators and log-log slope fits
//! - [`power`]: Bonferroni power and sample-size planning
//! - [`figure`]: tabular series for the divergence-versus-`p` and
//!   divergence-versus-`ρ²` plots

pub mod analytic;
pub mod density;
mod error;
pub mod figure;
pub mod hypergeometric;
mod kld;
pub mod mc;
pub mod model;
pub mod normal;
pub mod power;
pub mod regime;
pub mod rng;

pub use analytic::{
    exp_product_moment, kld_covariance_approx, kld_mixture_approx, kld_single_edge,
    kld_two_edges_approx,
};
pub use density::{Density, EdgeMixture, EdgeTarget, GaussianMixture};
pub use error::{Error, Result};
pub use figure::{
    figure1_series, figure2_series, Figure1Row, Figure2Row, Figure2Series, FigureSeries,
};
pub use kld::{KldResult, McDiagnostics, Method};
pub use mc::{estimate_kld_oracle, estimate_mixture_kld, fit_loglog_slope, McConfig, SlopeFit};
pub use model::{
    edge_determinant, edge_trace_of_inverse, kld_gaussian, materialize, partial_correlation,
    sample_mixture_conditional, sample_model, Edge, GaussianModel, PerturbationKind,
    PrecisionPerturbation, SampleBatch,
};
pub use nalgebra;
pub use normal::{normal_cdf, normal_quantile, normal_upper_quantile};
pub use power::{
    asymptotic_power, bonferroni_quantile, expected_partial_correlation, plan_study,
    sample_size_asymptotic, sample_size_kld, EstimatorSummary, PowerQuery, StudyPlan,
};
pub use regime::{classify_regime, RhoRegime};
