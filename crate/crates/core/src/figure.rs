//! Data series behind the divergence-versus-`p` comparison (Monte Carlo
//! against the large-`p` approximation) and the divergence-versus-`ρ²`
//! comparison of the three perturbation models.
//!
//! CSV numbers are written with 17 significant digits.

use serde::{Deserialize, Serialize};

use crate::analytic::{kld_covariance_approx, kld_mixture_approx, kld_two_edges_approx};
use crate::error::{Error, Result};
use crate::kld::KldResult;
use crate::mc::{estimate_mixture_kld, fit_loglog_slope, McConfig, SlopeFit};

pub const FIGURE1_HEADER: [&str; 5] = ["p", "mc_kld", "mc_stderr", "approx_kld", "approx_valid"];
pub const FIGURE2_HEADER: [&str; 4] = [
    "rho2",
    "precision_single",
    "covariance_single",
    "precision_double",
];

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        // keeps the sign of negative zero out of the output
        "0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub p: usize,
    pub mc_kld: f64,
    pub mc_stderr: f64,
    pub approx_kld: f64,
    pub approx_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSeries {
    pub rho: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub rows: Vec<Figure1Row>,
    #[serde(skip)]
    estimates: Vec<(usize, KldResult)>,
}

impl FigureSeries {
    pub fn estimates(&self) -> &[(usize, KldResult)] {
        &self.estimates
    }

    /// Log-log fit through the Monte Carlo column, when every value is positive.
    pub fn slope_fit(&self) -> Result<SlopeFit> {
        fit_loglog_slope(&self.estimates)
    }

    pub fn to_csv(&self) -> Result<String> {
        write_csv(
            &FIGURE1_HEADER,
            self.rows.iter().map(|r| {
                vec![
                    r.p.to_string(),
                    fmt17(r.mc_kld),
                    fmt17(r.mc_stderr),
                    fmt17(r.approx_kld),
                    r.approx_valid.to_string(),
                ]
            }),
        )
    }

    /// The rows as a JSON array of objects.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.rows).map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn write_csv<I>(header: &[&str], rows: I) -> Result<String>
where
    I: Iterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(header).map_err(ser)?;
    for r in rows {
        w.write_record(&r).map_err(ser)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

fn check_grid<T>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        Err(Error::InvalidInput("grid must not be empty".into()))
    } else {
        Ok(())
    }
}

/// Monte Carlo and approximate divergence of the unknown-placement mixture
/// at each `p` of the grid.
pub fn figure1_series(rho: f64, p_grid: &[usize], cfg: &McConfig) -> Result<FigureSeries> {
    check_grid(p_grid)?;
    let mut rows = Vec::with_capacity(p_grid.len());
    let mut estimates = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let mc = estimate_mixture_kld(p, rho, cfg)?;
        let approx = kld_mixture_approx(rho, p)?;
        rows.push(Figure1Row {
            p,
            mc_kld: mc.value,
            mc_stderr: mc.stderr.unwrap_or(0.0),
            approx_kld: approx.value,
            approx_valid: approx.valid,
        });
        estimates.push((p, mc));
    }
    Ok(FigureSeries {
        rho,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        rows,
        estimates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure2Row {
    pub rho2: f64,
    pub precision_single: f64,
    pub covariance_single: f64,
    pub precision_double: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure2Series {
    pub p: usize,
    pub rows: Vec<Figure2Row>,
}

impl Figure2Series {
    pub fn to_csv(&self) -> Result<String> {
        write_csv(
            &FIGURE2_HEADER,
            self.rows.iter().map(|r| {
                vec![
                    fmt17(r.rho2),
                    fmt17(r.precision_single),
                    fmt17(r.covariance_single),
                    fmt17(r.precision_double),
                ]
            }),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.rows).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Default `ρ²` grid, `0, 0.05, …, 0.45`.
pub fn default_rho2_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 20.0).collect()
}

/// The three per-observation divergences against `ρ²` at fixed `p`.
pub fn figure2_series(p: usize, rho2_grid: &[f64]) -> Result<Figure2Series> {
    check_grid(rho2_grid)?;
    let rows = rho2_grid
        .iter()
        .map(|&rho2| {
            if !(0.0..1.0).contains(&rho2) {
                return Err(Error::Domain {
                    name: "rho2",
                    value: rho2,
                    bound: "rho^2 must lie in [0, 1)".into(),
                });
            }
            let rho = rho2.sqrt();
            Ok(Figure2Row {
                rho2,
                precision_single: kld_mixture_approx(rho, p)?.value,
                covariance_single: kld_covariance_approx(rho, p)?.value,
                precision_double: kld_two_edges_approx(rho, p)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Figure2Series { p, rows })
}
