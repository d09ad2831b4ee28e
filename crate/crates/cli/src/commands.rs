use std::fmt::Display;
use std::path::{Path, PathBuf};

use edgepower_core::figure::{default_rho2_grid, figure1_series, figure2_series};
use edgepower_core::power::pair_count;
use edgepower_core::{
    asymptotic_power, bonferroni_quantile, classify_regime, estimate_kld_oracle,
    estimate_mixture_kld, expected_partial_correlation, kld_covariance_approx, kld_gaussian,
    kld_mixture_approx, kld_single_edge, kld_two_edges_approx, plan_study, GaussianModel,
    KldResult, McConfig, PowerQuery,
};
use serde_json::{json, Value};

use crate::envelope::Envelope;
use crate::matrix_file::read_matrix;
use crate::{Cli, Command, FigureCommand, KldCommand, McArgs, PlanArgs, PlanCommand};

pub type CmdResult = Result<Envelope, String>;

fn err(e: impl Display) -> String {
    e.to_string()
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, String> {
    serde_json::to_value(x).map_err(err)
}

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Kld(k) => kld(k, cli.bits),
        Command::Plan(p) => plan(p),
        Command::Figure(f) => figure(f),
        Command::Regime(r) => regime(r.rho),
    }
}

fn mc_config(mc: &McArgs) -> McConfig {
    McConfig::new(mc.samples, mc.seed).with_chunk_size(mc.chunk_size)
}

fn mc_inputs(mc: &McArgs) -> Value {
    json!({ "samples": mc.samples, "seed": mc.seed, "chunk_size": mc.chunk_size })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn kld_payload(r: &KldResult, bits: bool) -> Result<Value, String> {
    let mut v = to_value(r)?;
    if bits {
        v["value_bits"] = json!(r.value_bits());
    }
    Ok(v)
}

fn flag_kld(env: &mut Envelope, r: &KldResult, which: &str) {
    if !r.valid {
        env.warn(format!(
            "approximation invalid: |rho| must be < 0.7071 for {which}; the value is not a usable divergence"
        ));
    }
    if r.mc.is_some_and(|d| d.heavy_tail) {
        env.warn(
            "heavy tail: per-draw log ratios have infinite variance for |rho| >= 0.4472; \
             stderr is unreliable, compare with mc.robust_stderr",
        );
    }
}

fn kld(cmd: &KldCommand, bits: bool) -> CmdResult {
    let (name, inputs, result) = match cmd {
        KldCommand::ExactEdge(a) => (
            "exact-edge",
            json!({ "rho": a.rho }),
            kld_single_edge(a.rho).map_err(err)?,
        ),
        KldCommand::MixtureApprox(a) => (
            "mixture-approx",
            json!({ "rho": a.rho, "p": a.p }),
            kld_mixture_approx(a.rho, a.p).map_err(err)?,
        ),
        KldCommand::TwoEdgeApprox(a) => (
            "two-edge-approx",
            json!({ "rho": a.rho, "p": a.p }),
            kld_two_edges_approx(a.rho, a.p).map_err(err)?,
        ),
        KldCommand::CovarianceApprox(a) => (
            "covariance-approx",
            json!({ "rho": a.rho, "p": a.p }),
            kld_covariance_approx(a.rho, a.p).map_err(err)?,
        ),
        KldCommand::MixtureMc { model, mc } => (
            "mixture-mc",
            merge(json!({ "rho": model.rho, "p": model.p }), mc_inputs(mc)),
            estimate_mixture_kld(model.p, model.rho, &mc_config(mc)).map_err(err)?,
        ),
        KldCommand::General {
            model_a,
            model_b,
            mc,
            mc_args,
        } => return kld_general(model_a, model_b, *mc, mc_args, bits),
    };
    let inputs = merge(inputs, json!({ "bits": bits }));
    let mut env = Envelope::new(format!("kld {name}"), inputs);
    flag_kld(&mut env, &result, name);
    Ok(env.with_results(kld_payload(&result, bits)?))
}

fn load_model(path: &Path) -> Result<GaussianModel, String> {
    let cov = read_matrix(path)?;
    GaussianModel::centered(cov).map_err(|e| format!("{}: {e}", path.display()))
}

fn kld_general(a: &Path, b: &Path, mc: bool, mc_args: &McArgs, bits: bool) -> CmdResult {
    let f1 = load_model(a)?;
    let f0 = load_model(b)?;
    let exact = kld_gaussian(&f1, &f0).map_err(err)?;
    let mut inputs = json!({
        "model_a": a.display().to_string(),
        "model_b": b.display().to_string(),
        "p": f1.dim(),
        "mc": mc,
        "bits": bits,
    });
    let mut results = kld_payload(&exact, bits)?;
    if mc {
        inputs = merge(inputs, mc_inputs(mc_args));
        let est = estimate_kld_oracle(&f1, &f0, &mc_config(mc_args)).map_err(err)?;
        results["monte_carlo"] = kld_payload(&est, bits)?;
    }
    Ok(Envelope::new("kld general", inputs).with_results(results))
}

fn plan_inputs(a: &PlanArgs) -> (u64, Value) {
    let m = a.m.unwrap_or_else(|| pair_count(a.p));
    (
        m,
        json!({ "rho": a.rho, "p": a.p, "alpha": a.alpha, "m": m }),
    )
}

fn classical_warning(env: &mut Envelope, n: u64, p: u64) {
    let f = n as i64 + 1 - p as i64;
    if f < 1 {
        env.warn(format!(
            "classical route inapplicable: f = n + 1 - p = {f} < 1 at n = {n}; \
             the sample partial correlation is undefined, the divergence route still applies"
        ));
    }
}

fn plan(cmd: &PlanCommand) -> CmdResult {
    match cmd {
        PlanCommand::Size(a) => {
            let (m, inputs) = plan_inputs(a);
            let plan = plan_study(a.rho, a.p, a.alpha, m).map_err(err)?;
            let mut env = Envelope::new("plan size", inputs);
            let n_asym = plan.n_asymptotic.ceil() as u64;
            let mut results = json!({
                "n_asymptotic": n_asym,
                "n_asymptotic_real": plan.n_asymptotic,
                "n_kld": plan.n_kld.map(|n| n.ceil() as u64),
                "n_kld_real": plan.n_kld,
                "n_kld_valid": plan.valid,
                "kld_per_obs": plan.kld_per_obs,
                "regime": to_value(&plan.regime)?,
            });
            if !plan.valid {
                env.warn(
                    "n_kld invalid: |rho| must be < 0.7071 for the divergence route; \
                     only n_asymptotic is reported",
                );
            }
            classical_warning(&mut env, n_asym, a.p);
            if let Ok(s) = expected_partial_correlation(a.rho, n_asym, a.p) {
                results["estimator_at_n_asymptotic"] = to_value(&s)?;
            }
            Ok(env.with_results(results))
        }
        PlanCommand::Power {
            plan: a,
            n,
            approx_quantile,
        } => {
            let (m, inputs) = plan_inputs(a);
            let inputs = merge(
                inputs,
                json!({ "n": n, "approx_quantile": approx_quantile }),
            );
            let q = PowerQuery::with_tests(*n, a.p, a.rho, a.alpha, m).map_err(err)?;
            let power = asymptotic_power(&q, *approx_quantile).map_err(err)?;
            let z = bonferroni_quantile(a.alpha, m, *approx_quantile).map_err(err)?;
            let mut env = Envelope::new("plan power", inputs);
            let mut results = json!({ "power": power, "quantile": z });
            classical_warning(&mut env, *n, a.p);
            if let Ok(s) = expected_partial_correlation(a.rho, *n, a.p) {
                results["estimator"] = to_value(&s)?;
            }
            Ok(env.with_results(results))
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn figure(cmd: &FigureCommand) -> CmdResult {
    match cmd {
        FigureCommand::One {
            rho,
            p_grid,
            mc,
            out,
        } => {
            let series = figure1_series(*rho, p_grid, &mc_config(mc)).map_err(err)?;
            let inputs = merge(
                json!({ "rho": rho, "p_grid": p_grid, "out": out.display().to_string() }),
                mc_inputs(mc),
            );
            let mut env = Envelope::new("figure 1", inputs);
            let fit = match series.slope_fit() {
                Ok(f) => Some(f),
                Err(e) => {
                    env.warn(format!("no slope fit: {e}"));
                    None
                }
            };
            let regime = classify_regime(*rho).map_err(err)?;
            if !regime.approximation_valid() {
                env.warn("approximation invalid: |rho| must be < 0.7071 for approx_kld");
            }
            if !regime.minor_term_finite_variance {
                env.warn("heavy tail: mc_stderr is unreliable for |rho| >= 0.4472");
            }
            let sidecar = json!({
                "rho": series.rho,
                "n_samples": series.n_samples,
                "seed": series.seed,
                "rows": to_value(&series.rows)?,
                "slope_fit": to_value(&fit)?,
            });
            let json_path = sidecar_path(out);
            write(out, &series.to_csv().map_err(err)?)?;
            write(
                &json_path,
                &(serde_json::to_string_pretty(&sidecar).map_err(err)? + "\n"),
            )?;
            Ok(env.with_results(json!({
                "csv": out.display().to_string(),
                "json": json_path.display().to_string(),
                "rows": sidecar["rows"],
                "slope_fit": sidecar["slope_fit"],
            })))
        }
        FigureCommand::Two { p, rho2_grid, out } => {
            let grid = rho2_grid.clone().unwrap_or_else(default_rho2_grid);
            let series = figure2_series(*p, &grid).map_err(err)?;
            let mut env = Envelope::new(
                "figure 2",
                json!({ "p": p, "rho2_grid": grid, "out": out.display().to_string() }),
            );
            if grid.iter().any(|r2| r2 * 2.0 >= 1.0) {
                env.warn("approximation invalid for rho^2 >= 0.5: precision columns are not usable there");
            }
            write(out, &series.to_csv().map_err(err)?)?;
            Ok(env.with_results(json!({
                "csv": out.display().to_string(),
                "rows": to_value(&series.rows)?,
            })))
        }
    }
}

fn regime(rho: f64) -> CmdResult {
    let r = classify_regime(rho).map_err(err)?;
    let mut results = to_value(&r)?;
    results["approximation_valid"] = json!(r.approximation_valid());
    results["explanation"] = json!(r.explain());
    Ok(Envelope::new("regime", json!({ "rho": rho })).with_results(results))
}
