//! Acceptance criteria, one PASS/FAIL line each. Seeds are fixed.
//!
//! Run with `cargo test -p edgepower-cli --test acceptance`; the process
//! exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use edgepower_core::analytic::exp_product_moment;
use edgepower_core::density::{EdgeMixture, EdgeTarget, GaussianMixture};
use edgepower_core::figure::{default_rho2_grid, figure1_series, figure2_series};
use edgepower_core::mc::estimate_exp_product_moment;
use edgepower_core::{
    bonferroni_quantile, estimate_kld_oracle, estimate_mixture_kld, expected_partial_correlation,
    kld_covariance_approx, kld_gaussian, kld_mixture_approx, kld_single_edge, kld_two_edges_approx,
    materialize, normal_cdf, normal_upper_quantile, sample_size_asymptotic, sample_size_kld,
    GaussianModel, KldResult, McConfig, PrecisionPerturbation, SlopeFit,
};

type Outcome = Result<String, String>;

fn within(est: &KldResult, target: f64, k: f64) -> bool {
    (est.value - target).abs() <= k * est.stderr.unwrap_or(0.0)
}

fn c1_three_routes() -> Outcome {
    let mut worst_closed = 0.0f64;
    let mut worst_z = 0.0f64;
    let mut seed = 100;
    for rho in [0.1, 0.3, 0.5, 0.7] {
        let closed = kld_single_edge(rho).map_err(|e| e.to_string())?.value;
        for p in [2, 5, 10] {
            let pert = PrecisionPerturbation::single_edge_precision(p, rho, 1, p)
                .map_err(|e| e.to_string())?;
            let f1 = materialize(&pert).map_err(|e| e.to_string())?;
            let f0 = GaussianModel::standard(p);
            let generic = kld_gaussian(&f1, &f0).map_err(|e| e.to_string())?.value;
            let diff = (generic - closed).abs();
            worst_closed = worst_closed.max(diff);
            if diff > 1e-10 {
                return Err(format!(
                    "rho={rho} p={p}: closed {closed} vs generic {generic}"
                ));
            }
            seed += 1;
            let mc = estimate_kld_oracle(&f1, &f0, &McConfig::new(100_000, seed))
                .map_err(|e| e.to_string())?;
            let z = (mc.value - closed) / mc.stderr.unwrap_or(f64::NAN);
            worst_z = worst_z.max(z.abs());
            if !within(&mc, closed, 3.0) {
                return Err(format!(
                    "rho={rho} p={p}: MC {} +/- {:?} vs closed {closed}",
                    mc.value, mc.stderr
                ));
            }
        }
    }
    Ok(format!(
        "max |closed - generic| = {worst_closed:.1e}, max |MC z| = {worst_z:.2}"
    ))
}

fn describe_fit(fit: &SlopeFit) -> String {
    format!("slope {:.3} (se {:.3})", fit.slope, fit.slope_stderr)
}

fn c2_figure1_moderate() -> Outcome {
    let series = figure1_series(0.3, &[10, 30, 100, 300], &McConfig::new(100_000, 1))
        .map_err(|e| e.to_string())?;
    let fit = series.slope_fit().map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    let zs: Vec<String> = series
        .rows
        .iter()
        .map(|r| {
            let z = (r.mc_kld - r.approx_kld) / r.mc_stderr;
            if z.abs() > 3.0 {
                failures.push(format!("p={} z={z:.2}", r.p));
            }
            format!("p={}:{z:+.2}", r.p)
        })
        .collect();
    if (fit.slope + 1.0).abs() > 0.15 {
        failures.push(format!("{} outside [-1.15, -0.85]", describe_fit(&fit)));
    }
    let detail = format!("z {}, {}", zs.join(" "), describe_fit(&fit));
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn c3_figure1_heavy() -> Result<(SlopeFit, String), String> {
    let series = figure1_series(0.9, &[10, 50, 100, 500], &McConfig::new(100_000, 1))
        .map_err(|e| e.to_string())?;
    let fit = series.slope_fit().map_err(|e| e.to_string())?;
    let values: Vec<String> = series
        .rows
        .iter()
        .map(|r| format!("p={}:{:.4}", r.p, r.mc_kld))
        .collect();
    let detail = format!("{}, {}", describe_fit(&fit), values.join(" "));
    if (-0.45..=-0.15).contains(&fit.slope) {
        Ok((fit, detail))
    } else {
        Err(format!("slope outside [-0.45, -0.15]; {detail}"))
    }
}

fn c4_worked_example() -> Outcome {
    let n_asym = sample_size_asymptotic(0.447, 1000, 0.05).map_err(|e| e.to_string())?;
    let plan = sample_size_kld(0.447, 1000, 0.05).map_err(|e| e.to_string())?;
    let n_kld = plan.n_kld.ok_or("n_kld missing")?;
    let detail = format!("n_asymptotic {n_asym:.2}, n_kld {n_kld:.1}");
    if (n_asym - 135.0).abs() <= 2.0 && (n_kld - 20_700.0).abs() <= 700.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c5_extrapolation(fit: &SlopeFit) -> Outcome {
    let kld = fit.predict(1e6);
    let z = normal_upper_quantile(0.05).map_err(|e| e.to_string())?;
    let n = z * z / kld;
    let detail = format!(
        "slope {:.3}: KLD(1e6) = {kld:.4}, n = {n:.1}, target 330 within factor 3",
        fit.slope
    );
    if (330.0 / 3.0..=330.0 * 3.0).contains(&n) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c6_fourfold() -> Outcome {
    let mut checked = 0;
    for rho in [-0.7, -0.5, -0.2, 0.01, 0.1, 0.3, 0.447, 0.6, 0.7] {
        for p in [5, 10, 100, 1000, 100_000] {
            let one = kld_mixture_approx(rho, p).map_err(|e| e.to_string())?.value;
            let two = kld_two_edges_approx(rho, p)
                .map_err(|e| e.to_string())?
                .value;
            if (two - 4.0 * one).abs() > 1e-15 * (4.0 * one).abs() {
                return Err(format!("rho={rho} p={p}: {two} vs 4*{one}"));
            }
            checked += 1;
        }
    }
    let csv = figure2_series(100, &default_rho2_grid())
        .and_then(|s| s.to_csv())
        .map_err(|e| e.to_string())?;
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line
            .split(',')
            .map(|t| t.parse::<f64>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        if v[3] != 4.0 * v[1] {
            return Err(format!("figure 2 row {line}"));
        }
        rows += 1;
    }
    Ok(format!("{checked} grid points, {rows} CSV rows"))
}

fn c7_covariance() -> Outcome {
    let rho = 0.3;
    let base = kld_covariance_approx(rho, 2)
        .map_err(|e| e.to_string())?
        .value
        * 4.0;
    for p in [2, 3, 10, 30, 100, 1000, 10_000] {
        let v = kld_covariance_approx(rho, p)
            .map_err(|e| e.to_string())?
            .value;
        let scaled = v * (p * p) as f64;
        if (scaled - base).abs() > 1e-15 * base {
            return Err(format!("p={p}: p^2 * kld = {scaled} vs {base}"));
        }
    }
    let mut zs = Vec::new();
    for (p, seed) in [(10, 701), (30, 702)] {
        let approx = kld_covariance_approx(rho, p)
            .map_err(|e| e.to_string())?
            .value;
        let f1 = EdgeMixture::new(EdgeTarget::Covariance, p, rho).map_err(|e| e.to_string())?;
        let mc = estimate_kld_oracle(
            &f1,
            &GaussianModel::standard(p),
            &McConfig::new(100_000, seed),
        )
        .map_err(|e| e.to_string())?;
        let z = (mc.value - approx) / mc.stderr.unwrap_or(f64::NAN);
        zs.push(format!("p={p}:{z:+.2}"));
        if !within(&mc, approx, 3.0) {
            return Err(format!(
                "p={p}: MC {} vs approx {approx}, z {z:.2}",
                mc.value
            ));
        }
    }
    Ok(format!("p^2 * kld constant, MC z {}", zs.join(" ")))
}

fn c8_moments() -> Outcome {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut seed = 800;
    for rho in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        for gamma in [0.25, 0.5, 1.0, 1.5, 2.0] {
            for scaled in [false, true] {
                let finite_variance = if scaled {
                    4.0 * gamma * gamma * rho * rho < 1.0 - rho * rho
                } else {
                    2.0 * gamma * rho < 1.0
                };
                if !finite_variance {
                    continue;
                }
                seed += 1;
                let exact = exp_product_moment(rho, gamma, scaled).map_err(|e| e.to_string())?;
                let s = estimate_exp_product_moment(
                    rho,
                    gamma,
                    scaled,
                    &McConfig::new(1_000_000, seed),
                )
                .map_err(|e| e.to_string())?;
                let z = (s.mean - exact) / s.stderr;
                worst = worst.max(z.abs());
                if z.abs() > 5.0 {
                    return Err(format!(
                        "rho={rho} gamma={gamma} scaled={scaled}: {} vs {exact}, z {z:.2}",
                        s.mean
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} grid points, max |z| = {worst:.2}"))
}

fn c9_power() -> Outcome {
    let mut worst = 0.0f64;
    for rho in [0.05, 0.1, 0.2, 0.447, 0.6, 0.9] {
        for p in [3u64, 10, 100, 1000, 10_000] {
            let n = sample_size_asymptotic(rho, p, 0.05).map_err(|e| e.to_string())?;
            let m = p * (p - 1) / 2;
            let z = bonferroni_quantile(0.05, m, false).map_err(|e| e.to_string())?;
            let power = normal_cdf(n.sqrt() * rho - z);
            worst = worst.max((power - 0.5).abs());
            if (power - 0.5).abs() > 1e-6 {
                return Err(format!("rho={rho} p={p}: power {power} at n={n}"));
            }
        }
    }
    for alpha in [0.001, 0.01, 0.05, 0.1] {
        for m in [10u64, 100, 1_000, 100_000, 10_000_000] {
            let exact = bonferroni_quantile(alpha, m, false).map_err(|e| e.to_string())?;
            let approx = bonferroni_quantile(alpha, m, true).map_err(|e| e.to_string())?;
            if approx < exact {
                return Err(format!(
                    "alpha={alpha} m={m}: approx {approx} < exact {exact}"
                ));
            }
        }
    }
    let e2 = expected_partial_correlation(0.3, 11, 10)
        .map_err(|e| e.to_string())?
        .efficacy;
    let e1000 = expected_partial_correlation(0.3, 1009, 10)
        .map_err(|e| e.to_string())?
        .efficacy;
    let detail = format!(
        "max |power - 0.5| = {worst:.1e}, efficacy(2) - 4/pi = {:.1e}, efficacy(1000) = {e1000:.6}",
        e2 - 4.0 / PI
    );
    if (e2 - 4.0 / PI).abs() <= 1e-10 && (e1000 - 1.0).abs() <= 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c10_brute_force() -> Outcome {
    let mut zs = Vec::new();
    let mut seed = 1000;
    for rho in [0.2, 0.4] {
        for p in 3..=6 {
            seed += 2;
            let explicit =
                GaussianMixture::all_single_edges(false, p, rho).map_err(|e| e.to_string())?;
            let brute = estimate_kld_oracle(
                &explicit,
                &GaussianModel::standard(p),
                &McConfig::new(100_000, seed),
            )
            .map_err(|e| e.to_string())?;
            let fast = estimate_mixture_kld(p, rho, &McConfig::new(100_000, seed + 1))
                .map_err(|e| e.to_string())?;
            let se = brute
                .stderr
                .unwrap_or(0.0)
                .hypot(fast.stderr.unwrap_or(0.0));
            let z = (brute.value - fast.value) / se;
            zs.push(format!("{z:+.2}"));
            if z.abs() > 3.0 {
                return Err(format!(
                    "rho={rho} p={p}: brute {} vs fast {}, z {z:.2}",
                    brute.value, fast.value
                ));
            }
        }
    }
    Ok(format!("z {}", zs.join(" ")))
}

fn run_cli(args: &[String], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_edgepower"))
        .args(args)
        .env("EDGEPOWER_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    std::fs::write(&a, "3\n1 0.3 0.1\n0.3 1 0\n0.1 0 1\n").map_err(|e| e.to_string())?;
    std::fs::write(&b, "3\n1 0 0\n0 2 0\n0 0 1\n").map_err(|e| e.to_string())?;
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let mut compared = 0;
    for threads in ["2", "4"] {
        let cases = [
            (
                s(&[
                    "kld",
                    "mixture-mc",
                    "--rho",
                    "0.6",
                    "--p",
                    "40",
                    "--samples",
                    "20000",
                    "--seed",
                    "9",
                ]),
                None,
            ),
            (
                s(&[
                    "kld",
                    "mixture-mc",
                    "--rho",
                    "0.3",
                    "--p",
                    "12",
                    "--samples",
                    "5000",
                    "--chunk-size",
                    "7",
                ]),
                None,
            ),
            (
                s(&[
                    "kld",
                    "general",
                    "--model-a",
                    a.to_str().unwrap(),
                    "--model-b",
                    b.to_str().unwrap(),
                    "--mc",
                    "--samples",
                    "20000",
                    "--seed",
                    "3",
                ]),
                None,
            ),
            (
                s(&[
                    "figure",
                    "1",
                    "--rho",
                    "0.3",
                    "--p-grid",
                    "10,30,100",
                    "--samples",
                    "10000",
                    "--seed",
                    "1",
                ]),
                Some("fig"),
            ),
        ];
        for (mut args, file) in cases {
            let mut outputs = Vec::new();
            for t in ["1", threads] {
                let mut files = Vec::new();
                if let Some(stem) = file {
                    let path = dir.path().join(format!("{stem}.csv"));
                    args.extend(["--out".to_string(), path.display().to_string()]);
                    let stdout = run_cli(&args, t)?;
                    args.truncate(args.len() - 2);
                    files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
                    files.push(
                        std::fs::read(path.with_extension("json")).map_err(|e| e.to_string())?,
                    );
                    files.push(stdout);
                } else {
                    files.push(run_cli(&args, t)?);
                }
                outputs.push(files);
            }
            if outputs[0] != outputs[1] {
                return Err(format!(
                    "{} differs between 1 and {threads} threads",
                    args.join(" ")
                ));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} command pairs byte-identical"))
}

fn report(n: u32, name: &str, outcome: &Outcome, secs: f64) -> bool {
    let (tag, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {n:>2} {tag} [{secs:>6.1}s] {name}: {detail}");
    outcome.is_ok()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn check(n: u32, name: &str, f: fn() -> Outcome) -> bool {
    let (o, secs) = timed(f);
    report(n, name, &o, secs)
}

fn main() {
    let mut all = check(1, "closed form vs generic vs Monte Carlo", c1_three_routes);
    all &= check(2, "figure 1, rho = 0.3", c2_figure1_moderate);

    let (c3, secs3) = timed(c3_figure1_heavy);
    let fit3 = c3.as_ref().ok().map(|(fit, _)| fit.clone());
    all &= report(3, "figure 1, rho = 0.9", &c3.map(|(_, d)| d), secs3);

    all &= check(4, "worked sample-size example", c4_worked_example);
    let c5 = match &fit3 {
        Some(fit) => c5_extrapolation(fit),
        None => Err("needs the slope from criterion 3".to_string()),
    };
    all &= report(5, "extrapolation to p = 1e6", &c5, 0.0);
    all &= check(6, "four-fold relation", c6_fourfold);
    all &= check(7, "covariance-model order", c7_covariance);
    all &= check(8, "moment identities", c8_moments);
    all &= check(9, "power machinery", c9_power);
    all &= check(10, "small-instance brute force", c10_brute_force);
    all &= check(11, "determinism across thread counts", c11_determinism);

    if !all {
        println!("acceptance: at least one criterion failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
