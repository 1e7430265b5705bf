//! Ensemble verification suites: per-sample CSV rows plus a summary JSON of
//! empirical constants checked against the configured stability tolerance.

use std::path::Path;

use nonlocal::ensemble::{member_rng, random_trig_poly, trig_ensemble};
use nonlocal::norms::{
    bessel_norm, check_interpolation, check_translation_bound, fractional_laplacian, lp_norm,
    NormOrder,
};
use nonlocal::operator::OperatorPlan;
use nonlocal::semigroup::{
    check_char_function, check_factorization, propagate_mc, propagate_spectral,
};
use nonlocal::solver::{apriori_report, solve_duhamel_steps, solve_imex, Forcing, Problem};
use nonlocal::{GridFunction, TorusGrid};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{num, say, write_json, Csv};
use crate::{classify, CliError, Suite};

/// An empirical constant on the base grid and after refinement.
#[derive(Debug, Clone, Serialize)]
struct Constant {
    name: String,
    p: f64,
    base: f64,
    refined: f64,
    relative_change: f64,
    passed: bool,
}

impl Constant {
    fn new(name: &str, p: f64, base: f64, refined: f64, tol: f64, positive: bool) -> Self {
        let relative_change = (refined / base - 1.0).abs();
        let passed = base.is_finite()
            && refined.is_finite()
            && relative_change <= tol
            && (!positive || base > 0.0);
        Self {
            name: name.into(),
            p,
            base,
            refined,
            relative_change,
            passed,
        }
    }
}

fn finish(
    out: &Path,
    digest: &str,
    suite: &str,
    body: serde_json::Value,
    failed: Vec<String>,
) -> Result<(), CliError> {
    let mut body = body;
    body["suite"] = suite.into();
    body["passed"] = failed.is_empty().into();
    body["failed"] = json!(failed);
    write_json(out, "summary.json", digest, &body)?;
    say(&format!(
        "suite {suite}: {}",
        if failed.is_empty() { "pass" } else { "FAIL" }
    ));
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "suite {suite} failed: {}",
            failed.join(", ")
        )))
    }
}

fn failures(constants: &[Constant]) -> Vec<String> {
    constants
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} (p = {})", c.name, c.p))
        .collect()
}

pub fn verify(cfg: &RunConfig, suite: Suite, out: &Path) -> Result<(), CliError> {
    if cfg.ensemble.size == 0 {
        return Err(CliError::Usage("ensemble.size must be positive".into()));
    }
    if cfg
        .ensemble
        .exponents
        .iter()
        .any(|p| !(*p > 1.0 && p.is_finite()))
    {
        return Err(CliError::Usage(
            "ensemble.exponents must lie in (1, ∞)".into(),
        ));
    }
    match suite {
        Suite::Norms => norms(cfg, out),
        Suite::Operator => operator(cfg, out),
        Suite::Semigroup => semigroup(cfg, out),
        Suite::Regularity => regularity(cfg, out),
    }
}

fn grids(cfg: &RunConfig) -> Result<[TorusGrid; 2], CliError> {
    Ok([cfg.grid()?, cfg.grid_with(2 * cfg.grid.n)?])
}

/// Translation bound with `β = α/2` over `y = 2^{-j}e₁` and interpolation
/// between `β` and `α`.
fn norms(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let digest = cfg.digest();
    let ens = &cfg.ensemble;
    let alpha = cfg.measure.alpha;
    let beta = alpha / 2.0;
    let mut csv = Csv::create(
        out,
        "samples.csv",
        &digest,
        &[
            "n",
            "member",
            "p",
            "translation_ratio",
            "interpolation_ratio",
        ],
    )?;
    let mut maxima = vec![[0.0f64; 2]; 2 * ens.exponents.len()];
    for (g, grid) in grids(cfg)?.into_iter().enumerate() {
        let fs = trig_ensemble(grid, cfg.seed, ens.size, ens.kmax, true).map_err(classify)?;
        for (m, f) in fs.iter().enumerate() {
            for (j, &p) in ens.exponents.iter().enumerate() {
                let mut translation: f64 = 0.0;
                for s in 0..=10 {
                    let mut y = vec![0.0; grid.dim()];
                    y[0] = 0.5f64.powi(s);
                    translation =
                        translation.max(check_translation_bound(f, &y, beta, p).map_err(classify)?);
                }
                let interpolation = check_interpolation(f, beta, alpha, p).map_err(classify)?.1;
                let slot = &mut maxima[2 * j + g];
                slot[0] = slot[0].max(translation);
                slot[1] = slot[1].max(interpolation);
                csv.row([
                    grid.points_per_axis().to_string(),
                    m.to_string(),
                    num(p),
                    num(translation),
                    num(interpolation),
                ])?;
            }
        }
    }
    csv.finish()?;
    let mut constants = Vec::new();
    for (j, &p) in ens.exponents.iter().enumerate() {
        let (a, b) = (maxima[2 * j], maxima[2 * j + 1]);
        constants.push(Constant::new(
            "translation",
            p,
            a[0],
            b[0],
            ens.stability_tolerance,
            true,
        ));
        constants.push(Constant::new(
            "interpolation",
            p,
            a[1],
            b[1],
            ens.stability_tolerance,
            true,
        ));
    }
    let failed = failures(&constants);
    finish(
        out,
        &digest,
        "norms",
        json!({ "beta": beta, "constants": constants }),
        failed,
    )
}

/// `‖L f‖_p / ‖(−Δ)^{α/2} f‖_p` for constant coefficients, otherwise
/// `(‖L f‖_p + ‖f‖_p) / ‖f‖_{H^{α,p}}`.
fn operator(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let digest = cfg.digest();
    let ens = &cfg.ensemble;
    let nu = cfg.measure()?;
    let coeff = cfg.coefficient()?;
    let alpha = nu.alpha();
    let frozen = coeff.as_constant().is_some();
    let mut csv = Csv::create(out, "samples.csv", &digest, &["n", "member", "p", "ratio"])?;
    let mut ranges = vec![(f64::INFINITY, 0.0f64); 2 * ens.exponents.len()];
    for (g, grid) in grids(cfg)?.into_iter().enumerate() {
        let plan = OperatorPlan::for_coefficient(&nu, grid, &cfg.scheme(), &coeff, 0.0)
            .map_err(classify)?;
        let fs = trig_ensemble(grid, cfg.seed, ens.size, ens.kmax, frozen).map_err(classify)?;
        for (m, f) in fs.iter().enumerate() {
            let lf = plan.apply(f).map_err(classify)?.value;
            let frac = if frozen {
                Some(fractional_laplacian(f, alpha).map_err(classify)?)
            } else {
                None
            };
            for (j, &p) in ens.exponents.iter().enumerate() {
                let ratio = match &frac {
                    Some(d) => lp_norm(&lf, p) / lp_norm(d, p),
                    None => {
                        (lp_norm(&lf, p) + lp_norm(f, p))
                            / bessel_norm(f, NormOrder::new(alpha, p).map_err(classify)?)
                    }
                };
                let r = &mut ranges[2 * j + g];
                *r = (r.0.min(ratio), r.1.max(ratio));
                csv.row([
                    grid.points_per_axis().to_string(),
                    m.to_string(),
                    num(p),
                    num(ratio),
                ])?;
            }
        }
    }
    csv.finish()?;
    let mut constants = Vec::new();
    let mut bounds = Vec::new();
    for (j, &p) in ens.exponents.iter().enumerate() {
        let (a, b) = (ranges[2 * j], ranges[2 * j + 1]);
        constants.push(Constant::new(
            "c_lower",
            p,
            a.0,
            b.0,
            ens.stability_tolerance,
            true,
        ));
        constants.push(Constant::new(
            "C_upper",
            p,
            a.1,
            b.1,
            ens.stability_tolerance,
            true,
        ));
        bounds.push(json!({ "p": p, "c_lower": a.0, "C_upper": a.1 }));
    }
    let failed = failures(&constants);
    let comparison = if frozen {
        "fractional-laplacian"
    } else {
        "bessel-potential"
    };
    finish(
        out,
        &digest,
        "operator",
        json!({ "comparison": comparison, "bounds": bounds, "constants": constants }),
        failed,
    )
}

fn semigroup(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let digest = cfg.digest();
    let grid = cfg.grid()?;
    let d = grid.dim();
    let nu = cfg.measure()?;
    let sampler = cfg.sampler(grid)?;
    let t_end = cfg.sampler.t_end;
    let mut csv = Csv::create(
        out,
        "samples.csv",
        &digest,
        &["check", "label", "discrepancy", "stderr", "z"],
    )?;
    let mut failed = Vec::new();

    let ks: Vec<Vec<f64>> = (1..=3)
        .map(|k| {
            let mut v = vec![0.0; d];
            v[0] = k as f64;
            v
        })
        .collect();
    for r in check_char_function(&nu, &sampler, t_end, &ks).map_err(classify)? {
        let target = num_complex::Complex64::new(r.psi_re, r.psi_im) * (t_end * sampler.lambda0());
        let gap = (num_complex::Complex64::new(r.emp_re, r.emp_im) - target.exp()).norm();
        csv.row([
            "char-function".into(),
            format!("k={:?}", &r.k[..d]),
            num(gap),
            num(r.se),
            num(r.z),
        ])?;
        if r.z > 3.0 {
            failed.push(format!("char-function k = {:?}", &r.k[..d]));
        }
    }

    let f = random_trig_poly(grid, cfg.seed, 0, 4, false).map_err(classify)?;
    let est = propagate_mc(&f, &nu, &sampler, 0.0, t_end).map_err(classify)?;
    let vartheta = sampler.vartheta(0.0);
    let exact = propagate_spectral(&f, &nu, 0.0, t_end, sampler.lambda0(), &vartheta[..d])
        .map_err(classify)?;
    let gap = est.mean.max_diff(&exact);
    let z = gap / est.stderr;
    csv.row([
        "mc-vs-spectral".into(),
        "random".into(),
        num(gap),
        num(est.stderr),
        num(z),
    ])?;
    if z > 3.0 {
        failed.push("mc-vs-spectral".into());
    }

    let varying = sampler
        .clone()
        .with_intensity(|t| 1.0 + t, 1.0)
        .map_err(classify)?;
    let fac = check_factorization(&f, &nu, &varying, 0.0, t_end).map_err(classify)?;
    let z = fac.discrepancy / fac.combined_stderr;
    csv.row([
        "factorization".into(),
        "lambda=1+t".into(),
        num(fac.discrepancy),
        num(fac.combined_stderr),
        num(z),
    ])?;
    if z > 3.0 {
        failed.push("factorization".into());
    }
    csv.finish()?;
    finish(
        out,
        &digest,
        "semigroup",
        json!({ "paths": sampler.n_paths, "t": t_end }),
        failed,
    )
}

fn space_time_forcing(
    grid: TorusGrid,
    seed: u64,
    member: u64,
    kmax: usize,
) -> Result<Forcing, CliError> {
    let mut rng = member_rng(seed, member);
    let mut parts = Vec::new();
    for j in 0..3 {
        let omega = rng.random_range(0.0..4.0 * std::f64::consts::PI);
        let phase = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let g = random_trig_poly(grid, seed.wrapping_add(1), 3 * member + j, kmax, true)
            .map_err(classify)?;
        parts.push((omega, phase, g));
    }
    Ok(Forcing::field(move |t| {
        parts
            .iter()
            .fold(GridFunction::zeros(grid), |acc, (w, ph, g)| {
                acc.axpy((w * t + ph).cos(), g)
            })
    }))
}

fn time_lp(times: &[f64], fields: &[GridFunction], p: f64) -> f64 {
    let v: Vec<f64> = fields.iter().map(|f| lp_norm(f, p).powf(p)).collect();
    let mut acc = 0.0;
    for i in 1..v.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (v[i] + v[i - 1]);
    }
    acc.powf(1.0 / p)
}

/// Maximal regularity `‖∂_t u − f‖ / ‖f‖` in `L^p(0,T; L^p)` over random
/// space-time forcings with zero initial data, at `steps` and `2·steps`.
fn regularity(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let digest = cfg.digest();
    let ens = &cfg.ensemble;
    let grid = cfg.grid()?;
    let pc = cfg.problem_config()?;
    let p = pc.p;
    let nu = cfg.measure()?;
    let coeff = cfg.coefficient()?;
    let drift = cfg.drift()?;
    let exact = coeff.as_constant().is_some() && (drift.is_zero() || drift.as_constant().is_some());
    let mut csv = Csv::create(
        out,
        "samples.csv",
        &digest,
        &["steps", "member", "ratio", "apriori_ratio"],
    )?;
    let mut maxima = [[0.0f64; 2]; 2];
    for (g, steps) in [cfg.solve.steps, 2 * cfg.solve.steps]
        .into_iter()
        .enumerate()
    {
        for m in 0..ens.size as u64 {
            let forcing = space_time_forcing(grid, cfg.seed, m, ens.kmax)?;
            let prob = Problem::new(
                nu.clone(),
                coeff.clone(),
                drift.clone(),
                forcing.clone(),
                GridFunction::zeros(grid),
                pc.horizon,
                p,
            )
            .map_err(classify)?
            .with_scheme(cfg.scheme());
            let sol = if exact {
                solve_duhamel_steps(&prob, steps)
            } else {
                solve_imex(&prob, steps)
            }
            .map_err(classify)?;
            let fs: Vec<GridFunction> = sol.times.iter().map(|&t| forcing.eval(t, grid)).collect();
            let lu: Vec<GridFunction> = sol
                .rhs_history
                .iter()
                .zip(&fs)
                .map(|(r, f)| r.sub(f))
                .collect();
            let ratio = time_lp(&sol.times, &lu, p) / time_lp(&sol.times, &fs, p);
            let apriori = apriori_report(&sol, &prob, 0).map_err(classify)?.ratio;
            maxima[g][0] = maxima[g][0].max(ratio);
            maxima[g][1] = maxima[g][1].max(apriori);
            csv.row([steps.to_string(), m.to_string(), num(ratio), num(apriori)])?;
        }
    }
    csv.finish()?;
    let tol = ens.stability_tolerance;
    let constants = vec![
        Constant::new(
            "maximal-regularity",
            p,
            maxima[0][0],
            maxima[1][0],
            tol,
            false,
        ),
        Constant::new("apriori", p, maxima[0][1], maxima[1][1], tol, false),
    ];
    let failed = failures(&constants);
    let route = if exact { "duhamel" } else { "imex" };
    finish(
        out,
        &digest,
        "regularity",
        json!({ "route": route, "constants": constants }),
        failed,
    )
}
