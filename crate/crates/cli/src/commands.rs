use std::path::Path;

use nonlocal::semigroup::{check_char_function, sample_path_on};
use nonlocal::solver::{
    apriori_report, solve_continuity, solve_duhamel_steps, solve_imex, solve_nonlinear,
    NonlinearConfig, Potential, Problem, Solution,
};
use serde_json::json;

use crate::config::{PotentialConfig, RouteConfig, RunConfig};
use crate::output::{num, say, write_json, Csv};
use crate::{classify, CliError};

pub fn validate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let digest = cfg.digest();
    let prob = cfg.assemble()?;
    let checks = prob.hypothesis_report().map_err(classify)?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    let report = write_json(
        out,
        "validate.json",
        &digest,
        &json!({ "passed": failed.is_empty(), "checks": checks }),
    )?;
    say(&serde_json::to_string_pretty(&report).unwrap_or_default());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "hypothesis checks failed: {}",
            failed.join(", ")
        )))
    }
}

fn write_solution(out: &Path, digest: &str, sol: &Solution) -> Result<(), CliError> {
    let grid = sol.states[0].grid();
    let d = grid.dim();
    let header: &[&str] = if d == 1 {
        &["t", "x1", "u"]
    } else {
        &["t", "x1", "x2", "u"]
    };
    let mut csv = Csv::create(out, "solution.csv", digest, header)?;
    for (t, u) in sol.times.iter().zip(&sol.states) {
        for (i, v) in u.real_values().iter().enumerate() {
            let x = grid.point(i);
            let mut row = vec![num(*t)];
            row.extend(x[..d].iter().map(|c| num(*c)));
            row.push(num(*v));
            csv.row(row)?;
        }
    }
    csv.finish()
}

pub fn solve(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let digest = cfg.digest();
    let assembled = cfg.assemble()?;
    let sc = &cfg.solve;
    if sc.route == RouteConfig::Nonlinear {
        return solve_flow(cfg, &assembled, out, &digest);
    }
    if sc.potential.is_some() {
        return Err(CliError::Usage(
            "a potential is only used by the nonlinear route".into(),
        ));
    }
    let prob = Problem::new(
        assembled.nu.clone(),
        assembled.coeff.clone(),
        assembled.drift.clone(),
        assembled.forcing.clone(),
        assembled.phi.clone(),
        assembled.horizon,
        assembled.p,
    )
    .map_err(classify)?
    .with_scheme(cfg.scheme());
    let (sol, continuity) = match sc.route {
        RouteConfig::Duhamel => (
            solve_duhamel_steps(&prob, sc.steps).map_err(classify)?,
            None,
        ),
        RouteConfig::Imex => (solve_imex(&prob, sc.steps).map_err(classify)?, None),
        RouteConfig::Continuity => {
            let rep = solve_continuity(&prob, sc.steps, sc.tolerance).map_err(classify)?;
            let summary = rep.summary();
            (rep.solution, Some(summary))
        }
        RouteConfig::Nonlinear => unreachable!(),
    };
    write_solution(out, &digest, &sol)?;
    let apriori = (0..=1)
        .map(|k| apriori_report(&sol, &prob, k).map_err(classify))
        .collect::<Result<Vec<_>, _>>()?;
    write_json(
        out,
        "report.json",
        &digest,
        &json!({
            "route": sol.route,
            "steps": sol.times.len() - 1,
            "residual": sol.residual,
            "apriori": apriori,
            "continuity": continuity,
        }),
    )?;
    say(&format!(
        "solved with {:?} in {} steps, residual {:.3e}",
        sol.route,
        sol.times.len() - 1,
        sol.residual
    ));
    Ok(())
}

fn solve_flow(cfg: &RunConfig, prob: &Problem, out: &Path, digest: &str) -> Result<(), CliError> {
    let sc = &cfg.solve;
    let potential = match sc.potential {
        Some(PotentialConfig::Quadratic) => Potential::Quadratic,
        Some(PotentialConfig::Wobble { delta }) => Potential::Wobble { delta },
        None => {
            return Err(CliError::Usage(
                "the nonlinear route needs solve.potential".into(),
            ))
        }
    };
    let mut flow = NonlinearConfig::new(prob.alpha(), potential, sc.lambda, prob.horizon, sc.steps);
    flow.p = prob.p;
    let res = solve_nonlinear(&prob.phi, &flow).map_err(classify)?;
    write_solution(out, digest, &res.solution)?;
    let mut csv = Csv::create(out, "energy.csv", digest, &["t", "energy"])?;
    for (t, e) in res.solution.times.iter().zip(&res.energy) {
        csv.row([num(*t), num(*e)])?;
    }
    csv.finish()?;
    write_json(
        out,
        "report.json",
        digest,
        &json!({
            "route": res.solution.route,
            "steps": sc.steps,
            "residual": res.solution.residual,
            "energy_initial": res.energy[0],
            "energy_final": res.energy[res.energy.len() - 1],
        }),
    )?;
    say(&format!(
        "nonlinear flow in {} steps, energy {:.6e} -> {:.6e}",
        sc.steps,
        res.energy[0],
        res.energy[res.energy.len() - 1]
    ));
    Ok(())
}

/// Paths written to `paths.csv` and `jumps.csv`.
const LEDGER_PATHS: usize = 16;

pub fn sample_levy(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let digest = cfg.digest();
    let grid = cfg.grid()?;
    let d = grid.dim();
    let nu = cfg.measure()?;
    let sampler = cfg.sampler(grid)?;
    let t_end = cfg.sampler.t_end;
    if !(t_end > 0.0) {
        return Err(CliError::Usage(format!(
            "sampler.t_end = {t_end} must be positive"
        )));
    }
    let nodes: Vec<f64> = (0..=32).map(|i| t_end * i as f64 / 32.0).collect();
    let axes: &[&str] = if d == 1 { &["x1"] } else { &["x1", "x2"] };
    let jump_axes: &[&str] = if d == 1 { &["y1"] } else { &["y1", "y2"] };
    let mut paths = Csv::create(out, "paths.csv", &digest, &[&["path", "t"], axes].concat())?;
    let mut jumps = Csv::create(
        out,
        "jumps.csv",
        &digest,
        &[&["path", "t"], jump_axes].concat(),
    )?;
    for p in 0..LEDGER_PATHS.min(sampler.n_paths) {
        let sample = sample_path_on(&nu, &sampler, &nodes, p as u64).map_err(classify)?;
        for (t, x) in sample.time_nodes.iter().zip(&sample.positions) {
            paths.row(
                [p.to_string(), num(*t)]
                    .into_iter()
                    .chain(x[..d].iter().map(|v| num(*v))),
            )?;
        }
        for (t, y) in &sample.jump_ledger {
            jumps.row(
                [p.to_string(), num(*t)]
                    .into_iter()
                    .chain(y[..d].iter().map(|v| num(*v))),
            )?;
        }
    }
    paths.finish()?;
    jumps.finish()?;

    let ks: Vec<Vec<f64>> = if d == 1 {
        (1..=3).map(|k| vec![k as f64]).collect()
    } else {
        vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![2.0, 1.0],
        ]
    };
    let reports = check_char_function(&nu, &sampler, t_end, &ks).map_err(classify)?;
    let passed = reports.iter().all(|r| r.z <= 3.0);
    write_json(
        out,
        "char_function.json",
        &digest,
        &json!({ "t": t_end, "paths": sampler.n_paths, "passed": passed, "reports": reports }),
    )?;
    say(&format!(
        "sampled {} paths; characteristic function within 3 SE: {passed}",
        sampler.n_paths
    ));
    if passed {
        Ok(())
    } else {
        Err(CliError::Failure(
            "empirical characteristic function is more than 3 SE from e^{tψ(k)}".into(),
        ))
    }
}
