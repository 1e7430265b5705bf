use serde::{Deserialize, Serialize};

use super::{Problem, Solution};
use crate::grid::GridFunction;
use crate::norms::{bessel_norm, lp_norm, slobodeckij_norm, spacetime_norms, LowerSlot, NormOrder};
use crate::operator::{OperatorPlan, Weight, Window};
use crate::{Error, Result};

/// Which norm stands in for `W^{α−α/p,p}` on the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialNormKind {
    /// The Sobolev–Slobodeckij norm (one dimension).
    Slobodeckij,
    /// The Bessel-potential norm `H^{α−α/p,p}` (two dimensions).
    BesselProxy,
}

/// Both sides of `‖u‖_{𝕏^{k+α,p}} ≤ C(‖φ‖ + ‖f‖_{𝕐^{k,p}})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub k: usize,
    pub x_norm: f64,
    pub phi_norm: f64,
    pub f_norm: f64,
    /// `x_norm / (phi_norm + f_norm)`; zero when both sides vanish.
    pub ratio: f64,
    pub initial_norm: InitialNormKind,
    /// Whether the residual stays below `10·Δt·max_m ‖∂_t u(t_m)‖_p`.
    pub residual_ok: bool,
}

fn trapezoid_p(times: &[f64], fields: &[GridFunction], p: f64) -> f64 {
    let vals: Vec<f64> = fields.iter().map(|f| lp_norm(f, p).powf(p)).collect();
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (vals[i] + vals[i - 1]);
    }
    acc.powf(1.0 / p)
}

fn initial_norm(phi: &GridFunction, alpha: f64, p: f64) -> Result<(f64, InitialNormKind)> {
    let beta = alpha - alpha / p;
    if phi.grid().dim() == 1 {
        Ok((slobodeckij_norm(phi, beta, p)?, InitialNormKind::Slobodeckij))
    } else {
        Ok((bessel_norm(phi, NormOrder::new(beta, p)?), InitialNormKind::BesselProxy))
    }
}

/// Forcing of the differentiated equation for `∂_i u`:
/// `∂_i f + L^{(∂_{x_i} a)ν} u + Σ_j (∂_i b_j) ∂_j u`.
fn differentiated_forcing(sol: &Solution, prob: &Problem, axis: usize) -> Result<Vec<GridFunction>> {
    let grid = prob.grid();
    let d = grid.dim();
    let varies_in_x = prob.coeff.dependence().x;
    let build = |t: f64| -> Result<OperatorPlan> {
        let c = prob.coeff.clone();
        let weight = Weight::Full(std::sync::Arc::new(move |x: &[f64], y: &[f64]| c.grad_x(t, x, y)[axis]));
        OperatorPlan::build(&prob.nu, grid, &prob.scheme, weight, Window::default())
    };
    let fixed = if varies_in_x && !prob.coeff.dependence().t { Some(build(0.0)?) } else { None };
    sol.times
        .iter()
        .zip(&sol.states)
        .map(|(&t, u)| {
            let mut g = prob.forcing.eval(t, grid).partial(axis);
            if varies_in_x {
                let value = match &fixed {
                    Some(plan) => plan.apply(u)?.value,
                    None => build(t)?.apply(u)?.value,
                };
                g = g.add(&value);
            }
            if !prob.drift.is_zero() && prob.drift.as_constant().is_none() {
                for j in 0..d {
                    let db = prob.drift.component(grid, t, j).partial(axis).real_values();
                    g = g.add(&u.partial(j).scale_pointwise(&db));
                }
            }
            Ok(g)
        })
        .collect()
}

/// Norms of the a priori estimate for `u` (`k = 0`) or `∇u` (`k = 1`),
/// with `∂_t u` read from the stored right-hand side.
pub fn apriori_report(sol: &Solution, prob: &Problem, k: usize) -> Result<AprioriReport> {
    let alpha = prob.alpha();
    let p = prob.p;
    let grid = prob.grid();
    if sol.times.len() < 2 {
        return Err(Error::Argument("the a priori report needs at least 2 time nodes".into()));
    }
    let (x_norm, phi_norm, f_norm, kind) = match k {
        0 => {
            let x = spacetime_norms(sol, alpha, p, LowerSlot::AlphaShift)?.x_norm;
            let (phi, kind) = initial_norm(&sol.states[0], alpha, p)?;
            let forcing: Vec<GridFunction> = sol.times.iter().map(|&t| prob.forcing.eval(t, grid)).collect();
            (x, phi, trapezoid_p(&sol.times, &forcing, p), kind)
        }
        1 => {
            let mut x = 0.0;
            let mut phi = 0.0;
            let mut f = 0.0;
            let mut kind = InitialNormKind::Slobodeckij;
            for axis in 0..grid.dim() {
                let w = Solution {
                    times: sol.times.clone(),
                    states: sol.states.iter().map(|s| s.partial(axis)).collect(),
                    rhs_history: sol.rhs_history.iter().map(|s| s.partial(axis)).collect(),
                    route: sol.route,
                    residual: sol.residual,
                };
                x += spacetime_norms(&w, alpha, p, LowerSlot::AlphaShift)?.x_norm;
                let (pn, kd) = initial_norm(&w.states[0], alpha, p)?;
                phi += pn;
                kind = kd;
                f += trapezoid_p(&sol.times, &differentiated_forcing(sol, prob, axis)?, p);
            }
            (x, phi, f, kind)
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "a priori reports are implemented for k ∈ {{0, 1}}, got {k}"
            )))
        }
    };
    let data = phi_norm + f_norm;
    if data == 0.0 && x_norm > 1e-12 {
        return Err(Error::Inconsistency(format!(
            "solution norm {x_norm:.3e} with vanishing initial data and forcing"
        )));
    }
    let ratio = if data > 0.0 { x_norm / data } else { 0.0 };
    let dt = sol.times[1] - sol.times[0];
    let rhs_max = sol.rhs_history.iter().map(|r| lp_norm(r, p)).fold(0.0, f64::max);
    Ok(AprioriReport {
        k,
        x_norm,
        phi_norm,
        f_norm,
        ratio,
        initial_norm: kind,
        residual_ok: sol.residual <= 10.0 * dt * rhs_max,
    })
}
