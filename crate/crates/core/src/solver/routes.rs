use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{midpoint_residual, uniform_times, Forcing, Problem, RhsEvaluator, Route, Solution};
use crate::grid::GridFunction;
use crate::norms::{fractional_laplacian, lp_norm};
use crate::operator::{OperatorPlan, Weight, Window};
use crate::quad::gauss_legendre_on;
use crate::semigroup::char_exponent_table;
use crate::{Error, Result};

const DEFAULT_DUHAMEL_STEPS: usize = 64;
const MIN_IMEX_STEPS: usize = 16;
const MIN_LAMBDA_STEP: f64 = 1e-3;
const MAX_PICARD: usize = 500;

/// `(e^x − 1)/x`.
fn phi1(x: Complex64) -> Complex64 {
    if x.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + x / 2.0 + x * x / 6.0 + x * x * x / 24.0 + x * x * x * x / 120.0
    } else {
        (x.exp() - 1.0) / x
    }
}

/// [`solve_duhamel_steps`] with 64 output steps.
pub fn solve_duhamel(prob: &Problem) -> Result<Solution> {
    solve_duhamel_steps(prob, DEFAULT_DUHAMEL_STEPS)
}

/// Exact spectral solution `û(t) = e^{tz}φ̂ + ∫₀^t e^{(t−s)z} f̂(s) ds`
/// with `z(k) = cψ(k) + ik·b`, for constant `a ≡ c` and constant drift.
/// Steady forcing is integrated in closed form; time-dependent forcing by
/// 8-point Gauss–Legendre per step.
pub fn solve_duhamel_steps(prob: &Problem, n_steps: usize) -> Result<Solution> {
    if n_steps == 0 {
        return Err(Error::Argument("need at least one time step".into()));
    }
    let c = prob.coeff.as_constant().ok_or_else(|| {
        Error::WrongRoute("the spectral Duhamel route needs a constant kernel coefficient".into())
    })?;
    let b = prob.drift.as_constant().ok_or_else(|| {
        Error::WrongRoute("the spectral Duhamel route needs a drift constant in (t, x)".into())
    })?;
    let grid = prob.grid();
    let d = grid.dim();
    let psi = char_exponent_table(&prob.nu, grid)?;
    let transport = grid.multiplier(|k| {
        Complex64::new(0.0, k.iter().zip(&b[..d]).map(|(a, v)| a * v).sum::<f64>())
    });
    let z: Vec<Complex64> = psi.iter().zip(&transport).map(|(p, tr)| p * c + tr).collect();

    let dt = prob.horizon / n_steps as f64;
    let times = uniform_times(prob.horizon, n_steps);
    let step: Vec<Complex64> = z.iter().map(|v| (v * dt).exp()).collect();
    let steady_gain: Vec<Complex64> = z.iter().map(|v| phi1(v * dt) * dt).collect();
    let nodes = gauss_legendre_on(8, 0.0, dt);

    let mut states = vec![prob.phi.clone()];
    for m in 0..n_steps {
        let prev = states[m].spectral();
        let mut next: Vec<Complex64> = prev.iter().zip(&step).map(|(u, e)| u * e).collect();
        match &prob.forcing {
            Forcing::Zero => {}
            Forcing::Steady(f) => {
                for (i, v) in next.iter_mut().enumerate() {
                    *v += steady_gain[i] * f.spectral()[i];
                }
            }
            Forcing::Field(f) => {
                for &(s, w) in &nodes {
                    let fs = f(times[m] + s);
                    for (i, v) in next.iter_mut().enumerate() {
                        *v += (z[i] * (dt - s)).exp() * fs.spectral()[i] * w;
                    }
                }
            }
        }
        states.push(GridFunction::from_spectral(grid, next)?);
    }

    let rhs_history: Vec<GridFunction> = times
        .iter()
        .zip(&states)
        .map(|(&t, u)| {
            let f = prob.forcing.eval(t, grid);
            let spec: Vec<Complex64> = u
                .spectral()
                .iter()
                .zip(&z)
                .zip(f.spectral())
                .map(|((u, z), f)| z * u + f)
                .collect();
            GridFunction::from_spectral(grid, spec)
        })
        .collect::<Result<_>>()?;

    let ev = RhsEvaluator::new(prob);
    let residual = midpoint_residual(&times, &states, prob.p, |m| ev.full(times[m], &states[m]))?;
    Ok(Solution { times, states, rhs_history, route: Route::Duhamel, residual })
}

/// Median of `a(0, ·, 0)` over the grid.
fn reference_coefficient(prob: &Problem) -> f64 {
    let grid = prob.grid();
    let d = grid.dim();
    let mut vals: Vec<f64> = (0..grid.len()).map(|i| prob.coeff.at_origin(0.0, &grid.point(i)[..d])).collect();
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    if n % 2 == 1 {
        vals[n / 2]
    } else {
        0.5 * (vals[n / 2 - 1] + vals[n / 2])
    }
}

/// Symbol of `L^ν` from the quadrature plan.
fn frozen_symbol(prob: &Problem) -> Result<Vec<Complex64>> {
    let plan = OperatorPlan::build(&prob.nu, prob.grid(), &prob.scheme, Weight::Constant(1.0), Window::default())?;
    Ok(plan.symbol().expect("constant weight has a symbol").to_vec())
}

/// Implicit spectral division `(û + Δt ê) / (1 − Δt a σ)`.
fn implicit_step(u: &GridFunction, explicit: &[Complex64], dt: f64, a_ref: f64, sigma: &[Complex64]) -> Result<GridFunction> {
    let spec: Vec<Complex64> = u
        .spectral()
        .iter()
        .zip(explicit)
        .zip(sigma)
        .map(|((u, e), s)| (u + e * dt) / (1.0 - s * (dt * a_ref)))
        .collect();
    GridFunction::from_spectral(u.grid(), spec)
}

fn check_growth(prev: &GridFunction, next: &GridFunction, forcing: &GridFunction, dt: f64, p: f64, m: usize) -> Result<()> {
    let scale = lp_norm(prev, p) + dt * lp_norm(forcing, p);
    let grown = lp_norm(next, p);
    if !grown.is_finite() || (grown > 10.0 * scale && grown > 1e-300) {
        return Err(Error::Stability(format!(
            "‖u‖_p grew from {scale:.3e} to {grown:.3e} in step {m}; increase the number of time steps"
        )));
    }
    Ok(())
}

/// First-order IMEX Euler with the frozen operator `a_ref L^ν` implicit
/// (`a_ref` the spatial median of `a(0, ·, 0)`) and
/// `(L^{a(t)ν} − a_ref L^ν) + b·∇ + f` explicit.
pub fn solve_imex(prob: &Problem, n_steps: usize) -> Result<Solution> {
    if n_steps < MIN_IMEX_STEPS {
        return Err(Error::Argument(format!("IMEX needs at least {MIN_IMEX_STEPS} steps, got {n_steps}")));
    }
    let grid = prob.grid();
    let a_ref = reference_coefficient(prob);
    let sigma = frozen_symbol(prob)?;
    let dt = prob.horizon / n_steps as f64;
    let times = uniform_times(prob.horizon, n_steps);
    let ev = RhsEvaluator::new(prob);

    let mut states = vec![prob.phi.clone()];
    let mut rhs_history = Vec::with_capacity(n_steps + 1);
    for m in 0..n_steps {
        let u = &states[m];
        let full = ev.full(times[m], u)?;
        let explicit: Vec<Complex64> = full
            .spectral()
            .iter()
            .zip(u.spectral())
            .zip(&sigma)
            .map(|((f, u), s)| f - s * u * a_ref)
            .collect();
        let next = implicit_step(u, &explicit, dt, a_ref, &sigma)?;
        check_growth(u, &next, &prob.forcing.eval(times[m], grid), dt, prob.p, m)?;
        rhs_history.push(full);
        states.push(next);
    }
    rhs_history.push(ev.full(times[n_steps], &states[n_steps])?);
    let residual = midpoint_residual(&times, &states, prob.p, |m| Ok(rhs_history[m].clone()))?;
    Ok(Solution { times, states, rhs_history, route: Route::Imex, residual })
}

/// Outcome of the continuity method.
#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub solution: Solution,
    /// Picard iterations over all accepted λ-steps.
    pub iterations: usize,
    pub step_iterations: Vec<usize>,
    /// `‖w_{j+1} − w_j‖ / ‖w_j − w_{j−1}‖` over accepted λ-steps.
    pub contraction_estimates: Vec<f64>,
    /// Accepted λ values, starting at 0 and ending at 1.
    pub lambda_schedule: Vec<f64>,
    /// λ-steps abandoned and retried with half the step.
    pub rejected_steps: usize,
}

/// Serializable summary of a [`ContinuityReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuitySummary {
    pub iterations: usize,
    pub step_iterations: Vec<usize>,
    pub contraction_estimates: Vec<f64>,
    pub lambda_schedule: Vec<f64>,
    pub rejected_steps: usize,
    pub residual: f64,
}

impl ContinuityReport {
    pub fn summary(&self) -> ContinuitySummary {
        ContinuitySummary {
            iterations: self.iterations,
            step_iterations: self.step_iterations.clone(),
            contraction_estimates: self.contraction_estimates.clone(),
            lambda_schedule: self.lambda_schedule.clone(),
            rejected_steps: self.rejected_steps,
            residual: self.solution.residual,
        }
    }
}

struct Blended<'a> {
    prob: &'a Problem,
    ev: RhsEvaluator<'a>,
    a_ref: f64,
    sigma: Vec<Complex64>,
    times: Vec<f64>,
    dt: f64,
}

/// Trajectory with `B w_m = L^{a(t_m)ν}w_m + b·∇w_m` for `m < N`.
#[derive(Clone)]
struct Iterate {
    states: Vec<GridFunction>,
    drive: Vec<GridFunction>,
}

impl Blended<'_> {
    /// Solves `U_{λ₀} w = f + (λ − λ₀)(B − L^ν)u` with the fixed implicit
    /// part `a_ref L^ν`; `frozen = None` drops the correction.
    fn march(&self, lambda0: f64, frozen: Option<(f64, &Iterate)>) -> Result<Iterate> {
        let grid = self.prob.grid();
        let n_steps = self.times.len() - 1;
        let mut states = vec![self.prob.phi.clone()];
        let mut drive = Vec::with_capacity(n_steps);
        for m in 0..n_steps {
            let t = self.times[m];
            let w = &states[m];
            let bw = self.ev.homogeneous(t, w)?;
            let f = self.prob.forcing.eval(t, grid);
            let mut explicit: Vec<Complex64> = (0..grid.len())
                .map(|i| {
                    bw.spectral()[i] * lambda0 + self.sigma[i] * w.spectral()[i] * (1.0 - lambda0 - self.a_ref)
                        + f.spectral()[i]
                })
                .collect();
            if let Some((gap, u)) = frozen {
                for (i, e) in explicit.iter_mut().enumerate() {
                    *e += (u.drive[m].spectral()[i] - self.sigma[i] * u.states[m].spectral()[i]) * gap;
                }
            }
            let next = implicit_step(w, &explicit, self.dt, self.a_ref, &self.sigma)?;
            check_growth(w, &next, &f, self.dt, self.prob.p, m)?;
            drive.push(bw);
            states.push(next);
        }
        Ok(Iterate { states, drive })
    }

    /// `sup_m ‖δ_m‖_p + (∫ ‖(−Δ)^{α/2} δ‖_p^p dt)^{1/p}`, trapezoid in time.
    fn distance(&self, a: &Iterate, b: &Iterate) -> Result<f64> {
        let p = self.prob.p;
        let alpha = self.prob.alpha();
        let mut sup: f64 = 0.0;
        let mut top = Vec::with_capacity(a.states.len());
        for (x, y) in a.states.iter().zip(&b.states) {
            let delta = x.sub(y);
            sup = sup.max(lp_norm(&delta, p));
            top.push(lp_norm(&fractional_laplacian(&delta, alpha)?, p).powf(p));
        }
        let mut integral = 0.0;
        for m in 1..top.len() {
            integral += 0.5 * self.dt * (top[m] + top[m - 1]);
        }
        Ok(sup + integral.powf(1.0 / p))
    }
}

/// [`solve_continuity_with`] starting from λ-step ½.
pub fn solve_continuity(prob: &Problem, base_steps: usize, tol: f64) -> Result<ContinuityReport> {
    solve_continuity_with(prob, base_steps, tol, 0.5)
}

/// Continuity method from `U_0 = ∂_t − L^ν` to
/// `U_1 = ∂_t − L^{aν} − b·∇`, Picard iterating `w ← Q_λ w` at each λ.
/// A λ-step whose observed contraction reaches ½ is retried with half the
/// step while that stays at least `1e-3`.
pub fn solve_continuity_with(prob: &Problem, base_steps: usize, tol: f64, initial_step: f64) -> Result<ContinuityReport> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if !(initial_step > 0.0 && initial_step <= 1.0) {
        return Err(Error::Argument(format!("initial λ-step must lie in (0, 1], got {initial_step}")));
    }
    if base_steps < MIN_IMEX_STEPS {
        return Err(Error::Argument(format!(
            "continuity method needs at least {MIN_IMEX_STEPS} time steps, got {base_steps}"
        )));
    }
    let times = uniform_times(prob.horizon, base_steps);
    let blend = Blended {
        prob,
        ev: RhsEvaluator::new(prob),
        a_ref: reference_coefficient(prob),
        sigma: frozen_symbol(prob)?,
        dt: prob.horizon / base_steps as f64,
        times,
    };

    let mut u = blend.march(0.0, None)?;
    let mut lambda = 0.0;
    let mut step = initial_step;
    let mut schedule = vec![0.0];
    let mut step_iterations = Vec::new();
    let mut ratios = Vec::new();
    let mut rejected = 0;

    while lambda < 1.0 {
        let target = (lambda + step).min(1.0);
        let gap = target - lambda;
        let mut prev = u.clone();
        let mut last_diff: Option<f64> = None;
        let mut local = Vec::new();
        let mut iters = 0;
        let accepted = loop {
            let next = blend.march(lambda, Some((gap, &prev)))?;
            iters += 1;
            let diff = blend.distance(&next, &prev)?;
            if let Some(before) = last_diff.filter(|&b| b > 0.0) {
                let ratio = diff / before;
                local.push(ratio);
                if ratio >= 0.5 && step / 2.0 >= MIN_LAMBDA_STEP {
                    break None;
                }
                if ratio >= 1.0 {
                    return Err(Error::NonContraction(format!(
                        "contraction factor {ratio:.3} at λ = {target:.4} with λ-step {step:.3e}"
                    )));
                }
            }
            if diff < tol {
                break Some(next);
            }
            if iters >= MAX_PICARD {
                return Err(Error::NonContraction(format!(
                    "no convergence in {MAX_PICARD} Picard iterations at λ = {target:.4}"
                )));
            }
            last_diff = Some(diff);
            prev = next;
        };
        match accepted {
            Some(w) => {
                u = w;
                lambda = target;
                schedule.push(lambda);
                step_iterations.push(iters);
                ratios.extend(local);
            }
            None => {
                step /= 2.0;
                rejected += 1;
            }
        }
    }

    let grid = prob.grid();
    let n = base_steps;
    let mut rhs_history: Vec<GridFunction> = u
        .drive
        .iter()
        .zip(&blend.times)
        .map(|(bw, &t)| bw.add(&prob.forcing.eval(t, grid)))
        .collect();
    rhs_history.push(blend.ev.full(blend.times[n], &u.states[n])?);
    let residual = midpoint_residual(&blend.times, &u.states, prob.p, |m| Ok(rhs_history[m].clone()))?;
    let solution = Solution {
        times: blend.times.clone(),
        states: u.states,
        rhs_history,
        route: Route::Continuity,
        residual,
    };
    Ok(ContinuityReport {
        solution,
        iterations: step_iterations.iter().sum(),
        step_iterations,
        contraction_estimates: ratios,
        lambda_schedule: schedule,
        rejected_steps: rejected,
    })
}
