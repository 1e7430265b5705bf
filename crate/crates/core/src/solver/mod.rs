//! The linear Cauchy problem by three routes (spectral Duhamel, IMEX
//! method of lines, continuity-method fixed point), the nonlinear
//! nonlocal flow, and the a priori estimate reporter.

mod apriori;
mod mollify;
mod nonlinear;
mod problem;
mod routes;

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;
use crate::norms::lp_norm;
use crate::operator::OperatorPlan;
use crate::Result;

pub use apriori::{apriori_report, AprioriReport, InitialNormKind};
pub use mollify::{mollify_coefficients, MollifiedCoefficients};
pub use nonlinear::{solve_nonlinear, NonlinearConfig, NonlinearSolution, Potential};
pub use problem::{Drift, Forcing, HypothesisCheck, Problem, EXPONENT_MARGIN};
pub use routes::{
    solve_continuity, solve_continuity_with, solve_duhamel, solve_duhamel_steps, solve_imex, ContinuityReport,
};

/// How a trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Duhamel,
    Imex,
    Continuity,
    Nonlinear,
    /// Assembled by the caller from known fields.
    External,
}

/// Space-time trajectory on a uniform time grid with the stored time derivative.
#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
    /// Right-hand side evaluated at each node; stands in for `∂_t u`.
    pub rhs_history: Vec<GridFunction>,
    pub route: Route,
    /// `max_m ‖(u_{m+1} − u_{m−1})/(2Δt) − F(t_m, u_m)‖_p` over interior nodes.
    pub residual: f64,
}

impl Solution {
    /// Trajectory supplied by the caller; the residual is left at zero.
    pub fn from_history(times: Vec<f64>, states: Vec<GridFunction>, rhs_history: Vec<GridFunction>) -> Self {
        Self { times, states, rhs_history, route: Route::External, residual: 0.0 }
    }

    pub fn final_state(&self) -> &GridFunction {
        self.states.last().expect("solution has at least one node")
    }

    pub fn step(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }
}

fn uniform_times(horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|m| horizon * m as f64 / steps as f64).collect()
}

/// Evaluates `F(t, u) = L^{a(t)ν}u + b·∇u + f(t)` with the quadrature plan,
/// reusing the plan while the coefficient is time independent.
pub(crate) struct RhsEvaluator<'a> {
    prob: &'a Problem,
    cached: Mutex<Option<OperatorPlan>>,
}

impl<'a> RhsEvaluator<'a> {
    pub(crate) fn new(prob: &'a Problem) -> Self {
        Self { prob, cached: Mutex::new(None) }
    }

    /// `L^{a(t)ν}u`.
    pub(crate) fn operator(&self, t: f64, u: &GridFunction) -> Result<GridFunction> {
        let prob = self.prob;
        if prob.coeff.dependence().t {
            let plan = OperatorPlan::for_coefficient(&prob.nu, prob.grid(), &prob.scheme, &prob.coeff, t)?;
            return Ok(plan.apply(u)?.value);
        }
        let mut slot = self.cached.lock().expect("plan cache");
        if slot.is_none() {
            *slot = Some(OperatorPlan::for_coefficient(&prob.nu, prob.grid(), &prob.scheme, &prob.coeff, 0.0)?);
        }
        Ok(slot.as_ref().expect("cached plan").apply(u)?.value)
    }

    /// `L^{a(t)ν}u + b·∇u`.
    pub(crate) fn homogeneous(&self, t: f64, u: &GridFunction) -> Result<GridFunction> {
        Ok(self.operator(t, u)?.add(&self.prob.drift.transport(t, u)))
    }

    pub(crate) fn full(&self, t: f64, u: &GridFunction) -> Result<GridFunction> {
        Ok(self.homogeneous(t, u)?.add(&self.prob.forcing.eval(t, self.prob.grid())))
    }
}

/// Midpoint residual of a trajectory against `rhs(m) = F(t_m, u_m)`.
pub(crate) fn midpoint_residual<F>(times: &[f64], states: &[GridFunction], p: f64, rhs: F) -> Result<f64>
where
    F: Fn(usize) -> Result<GridFunction>,
{
    let mut worst: f64 = 0.0;
    for m in 1..times.len().saturating_sub(1) {
        let dt2 = times[m + 1] - times[m - 1];
        let diff = states[m + 1].sub(&states[m - 1]).scale(1.0 / dt2);
        worst = worst.max(lp_norm(&diff.sub(&rhs(m)?), p));
    }
    Ok(worst)
}
