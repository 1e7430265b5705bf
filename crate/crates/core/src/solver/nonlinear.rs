//! The nonlinear nonlocal flow
//! `∂_t θ(x) = ∫ φ′(θ(x+y) − θ(x)) κ(y)|y|^{−1−α} dy` on the circle, with
//! energy `V(θ) = ½ ∬ φ(θ(x+y) − θ(x)) κ(y)|y|^{−1−α} dy dx`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{midpoint_residual, uniform_times, Route, Solution};
use crate::grid::{GridFunction, TorusGrid};
use crate::quad::gauss_legendre_on;
use crate::{Error, Result};

const IMAGES: usize = 1000;

/// Even convex potential `φ` with `φ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Potential {
    /// `φ(u) = u²/2`.
    Quadratic,
    /// `φ(u) = u²/2 + δ(1 − cos u)`, so `φ″ ∈ [1 − δ, 1 + δ]`.
    Wobble { delta: f64 },
}

impl Potential {
    pub fn value(&self, u: f64) -> f64 {
        match self {
            Potential::Quadratic => 0.5 * u * u,
            Potential::Wobble { delta } => 0.5 * u * u + 2.0 * delta * (0.5 * u).sin().powi(2),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Potential::Quadratic => u,
            Potential::Wobble { delta } => u + delta * u.sin(),
        }
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        match self {
            Potential::Quadratic => 1.0,
            Potential::Wobble { delta } => 1.0 + delta * u.cos(),
        }
    }

    /// `(inf φ″, sup φ″)`.
    pub fn convexity_bounds(&self) -> (f64, f64) {
        match self {
            Potential::Quadratic => (1.0, 1.0),
            Potential::Wobble { delta } => (1.0 - delta.abs(), 1.0 + delta.abs()),
        }
    }
}

type KappaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Parameters of the nonlinear flow.
#[derive(Clone)]
pub struct NonlinearConfig {
    pub alpha: f64,
    pub potential: Potential,
    kappa: KappaFn,
    /// `Λ` with `Λ⁻¹ ≤ φ″, κ ≤ Λ`.
    pub lambda: f64,
    pub horizon: f64,
    pub n_steps: usize,
    /// Inner radius; defaults to `h/32`.
    pub r_min: Option<f64>,
    pub p: f64,
}

impl fmt::Debug for NonlinearConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearConfig")
            .field("alpha", &self.alpha)
            .field("potential", &self.potential)
            .field("lambda", &self.lambda)
            .field("horizon", &self.horizon)
            .field("n_steps", &self.n_steps)
            .finish()
    }
}

impl NonlinearConfig {
    /// `κ ≡ 1`, `p = 2`.
    pub fn new(alpha: f64, potential: Potential, lambda: f64, horizon: f64, n_steps: usize) -> Self {
        Self {
            alpha,
            potential,
            kappa: Arc::new(|_| 1.0),
            lambda,
            horizon,
            n_steps,
            r_min: None,
            p: 2.0,
        }
    }

    pub fn with_kappa<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, kappa: F) -> Self {
        self.kappa = Arc::new(kappa);
        self
    }

    pub fn kappa(&self, y: f64) -> f64 {
        (self.kappa)(y)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::Config(format!("α = {} must lie in (0, 2)", self.alpha)));
        }
        if !(self.horizon > 0.0 && self.horizon <= 1.0) {
            return Err(Error::Config(format!("horizon T = {} must lie in (0, 1]", self.horizon)));
        }
        if self.n_steps == 0 {
            return Err(Error::Argument("need at least one time step".into()));
        }
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("Λ = {} must be at least 1", self.lambda)));
        }
        let (lo, hi) = self.potential.convexity_bounds();
        let inv = 1.0 / self.lambda;
        if lo < inv - 1e-12 || hi > self.lambda + 1e-12 {
            return Err(Error::Hypothesis(format!(
                "φ″ ranges over [{lo}, {hi}], outside [Λ⁻¹, Λ] = [{inv}, {}]",
                self.lambda
            )));
        }
        for i in 0..=400 {
            let y = 1e-4 * (2.0 * PI * IMAGES as f64 / 1e-4).powf(i as f64 / 400.0);
            for v in [y, -y] {
                let k = self.kappa(v);
                if !(k >= inv - 1e-12 && k <= self.lambda + 1e-12) {
                    return Err(Error::Hypothesis(format!(
                        "κ({v:.4e}) = {k} lies outside [Λ⁻¹, Λ] = [{inv}, {}]",
                        self.lambda
                    )));
                }
            }
            if (self.kappa(y) - self.kappa(-y)).abs() > 1e-12 * self.kappa(y).abs().max(1.0) {
                return Err(Error::Hypothesis(format!("κ is not even at y = {y:.4e}")));
            }
        }
        Ok(())
    }
}

/// Trajectory of the nonlinear flow with its energy per node.
#[derive(Debug, Clone)]
pub struct NonlinearSolution {
    pub solution: Solution,
    pub energy: Vec<f64>,
}

/// Quadrature over `r ∈ [r_min, π]` for the periodised kernel.
struct Flow {
    grid: TorusGrid,
    potential: Potential,
    weights: Vec<f64>,
    plus: Vec<Vec<Complex64>>,
    minus: Vec<Vec<Complex64>>,
    /// `φ″(0) κ(0) r_min^{2−α}/(2−α)`.
    inner: f64,
}

fn cell_edges(r_min: f64, r_max: f64, cap: f64) -> Vec<f64> {
    let ratio = 10f64.powf(1.0 / 12.0);
    let mut edges = vec![r_min];
    let mut r = r_min;
    while r < r_max {
        r = (r * ratio).min(r + cap).min(r_max);
        if r_max - r < 1e-12 * r_max {
            r = r_max;
        }
        edges.push(r);
    }
    edges
}

impl Flow {
    fn new(cfg: &NonlinearConfig, grid: TorusGrid) -> Result<Self> {
        let alpha = cfg.alpha;
        let h = grid.spacing();
        let r_min = cfg.r_min.unwrap_or(h / 32.0);
        if !(r_min > 0.0 && r_min <= h) {
            return Err(Error::Config(format!("r_min = {r_min} must lie in (0, h = {h}]")));
        }
        let cap = 2.0 / (grid.points_per_axis() as f64 / 2.0);
        let edges = cell_edges(r_min, PI, cap);
        let kernel = |y: f64| cfg.kappa(y) * y.abs().powf(-1.0 - alpha);
        let far = 2.0 * PI * (IMAGES as f64 + 0.5);
        let tail = 0.5 * (cfg.kappa(far) + cfg.kappa(-far)) * 2.0 * far.powf(-alpha) / (alpha * 2.0 * PI);
        let mut weights = Vec::new();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for w in edges.windows(2) {
            for (r, gw) in gauss_legendre_on(4, w[0], w[1]) {
                let mut periodised = kernel(r) + tail;
                for m in 1..=IMAGES {
                    let s = 2.0 * PI * m as f64;
                    periodised += kernel(r + s) + kernel(r - s);
                }
                weights.push(gw * periodised);
                plus.push(grid.multiplier(|k| Complex64::from_polar(1.0, k[0] * r)));
                minus.push(grid.multiplier(|k| Complex64::from_polar(1.0, -k[0] * r)));
            }
        }
        let inner = cfg.potential.second_derivative(0.0) * cfg.kappa(0.0) * r_min.powf(2.0 - alpha) / (2.0 - alpha);
        Ok(Self { grid, potential: cfg.potential, weights, plus, minus, inner })
    }

    fn shifted(&self, theta: &GridFunction) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..self.weights.len())
            .map(|q| {
                (
                    theta.apply_multiplier(&self.plus[q]).real_values(),
                    theta.apply_multiplier(&self.minus[q]).real_values(),
                )
            })
            .collect()
    }

    fn rhs(&self, theta: &GridFunction) -> Result<GridFunction> {
        let base = theta.real_values();
        let second = theta.directional_second(&[1.0]).real_values();
        let mut out: Vec<f64> = second.iter().map(|s| self.inner * s).collect();
        for ((up, down), w) in self.shifted(theta).iter().zip(&self.weights) {
            for i in 0..out.len() {
                out[i] += w * (self.potential.derivative(up[i] - base[i]) + self.potential.derivative(down[i] - base[i]));
            }
        }
        GridFunction::from_real(self.grid, &out)
    }

    fn energy(&self, theta: &GridFunction) -> f64 {
        let base = theta.real_values();
        let slope = theta.partial(0).real_values();
        let h = self.grid.spacing();
        let mut acc = 0.0;
        for i in 0..base.len() {
            acc += self.inner * slope[i] * slope[i];
        }
        for ((up, down), w) in self.shifted(theta).iter().zip(&self.weights) {
            for i in 0..base.len() {
                acc += w * (self.potential.value(up[i] - base[i]) + self.potential.value(down[i] - base[i]));
            }
        }
        0.5 * h * acc
    }
}

/// Explicit Euler for the nonlinear flow in one dimension; the energy must
/// not grow by more than `1e-6·V(θ₀)` in any step.
pub fn solve_nonlinear(phi: &GridFunction, cfg: &NonlinearConfig) -> Result<NonlinearSolution> {
    let grid = phi.grid();
    if grid.dim() != 1 {
        return Err(Error::Unsupported("the nonlinear flow is implemented in one dimension".into()));
    }
    cfg.validate()?;
    let flow = Flow::new(cfg, grid)?;
    let dt = cfg.horizon / cfg.n_steps as f64;
    let times = uniform_times(cfg.horizon, cfg.n_steps);
    let mut states = vec![phi.clone()];
    let mut rhs_history = Vec::with_capacity(cfg.n_steps + 1);
    let mut energy = vec![flow.energy(phi)];
    let slack = 1e-6 * energy[0];
    for m in 0..cfg.n_steps {
        let r = flow.rhs(&states[m])?;
        let next = states[m].axpy(dt, &r);
        let v = flow.energy(&next);
        if !v.is_finite() || v > energy[m] + slack {
            return Err(Error::Stability(format!(
                "energy rose from {:.6e} to {v:.6e} in step {m}; increase the number of time steps",
                energy[m]
            )));
        }
        rhs_history.push(r);
        states.push(next);
        energy.push(v);
    }
    rhs_history.push(flow.rhs(&states[cfg.n_steps])?);
    let residual = midpoint_residual(&times, &states, cfg.p, |m| Ok(rhs_history[m].clone()))?;
    Ok(NonlinearSolution {
        solution: Solution { times, states, rhs_history, route: Route::Nonlinear, residual },
        energy,
    })
}
