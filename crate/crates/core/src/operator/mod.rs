//! The compensated nonlocal operator
//! `L^{aν} f(x) = ∫ (f(x+y) − f(x) − y^(α)·∇f(x)) a(t,x,y) ν(dy)`,
//! its `ε`-split decomposition, and the Dini-remainder check.

mod coefficient;
mod dini;
mod far_field;
mod plan;

use std::sync::Arc;

pub use coefficient::{capped_power, compensator, Dependence, KernelCoefficient};
pub use dini::{estimate_dini, log_radii, DiniReport};
pub use far_field::{compensated_tail, oscillatory_tail};
pub use plan::{weight_of, OperatorEvaluation, OperatorPlan, QuadratureScheme, Weight, Window};

use crate::grid::GridFunction;
use crate::measure::BoundedLevyMeasure;
use crate::norms::{fractional_laplacian, lp_norm};
use crate::{Error, Result};

/// `J_f^(α)(x, y) = f(x+y) − f(x) − y^(α)·∇f(x)` through the spectral interpolant.
pub fn difference_j(f: &GridFunction, x: &[f64], y: &[f64], alpha: f64) -> f64 {
    let d = f.grid().dim();
    let xy: Vec<f64> = (0..d).map(|i| x[i] + y[i]).collect();
    let comp = compensator(&y[..d], alpha);
    let mut v = f.eval_at(&xy).re - f.eval_at(x).re;
    if comp.iter().any(|c| *c != 0.0) {
        for (i, g) in f.gradient().iter().enumerate() {
            v -= comp[i] * g.eval_at(x).re;
        }
    }
    v
}

/// Largest relative size of `Σ_j w_j θ_j m(r,θ_j) a(t,x,rθ_j)` over sampled
/// `(r, x)`; the `α = 1` cancellation requires it to vanish.
pub fn kernel_odd_part(
    nu: &BoundedLevyMeasure,
    coeff: &KernelCoefficient,
    t: f64,
    grid: crate::grid::TorusGrid,
) -> f64 {
    let dim = nu.dim();
    let stride = grid.len().div_ceil(64).max(1);
    let mut worst: f64 = 0.0;
    for xi in (0..grid.len()).step_by(stride) {
        let x = grid.point(xi);
        for i in 0..=40 {
            let r = 10f64.powf(-4.0 + 6.0 * i as f64 / 40.0);
            let mut vec = [0.0; 2];
            let mut scale = 0.0;
            for (j, atom) in nu.atoms().iter().enumerate() {
                let y = [r * atom.dir[0], r * atom.dir[1]];
                let w = atom.weight * nu.m(r, j) * coeff.eval(t, &x[..dim], &y[..dim]);
                vec[0] += w * atom.dir[0];
                vec[1] += w * atom.dir[1];
                scale += w.abs();
            }
            if scale > 0.0 {
                worst = worst.max((vec[0] * vec[0] + vec[1] * vec[1]).sqrt() / scale);
            }
        }
    }
    worst
}

fn check_alpha1(
    nu: &BoundedLevyMeasure,
    coeff: &KernelCoefficient,
    t: f64,
    grid: crate::grid::TorusGrid,
) -> Result<()> {
    if nu.alpha() == 1.0 {
        let odd = kernel_odd_part(nu, coeff, t, grid);
        if odd > 1e-10 {
            return Err(Error::Hypothesis(format!(
                "α = 1 needs ∫_{{r<|y|<R}} y a(t,x,y) ν(dy) = 0; odd part has relative size {odd:.3e}"
            )));
        }
    }
    Ok(())
}

/// `L^{a(t)ν} f` on the grid.
pub fn apply_operator(
    f: &GridFunction,
    nu: &BoundedLevyMeasure,
    coeff: &KernelCoefficient,
    t: f64,
    scheme: &QuadratureScheme,
) -> Result<OperatorEvaluation> {
    check_alpha1(nu, coeff, t, f.grid())?;
    OperatorPlan::for_coefficient(nu, f.grid(), scheme, coeff, t)?.apply(f)
}

/// `L^{aν} f = I₁ + I₂ + I₃` with `I₁ = a(t,x,0) L^ν f` and `I₂`, `I₃` the
/// contributions of `a(t,x,y) − a(t,x,0)` over `|y| > ε` and `|y| ≤ ε`.
#[derive(Debug, Clone)]
pub struct SplitEvaluation {
    pub i1: GridFunction,
    pub i2: GridFunction,
    pub i3: GridFunction,
}

impl SplitEvaluation {
    pub fn total(&self) -> GridFunction {
        self.i1.add(&self.i2).add(&self.i3)
    }
}

fn difference_weight(coeff: &KernelCoefficient, t: f64) -> Option<Weight> {
    let dep = coeff.dependence();
    if !dep.y {
        return None;
    }
    let c = coeff.clone();
    Some(if dep.x {
        Weight::Full(Arc::new(move |x: &[f64], y: &[f64]| c.eval(t, x, y) - c.at_origin(t, x)))
    } else {
        let x0 = [0.0; 2];
        Weight::Radial(Arc::new(move |y: &[f64]| {
            c.eval(t, &x0[..y.len()], y) - c.at_origin(t, &x0[..y.len()])
        }))
    })
}

/// `I₃ = ∫_{|y|≤ε} J_f (a(t,x,y) − a(t,x,0)) ν(dy)`.
pub fn near_remainder(
    f: &GridFunction,
    nu: &BoundedLevyMeasure,
    coeff: &KernelCoefficient,
    t: f64,
    eps: f64,
    scheme: &QuadratureScheme,
) -> Result<GridFunction> {
    let grid = f.grid();
    let (r_min, _, _) = scheme.resolve(grid, nu)?;
    if !(eps > r_min && eps <= 1.0) {
        return Err(Error::Argument(format!("ε = {eps} must lie in (r_min = {r_min}, 1]")));
    }
    match difference_weight(coeff, t) {
        None => Ok(GridFunction::zeros(grid)),
        Some(w) => {
            let window = Window { lo: None, hi: Some(eps) };
            Ok(OperatorPlan::build(nu, grid, scheme, w, window)?.apply(f)?.value)
        }
    }
}

pub fn apply_split(
    f: &GridFunction,
    nu: &BoundedLevyMeasure,
    coeff: &KernelCoefficient,
    t: f64,
    eps: f64,
    scheme: &QuadratureScheme,
) -> Result<SplitEvaluation> {
    check_alpha1(nu, coeff, t, f.grid())?;
    let grid = f.grid();
    let dim = grid.dim();
    let base = OperatorPlan::build(nu, grid, scheme, Weight::Constant(1.0), Window::default())?
        .apply(f)?
        .value;
    let i1 = base.map_nodal(|i, v| v * coeff.at_origin(t, &grid.point(i)[..dim]));
    let i3 = near_remainder(f, nu, coeff, t, eps, scheme)?;
    let i2 = match difference_weight(coeff, t) {
        None => GridFunction::zeros(grid),
        Some(w) => {
            let window = Window { lo: Some(eps), hi: None };
            OperatorPlan::build(nu, grid, scheme, w, window)?.apply(f)?.value
        }
    };
    Ok(SplitEvaluation { i1, i2, i3 })
}

/// `‖I₃‖_p` and `‖I₃‖_p / (‖(−Δ)^{α/2} f‖_p ∫_0^ε ω⁰(r)/r dr)`.
///
/// A coefficient without `y`-dependence gives `I₃ ≡ 0` and is reported as `(0, 0)`.
#[allow(clippy::too_many_arguments)]
pub fn lemma33_check(
    f: &GridFunction,
    nu: &BoundedLevyMeasure,
    coeff: &KernelCoefficient,
    t: f64,
    eps: f64,
    p: f64,
    scheme: &QuadratureScheme,
) -> Result<(f64, f64)> {
    let i3 = near_remainder(f, nu, coeff, t, eps, scheme)?;
    let lhs = lp_norm(&i3, p);
    if !coeff.dependence().y {
        return Ok((0.0, 0.0));
    }
    let dini = estimate_dini(coeff, f.grid(), &log_radii(eps * 1e-6, eps, 61), t)?.dini_integral0;
    let frac = lp_norm(&fractional_laplacian(f, nu.alpha())?, p);
    if dini <= 1e-14 || frac <= 1e-14 {
        return Err(Error::Degenerate(format!(
            "Dini integral {dini:.3e} or ‖(−Δ)^(α/2) f‖_p = {frac:.3e} is below 1e-14"
        )));
    }
    Ok((lhs, lhs / (frac * dini)))
}
