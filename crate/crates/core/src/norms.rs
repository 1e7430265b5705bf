//! Function-space norms on the torus: `L^p`, Bessel potential, fractional
//! Laplacian, Sobolev–Slobodeckij, and the space-time norms of solutions,
//! together with empirical-constant checkers for the interpolation
//! inequality and the translation bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;
use crate::solver::Solution;
use crate::{Error, Result};

/// Smoothness/integrability pair `(β, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOrder {
    beta: f64,
    p: f64,
}

impl NormOrder {
    pub fn new(beta: f64, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("integrability p must exceed 1, got {p}")));
        }
        if !(0.0..=4.0).contains(&beta) {
            return Err(Error::Config(format!("smoothness β must lie in [0, 4], got {beta}")));
        }
        Ok(Self { beta, p })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// `(h^d Σ_x |f(x)|^p)^{1/p}`.
pub fn lp_norm(f: &GridFunction, p: f64) -> f64 {
    assert!(p >= 1.0, "L^p norm needs p ≥ 1, got {p}");
    let vol = f.grid().cell_volume();
    let scale = f.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = f.nodal().iter().map(|z| (z.norm() / scale).powf(p)).sum();
    scale * (vol * s).powf(1.0 / p)
}

/// `(−Δ)^{β/2} f`: multiplier `|k|^β`, zero on the mean.
pub fn fractional_laplacian(f: &GridFunction, beta: f64) -> Result<GridFunction> {
    if !(beta >= 0.0) {
        return Err(Error::Argument(format!("fractional order must be ≥ 0, got {beta}")));
    }
    let mult = f.grid().multiplier(|k| {
        let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(norm.powf(beta), 0.0)
        }
    });
    Ok(f.apply_multiplier(&mult))
}

/// `(I−Δ)^{s/2} f` for any real `s`.
pub fn bessel_potential(f: &GridFunction, s: f64) -> GridFunction {
    let mult = f.grid().multiplier(|k| {
        let k2 = k.iter().map(|v| v * v).sum::<f64>();
        Complex64::new((1.0 + k2).powf(0.5 * s), 0.0)
    });
    f.apply_multiplier(&mult)
}

/// `‖f‖_p + ‖(−Δ)^{β/2} f‖_p`; at `β = 0` this is `‖f‖_p`.
pub fn bessel_norm(f: &GridFunction, order: NormOrder) -> f64 {
    let base = lp_norm(f, order.p);
    if order.beta == 0.0 {
        return base;
    }
    let frac = fractional_laplacian(f, order.beta).expect("order is non-negative");
    base + lp_norm(&frac, order.p)
}

/// Bessel norm of arbitrary real order: the sum form for `s ≥ 0` and
/// `‖(I−Δ)^{s/2} f‖_p` for negative `s`.
pub fn bessel_norm_signed(f: &GridFunction, s: f64, p: f64) -> f64 {
    if s >= 0.0 {
        bessel_norm(f, NormOrder { beta: s, p })
    } else {
        lp_norm(&bessel_potential(f, s), p)
    }
}

/// `Σ_m |z + 2πm|^{-s}` for `z ∈ (0, 2π)`, `s > 1`.
fn lattice_kernel(z: f64, s: f64) -> f64 {
    const M: i64 = 1000;
    let mut acc = 0.0;
    for m in -M..=M {
        acc += (z + 2.0 * PI * m as f64).abs().powf(-s);
    }
    acc + 2.0 * (2.0 * PI).powf(-s) * (M as f64 + 0.5).powf(1.0 - s) / (s - 1.0)
}

/// Periodic Gagliardo seminorm
/// `(∫_T ∫_ℝ |f(x) − f(y)|^p / |x−y|^{1+βp} dy dx)^{1/p}` in one dimension.
///
/// The `y`-integral over the line folds onto the torus with the lattice
/// kernel; the diagonal cell is replaced by its first-order Taylor value.
pub fn slobodeckij_seminorm(f: &GridFunction, beta: f64, p: f64) -> Result<f64> {
    let grid = f.grid();
    if grid.dim() != 1 {
        return Err(Error::Unsupported(
            "the Slobodeckij double integral is implemented for d = 1 only".into(),
        ));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Argument(format!("β must lie in (0, 1), got {beta}")));
    }
    if !(p >= 1.0) {
        return Err(Error::Argument(format!("p must be ≥ 1, got {p}")));
    }
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let s = 1.0 + beta * p;
    let kernel: Vec<f64> = (0..n)
        .map(|o| if o == 0 { 0.0 } else { lattice_kernel(o as f64 * h, s) })
        .collect();
    let vals = f.nodal();
    let df = f.partial(0);
    let diag_weight = 2.0 * (0.5 * h).powf(p * (1.0 - beta)) / (p * (1.0 - beta));
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for (o, k) in kernel.iter().enumerate().skip(1) {
            let j = (i + o) % n;
            row += (vals[i] - vals[j]).norm().powf(p) * k;
        }
        total += row * h * h + df.nodal()[i].norm().powf(p) * diag_weight * h;
    }
    Ok(total.powf(1.0 / p))
}

/// `Σ_{j≤[β]} ‖∂^j f‖_p + [∂^{[β]} f]_{{β},p}` in one dimension.
pub fn slobodeckij_norm(f: &GridFunction, beta: f64, p: f64) -> Result<f64> {
    if beta < 0.0 {
        return Err(Error::Argument(format!("β must be ≥ 0, got {beta}")));
    }
    let whole = beta.floor() as usize;
    let frac = beta - whole as f64;
    let mut g = f.clone();
    let mut total = lp_norm(&g, p);
    for _ in 0..whole {
        g = g.partial(0);
        total += lp_norm(&g, p);
    }
    if frac > 1e-12 {
        total += slobodeckij_seminorm(&g, frac, p)?;
    }
    Ok(total)
}

/// Left side and empirical constant of
/// `‖(−Δ)^{β/2}f‖_p ≤ C‖f‖_p^{1−β/γ} ‖(−Δ)^{γ/2}f‖_p^{β/γ}`.
pub fn check_interpolation(f: &GridFunction, beta: f64, gamma: f64, p: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < gamma) {
        return Err(Error::Argument(format!("need 0 < β < γ, got β = {beta}, γ = {gamma}")));
    }
    let lhs = lp_norm(&fractional_laplacian(f, beta)?, p);
    let theta = beta / gamma;
    let rhs = lp_norm(f, p).powf(1.0 - theta) * lp_norm(&fractional_laplacian(f, gamma)?, p).powf(theta);
    if rhs == 0.0 {
        return Ok((lhs, 0.0));
    }
    Ok((lhs, lhs / rhs))
}

/// `‖f(·+y) − f‖_p / (|y|^β ‖(−Δ)^{β/2} f‖_p)`.
pub fn check_translation_bound(f: &GridFunction, y: &[f64], beta: f64, p: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Argument(format!("β must lie in (0, 1), got {beta}")));
    }
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ynorm > PI + 1e-12 {
        return Err(Error::Argument(format!("|y| = {ynorm} exceeds the half period")));
    }
    let num = lp_norm(&f.translate(y).sub(f), p);
    let den = ynorm.powf(beta) * lp_norm(&fractional_laplacian(f, beta)?, p);
    if den < 1e-14 {
        return Err(Error::Degenerate(format!(
            "translation bound denominator {den:.3e} is below 1e-14"
        )));
    }
    Ok(num / den)
}

/// Exponent used for the lower-order slots of the space-time norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerSlot {
    /// `β − α`: one time derivative costs `α` orders of space regularity.
    #[default]
    AlphaShift,
    /// `β − 1`, the literal unit shift.
    UnitShift,
}

/// Components of `‖u‖_{𝕏_t^{α,p}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeNorms {
    pub sup_lower: f64,
    pub y_norm: f64,
    pub dt_norm: f64,
    pub x_norm: f64,
}

fn trapezoid_p(times: &[f64], vals: &[f64], p: f64) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (vals[i].powf(p) + vals[i - 1].powf(p));
    }
    acc.powf(1.0 / p)
}

/// `sup_s ‖u(s)‖_{H^{β',p}} + ‖u‖_{𝕐^{α,p}} + ‖∂_t u‖_{𝕐^{β',p}}` with `β'`
/// chosen by `slot`; time integrals by the trapezoid rule over the stored nodes.
pub fn spacetime_norms(u: &Solution, alpha: f64, p: f64, slot: LowerSlot) -> Result<SpaceTimeNorms> {
    if u.times.len() < 2 {
        return Err(Error::Argument(format!(
            "space-time norms need at least 2 time nodes, got {}",
            u.times.len()
        )));
    }
    if u.states.len() != u.times.len() || u.rhs_history.len() != u.times.len() {
        return Err(Error::Argument("solution history lengths disagree".into()));
    }
    let lower = match slot {
        LowerSlot::AlphaShift => 0.0,
        LowerSlot::UnitShift => alpha - 1.0,
    };
    let order = NormOrder::new(alpha, p)?;
    let upper: Vec<f64> = u.states.iter().map(|s| bessel_norm(s, order)).collect();
    let low: Vec<f64> = u.states.iter().map(|s| bessel_norm_signed(s, lower, p)).collect();
    let dt: Vec<f64> = u.rhs_history.iter().map(|s| bessel_norm_signed(s, lower, p)).collect();
    let sup_lower = low.iter().cloned().fold(0.0, f64::max);
    let y_norm = trapezoid_p(&u.times, &upper, p);
    let dt_norm = trapezoid_p(&u.times, &dt, p);
    Ok(SpaceTimeNorms {
        sup_lower,
        y_norm,
        dt_norm,
        x_norm: sup_lower + y_norm + dt_norm,
    })
}
