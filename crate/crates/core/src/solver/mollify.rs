use crate::grid::TorusGrid;
use crate::operator::{estimate_dini, KernelCoefficient};
use crate::quad::gauss_legendre_on;
use crate::{Error, Result};

use super::Drift;

/// Mollified coefficients with the spot check `|a_ε − a| ≤ ω⁽¹⁾(ε)`.
#[derive(Debug, Clone)]
pub struct MollifiedCoefficients {
    pub coeff: KernelCoefficient,
    pub drift: Drift,
    /// `max_x |a_ε(0, x, 0) − a(0, x, 0)|` over the grid.
    pub max_deviation: f64,
    /// Sampled `ω⁽¹⁾(ε)` of the original coefficient at `t = 0`.
    pub omega1: f64,
}

impl MollifiedCoefficients {
    pub fn within_modulus(&self) -> bool {
        self.max_deviation <= self.omega1 + 1e-8
    }
}

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Discrete product bump `ρ_ε` on `[−ε, ε]^d`: Gauss–Legendre nodes per
/// axis, weights normalised to sum 1.
pub fn bump_kernel(dim: usize, eps: f64) -> Vec<([f64; 2], f64)> {
    let per_axis = if dim == 1 { 48 } else { 16 };
    let axis: Vec<(f64, f64)> = gauss_legendre_on(per_axis, -eps, eps)
        .into_iter()
        .map(|(z, w)| (z, w * bump(z / eps)))
        .collect();
    let mut kernel = Vec::new();
    match dim {
        1 => {
            for &(z, w) in &axis {
                kernel.push(([z, 0.0], w));
            }
        }
        _ => {
            for &(z1, w1) in &axis {
                for &(z2, w2) in &axis {
                    kernel.push(([z1, z2], w1 * w2));
                }
            }
        }
    }
    let total: f64 = kernel.iter().map(|(_, w)| w).sum();
    for (_, w) in kernel.iter_mut() {
        *w /= total;
    }
    kernel
}

/// `a_ε = a ∗ ρ_ε` and `b_ε = b ∗ ρ_ε` in `x`.
pub fn mollify_coefficients(
    coeff: &KernelCoefficient,
    drift: &Drift,
    eps: f64,
    grid: TorusGrid,
) -> Result<MollifiedCoefficients> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("mollification radius must lie in (0, 1), got {eps}")));
    }
    let d = grid.dim();
    let kernel = bump_kernel(d, eps);
    let smoothed = if coeff.dependence().x {
        KernelCoefficient::mollified(coeff, kernel.clone())
    } else {
        coeff.clone()
    };
    let smoothed_drift = if drift.as_constant().is_some() {
        drift.clone()
    } else {
        let base = drift.clone();
        let kern = kernel;
        Drift::custom(
            move |t, x| {
                let mut acc = [0.0; 2];
                let mut xs = [0.0; 2];
                for (z, w) in &kern {
                    for i in 0..x.len() {
                        xs[i] = x[i] - z[i];
                    }
                    let v = base.eval(t, &xs[..x.len()]);
                    acc[0] += w * v[0];
                    acc[1] += w * v[1];
                }
                acc
            },
            drift.sup(),
            drift.lipschitz(),
        )?
    };
    let mut max_deviation: f64 = 0.0;
    for i in 0..grid.len() {
        let x = &grid.point(i)[..d];
        max_deviation = max_deviation.max((smoothed.at_origin(0.0, x) - coeff.at_origin(0.0, x)).abs());
    }
    let omega1 = estimate_dini(coeff, grid, &[eps], 0.0)?.omega1[0];
    Ok(MollifiedCoefficients { coeff: smoothed, drift: smoothed_drift, max_deviation, omega1 })
}
