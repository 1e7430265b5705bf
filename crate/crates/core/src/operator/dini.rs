//! Sampled Dini moduli of a kernel coefficient:
//! `ω⁰(r) = sup_x sup_{|y|≤r} |a(x,y) − a(x,0)|` and
//! `ω¹(r) = sup_{|x−x'|≤r} |a(x,0) − a(x',0)|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::KernelCoefficient;
use crate::grid::TorusGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiniReport {
    pub radii: Vec<f64>,
    pub omega0: Vec<f64>,
    pub omega1: Vec<f64>,
    /// `∫_0^{r_last} ω⁰(r)/r dr`.
    pub dini_integral0: f64,
    /// `∫_0^{r_last} ω¹(r)/r dr`.
    pub dini_integral1: f64,
}

/// 64 points of the closed ball of radius `r` (boundary included).
fn ball(dim: usize, r: f64) -> Vec<[f64; 2]> {
    if dim == 1 {
        (0..64).map(|i| [r * (-1.0 + 2.0 * i as f64 / 63.0), 0.0]).collect()
    } else {
        let mut pts = Vec::with_capacity(64);
        for ring in 1..=4 {
            let rho = r * ring as f64 / 4.0;
            for a in 0..16 {
                let phi = 2.0 * PI * (a as f64 + 0.5 * (ring % 2) as f64) / 16.0;
                pts.push([rho * phi.cos(), rho * phi.sin()]);
            }
        }
        pts
    }
}

/// `∫_0^{r_last} ω(r)/r dr`: trapezoid in `ln r` over the samples, plus
/// `ω(r₀)/s` below the first radius for the locally fitted power `r^s`.
fn dini_integral(radii: &[f64], omega: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..radii.len() {
        acc += 0.5 * (omega[i] + omega[i - 1]) * (radii[i] / radii[i - 1]).ln();
    }
    if omega[0] > 0.0 {
        let s = if radii.len() > 1 && omega[1] > omega[0] {
            ((omega[1] / omega[0]).ln() / (radii[1] / radii[0]).ln()).max(0.05)
        } else {
            0.05
        };
        acc += omega[0] / s;
    }
    acc
}

fn cumulative_max(v: &mut [f64]) {
    for i in 1..v.len() {
        v[i] = v[i].max(v[i - 1]);
    }
}

/// Samples both moduli at `radii` over the grid points at time `t`.
pub fn estimate_dini(
    coeff: &KernelCoefficient,
    grid: TorusGrid,
    radii: &[f64],
    t: f64,
) -> Result<DiniReport> {
    if radii.is_empty() {
        return Err(Error::Argument("no radii given".into()));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("radii must be positive and strictly increasing".into()));
    }
    let dim = grid.dim();
    let dep = coeff.dependence();
    let xs: Vec<[f64; 2]> = if dep.x {
        (0..grid.len()).map(|i| grid.point(i)).collect()
    } else {
        vec![[0.0; 2]]
    };
    let mut omega0 = Vec::with_capacity(radii.len());
    let mut omega1 = Vec::with_capacity(radii.len());
    for &r in radii {
        let pts = ball(dim, r);
        let mut w0: f64 = 0.0;
        let mut w1: f64 = 0.0;
        for x in &xs {
            let base = coeff.at_origin(t, &x[..dim]);
            if dep.y {
                for y in &pts {
                    w0 = w0.max((coeff.eval(t, &x[..dim], &y[..dim]) - base).abs());
                }
            }
            if dep.x {
                for z in &pts {
                    let xp = [x[0] + z[0], x[1] + z[1]];
                    w1 = w1.max((coeff.at_origin(t, &xp[..dim]) - base).abs());
                }
            }
        }
        omega0.push(w0);
        omega1.push(w1);
    }
    cumulative_max(&mut omega0);
    cumulative_max(&mut omega1);
    Ok(DiniReport {
        dini_integral0: dini_integral(radii, &omega0),
        dini_integral1: dini_integral(radii, &omega1),
        radii: radii.to_vec(),
        omega0,
        omega1,
    })
}

/// `count` radii spaced evenly in `ln r` over `[r_lo, r_hi]`.
pub fn log_radii(r_lo: f64, r_hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| r_lo * (r_hi / r_lo).powf(i as f64 / (count - 1).max(1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coefficient_has_zero_moduli() {
        let a = KernelCoefficient::constant(1.0).unwrap();
        let rep = estimate_dini(&a, TorusGrid::new(1, 32).unwrap(), &log_radii(1e-3, 1.0, 10), 0.0).unwrap();
        assert!(rep.omega0.iter().chain(&rep.omega1).all(|v| *v == 0.0));
        assert_eq!((rep.dini_integral0, rep.dini_integral1), (0.0, 0.0));
    }

    #[test]
    fn radial_power_modulus_and_integral() {
        let a = KernelCoefficient::radial_dini(1.0, 0.5).unwrap();
        let radii = log_radii(1e-4, 1.0, 40);
        let rep = estimate_dini(&a, TorusGrid::new(1, 32).unwrap(), &radii, 0.0).unwrap();
        for (r, w) in radii.iter().zip(&rep.omega0) {
            assert!((w - r.sqrt()).abs() < 1e-12);
        }
        assert!((rep.dini_integral0 / 2.0 - 1.0).abs() < 0.05);
        assert_eq!(rep.dini_integral1, 0.0);
    }

    #[test]
    fn lipschitz_x_modulus() {
        let a = KernelCoefficient::separable(0.25, 0.0, 1.0).unwrap();
        let radii = log_radii(1e-3, 0.1, 8);
        let rep = estimate_dini(&a, TorusGrid::new(1, 128).unwrap(), &radii, 0.0).unwrap();
        assert!(rep.omega0.iter().all(|v| *v == 0.0));
        for (r, w) in radii.iter().zip(&rep.omega1) {
            assert!((w - r / 4.0).abs() < 0.02 * r / 4.0, "r={r} ω¹={w}");
        }
    }

    #[test]
    fn moduli_are_monotone() {
        let a = KernelCoefficient::modulated(0.25, 0.5, 0.6).unwrap();
        let rep = estimate_dini(&a, TorusGrid::new(2, 16).unwrap(), &log_radii(1e-3, 1.0, 12), 0.0).unwrap();
        assert!(rep.omega0.windows(2).all(|w| w[1] >= w[0]));
        assert!(rep.omega1.windows(2).all(|w| w[1] >= w[0]));
        assert!(rep.dini_integral0 >= 0.0 && rep.dini_integral1 >= 0.0);
    }
}
