//! Characteristic exponent `ψ(k)` of the Lévy measure by adaptive
//! quadrature along each atom, independent of the operator's tabulation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::TorusGrid;
use crate::measure::BoundedLevyMeasure;
use crate::quad::{expm1_compensated, integrate, wynn_epsilon, Tolerance};
use crate::{Error, Result};

const HALF_PERIODS: usize = 48;

fn tol() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-12,
        max_intervals: 8000,
    }
}

fn integrate_pieces<F: Fn(f64) -> Complex64>(f: &F, cuts: &[f64]) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        acc += integrate(f, w[0], w[1], tol())?;
    }
    Ok(acc)
}

fn with_breaks(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut v = vec![a];
    v.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    v.push(b);
    v
}

/// `∫_0^∞ (e^{isr} − 1 − isr·c(r)) m(r, θ_j) r^{-1-α} dr` for one atom.
fn radial_symbol(nu: &BoundedLevyMeasure, atom: usize, s: f64) -> Result<Complex64> {
    if s.abs() < 1e-13 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let alpha = nu.alpha();
    let breaks = nu.density().breakpoints();
    let m = |r: f64| nu.m(r, atom);

    // [0, 1]: substitute r = u^q so the leading power r^e becomes smooth.
    let lead = if alpha < 1.0 { -alpha } else { 1.0 - alpha };
    let q = (2.0 / (lead + 1.0)).ceil().max(1.0);
    let compensate = alpha >= 1.0;
    let near = |u: f64| -> Complex64 {
        if u <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let r = u.powf(q);
        let jac = q * u.powf(q - 1.0);
        expm1_compensated(s * r, compensate) * (m(r) * r.powf(-1.0 - alpha) * jac)
    };
    let ubreaks: Vec<f64> = breaks.iter().filter(|&&b| b < 1.0).map(|b| b.powf(1.0 / q)).collect();
    let mut total = integrate_pieces(&near, &with_breaks(0.0, 1.0, &ubreaks))?;

    // [1, ∞): non-oscillatory pieces after r = u^{-1/α} (and u^{-1/(α−1)}).
    let mass = |u: f64| -> Complex64 {
        if u <= 0.0 {
            return Complex64::new(m(1e300) / alpha, 0.0);
        }
        Complex64::new(m(u.powf(-1.0 / alpha)) / alpha, 0.0)
    };
    let mbreaks: Vec<f64> = breaks.iter().filter(|&&b| b > 1.0).map(|b| b.powf(-alpha)).collect();
    total -= integrate_pieces(&mass, &with_breaks(0.0, 1.0, &mbreaks))?;
    if alpha > 1.0 {
        let e = alpha - 1.0;
        let first = |u: f64| -> Complex64 {
            if u <= 0.0 {
                return Complex64::new(m(1e300) / e, 0.0);
            }
            Complex64::new(m(u.powf(-1.0 / e)) / e, 0.0)
        };
        let fbreaks: Vec<f64> = breaks.iter().filter(|&&b| b > 1.0).map(|b| b.powf(-e)).collect();
        let moment = integrate_pieces(&first, &with_breaks(0.0, 1.0, &fbreaks))?;
        total -= Complex64::new(0.0, s) * moment;
    }

    // Oscillatory part over half periods, accelerated by Wynn's epsilon.
    let osc = |r: f64| Complex64::from_polar(m(r) * r.powf(-1.0 - alpha), s * r);
    let step = std::f64::consts::PI / s.abs();
    let mut sums = Vec::with_capacity(HALF_PERIODS);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut a = 1.0;
    for _ in 0..HALF_PERIODS {
        acc += integrate_pieces(&osc, &with_breaks(a, a + step, &breaks))?;
        sums.push(acc);
        a += step;
    }
    total += wynn_epsilon(&sums);
    Ok(total)
}

/// `ψ(k) = Σ_j w_j ∫_0^∞ (e^{ik·rθ_j} − 1 − ik·(rθ_j)^(α)) m(r, θ_j) r^{-1-α} dr`.
pub fn char_exponent(nu: &BoundedLevyMeasure, k: &[f64]) -> Result<Complex64> {
    let dim = nu.dim();
    if k.len() != dim {
        return Err(Error::Argument(format!(
            "wave vector has {} components, measure lives in d = {dim}",
            k.len()
        )));
    }
    let mut psi = Complex64::new(0.0, 0.0);
    for (j, atom) in nu.atoms().iter().enumerate() {
        let s: f64 = k.iter().zip(atom.dir_slice(dim)).map(|(a, b)| a * b).sum();
        psi += radial_symbol(nu, j, s)? * atom.weight;
    }
    if psi.re > 1e-10 * psi.norm().max(1.0) {
        return Err(Error::Numerical(format!(
            "characteristic exponent has positive real part {psi} at k = {k:?}"
        )));
    }
    Ok(psi)
}

/// `ψ` on every wave vector of `grid`, with the Nyquist entries averaged
/// over their `±n/2` variants.
pub fn char_exponent_table(nu: &BoundedLevyMeasure, grid: TorusGrid) -> Result<Vec<Complex64>> {
    let dim = grid.dim();
    let half = (grid.points_per_axis() / 2) as f64;
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let k = grid.wavevector(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut count = 0.0;
            for mask in 0..(1usize << dim) {
                let mut kv = k;
                let mut ok = true;
                for i in 0..dim {
                    if mask & (1 << i) != 0 {
                        if kv[i] == -half {
                            kv[i] = half;
                        } else {
                            ok = false;
                        }
                    }
                }
                if ok {
                    acc += char_exponent(nu, &kv[..dim])?;
                    count += 1.0;
                }
            }
            Ok(acc / count)
        })
        .collect()
}
