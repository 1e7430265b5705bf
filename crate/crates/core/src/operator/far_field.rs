//! Closed-form treatment of the radial tail `r > R` where the integrand's
//! weight no longer depends on `r`.

use num_complex::Complex64;

use crate::quad::{integrate, Tolerance};
use crate::Result;

/// `∫_R^∞ e^{isr} r^{-1-α} dr` for `R > 0`.
///
/// For `s > 0` the contour is rotated onto `r = R + iu/s`, where the
/// integrand decays like `e^{-u}`; negative `s` follows by conjugation.
pub fn oscillatory_tail(s: f64, alpha: f64, big_r: f64) -> Result<Complex64> {
    if s.abs() < 1e-13 {
        return Ok(Complex64::new(big_r.powf(-alpha) / alpha, 0.0));
    }
    if s < 0.0 {
        return oscillatory_tail(-s, alpha, big_r).map(|z| z.conj());
    }
    let beta = 1.0 + alpha;
    let tol = Tolerance {
        abs: 1e-16,
        rel: 1e-13,
        max_intervals: 2000,
    };
    let inner = integrate(
        |u| (-u).exp() * Complex64::new(big_r, u / s).powf(-beta),
        0.0,
        40.0,
        tol,
    )?;
    let phase = Complex64::from_polar(1.0, s * big_r);
    Ok(Complex64::new(0.0, 1.0 / s) * phase * inner)
}

/// `∫_R^∞ (e^{isr} − 1 − i s r·c) r^{-1-α} dr` with `c = 1` exactly when
/// `compensate` (only meaningful for `α > 1`).
pub fn compensated_tail(s: f64, alpha: f64, big_r: f64, compensate: bool) -> Result<Complex64> {
    if s.abs() < 1e-13 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut v = oscillatory_tail(s, alpha, big_r)? - big_r.powf(-alpha) / alpha;
    if compensate {
        v -= Complex64::new(0.0, s * big_r.powf(1.0 - alpha) / (alpha - 1.0));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::wynn_epsilon;
    use std::f64::consts::PI;

    /// Direct integration over half periods with epsilon extrapolation.
    fn reference(s: f64, alpha: f64, big_r: f64) -> Complex64 {
        let step = PI / s.abs();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut sums = Vec::new();
        let mut a = big_r;
        for _ in 0..60 {
            acc += integrate(
                |r| Complex64::from_polar(1.0, s * r) * r.powf(-1.0 - alpha),
                a,
                a + step,
                Tolerance::default(),
            )
            .unwrap();
            sums.push(acc);
            a += step;
        }
        wynn_epsilon(&sums)
    }

    #[test]
    fn matches_direct_summation() {
        for &alpha in &[0.5, 1.0, 1.5] {
            for &s in &[0.7, 3.0, -5.0, 40.0] {
                for &r in &[1.0, 2.5] {
                    let got = oscillatory_tail(s, alpha, r).unwrap();
                    let want = reference(s, alpha, r);
                    assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()), "α={alpha} s={s} R={r}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn zero_frequency_limits() {
        assert!((oscillatory_tail(0.0, 0.5, 4.0).unwrap().re - 1.0).abs() < 1e-15);
        assert_eq!(compensated_tail(0.0, 1.5, 2.0, true).unwrap(), Complex64::new(0.0, 0.0));
    }
}
