//! One-dimensional quadrature building blocks: Gauss–Legendre rules,
//! adaptive Gauss–Kronrod integration, Wynn's epsilon extrapolation and
//! order-stable pairwise summation.

use num_complex::Complex64;

use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| (mid + half * xi, half * wi))
        .collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-11,
            max_intervals: 4000,
        }
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of a complex integrand.
///
/// Fails with [`Error::Numerical`] when the error estimate does not reach the
/// tolerance within `max_intervals` bisections.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = kronrod15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= tol.abs.max(tol.rel * total.norm()) {
            return Ok(total);
        }
        if intervals.len() >= tol.max_intervals {
            return Err(Error::Numerical(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {err:.3e} (value {total:.6e})"
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Numerical(format!(
                "adaptive quadrature cannot bisect [{lo}, {hi}] further"
            )));
        }
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, tol).map(|z| z.re)
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the last diagonal estimate of the limit.
pub fn wynn_epsilon(partial_sums: &[Complex64]) -> Complex64 {
    let n = partial_sums.len();
    if n < 3 {
        return *partial_sums.last().unwrap_or(&Complex64::new(0.0, 0.0));
    }
    // eps[k][j]: column k, built in place one column at a time.
    let mut prev: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = partial_sums.to_vec();
    let mut best = *partial_sums.last().unwrap();
    let mut col = 0usize;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let diff = cur[j + 1] - cur[j];
            let base = if col == 0 { Complex64::new(0.0, 0.0) } else { prev[j + 1] };
            if diff.norm() < 1e-300 {
                // Converged column; further extrapolation is meaningless.
                return if col % 2 == 0 { cur[j + 1] } else { best };
            }
            next.push(base + diff.inv());
        }
        col += 1;
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            if let Some(last) = cur.last() {
                best = *last;
            }
        }
    }
    best
}

/// Pairwise summation in a fixed tree order, independent of thread count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// `e^{iφ} − 1 − c·iφ` evaluated without catastrophic cancellation for
/// small `φ`; `c` selects whether the first-order term is subtracted.
pub fn expm1_compensated(phi: f64, subtract_linear: bool) -> Complex64 {
    let half = 0.5 * phi;
    let re = -2.0 * half.sin() * half.sin();
    let im = if subtract_linear {
        if phi.abs() < 0.1 {
            let p2 = phi * phi;
            -phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0)))
        } else {
            phi.sin() - phi
        }
    } else {
        phi.sin()
    };
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let rule = gauss_legendre_on(n, 0.0, 2.0);
            for deg in 0..(2 * n) {
                let approx: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-12 * exact.max(1.0), "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate_real(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = Complex64::new(0.0, 0.0);
        let sums: Vec<Complex64> = (1..=20)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                s += Complex64::new(sign / k as f64, 0.0);
                s
            })
            .collect();
        let v = wynn_epsilon(&sums);
        assert!((v.re - std::f64::consts::LN_2).abs() < 1e-12, "{v}");
    }

    #[test]
    fn compensated_exponential_matches_direct_formula() {
        for &phi in &[1e-6, 1e-3, 0.05, 0.3, 2.0, -1.7] {
            let direct = Complex64::new(0.0, phi).exp() - 1.0 - Complex64::new(0.0, phi);
            let v = expm1_compensated(phi, true);
            assert!((v - direct).norm() <= 1e-15 + 1e-9 * direct.norm(), "phi={phi}");
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_sum() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-10);
    }
}
