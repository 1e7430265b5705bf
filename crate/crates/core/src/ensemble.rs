//! Seeded random trigonometric polynomials. The same `(seed, member)` pair
//! yields the same polynomial on every grid that resolves it, so ensembles
//! can be compared across grid refinements.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{GridFunction, TorusGrid};
use crate::{Error, Result};

/// Generator stream for ensemble member `member`.
pub fn member_rng(seed: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    rng
}

/// Wave vectors of one closed half-space with `max_i |k_i| ≤ kmax`, in a
/// grid-independent order.
fn half_space(dim: usize, kmax: i64) -> Vec<[i64; 2]> {
    let mut out = Vec::new();
    if dim == 1 {
        out.extend((1..=kmax).map(|k| [k, 0]));
    } else {
        for k1 in 0..=kmax {
            for k2 in -kmax..=kmax {
                if k1 > 0 || k2 > 0 {
                    out.push([k1, k2]);
                }
            }
        }
    }
    out
}

fn from_half_space(grid: TorusGrid, modes: &[([i64; 2], Complex64)], mean: f64) -> Result<GridFunction> {
    let dim = grid.dim();
    let half = (grid.points_per_axis() / 2) as i64;
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    spec[0] = Complex64::new(mean, 0.0);
    for (k, c) in modes {
        if k[..dim].iter().any(|v| v.abs() >= half) {
            return Err(Error::Config(format!(
                "mode {:?} is not resolved by a grid with {} points per axis",
                &k[..dim],
                grid.points_per_axis()
            )));
        }
        let neg = [-k[0], -k[1]];
        spec[grid.mode_index(&k[..dim])] += *c;
        spec[grid.mode_index(&neg[..dim])] += c.conj();
    }
    GridFunction::from_spectral(grid, spec).map(|f| f.real_part())
}

/// Real trigonometric polynomial with uniform random coefficients on
/// `max_i |k_i| ≤ kmax`; zero mean when `mean_zero`.
pub fn random_trig_poly(grid: TorusGrid, seed: u64, member: u64, kmax: usize, mean_zero: bool) -> Result<GridFunction> {
    let mut rng = member_rng(seed, member);
    let mean = if mean_zero { 0.0 } else { rng.random_range(-1.0..1.0) };
    let modes: Vec<([i64; 2], Complex64)> = half_space(grid.dim(), kmax as i64)
        .into_iter()
        .map(|k| (k, Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))))
        .collect();
    from_half_space(grid, &modes, mean)
}

/// Mean-zero polynomial whose modes cluster around a random central
/// frequency drawn log-uniformly from `[k_lo, k_hi]`, with relative
/// bandwidth one half.
pub fn banded_trig_poly(grid: TorusGrid, seed: u64, member: u64, k_lo: f64, k_hi: f64) -> Result<GridFunction> {
    let mut rng = member_rng(seed, member);
    let center = k_lo * (k_hi / k_lo).powf(rng.random_range(0.0..1.0));
    let lo = (0.75 * center).floor().max(1.0) as i64;
    let hi = (1.25 * center).ceil() as i64;
    let dim = grid.dim();
    let modes: Vec<([i64; 2], Complex64)> = half_space(dim, hi)
        .into_iter()
        .filter(|k| {
            let norm = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
            norm >= lo as f64 && norm <= hi as f64
        })
        .map(|k| (k, Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))))
        .collect();
    from_half_space(grid, &modes, 0.0)
}

/// `count` members of [`random_trig_poly`].
pub fn trig_ensemble(grid: TorusGrid, seed: u64, count: usize, kmax: usize, mean_zero: bool) -> Result<Vec<GridFunction>> {
    (0..count as u64)
        .map(|m| random_trig_poly(grid, seed, m, kmax, mean_zero))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_are_real_and_grid_independent() {
        let coarse = TorusGrid::new(1, 32).unwrap();
        let fine = TorusGrid::new(1, 64).unwrap();
        let a = random_trig_poly(coarse, 9, 3, 6, true).unwrap();
        let b = random_trig_poly(fine, 9, 3, 6, true).unwrap();
        assert!(a.max_imag() < 1e-14);
        for k in -6..=6 {
            assert!((a.coefficient(&[k]) - b.coefficient(&[k])).norm() < 1e-14);
        }
        assert!(a.mean().norm() < 1e-15);
        let c = random_trig_poly(coarse, 9, 4, 6, true).unwrap();
        assert!(a.max_diff(&c) > 1e-3);
    }

    #[test]
    fn two_dimensional_members() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = random_trig_poly(g, 1, 0, 3, false).unwrap();
        assert!(f.max_imag() < 1e-14);
        assert!(f.bandwidth(1e-12) <= (18f64).sqrt() + 1e-12);
        assert!(random_trig_poly(g, 1, 0, 8, false).is_err());
    }

    #[test]
    fn banded_members_stay_in_band() {
        let g = TorusGrid::new(1, 256).unwrap();
        for m in 0..20 {
            let f = banded_trig_poly(g, 5, m, 1.0, 100.0).unwrap();
            assert!(f.bandwidth(1e-12) <= 126.0);
            assert!(f.mean().norm() < 1e-15);
        }
    }
}
