//! The transition semigroup `T_{t,s}φ(x) = E φ(x + X_t − X_s)` by Monte
//! Carlo over sampled increments and, for constant coefficients, as an
//! exact Fourier multiplier.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::{sample_on, JumpLaw, SamplerConfig};
use super::symbol::{char_exponent, char_exponent_table};
use crate::grid::{GridFunction, TorusGrid};
use crate::measure::BoundedLevyMeasure;
use crate::{Error, Result};

const PATH_CHUNK: usize = 64;

/// Monte Carlo estimate of `T_{t,s}φ`.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub mean: GridFunction,
    /// Pointwise standard error.
    pub stderr_field: Vec<f64>,
    /// Largest pointwise standard error over the grid.
    pub stderr: f64,
}

fn pairwise<T: Clone, F: Fn(&T, &T) -> T + Copy>(items: &[T], add: F) -> T {
    match items.len() {
        1 => items[0].clone(),
        n => {
            let (l, r) = items.split_at(n / 2);
            add(&pairwise(l, add), &pairwise(r, add))
        }
    }
}

/// Increments `X_t − X_s` of paths `first..first + count`.
pub(crate) fn increments(
    nu: &BoundedLevyMeasure,
    cfg: &SamplerConfig,
    s: f64,
    t: f64,
    first: u64,
    count: usize,
) -> Result<Vec<[f64; 2]>> {
    let law = JumpLaw::new(nu, cfg.r_cut)?;
    (0..count as u64)
        .into_par_iter()
        .map(|p| Ok(sample_on(nu, &law, cfg, &[s, t], first + p)?.positions[1]))
        .collect()
}

/// Sum and sum of squared moduli of `φ(· + X_p) − φ` over `shifts`,
/// reduced in a fixed tree order.
fn shifted_moments(phi: &GridFunction, shifts: &[[f64; 2]]) -> (Vec<Complex64>, Vec<f64>) {
    let n = phi.grid().len();
    let base = phi.nodal();
    let parts: Vec<(Vec<Complex64>, Vec<f64>)> = shifts
        .par_chunks(PATH_CHUNK)
        .map(|chunk| {
            let mut sum = vec![Complex64::new(0.0, 0.0); n];
            let mut sq = vec![0.0; n];
            for x in chunk {
                let g = phi.translate(x);
                for (i, v) in g.nodal().iter().enumerate() {
                    let dv = v - base[i];
                    sum[i] += dv;
                    sq[i] += dv.norm_sqr();
                }
            }
            (sum, sq)
        })
        .collect();
    pairwise(&parts, |a, b| {
        (
            a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect(),
            a.1.iter().zip(&b.1).map(|(x, y)| x + y).collect(),
        )
    })
}

fn estimate(phi: &GridFunction, shifts: &[[f64; 2]]) -> McEstimate {
    let grid = phi.grid();
    let count = shifts.len() as f64;
    let (sum, sq) = shifted_moments(phi, shifts);
    let centred: Vec<Complex64> = sum.iter().map(|v| v / count).collect();
    let stderr_field: Vec<f64> = sq
        .iter()
        .zip(&centred)
        .map(|(s2, m)| {
            let var = (s2 / count - m.norm_sqr()).max(0.0) * count / (count - 1.0);
            (var / count).sqrt()
        })
        .collect();
    let stderr = stderr_field.iter().cloned().fold(0.0, f64::max);
    let mean: Vec<Complex64> = centred.iter().zip(phi.nodal()).map(|(m, b)| m + b).collect();
    McEstimate {
        mean: GridFunction::from_nodal(grid, mean).expect("grid"),
        stderr_field,
        stderr,
    }
}

/// `T_{t,s}φ` averaged over `cfg.n_paths` sampled increments.
pub fn propagate_mc(
    phi: &GridFunction,
    nu: &BoundedLevyMeasure,
    cfg: &SamplerConfig,
    s: f64,
    t: f64,
) -> Result<McEstimate> {
    if t < s {
        return Err(Error::Argument(format!("need t ≥ s, got s = {s}, t = {t}")));
    }
    if t == s {
        return Ok(McEstimate {
            mean: phi.clone(),
            stderr_field: vec![0.0; phi.grid().len()],
            stderr: 0.0,
        });
    }
    check_dims(phi.grid(), nu)?;
    let shifts = increments(nu, cfg, s, t, 0, cfg.n_paths)?;
    Ok(estimate(phi, &shifts))
}

fn check_dims(grid: TorusGrid, nu: &BoundedLevyMeasure) -> Result<()> {
    if grid.dim() != nu.dim() {
        return Err(Error::Config(format!(
            "measure dimension {} does not match grid dimension {}",
            nu.dim(),
            grid.dim()
        )));
    }
    Ok(())
}

/// Exact propagator for constant intensity and drift: the coefficient at
/// `k` is multiplied by `e^{(t−s)(λψ(k) + ik·ϑ)}`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    grid: TorusGrid,
    psi: Vec<Complex64>,
}

impl SpectralPropagator {
    pub fn new(nu: &BoundedLevyMeasure, grid: TorusGrid) -> Result<Self> {
        check_dims(grid, nu)?;
        Ok(Self {
            grid,
            psi: char_exponent_table(nu, grid)?,
        })
    }

    /// `ψ` per spectral index.
    pub fn exponent(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn multiplier(&self, dt: f64, lambda: f64, vartheta: &[f64]) -> Vec<Complex64> {
        let d = self.grid.dim();
        let shift: Vec<f64> = vartheta[..d].iter().map(|v| (v * dt).rem_euclid(2.0 * std::f64::consts::PI)).collect();
        let transport = self.grid.multiplier(|k| {
            let phase: f64 = k.iter().zip(&shift).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, phase)
        });
        transport
            .iter()
            .zip(&self.psi)
            .map(|(tr, p)| tr * (p * (dt * lambda)).exp())
            .collect()
    }

    pub fn propagate(&self, phi: &GridFunction, s: f64, t: f64, lambda: f64, vartheta: &[f64]) -> Result<GridFunction> {
        if t < s {
            return Err(Error::Argument(format!("need t ≥ s, got s = {s}, t = {t}")));
        }
        if phi.grid() != self.grid {
            return Err(Error::Config("grid function and propagator use different grids".into()));
        }
        Ok(phi.apply_multiplier(&self.multiplier(t - s, lambda, vartheta)))
    }
}

/// One-shot [`SpectralPropagator::propagate`].
pub fn propagate_spectral(
    phi: &GridFunction,
    nu: &BoundedLevyMeasure,
    s: f64,
    t: f64,
    lambda: f64,
    vartheta: &[f64],
) -> Result<GridFunction> {
    SpectralPropagator::new(nu, phi.grid())?.propagate(phi, s, t, lambda, vartheta)
}

/// Both sides of the factorisation `T^{λ,ϑ}_{t,s} f = E T^{λ₀ν,0}_{t,s} f(· + X¹_t − X¹_s)`.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    /// Monte Carlo with the full intensity `λ(t)`.
    pub direct: McEstimate,
    /// Monte Carlo over the residual process `X¹` (intensity `λ − λ₀`) of the
    /// exact `λ₀` propagator.
    pub factored: McEstimate,
    /// `max_x |direct − factored|`.
    pub discrepancy: f64,
    /// `max_x √(se_direct² + se_factored²)`.
    pub combined_stderr: f64,
}

impl FactorizationReport {
    pub fn within(&self, multiples: f64) -> bool {
        self.discrepancy <= multiples * self.combined_stderr
    }
}

pub fn check_factorization(
    phi: &GridFunction,
    nu: &BoundedLevyMeasure,
    cfg: &SamplerConfig,
    s: f64,
    t: f64,
) -> Result<FactorizationReport> {
    if t < s {
        return Err(Error::Argument(format!("need t ≥ s, got s = {s}, t = {t}")));
    }
    let direct = propagate_mc(phi, nu, cfg, s, t)?;
    let frozen = SpectralPropagator::new(nu, phi.grid())?.propagate(phi, s, t, cfg.lambda0(), &[0.0, 0.0])?;
    let residual = cfg.residual();
    let shifts = if t > s {
        increments(nu, &residual, s, t, 1 << 32, cfg.n_paths)?
    } else {
        vec![[0.0; 2]; cfg.n_paths]
    };
    let factored = estimate(&frozen, &shifts);
    let mut discrepancy: f64 = 0.0;
    let mut combined: f64 = 0.0;
    for i in 0..phi.grid().len() {
        discrepancy = discrepancy.max((direct.mean.nodal()[i] - factored.mean.nodal()[i]).norm());
        combined = combined.max(direct.stderr_field[i].hypot(factored.stderr_field[i]));
    }
    Ok(FactorizationReport {
        direct,
        factored,
        discrepancy,
        combined_stderr: combined,
    })
}

/// Empirical characteristic function `E e^{ik·X_t}` against `e^{tλψ(k)}`
/// (drift ignored: use `ϑ ≡ 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharFunctionReport {
    pub k: [f64; 2],
    pub psi_re: f64,
    pub psi_im: f64,
    pub emp_re: f64,
    pub emp_im: f64,
    /// `max(se_re, se_im)` of the empirical mean.
    pub se: f64,
    /// Larger of the real and imaginary deviations from `e^{tψ}`, each in
    /// units of its own standard error.
    pub z: f64,
}

/// Compares the sampled `X_t` (`λ ≡ λ₀`) with `e^{tλ₀ψ(k)}` for each `k`.
pub fn check_char_function(
    nu: &BoundedLevyMeasure,
    cfg: &SamplerConfig,
    t: f64,
    ks: &[Vec<f64>],
) -> Result<Vec<CharFunctionReport>> {
    let frozen = cfg.frozen();
    let xs = increments(nu, &frozen, 0.0, t, 0, cfg.n_paths)?;
    let count = xs.len() as f64;
    ks.iter()
        .map(|k| {
            let psi = char_exponent(nu, k)?;
            let target = (psi * (t * cfg.lambda0())).exp();
            let vals: Vec<Complex64> = xs
                .iter()
                .map(|x| {
                    let ph: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                    Complex64::from_polar(1.0, ph)
                })
                .collect();
            let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
            let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
            let mre = crate::quad::pairwise_sum(&re) / count;
            let mim = crate::quad::pairwise_sum(&im) / count;
            let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (count - 1.0);
            let se_re = (var(&re, mre) / count).sqrt();
            let se_im = (var(&im, mim) / count).sqrt();
            let z = ((mre - target.re).abs() / se_re.max(1e-300)).max((mim - target.im).abs() / se_im.max(1e-300));
            let mut kk = [0.0; 2];
            kk[..k.len()].copy_from_slice(k);
            Ok(CharFunctionReport {
                k: kk,
                psi_re: psi.re,
                psi_im: psi.im,
                emp_re: mre,
                emp_im: mim,
                se: se_re.max(se_im),
                z,
            })
        })
        .collect()
}
