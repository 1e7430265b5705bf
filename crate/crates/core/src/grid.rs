//! Periodic torus grids in one or two dimensions and grid functions that
//! carry both their nodal samples and their Fourier coefficients.
//!
//! Coefficients are normalised so that `f(x) = Σ_k c_k e^{i k·x}`; the
//! Nyquist wave number (`k_i = ±n/2`) is treated symmetrically, so every
//! multiplier applied here maps real fields to real fields.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform `n^d` grid on the `2π`-periodic torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "points per axis must be a power of two ≥ 8, got {n}"
            )));
        }
        Ok(Self { dim, n })
    }

    /// Default resolution: 128 points in one dimension, 64 per axis in two.
    pub fn with_default_resolution(dim: usize) -> Result<Self> {
        Self::new(dim, if dim == 1 { 128 } else { 64 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Volume element `h^d` of the grid quadrature.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinates of the node with linear index `idx` (row-major, last axis fastest).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [idx as f64 * h, 0.0],
            _ => [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h],
        }
    }

    /// All node coordinates, each truncated to `dim` components.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| self.point(i)[..self.dim].to_vec())
            .collect()
    }

    /// Signed wave number of FFT bin `j` along one axis; Nyquist maps to `-n/2`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        if j < self.n / 2 {
            j as f64
        } else {
            j as f64 - self.n as f64
        }
    }

    /// Wave vector of the spectral entry with linear index `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.wavenumber(idx), 0.0],
            _ => [self.wavenumber(idx / self.n), self.wavenumber(idx % self.n)],
        }
    }

    /// Linear index of the spectral entry holding wave vector `k`.
    pub fn mode_index(&self, k: &[i64]) -> usize {
        let n = self.n as i64;
        let wrap = |k: i64| k.rem_euclid(n) as usize;
        match self.dim {
            1 => wrap(k[0]),
            _ => wrap(k[0]) * self.n + wrap(k[1]),
        }
    }

    /// Largest Euclidean wave-vector length represented on the grid.
    pub fn max_wavenumber(&self) -> f64 {
        0.5 * self.n as f64 * (self.dim as f64).sqrt()
    }

    /// Builds the multiplier `g(k)` over all spectral entries. Along an axis
    /// sitting on the Nyquist bin the two admissible wave numbers `±n/2` are
    /// averaged, which keeps Hermitian symmetry for any `g` satisfying
    /// `g(-k) = conj(g(k))`.
    pub fn multiplier<G: Fn(&[f64]) -> Complex64>(&self, g: G) -> Vec<Complex64> {
        let half = (self.n / 2) as f64;
        (0..self.len())
            .map(|idx| {
                let k = self.wavevector(idx);
                let nyq: Vec<bool> = (0..self.dim).map(|i| k[i] == -half).collect();
                if !nyq.iter().any(|&b| b) {
                    return g(&k[..self.dim]);
                }
                let mut acc = Complex64::new(0.0, 0.0);
                let mut count = 0.0;
                let variants = 1usize << self.dim;
                for mask in 0..variants {
                    let mut kv = k;
                    let mut skip = false;
                    for i in 0..self.dim {
                        if mask & (1 << i) != 0 {
                            if nyq[i] {
                                kv[i] = half;
                            } else {
                                skip = true;
                            }
                        }
                    }
                    if !skip {
                        acc += g(&kv[..self.dim]);
                        count += 1.0;
                    }
                }
                acc / count
            })
            .collect()
    }

    fn fft_pair(&self) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let mut planner = FftPlanner::new();
        (planner.plan_fft_forward(self.n), planner.plan_fft_inverse(self.n))
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let (fwd, inv) = self.fft_pair();
        let plan = if forward { fwd } else { inv };
        match self.dim {
            1 => plan.process(data),
            _ => {
                let n = self.n;
                // rows (last axis contiguous)
                plan.process(data);
                // columns
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for c in 0..n {
                    for r in 0..n {
                        col[r] = data[r * n + c];
                    }
                    plan.process(&mut col);
                    for r in 0..n {
                        data[r * n + c] = col[r];
                    }
                }
            }
        }
        if forward {
            let scale = 1.0 / self.len() as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }

    pub(crate) fn forward(&self, nodal: &[Complex64]) -> Vec<Complex64> {
        let mut data = nodal.to_vec();
        self.transform(&mut data, true);
        data
    }

    pub(crate) fn inverse(&self, spectral: &[Complex64]) -> Vec<Complex64> {
        let mut data = spectral.to_vec();
        self.transform(&mut data, false);
        data
    }
}

/// A field on a [`TorusGrid`] with both representations populated.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    nodal: Vec<Complex64>,
    spectral: Vec<Complex64>,
}

impl GridFunction {
    /// Builds a grid function from nodal samples and computes its spectrum.
    pub fn from_nodal(grid: TorusGrid, nodal: Vec<Complex64>) -> Result<Self> {
        if nodal.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                nodal.len()
            )));
        }
        let spectral = grid.forward(&nodal);
        Ok(Self {
            grid,
            nodal,
            spectral,
        })
    }

    pub fn from_real(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        Self::from_nodal(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples `f` at every grid node.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: TorusGrid, f: F) -> Self {
        let vals: Vec<Complex64> = (0..grid.len())
            .map(|i| Complex64::new(f(&grid.point(i)[..grid.dim()]), 0.0))
            .collect();
        Self::from_nodal(grid, vals).expect("length matches grid")
    }

    pub fn from_complex_fn<F: Fn(&[f64]) -> Complex64>(grid: TorusGrid, f: F) -> Self {
        let vals: Vec<Complex64> = (0..grid.len())
            .map(|i| f(&grid.point(i)[..grid.dim()]))
            .collect();
        Self::from_nodal(grid, vals).expect("length matches grid")
    }

    /// Builds a grid function from Fourier coefficients.
    pub fn from_spectral(grid: TorusGrid, spectral: Vec<Complex64>) -> Result<Self> {
        if spectral.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} spectral values, got {}",
                grid.len(),
                spectral.len()
            )));
        }
        let nodal = grid.inverse(&spectral);
        Ok(Self {
            grid,
            nodal,
            spectral,
        })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        let mut spectral = vec![Complex64::new(0.0, 0.0); grid.len()];
        spectral[0] = Complex64::new(c, 0.0);
        Self {
            grid,
            nodal: vec![Complex64::new(c, 0.0); grid.len()],
            spectral,
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Plane wave `e^{i k·x}`.
    pub fn plane_wave(grid: TorusGrid, k: &[i64]) -> Self {
        let mut spectral = vec![Complex64::new(0.0, 0.0); grid.len()];
        spectral[grid.mode_index(k)] = Complex64::new(1.0, 0.0);
        Self::from_spectral(grid, spectral).expect("length matches grid")
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn nodal(&self) -> &[Complex64] {
        &self.nodal
    }

    pub fn spectral(&self) -> &[Complex64] {
        &self.spectral
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.nodal.iter().map(|z| z.re).collect()
    }

    /// Fourier coefficient of wave vector `k`.
    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.spectral[self.grid.mode_index(k)]
    }

    /// Evaluates the trigonometric interpolant at an arbitrary point.
    pub fn eval_at(&self, x: &[f64]) -> Complex64 {
        self.spectral
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(idx, c)| {
                let k = self.grid.wavevector(idx);
                let phase: f64 = (0..self.grid.dim()).map(|i| k[i] * x[i]).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Applies a spectral multiplier (already laid out by [`TorusGrid::multiplier`]).
    pub fn apply_multiplier(&self, mult: &[Complex64]) -> GridFunction {
        let spectral: Vec<Complex64> = self
            .spectral
            .iter()
            .zip(mult)
            .map(|(c, m)| c * m)
            .collect();
        GridFunction::from_spectral(self.grid, spectral).expect("same grid")
    }

    /// `g(x) = f(x + y)` for arbitrary real `y`, by spectral phase shift.
    pub fn translate(&self, y: &[f64]) -> GridFunction {
        let d = self.grid.dim();
        // Integer wave numbers make the shift 2π-periodic in each component.
        let y: Vec<f64> = y[..d].iter().map(|v| v.rem_euclid(2.0 * PI)).collect();
        let mult = self.grid.multiplier(|k| {
            let phase: f64 = k.iter().zip(&y).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, phase)
        });
        self.apply_multiplier(&mult)
    }

    /// Spectral partial derivative along axis `axis`.
    pub fn partial(&self, axis: usize) -> GridFunction {
        let mult = self.grid.multiplier(|k| Complex64::new(0.0, k[axis]));
        self.apply_multiplier(&mult)
    }

    /// Spectral gradient; component `j` carries the multiplier `i k_j`.
    pub fn gradient(&self) -> Vec<GridFunction> {
        (0..self.grid.dim()).map(|j| self.partial(j)).collect()
    }

    /// Second directional derivative `θᵀ (∇²f) θ`.
    pub fn directional_second(&self, theta: &[f64]) -> GridFunction {
        let mult = self.grid.multiplier(|k| {
            let s: f64 = k.iter().zip(theta).map(|(a, b)| a * b).sum();
            Complex64::new(-s * s, 0.0)
        });
        self.apply_multiplier(&mult)
    }

    pub fn mean(&self) -> Complex64 {
        self.spectral[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.nodal.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|k|` whose coefficient exceeds `tol` relative to the largest one.
    pub fn bandwidth(&self, tol: f64) -> f64 {
        let cmax = self.spectral.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if cmax == 0.0 {
            return 0.0;
        }
        self.spectral
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol * cmax)
            .map(|(idx, _)| {
                let k = self.grid.wavevector(idx);
                (k[0] * k[0] + k[1] * k[1]).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn map_nodal<F: Fn(usize, Complex64) -> Complex64>(&self, f: F) -> GridFunction {
        let vals = self.nodal.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        GridFunction::from_nodal(self.grid, vals).expect("same grid")
    }

    /// Pointwise product with a real field given by nodal values.
    pub fn scale_pointwise(&self, weights: &[f64]) -> GridFunction {
        self.map_nodal(|i, v| v * weights[i])
    }

    pub fn scale(&self, s: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            nodal: self.nodal.iter().map(|v| v * s).collect(),
            spectral: self.spectral.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s·other`, combining both representations linearly.
    pub fn axpy(&self, s: f64, other: &GridFunction) -> GridFunction {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        GridFunction {
            grid: self.grid,
            nodal: self.nodal.iter().zip(&other.nodal).map(|(a, b)| a + b * s).collect(),
            spectral: self
                .spectral
                .iter()
                .zip(&other.spectral)
                .map(|(a, b)| a + b * s)
                .collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.axpy(-1.0, other)
    }

    /// Drops imaginary parts of the nodal values.
    pub fn real_part(&self) -> GridFunction {
        self.map_nodal(|_, v| Complex64::new(v.re, 0.0))
    }

    pub fn max_imag(&self) -> f64 {
        self.nodal.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Maximum nodal distance to another grid function.
    pub fn max_diff(&self, other: &GridFunction) -> f64 {
        self.nodal
            .iter()
            .zip(&other.nodal)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
