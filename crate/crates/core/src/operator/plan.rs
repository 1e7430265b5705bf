//! Tabulated quadrature for `∫ J_f(x, y) w(x, y) ν(dy)`.
//!
//! Each atom `θ_j` of the spherical measure contributes a sum of terms
//! `field_q(x) · F^{-1}[mult_q(k) f̂(k)](x)`, one per radial quadrature
//! node plus an inner (Taylor) and an outer (closed-form tail) term. When
//! the weight does not depend on `x` every term collapses into a single
//! Fourier symbol.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::far_field::compensated_tail;
use crate::grid::{GridFunction, TorusGrid};
use crate::measure::BoundedLevyMeasure;
use crate::quad::{expm1_compensated, gauss_legendre_on};
use crate::{Error, Result};

/// Discretisation knobs for the `dy` integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureScheme {
    /// Inner radius; defaults to `h/32`.
    pub r_min: Option<f64>,
    /// Outer radius; defaults to the measure's `R_max`.
    pub r_max: Option<f64>,
    pub nodes_per_decade: usize,
    pub gauss_points: usize,
    pub taylor_inner: bool,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            r_min: None,
            r_max: None,
            nodes_per_decade: 12,
            gauss_points: 4,
            taylor_inner: true,
        }
    }
}

impl QuadratureScheme {
    /// Resolved `(r_min, r_max, ratio)`.
    pub fn resolve(&self, grid: TorusGrid, nu: &BoundedLevyMeasure) -> Result<(f64, f64, f64)> {
        let h = grid.spacing();
        let r_min = self.r_min.unwrap_or(h / 32.0);
        let r_max = self.r_max.unwrap_or(nu.r_max());
        if !(r_min > 0.0 && r_min <= h) {
            return Err(Error::Config(format!(
                "r_min = {r_min} must lie in (0, h = {h}]"
            )));
        }
        if !(r_max > r_min.max(1.0)) {
            return Err(Error::Config(format!("R_max = {r_max} must exceed max(r_min, 1)")));
        }
        let ratio = 10f64.powf(1.0 / self.nodes_per_decade as f64);
        if !(ratio > 1.0 && ratio <= 1.25) {
            return Err(Error::Config(format!(
                "{} nodes per decade gives geometric ratio {ratio:.4} outside (1, 1.25]",
                self.nodes_per_decade
            )));
        }
        if self.gauss_points == 0 {
            return Err(Error::Config("gauss_points must be positive".into()));
        }
        if self.taylor_inner && nu.alpha() >= 2.0 - 1e-6 {
            return Err(Error::Argument(format!(
                "inner Taylor correction needs α < 2 − 1e-6, got {}",
                nu.alpha()
            )));
        }
        Ok((r_min, r_max, ratio))
    }
}

type XYFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type YFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Weight `w(x, y)` multiplying `ν(dy)`.
#[derive(Clone)]
pub enum Weight {
    Constant(f64),
    /// Depends on `y` only.
    Radial(YFn),
    /// Depends on both `x` and `y`.
    Full(XYFn),
}

impl Weight {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Radial(f) => f(y),
            Weight::Full(f) => f(x, y),
        }
    }

    fn x_dependent(&self) -> bool {
        matches!(self, Weight::Full(_))
    }
}

/// Radial extent of the integral: `lo = None` starts at the origin (with
/// the inner Taylor term), `hi = None` runs to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Window {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TermKind {
    Inner { r: f64 },
    Node { r: f64, compensate: bool },
    Far { r: f64 },
}

#[derive(Debug, Clone)]
struct Term {
    atom: usize,
    kind: TermKind,
    scale: f64,
    /// Radius at which the weight is sampled.
    y_radius: f64,
    /// Index into the far-multiplier table.
    far_slot: Option<usize>,
}

/// Operator value with truncation metadata.
#[derive(Debug, Clone)]
pub struct OperatorEvaluation {
    pub value: GridFunction,
    /// `2‖f‖_∞ sup|w| ν(B_{R_max}^c)`.
    pub tail_bound: f64,
    /// Whether the tail beyond the last radial node was added in closed form.
    pub far_field_exact: bool,
}

const TABLE_LIMIT: usize = 4_000_000;
const CHUNK: usize = 32;

/// Precomputed quadrature for one `(ν, w, window)` on one grid.
#[derive(Clone)]
pub struct OperatorPlan {
    grid: TorusGrid,
    alpha: f64,
    dirs: Vec<[f64; 2]>,
    weight: Weight,
    terms: Vec<Term>,
    /// Per spectral index, the span of wave-vector variants in `variants`.
    spans: Vec<(u32, u8)>,
    variants: Vec<[f64; 2]>,
    far_mult: Vec<Vec<Complex64>>,
    symbol: Option<Vec<Complex64>>,
    fields: Option<Vec<Vec<f64>>>,
    tail_factor: f64,
    far_field_exact: bool,
    r_star: Option<f64>,
}

impl std::fmt::Debug for OperatorPlan {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("OperatorPlan")
            .field("alpha", &self.alpha)
            .field("terms", &self.terms.len())
            .field("far_field_exact", &self.far_field_exact)
            .field("r_star", &self.r_star)
            .finish()
    }
}

fn wave_variants(grid: TorusGrid) -> (Vec<(u32, u8)>, Vec<[f64; 2]>) {
    let half = (grid.points_per_axis() / 2) as f64;
    let dim = grid.dim();
    let mut spans = Vec::with_capacity(grid.len());
    let mut variants = Vec::new();
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        let start = variants.len() as u32;
        let nyq: Vec<bool> = (0..dim).map(|i| k[i] == -half).collect();
        for mask in 0..(1usize << dim) {
            let mut kv = k;
            let mut ok = true;
            for i in 0..dim {
                if mask & (1 << i) != 0 {
                    if nyq[i] {
                        kv[i] = half;
                    } else {
                        ok = false;
                    }
                }
            }
            if ok {
                variants.push(kv);
            }
        }
        spans.push((start, (variants.len() as u32 - start) as u8));
    }
    (spans, variants)
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().is_none_or(|&l| (x - l).abs() > 1e-12 * x.abs().max(1e-300)) {
            out.push(x);
        }
    }
    out
}

impl OperatorPlan {
    pub fn build(
        nu: &BoundedLevyMeasure,
        grid: TorusGrid,
        scheme: &QuadratureScheme,
        weight: Weight,
        window: Window,
    ) -> Result<Self> {
        if nu.dim() != grid.dim() {
            return Err(Error::Config(format!(
                "measure dimension {} does not match grid dimension {}",
                nu.dim(),
                grid.dim()
            )));
        }
        let (r_min, r_max, ratio) = scheme.resolve(grid, nu)?;
        let alpha = nu.alpha();
        let dim = grid.dim();
        let dirs: Vec<[f64; 2]> = nu.atoms().iter().map(|a| a.dir).collect();

        let lo = window.lo.map_or(r_min, |l| l.max(r_min));
        let (hi, r_star) = match window.hi {
            Some(h) => (h.min(r_max), None),
            None => match detect_radial_constancy(nu, grid, &weight, r_max) {
                Some(rs) => (rs, Some(rs)),
                None => (r_max, None),
            },
        };

        let mut terms = Vec::new();
        for (j, atom) in nu.atoms().iter().enumerate() {
            let theta = atom.dir_slice(dim);
            if window.lo.is_none() && scheme.taylor_inner {
                terms.push(Term {
                    atom: j,
                    kind: TermKind::Inner { r: r_min },
                    scale: atom.weight * nu.density().eval(0.0, theta),
                    y_radius: 0.0,
                    far_slot: None,
                });
            }
            if hi > lo {
                let mut bps: Vec<f64> = Vec::new();
                let mut r = r_min;
                while r < hi {
                    if r > lo {
                        bps.push(r);
                    }
                    r *= ratio;
                }
                bps.push(lo);
                bps.push(hi);
                for b in nu.density().breakpoints().into_iter().chain([1.0]) {
                    if b > lo && b < hi {
                        bps.push(b);
                    }
                }
                let bps = dedup_sorted(bps);
                let band = grid.max_wavenumber();
                let cap = 2.0 / band;
                for w in bps.windows(2) {
                    let pieces = ((w[1] - w[0]) / cap).ceil().max(1.0) as usize;
                    let width = (w[1] - w[0]) / pieces as f64;
                    for p in 0..pieces {
                        let a = w[0] + p as f64 * width;
                        for (rn, gw) in gauss_legendre_on(scheme.gauss_points, a, a + width) {
                            let compensate = alpha > 1.0 || (alpha == 1.0 && rn <= 1.0);
                            terms.push(Term {
                                atom: j,
                                kind: TermKind::Node { r: rn, compensate },
                                scale: gw * rn.powf(-1.0 - alpha) * atom.weight * nu.m(rn, j),
                                y_radius: rn,
                                far_slot: None,
                            });
                        }
                    }
                }
            }
            if let Some(rs) = r_star {
                terms.push(Term {
                    atom: j,
                    kind: TermKind::Far { r: rs },
                    scale: atom.weight * nu.m(rs, j),
                    y_radius: rs,
                    far_slot: Some(j),
                });
            }
        }

        let (spans, variants) = wave_variants(grid);
        let far_mult: Vec<Vec<Complex64>> = match r_star {
            Some(rs) => dirs
                .par_iter()
                .map(|d| {
                    (0..grid.len())
                        .map(|idx| {
                            let (start, len) = spans[idx];
                            let mut acc = Complex64::new(0.0, 0.0);
                            for kv in &variants[start as usize..start as usize + len as usize] {
                                let s = kv[0] * d[0] + kv[1] * d[1];
                                acc += compensated_tail(s, alpha, rs, alpha > 1.0)?;
                            }
                            Ok(acc / len as f64)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };

        let sup_w = sample_sup_abs(nu, grid, &weight, r_max);
        let tail_factor = 2.0 * sup_w * nu.tail_mass(r_max)?.remainder;

        let mut plan = Self {
            grid,
            alpha,
            dirs,
            weight,
            terms,
            spans,
            variants,
            far_mult,
            symbol: None,
            fields: None,
            tail_factor,
            far_field_exact: r_star.is_some(),
            r_star,
        };
        if plan.weight.x_dependent() {
            if plan.terms.len() * grid.len() <= TABLE_LIMIT {
                plan.fields = Some(plan.terms.par_iter().map(|t| plan.field(t)).collect());
            }
        } else {
            plan.symbol = Some(plan.assemble_symbol());
        }
        Ok(plan)
    }

    /// Plan for a kernel coefficient frozen at time `t`.
    pub fn for_coefficient(
        nu: &BoundedLevyMeasure,
        grid: TorusGrid,
        scheme: &QuadratureScheme,
        coeff: &super::KernelCoefficient,
        t: f64,
    ) -> Result<Self> {
        Self::build(nu, grid, scheme, weight_of(coeff, t), Window::default())
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn far_field_exact(&self) -> bool {
        self.far_field_exact
    }

    /// Radius beyond which the weighted density was found radially constant.
    pub fn far_field_radius(&self) -> Option<f64> {
        self.r_star
    }

    /// Fourier symbol when the weight does not depend on `x`.
    pub fn symbol(&self) -> Option<&[Complex64]> {
        self.symbol.as_deref()
    }

    fn multiplier(&self, term: &Term, idx: usize) -> Complex64 {
        if let Some(slot) = term.far_slot {
            return self.far_mult[slot][idx];
        }
        let d = self.dirs[term.atom];
        let (start, len) = self.spans[idx];
        let mut acc = Complex64::new(0.0, 0.0);
        for kv in &self.variants[start as usize..start as usize + len as usize] {
            let s = kv[0] * d[0] + kv[1] * d[1];
            acc += match term.kind {
                TermKind::Inner { r } => {
                    let a = self.alpha;
                    let mut v = Complex64::new(-0.5 * s * s * r.powf(2.0 - a) / (2.0 - a), 0.0);
                    if a < 1.0 {
                        v.im += s * r.powf(1.0 - a) / (1.0 - a);
                    }
                    v
                }
                TermKind::Node { r, compensate } => expm1_compensated(s * r, compensate),
                TermKind::Far { .. } => unreachable!("far terms use the table"),
            };
        }
        acc / len as f64
    }

    fn field(&self, term: &Term) -> Vec<f64> {
        let dim = self.grid.dim();
        let d = self.dirs[term.atom];
        let y = [term.y_radius * d[0], term.y_radius * d[1]];
        (0..self.grid.len())
            .map(|i| {
                let x = self.grid.point(i);
                term.scale * self.weight.eval(&x[..dim], &y[..dim])
            })
            .collect()
    }

    fn assemble_symbol(&self) -> Vec<Complex64> {
        let dim = self.grid.dim();
        let x0 = [0.0; 2];
        let scalars: Vec<f64> = self
            .terms
            .iter()
            .map(|t| {
                let d = self.dirs[t.atom];
                let y = [t.y_radius * d[0], t.y_radius * d[1]];
                t.scale * self.weight.eval(&x0[..dim], &y[..dim])
            })
            .collect();
        (0..self.grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, c) in self.terms.iter().zip(&scalars) {
                    if *c != 0.0 {
                        acc += self.multiplier(t, idx) * *c;
                    }
                }
                acc
            })
            .collect()
    }

    /// `∫ J_f(x, y) w(x, y) ν(dy)` on the grid.
    pub fn apply(&self, f: &GridFunction) -> Result<OperatorEvaluation> {
        if f.grid() != self.grid {
            return Err(Error::Config("grid function and operator plan use different grids".into()));
        }
        let value = match &self.symbol {
            Some(sym) => f.apply_multiplier(sym),
            None => self.apply_general(f),
        };
        Ok(OperatorEvaluation {
            value,
            tail_bound: self.tail_factor * f.max_abs(),
            far_field_exact: self.far_field_exact,
        })
    }

    fn apply_general(&self, f: &GridFunction) -> GridFunction {
        let n = self.grid.len();
        let fhat = f.spectral();
        let partials: Vec<Vec<Complex64>> = self
            .terms
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                let mut spec = vec![Complex64::new(0.0, 0.0); n];
                for (off, term) in chunk.iter().enumerate() {
                    let q = c * CHUNK + off;
                    let owned;
                    let field: &[f64] = match &self.fields {
                        Some(tab) => &tab[q],
                        None => {
                            owned = self.field(term);
                            &owned
                        }
                    };
                    if field.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    for (idx, s) in spec.iter_mut().enumerate() {
                        *s = fhat[idx] * self.multiplier(term, idx);
                    }
                    let nodal = self.grid.inverse(&spec);
                    for ((a, v), w) in acc.iter_mut().zip(&nodal).zip(field) {
                        *a += v * *w;
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![Complex64::new(0.0, 0.0); n];
        for part in &partials {
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
        }
        GridFunction::from_nodal(self.grid, total).expect("plan grid")
    }
}

/// Weight `a(t, ·, ·)` with the cheapest representation its dependence allows.
pub fn weight_of(coeff: &super::KernelCoefficient, t: f64) -> Weight {
    if let Some(c) = coeff.as_constant() {
        return Weight::Constant(c);
    }
    let dep = coeff.dependence();
    let c = coeff.clone();
    if !dep.x {
        let x0 = [0.0; 2];
        Weight::Radial(Arc::new(move |y: &[f64]| c.eval(t, &x0[..y.len()], y)))
    } else {
        Weight::Full(Arc::new(move |x: &[f64], y: &[f64]| c.eval(t, x, y)))
    }
}

fn x_samples(grid: TorusGrid, weight: &Weight) -> Vec<[f64; 2]> {
    if !weight.x_dependent() {
        return vec![[0.0; 2]];
    }
    let stride = grid.len().div_ceil(256).max(1);
    (0..grid.len()).step_by(stride).map(|i| grid.point(i)).collect()
}

/// Smallest candidate radius `R* ≥ 1` beyond which `w(x, rθ_j) m(r, θ_j)`
/// is constant in `r` on every sampled `x` and atom.
fn detect_radial_constancy(
    nu: &BoundedLevyMeasure,
    grid: TorusGrid,
    weight: &Weight,
    r_max: f64,
) -> Option<f64> {
    let dim = grid.dim();
    let xs = x_samples(grid, weight);
    let candidates = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0];
    let value = |j: usize, x: &[f64; 2], r: f64| -> f64 {
        let d = nu.atoms()[j].dir;
        let y = [r * d[0], r * d[1]];
        weight.eval(&x[..dim], &y[..dim]) * nu.m(r, j)
    };
    'cand: for &c in candidates.iter().filter(|&&c| c < r_max) {
        for j in 0..nu.atoms().len() {
            for x in &xs {
                let reference = value(j, x, r_max);
                for i in 0..=24 {
                    let r = c * (r_max / c).powf(i as f64 / 24.0);
                    let v = value(j, x, r);
                    if (v - reference).abs() > 1e-13 * reference.abs().max(1e-300) {
                        continue 'cand;
                    }
                }
            }
        }
        return Some(c);
    }
    None
}

fn sample_sup_abs(nu: &BoundedLevyMeasure, grid: TorusGrid, weight: &Weight, r_max: f64) -> f64 {
    let dim = grid.dim();
    let mut sup: f64 = 0.0;
    for x in x_samples(grid, weight) {
        for a in nu.atoms() {
            for &r in &[r_max, 2.0 * r_max, 8.0 * r_max] {
                let y = [r * a.dir[0], r * a.dir[1]];
                sup = sup.max(weight.eval(&x[..dim], &y[..dim]).abs());
            }
        }
    }
    sup
}
