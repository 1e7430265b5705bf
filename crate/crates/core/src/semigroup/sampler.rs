//! Compound-Poisson sampling of the Lévy process `X_t` driven by the
//! random measure with intensity `λ(t) dt ν(dy)` and drift `ϑ(t)`.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};

use crate::ensemble::member_rng;
use crate::grid::TorusGrid;
use crate::measure::BoundedLevyMeasure;
use crate::quad::gauss_legendre_on;
use crate::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

const INTENSITY_SAMPLES: usize = 256;

/// Sampler settings: small-jump cutoff, path count, seed, intensity `λ(t)`
/// with its declared floor `λ₀`, and drift `ϑ(t)`.
#[derive(Clone)]
pub struct SamplerConfig {
    pub r_cut: f64,
    pub gaussian_correction: bool,
    pub n_paths: usize,
    pub seed: u64,
    lambda: ScalarFn,
    lambda0: f64,
    vartheta: VectorFn,
}

impl std::fmt::Debug for SamplerConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SamplerConfig")
            .field("r_cut", &self.r_cut)
            .field("gaussian_correction", &self.gaussian_correction)
            .field("n_paths", &self.n_paths)
            .field("seed", &self.seed)
            .field("lambda0", &self.lambda0)
            .finish()
    }
}

impl SamplerConfig {
    /// `λ ≡ 1`, `ϑ ≡ 0`, Gaussian small-jump correction on.
    pub fn new(r_cut: f64, n_paths: usize, seed: u64) -> Result<Self> {
        if !(r_cut > 0.0 && r_cut <= 1.0) {
            return Err(Error::Config(format!("r_cut = {r_cut} must lie in (0, 1]")));
        }
        if n_paths < 100 {
            return Err(Error::Config(format!("n_paths = {n_paths} must be at least 100")));
        }
        Ok(Self {
            r_cut,
            gaussian_correction: true,
            n_paths,
            seed,
            lambda: Arc::new(|_| 1.0),
            lambda0: 1.0,
            vartheta: Arc::new(|_| [0.0; 2]),
        })
    }

    /// Defaults for `grid`: `r_cut = h/4` and 10⁴ paths.
    pub fn for_grid(grid: TorusGrid, seed: u64) -> Result<Self> {
        Self::new(grid.spacing() / 4.0, 10_000, seed)
    }

    pub fn with_intensity<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, lambda: F, lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(Error::Config(format!("λ₀ = {lambda0} must be positive")));
        }
        self.lambda = Arc::new(lambda);
        self.lambda0 = lambda0;
        Ok(self)
    }

    pub fn with_drift<F: Fn(f64) -> [f64; 2] + Send + Sync + 'static>(mut self, vartheta: F) -> Self {
        self.vartheta = Arc::new(vartheta);
        self
    }

    pub fn with_gaussian_correction(mut self, on: bool) -> Self {
        self.gaussian_correction = on;
        self
    }

    pub fn with_paths(mut self, n_paths: usize) -> Result<Self> {
        Self::new(self.r_cut, n_paths, self.seed)?;
        self.n_paths = n_paths;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_r_cut(mut self, r_cut: f64) -> Result<Self> {
        Self::new(r_cut, self.n_paths, self.seed)?;
        self.r_cut = r_cut;
        Ok(self)
    }

    pub fn lambda(&self, t: f64) -> f64 {
        (self.lambda)(t)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn vartheta(&self, t: f64) -> [f64; 2] {
        (self.vartheta)(t)
    }

    /// The residual process of the factorisation: intensity `λ(t) − λ₀`
    /// and the same drift. Its floor is zero.
    pub(crate) fn residual(&self) -> Self {
        let lambda = self.lambda.clone();
        let l0 = self.lambda0;
        Self {
            lambda: Arc::new(move |t| lambda(t) - l0),
            lambda0: 0.0,
            ..self.clone()
        }
    }

    /// Same drift, constant intensity `λ₀`.
    pub(crate) fn frozen(&self) -> Self {
        let l0 = self.lambda0;
        Self {
            lambda: Arc::new(move |_| l0),
            ..self.clone()
        }
    }
}

/// One trajectory of `X` at `time_nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyPathSample {
    pub time_nodes: Vec<f64>,
    /// `X` at each node, relative to the first node.
    pub positions: Vec<[f64; 2]>,
    /// Accepted jumps above `r_cut`, in time order.
    pub jump_ledger: Vec<(f64, [f64; 2])>,
    /// Gaussian small-jump increment per interval (zero when the correction is off).
    pub gaussian: Vec<[f64; 2]>,
    /// Total variance of the small jumps that were dropped (correction off).
    pub neglected_variance: f64,
    pub seed_used: u64,
    pub stream: u64,
}

/// Per-unit-intensity quantities of the restricted measure.
#[derive(Debug, Clone)]
pub(crate) struct JumpLaw {
    dim: usize,
    alpha: f64,
    r_cut: f64,
    /// Cumulative atom weights `w_j`, normalised.
    cumulative: Vec<f64>,
    dirs: Vec<[f64; 2]>,
    /// `m_hi Σ_j w_j r_cut^{-α}/α`.
    majorant_rate: f64,
    m_hi: f64,
    /// Subtracted per unit `∫λ`: compensator of the large jumps.
    compensator: [f64; 2],
    /// Added per unit `∫λ`: mean of the small jumps when `α < 1`.
    small_mean: [f64; 2],
    /// `∫_{|y|≤r_cut} y yᵀ ν(dy)`, as `[c11, c12, c22]`.
    covariance: [f64; 3],
}

impl JumpLaw {
    pub(crate) fn new(nu: &BoundedLevyMeasure, r_cut: f64) -> Result<Self> {
        let alpha = nu.alpha();
        let atoms = nu.atoms();
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for a in atoms {
            acc += a.weight / total;
            cumulative.push(acc);
        }
        let mut compensator = [0.0; 2];
        let mut small_mean = [0.0; 2];
        let mut covariance = [0.0; 3];
        let mut scale = 0.0;
        for (j, a) in atoms.iter().enumerate() {
            let th = a.dir;
            let first = if alpha > 1.0 {
                nu.radial_moment(j, -alpha, r_cut, f64::INFINITY)?
            } else if alpha == 1.0 && r_cut < 1.0 {
                nu.radial_moment(j, -1.0, r_cut, 1.0)?
            } else {
                0.0
            };
            scale += a.weight * first.abs();
            let small = if alpha < 1.0 { nu.radial_moment(j, -alpha, 0.0, r_cut)? } else { 0.0 };
            let second = nu.radial_moment(j, 1.0 - alpha, 0.0, r_cut)?;
            for i in 0..2 {
                compensator[i] += a.weight * th[i] * first;
                small_mean[i] += a.weight * th[i] * small;
            }
            covariance[0] += a.weight * second * th[0] * th[0];
            covariance[1] += a.weight * second * th[0] * th[1];
            covariance[2] += a.weight * second * th[1] * th[1];
        }
        if alpha == 1.0 {
            let odd = compensator[0].hypot(compensator[1]);
            if odd > 1e-10 * scale.max(1e-300) {
                return Err(Error::Hypothesis(format!(
                    "α = 1 needs ∫_{{r_cut<|y|≤1}} y ν(dy) = 0; got {compensator:?}"
                )));
            }
        }
        Ok(Self {
            dim: nu.dim(),
            alpha,
            r_cut,
            cumulative,
            dirs: atoms.iter().map(|a| a.dir).collect(),
            majorant_rate: nu.m_hi() * total * r_cut.powf(-alpha) / alpha,
            m_hi: nu.m_hi(),
            compensator,
            small_mean,
            covariance,
        })
    }

    #[cfg(test)]
    fn covariance(&self) -> [f64; 3] {
        self.covariance
    }

    fn pick_atom(&self, u: f64) -> usize {
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

/// `(∫λ, ∫ϑ)` over `[a, b]` by 8-point Gauss–Legendre.
fn interval_integrals(cfg: &SamplerConfig, a: f64, b: f64) -> (f64, [f64; 2]) {
    let mut lam = 0.0;
    let mut drift = [0.0; 2];
    if b > a {
        for (t, w) in gauss_legendre_on(8, a, b) {
            lam += w * cfg.lambda(t);
            let v = cfg.vartheta(t);
            drift[0] += w * v[0];
            drift[1] += w * v[1];
        }
    }
    (lam, drift)
}

/// Deterministic part of the increment over one interval.
fn deterministic_increment(law: &JumpLaw, cfg: &SamplerConfig, a: f64, b: f64) -> [f64; 2] {
    let (lam, drift) = interval_integrals(cfg, a, b);
    let mut out = drift;
    for i in 0..2 {
        out[i] -= lam * law.compensator[i];
        if cfg.gaussian_correction {
            out[i] += lam * law.small_mean[i];
        }
    }
    if law.dim == 1 {
        out[1] = 0.0;
    }
    out
}

fn intensity_majorant(cfg: &SamplerConfig, a: f64, b: f64, floor: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for i in 0..=INTENSITY_SAMPLES {
        let t = a + (b - a) * i as f64 / INTENSITY_SAMPLES as f64;
        let l = cfg.lambda(t);
        if !(l >= floor - 1e-14) || !l.is_finite() {
            return Err(Error::Config(format!("λ({t}) = {l} is below the declared floor λ₀ = {floor}")));
        }
        sup = sup.max(l);
    }
    Ok(sup * (1.0 + 1e-9))
}

fn gaussian_step(rng: &mut ChaCha8Rng, law: &JumpLaw, lam: f64) -> [f64; 2] {
    let [c11, c12, c22] = law.covariance.map(|c| c * lam);
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let l11 = c11.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { c12 / l11 } else { 0.0 };
    let l22 = (c22 - l21 * l21).max(0.0).sqrt();
    if law.dim == 1 {
        [l11 * z1, 0.0]
    } else {
        [l11 * z1, l21 * z1 + l22 * z2]
    }
}

/// Samples path `stream` of the process on `nodes` (strictly increasing).
pub(crate) fn sample_on(
    nu: &BoundedLevyMeasure,
    law: &JumpLaw,
    cfg: &SamplerConfig,
    nodes: &[f64],
    stream: u64,
) -> Result<LevyPathSample> {
    let (t0, t1) = (nodes[0], nodes[nodes.len() - 1]);
    let lam_max = intensity_majorant(cfg, t0, t1, cfg.lambda0)?;
    let mut rng = member_rng(cfg.seed, stream);
    let mut positions = vec![[0.0; 2]];
    let mut ledger = Vec::new();
    let mut gaussian = Vec::new();
    let mut neglected = 0.0;
    let rate = lam_max * law.majorant_rate;
    let exp = if rate > 0.0 { Some(Exp::new(rate).map_err(|e| Error::Numerical(e.to_string()))?) } else { None };
    let mut next = match &exp {
        Some(e) => t0 + rng.sample(e),
        None => f64::INFINITY,
    };
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut x = *positions.last().unwrap();
        let det = deterministic_increment(law, cfg, a, b);
        x[0] += det[0];
        x[1] += det[1];
        while next <= b {
            let clock = next;
            let lam = cfg.lambda(clock);
            if lam > lam_max {
                return Err(Error::Numerical(format!(
                    "λ({clock}) = {lam} exceeds the sampled majorant {lam_max}"
                )));
            }
            let j = law.pick_atom(rng.random::<f64>());
            let u: f64 = 1.0 - rng.random::<f64>();
            let r = law.r_cut * u.powf(-1.0 / law.alpha);
            let accept: f64 = rng.random();
            if accept * lam_max * law.m_hi < lam * nu.m(r, j) {
                let y = [r * law.dirs[j][0], r * law.dirs[j][1]];
                ledger.push((clock, y));
                x[0] += y[0];
                x[1] += y[1];
            }
            next = clock + rng.sample(exp.as_ref().unwrap());
        }
        let (lam_int, _) = interval_integrals(cfg, a, b);
        let g = if cfg.gaussian_correction {
            gaussian_step(&mut rng, law, lam_int)
        } else {
            let c = law.covariance;
            neglected += lam_int * (c[0] + c[2]);
            [0.0; 2]
        };
        x[0] += g[0];
        x[1] += g[1];
        gaussian.push(g);
        positions.push(x);
    }
    Ok(LevyPathSample {
        time_nodes: nodes.to_vec(),
        positions,
        jump_ledger: ledger,
        gaussian,
        neglected_variance: neglected,
        seed_used: cfg.seed,
        stream,
    })
}

fn check_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes[0] < 0.0 {
        return Err(Error::Argument("time nodes must be nonnegative, strictly increasing, at least two".into()));
    }
    Ok(())
}

/// Path 0 of the configured process on `[0, t_end]` at 17 equispaced nodes.
pub fn sample_path(nu: &BoundedLevyMeasure, cfg: &SamplerConfig, t_end: f64) -> Result<LevyPathSample> {
    if !(t_end > 0.0) {
        return Err(Error::Argument(format!("t_end = {t_end} must be positive")));
    }
    let nodes: Vec<f64> = (0..=16).map(|i| t_end * i as f64 / 16.0).collect();
    sample_path_on(nu, cfg, &nodes, 0)
}

/// Path `stream` of the configured process at `nodes`.
pub fn sample_path_on(nu: &BoundedLevyMeasure, cfg: &SamplerConfig, nodes: &[f64], stream: u64) -> Result<LevyPathSample> {
    check_nodes(nodes)?;
    let law = JumpLaw::new(nu, cfg.r_cut)?;
    sample_on(nu, &law, cfg, nodes, stream)
}

impl LevyPathSample {
    /// Rebuilds the positions from the ledger, the Gaussian increments and
    /// the deterministic drift and compensator terms of `cfg`.
    pub fn replay(&self, nu: &BoundedLevyMeasure, cfg: &SamplerConfig) -> Result<Vec<[f64; 2]>> {
        let law = JumpLaw::new(nu, cfg.r_cut)?;
        let mut out = vec![[0.0; 2]];
        let mut k = 0;
        for (i, w) in self.time_nodes.windows(2).enumerate() {
            let mut x = *out.last().unwrap();
            let det = deterministic_increment(&law, cfg, w[0], w[1]);
            x[0] += det[0];
            x[1] += det[1];
            while k < self.jump_ledger.len() && self.jump_ledger[k].0 <= w[1] {
                x[0] += self.jump_ledger[k].1[0];
                x[1] += self.jump_ledger[k].1[1];
                k += 1;
            }
            x[0] += self.gaussian[i][0];
            x[1] += self.gaussian[i][1];
            out.push(x);
        }
        Ok(out)
    }

    /// `X` at the last node.
    pub fn endpoint(&self) -> [f64; 2] {
        *self.positions.last().unwrap()
    }
}
