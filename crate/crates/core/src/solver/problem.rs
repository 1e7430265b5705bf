//! The linear Cauchy problem `∂_t u = L^{a(t)ν} u + b^(α)·∇u + f, u(0) = φ`
//! and its standing hypotheses.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::{GridFunction, TorusGrid};
use crate::measure::{check_nondegenerate, BoundedLevyMeasure};
use crate::operator::{estimate_dini, kernel_odd_part, log_radii, KernelCoefficient, QuadratureScheme};
use crate::{Error, Result};

type DriftFn = Arc<dyn Fn(f64, &[f64]) -> [f64; 2] + Send + Sync>;
type ForcingFn = Arc<dyn Fn(f64) -> GridFunction + Send + Sync>;

#[derive(Clone)]
enum DriftShape {
    Zero,
    Constant([f64; 2]),
    Cosine(f64),
    Custom(DriftFn),
}

/// First-order coefficient `b(t, x)` with declared `sup |b|` and Lipschitz
/// constant; the latter defines the modulus `ω_b(r) = L·r`.
#[derive(Clone)]
pub struct Drift {
    shape: DriftShape,
    sup: f64,
    lipschitz: f64,
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.shape {
            DriftShape::Zero => "Zero".to_string(),
            DriftShape::Constant(v) => format!("Constant({v:?})"),
            DriftShape::Cosine(a) => format!("Cosine({a})"),
            DriftShape::Custom(_) => "Custom".to_string(),
        };
        write!(f, "{name} (sup {}, Lipschitz {})", self.sup, self.lipschitz)
    }
}

impl Drift {
    pub fn zero() -> Self {
        Self { shape: DriftShape::Zero, sup: 0.0, lipschitz: 0.0 }
    }

    pub fn constant(v: [f64; 2]) -> Self {
        Self {
            shape: DriftShape::Constant(v),
            sup: v[0].hypot(v[1]),
            lipschitz: 0.0,
        }
    }

    /// `b(x) = amp·cos(x₁) e₁`.
    pub fn cosine(amp: f64) -> Self {
        Self {
            shape: DriftShape::Cosine(amp),
            sup: amp.abs(),
            lipschitz: amp.abs(),
        }
    }

    pub fn custom<F>(f: F, sup: f64, lipschitz: f64) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> [f64; 2] + Send + Sync + 'static,
    {
        if !(sup >= 0.0 && sup.is_finite() && lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::Config(format!(
                "drift bounds must be finite and non-negative, got sup {sup}, Lipschitz {lipschitz}"
            )));
        }
        Ok(Self { shape: DriftShape::Custom(Arc::new(f)), sup, lipschitz })
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> [f64; 2] {
        match &self.shape {
            DriftShape::Zero => [0.0; 2],
            DriftShape::Constant(v) => *v,
            DriftShape::Cosine(a) => [a * x[0].cos(), 0.0],
            DriftShape::Custom(f) => f(t, x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, DriftShape::Zero)
    }

    /// `Some(b)` when the drift is constant in `(t, x)`.
    pub fn as_constant(&self) -> Option<[f64; 2]> {
        match &self.shape {
            DriftShape::Zero => Some([0.0; 2]),
            DriftShape::Constant(v) => Some(*v),
            _ => None,
        }
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Component `i` of `b(t, ·)` on the grid.
    pub fn component(&self, grid: TorusGrid, t: f64, i: usize) -> GridFunction {
        let d = grid.dim();
        GridFunction::from_fn(grid, |x| self.eval(t, &x[..d])[i])
    }

    /// `b(t, ·)·∇u`.
    pub fn transport(&self, t: f64, u: &GridFunction) -> GridFunction {
        let grid = u.grid();
        if self.is_zero() {
            return GridFunction::zeros(grid);
        }
        let d = grid.dim();
        let grads = u.gradient();
        let b: Vec<[f64; 2]> = (0..grid.len()).map(|i| self.eval(t, &grid.point(i)[..d])).collect();
        let mut out = GridFunction::zeros(grid);
        for (axis, g) in grads.iter().enumerate() {
            let w: Vec<f64> = b.iter().map(|v| v[axis]).collect();
            out = out.add(&g.scale_pointwise(&w));
        }
        out
    }
}

/// Source term `f(t, ·)`.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    /// Time-independent field.
    Steady(GridFunction),
    Field(ForcingFn),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Steady(_) => write!(f, "Steady"),
            Forcing::Field(_) => write!(f, "Field"),
        }
    }
}

impl Forcing {
    pub fn field<F: Fn(f64) -> GridFunction + Send + Sync + 'static>(f: F) -> Self {
        Forcing::Field(Arc::new(f))
    }

    pub fn eval(&self, t: f64, grid: TorusGrid) -> GridFunction {
        match self {
            Forcing::Zero => GridFunction::zeros(grid),
            Forcing::Steady(g) => g.clone(),
            Forcing::Field(f) => f(t),
        }
    }

    pub fn is_steady(&self) -> bool {
        !matches!(self, Forcing::Field(_))
    }
}

/// One hypothesis check with its numeric margin (non-negative when it holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

impl HypothesisCheck {
    fn new(name: &str, margin: f64, detail: String) -> Self {
        Self { name: name.into(), passed: margin >= 0.0, margin, detail }
    }
}

/// Margin kept around the excluded exponent `p = α/(α−1)`.
pub const EXPONENT_MARGIN: f64 = 1e-3;

/// The Cauchy problem on the torus.
#[derive(Clone)]
pub struct Problem {
    pub nu: BoundedLevyMeasure,
    pub coeff: KernelCoefficient,
    /// Effective drift `b^(α) = 1_{α≥1} b`.
    pub drift: Drift,
    pub forcing: Forcing,
    pub phi: GridFunction,
    pub horizon: f64,
    pub p: f64,
    pub scheme: QuadratureScheme,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("alpha", &self.alpha())
            .field("coeff", &self.coeff)
            .field("drift", &self.drift)
            .field("forcing", &self.forcing)
            .field("horizon", &self.horizon)
            .field("p", &self.p)
            .finish()
    }
}

impl Problem {
    /// Builds the problem and runs [`Problem::hypothesis_report`]; any failed
    /// check is a hypothesis error naming it.
    pub fn new(
        nu: BoundedLevyMeasure,
        coeff: KernelCoefficient,
        drift: Drift,
        forcing: Forcing,
        phi: GridFunction,
        horizon: f64,
        p: f64,
    ) -> Result<Self> {
        let prob = Self::assemble(nu, coeff, drift, forcing, phi, horizon, p)?;
        let failed: Vec<String> = prob
            .hypothesis_report()?
            .into_iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        if !failed.is_empty() {
            return Err(Error::Hypothesis(format!("failed checks: {}", failed.join("; "))));
        }
        Ok(prob)
    }

    /// Builds the problem after structural checks only.
    pub fn assemble(
        nu: BoundedLevyMeasure,
        coeff: KernelCoefficient,
        drift: Drift,
        forcing: Forcing,
        phi: GridFunction,
        horizon: f64,
        p: f64,
    ) -> Result<Self> {
        if nu.dim() != phi.grid().dim() {
            return Err(Error::Config(format!(
                "measure dimension {} does not match grid dimension {}",
                nu.dim(),
                phi.grid().dim()
            )));
        }
        if !(horizon > 0.0 && horizon <= 1.0) {
            return Err(Error::Config(format!("horizon T = {horizon} must lie in (0, 1]")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("p = {p} must exceed 1")));
        }
        if let Forcing::Steady(g) = &forcing {
            if g.grid() != phi.grid() {
                return Err(Error::Config("forcing and initial data live on different grids".into()));
            }
        }
        let drift = if nu.alpha() < 1.0 { Drift::zero() } else { drift };
        Ok(Self {
            nu,
            coeff,
            drift,
            forcing,
            phi,
            horizon,
            p,
            scheme: QuadratureScheme::default(),
        })
    }

    pub fn with_scheme(mut self, scheme: QuadratureScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_phi(mut self, phi: GridFunction) -> Self {
        self.phi = phi;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.nu.alpha()
    }

    pub fn grid(&self) -> TorusGrid {
        self.phi.grid()
    }

    /// Nondegeneracy, density bounds, `α = 1` cancellation, coefficient
    /// bounds and Dini moduli, drift regularity and the exponent exclusion.
    pub fn hypothesis_report(&self) -> Result<Vec<HypothesisCheck>> {
        let alpha = self.alpha();
        let grid = self.grid();
        let d = grid.dim();
        let mut out = Vec::new();

        let (_, min_value) = check_nondegenerate(self.nu.reference().sigma(), alpha, 64)?;
        out.push(HypothesisCheck::new(
            "nondegeneracy",
            min_value - 1e-10,
            format!("min over θ₀ of ∫|θ₀·θ|^α Σ(dθ) = {min_value:.6e}"),
        ));

        out.push(HypothesisCheck::new(
            "density-bounds",
            self.nu.m_lo(),
            format!("m ∈ [{}, {}]", self.nu.m_lo(), self.nu.m_hi()),
        ));

        let times: Vec<f64> = (0..=4).map(|i| self.horizon * i as f64 / 4.0).collect();
        let coeff_times = if self.coeff.dependence().t { &times[..] } else { &times[..1] };
        if alpha == 1.0 {
            let odd = coeff_times
                .iter()
                .map(|&t| kernel_odd_part(&self.nu, &self.coeff, t, grid))
                .fold(0.0, f64::max);
            out.push(HypothesisCheck::new(
                "alpha1-cancellation",
                1e-10 - odd,
                format!("relative odd part of y·a(t,x,y)ν(dy) = {odd:.3e}"),
            ));
        }

        let (a0, a1) = (self.coeff.a0(), self.coeff.a1());
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in coeff_times {
            for i in 0..grid.len() {
                let v = self.coeff.at_origin(t, &grid.point(i)[..d]);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let inside = lo >= a0 - 1e-12 && hi <= a1 + 1e-12;
        out.push(HypothesisCheck::new(
            "coefficient-bounds",
            if inside { lo } else { -1.0 },
            format!("a(t,x,0) ∈ [{lo:.6}, {hi:.6}] against declared [{a0}, {a1}]"),
        ));

        let radii = log_radii(1e-6, 1.0, 49);
        let mut dini: f64 = 0.0;
        for &t in coeff_times {
            let rep = estimate_dini(&self.coeff, grid, &radii, t)?;
            dini = dini.max(rep.dini_integral0 + rep.dini_integral1);
        }
        out.push(HypothesisCheck::new(
            "dini-moduli",
            if dini.is_finite() { 1.0 / (1.0 + dini) } else { -1.0 },
            format!("∫₀¹ (ω⁰ + ω¹)(r)/r dr ≈ {dini:.6e}"),
        ));

        if alpha >= 1.0 && !self.drift.is_zero() {
            let (value, bound) = self.drift_oscillation(&times);
            let margin = if bound > 0.0 { 1.0 - value / bound } else if value == 0.0 { 1.0 } else { -1.0 };
            out.push(HypothesisCheck::new(
                "drift-regularity",
                margin,
                if alpha == 1.0 {
                    format!("sup |b(x)−b(y)|/ω_b(|x−y|) = {:.6}", value / bound.max(1e-300))
                } else {
                    format!("sup |b(x)−b(y)| = {value:.6} against C_b = {bound:.6}")
                },
            ));
        }

        if alpha > 1.0 {
            let excluded = alpha / (alpha - 1.0);
            out.push(HypothesisCheck::new(
                "exponent-exclusion",
                (self.p - excluded).abs() - EXPONENT_MARGIN,
                format!("|p − α/(α−1)| = |{} − {excluded:.6}|", self.p),
            ));
        }
        Ok(out)
    }

    /// For `α = 1`: `(sup |b(x)−b(y)|/(L|x−y|) · L, L)`, i.e. the sampled
    /// ratio against the declared modulus; for `α > 1`: `(sup |b(x)−b(y)|, 2 sup|b|)`.
    fn drift_oscillation(&self, times: &[f64]) -> (f64, f64) {
        let grid = self.grid();
        let d = grid.dim();
        let stride = grid.len().div_ceil(128).max(1);
        let pts: Vec<[f64; 2]> = (0..grid.len()).step_by(stride).map(|i| grid.point(i)).collect();
        let alpha = self.alpha();
        let mut worst: f64 = 0.0;
        for &t in times {
            let vals: Vec<[f64; 2]> = pts.iter().map(|x| self.drift.eval(t, &x[..d])).collect();
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    let diff = (vals[i][0] - vals[j][0]).hypot(vals[i][1] - vals[j][1]);
                    if alpha == 1.0 {
                        let mut r2 = 0.0;
                        for a in 0..d {
                            let mut dx = (pts[i][a] - pts[j][a]).abs();
                            dx = dx.min(2.0 * std::f64::consts::PI - dx);
                            r2 += dx * dx;
                        }
                        worst = worst.max(diff / r2.sqrt());
                    } else {
                        worst = worst.max(diff);
                    }
                }
            }
        }
        if alpha == 1.0 {
            (worst, self.drift.lipschitz() * (1.0 + 1e-9))
        } else {
            (worst, 2.0 * self.drift.sup() * (1.0 + 1e-9))
        }
    }
}
