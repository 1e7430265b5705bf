//! The kernel coefficient `a(t, x, y) ≥ 0` multiplying the Lévy measure.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// `min(|y|^γ, 1)`.
pub fn capped_power(y: &[f64], gamma: f64) -> f64 {
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r >= 1.0 {
        1.0
    } else {
        r.powf(gamma)
    }
}

type CoefficientFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;

/// Which arguments a coefficient actually depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dependence {
    pub t: bool,
    pub x: bool,
    pub y: bool,
}

#[derive(Clone)]
enum Shape {
    Constant(f64),
    Separable { x_amp: f64, y_amp: f64, gamma: f64 },
    Modulated { x_amp: f64, y_amp: f64, gamma: f64 },
    RadialDini { y_amp: f64, gamma: f64 },
    Custom { f: CoefficientFn, dep: Dependence },
    Mollified { base: Box<KernelCoefficient>, kernel: Arc<Vec<([f64; 2], f64)>> },
}

/// `a(t, x, y)` with the bounds `a₀ ≤ a(t, x, 0) ≤ a₁`.
#[derive(Clone)]
pub struct KernelCoefficient {
    shape: Shape,
    a0: f64,
    a1: f64,
}

impl fmt::Debug for KernelCoefficient {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.shape {
            Shape::Constant(c) => format!("Constant({c})"),
            Shape::Separable { x_amp, y_amp, gamma } => {
                format!("Separable {{ x_amp: {x_amp}, y_amp: {y_amp}, gamma: {gamma} }}")
            }
            Shape::Modulated { x_amp, y_amp, gamma } => {
                format!("Modulated {{ x_amp: {x_amp}, y_amp: {y_amp}, gamma: {gamma} }}")
            }
            Shape::RadialDini { y_amp, gamma } => {
                format!("RadialDini {{ y_amp: {y_amp}, gamma: {gamma} }}")
            }
            Shape::Custom { dep, .. } => format!("Custom({dep:?})"),
            Shape::Mollified { base, kernel } => {
                format!("Mollified({base:?}, {} nodes)", kernel.len())
            }
        };
        write!(fm, "{name} on [{}, {}]", self.a0, self.a1)
    }
}

impl KernelCoefficient {
    /// `a ≡ c`.
    pub fn constant(c: f64) -> Result<Self> {
        Self::checked(Shape::Constant(c), c, c)
    }

    /// `(1 + x_amp·sin x₁)(1 + y_amp·min(|y|^γ, 1))`.
    pub fn separable(x_amp: f64, y_amp: f64, gamma: f64) -> Result<Self> {
        Self::checked(
            Shape::Separable { x_amp, y_amp, gamma },
            1.0 - x_amp.abs(),
            1.0 + x_amp.abs(),
        )
    }

    /// `1 + x_amp·sin(x₁)(1 + y_amp·min(|y|^γ, 1))`.
    pub fn modulated(x_amp: f64, y_amp: f64, gamma: f64) -> Result<Self> {
        Self::checked(
            Shape::Modulated { x_amp, y_amp, gamma },
            1.0 - x_amp.abs(),
            1.0 + x_amp.abs(),
        )
    }

    /// `1 + y_amp·min(|y|^γ, 1)`.
    pub fn radial_dini(y_amp: f64, gamma: f64) -> Result<Self> {
        Self::checked(Shape::RadialDini { y_amp, gamma }, 1.0, 1.0)
    }

    /// Arbitrary coefficient with declared bounds on `a(t, x, 0)`.
    pub fn custom<F>(f: F, dep: Dependence, a0: f64, a1: f64) -> Result<Self>
    where
        F: Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::checked(Shape::Custom { f: Arc::new(f), dep }, a0, a1)
    }

    /// `a_ε(t, x, y) = Σ_q w_q a(t, x − z_q, y)` for a normalised discrete kernel.
    pub(crate) fn mollified(base: &KernelCoefficient, kernel: Vec<([f64; 2], f64)>) -> Self {
        Self {
            shape: Shape::Mollified {
                base: Box::new(base.clone()),
                kernel: Arc::new(kernel),
            },
            a0: base.a0,
            a1: base.a1,
        }
    }

    fn checked(shape: Shape, a0: f64, a1: f64) -> Result<Self> {
        if !(a0 > 0.0 && a1 >= a0 && a1.is_finite()) {
            return Err(Error::Hypothesis(format!(
                "coefficient bounds need 0 < a₀ ≤ a₁, got [{a0}, {a1}]"
            )));
        }
        let c = Self { shape, a0, a1 };
        c.validate_samples()?;
        Ok(c)
    }

    /// Samples `a₀ ≤ a(t,x,0) ≤ a₁` and `a ≥ 0` on a fixed lattice in `(t, x, y)`.
    fn validate_samples(&self) -> Result<()> {
        let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
        let radii = [0.0, 1e-3, 0.05, 0.3, 0.7, 1.0, 3.0, 20.0];
        for &t in &ts {
            for i in 0..64 {
                let x1 = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                let x = [x1, 0.37 * x1];
                let at0 = self.eval(t, &x, &[0.0, 0.0]);
                if at0 < self.a0 - 1e-12 || at0 > self.a1 + 1e-12 {
                    return Err(Error::Hypothesis(format!(
                        "a(t={t}, x={x1:.3}, 0) = {at0} leaves [{}, {}]",
                        self.a0, self.a1
                    )));
                }
                for &r in &radii {
                    for dir in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.6, -0.8]] {
                        let y = [r * dir[0], r * dir[1]];
                        let v = self.eval(t, &x, &y);
                        if !(v >= -1e-14) {
                            return Err(Error::Hypothesis(format!(
                                "a(t={t}, x={x1:.3}, y={y:?}) = {v} is negative"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn eval(&self, t: f64, x: &[f64], y: &[f64]) -> f64 {
        match &self.shape {
            Shape::Constant(c) => *c,
            Shape::Separable { x_amp, y_amp, gamma } => {
                (1.0 + x_amp * x[0].sin()) * (1.0 + y_amp * capped_power(y, *gamma))
            }
            Shape::Modulated { x_amp, y_amp, gamma } => {
                1.0 + x_amp * x[0].sin() * (1.0 + y_amp * capped_power(y, *gamma))
            }
            Shape::RadialDini { y_amp, gamma } => 1.0 + y_amp * capped_power(y, *gamma),
            Shape::Custom { f, .. } => f(t, x, y),
            Shape::Mollified { base, kernel } => {
                let mut xs = [0.0; 2];
                let mut acc = 0.0;
                for (z, w) in kernel.iter() {
                    for i in 0..x.len() {
                        xs[i] = x[i] - z[i];
                    }
                    acc += w * base.eval(t, &xs[..x.len()], y);
                }
                acc
            }
        }
    }

    /// `a(t, x, 0)`.
    pub fn at_origin(&self, t: f64, x: &[f64]) -> f64 {
        self.eval(t, x, &[0.0, 0.0][..x.len()])
    }

    pub fn dependence(&self) -> Dependence {
        match &self.shape {
            Shape::Constant(_) => Dependence { t: false, x: false, y: false },
            Shape::Separable { x_amp, y_amp, .. } | Shape::Modulated { x_amp, y_amp, .. } => {
                Dependence {
                    t: false,
                    x: *x_amp != 0.0,
                    y: *y_amp != 0.0 && (*x_amp != 0.0 || matches!(self.shape, Shape::Separable { .. })),
                }
            }
            Shape::RadialDini { y_amp, .. } => Dependence { t: false, x: false, y: *y_amp != 0.0 },
            Shape::Custom { dep, .. } => *dep,
            Shape::Mollified { base, .. } => base.dependence(),
        }
    }

    /// `Some(c)` when `a ≡ c`.
    pub fn as_constant(&self) -> Option<f64> {
        let dep = self.dependence();
        if dep.t || dep.x || dep.y {
            None
        } else {
            Some(self.eval(0.0, &[0.0, 0.0], &[0.0, 0.0]))
        }
    }

    /// `∇_x a(t, x, y)`, analytic for the built-in shapes.
    pub fn grad_x(&self, t: f64, x: &[f64], y: &[f64]) -> [f64; 2] {
        match &self.shape {
            Shape::Constant(_) | Shape::RadialDini { .. } => [0.0, 0.0],
            Shape::Separable { x_amp, y_amp, gamma } | Shape::Modulated { x_amp, y_amp, gamma } => {
                [x_amp * x[0].cos() * (1.0 + y_amp * capped_power(y, *gamma)), 0.0]
            }
            Shape::Custom { .. } | Shape::Mollified { .. } => {
                let h = 1e-5;
                let mut g = [0.0; 2];
                let mut xp = [0.0; 2];
                let mut xm = [0.0; 2];
                for axis in 0..x.len() {
                    xp[..x.len()].copy_from_slice(x);
                    xm[..x.len()].copy_from_slice(x);
                    xp[axis] += h;
                    xm[axis] -= h;
                    g[axis] = (self.eval(t, &xp[..x.len()], y) - self.eval(t, &xm[..x.len()], y))
                        / (2.0 * h);
                }
                g
            }
        }
    }

    /// Radii where `a(t, x, ·)` may fail to be smooth.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Separable { .. } | Shape::Modulated { .. } | Shape::RadialDini { .. } => vec![1.0],
            Shape::Mollified { base, .. } => base.radial_breakpoints(),
            _ => Vec::new(),
        }
    }
}

/// `y^(α)`: `y` for `α > 1`, `y·1_{|y|≤1}` for `α = 1`, zero for `α < 1`.
pub fn compensator(y: &[f64], alpha: f64) -> Vec<f64> {
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if alpha > 1.0 || (alpha == 1.0 && r <= 1.0) {
        y.to_vec()
    } else {
        vec![0.0; y.len()]
    }
}
