//! Stable-type Lévy measures `ν(dy) = m(y)·ν^(α)(dy)` with an atomic
//! spherical part, plus the standing checks on them (nondegeneracy, the
//! `α = 1` cancellation condition, tail masses).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::quad::{integrate_real, Tolerance};
use crate::{Error, Result};

/// One atom of the spherical measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub dir: [f64; 2],
    pub weight: f64,
}

impl Atom {
    pub fn dir_slice(&self, dim: usize) -> &[f64] {
        &self.dir[..dim]
    }
}

/// Finite atomic measure on the unit sphere of `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl SphericalMeasure {
    pub fn new(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("dimension must be 1 or 2, got {dim}")));
        }
        if atoms.is_empty() {
            return Err(Error::Config("spherical measure has no atoms".into()));
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (dir, weight) in atoms {
            if dir.len() != dim {
                return Err(Error::Config(format!(
                    "atom direction {dir:?} does not have {dim} components"
                )));
            }
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!("atom direction {dir:?} is not a unit vector")));
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::Config(format!("atom weight {weight} must be positive")));
            }
            let mut d = [0.0; 2];
            d[..dim].copy_from_slice(&dir);
            out.push(Atom { dir: d, weight });
        }
        Ok(Self { dim, atoms: out })
    }

    /// `w` at `θ = +1` and `θ = −1`.
    pub fn symmetric_1d(weight: f64) -> Result<Self> {
        Self::new(1, vec![(vec![1.0], weight), (vec![-1.0], weight)])
    }

    /// `count` equispaced directions on the circle, each of weight `weight`.
    pub fn equispaced_circle(count: usize, weight: f64) -> Result<Self> {
        let atoms = (0..count)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / count as f64;
                (vec![phi.cos(), phi.sin()], weight)
            })
            .collect();
        Self::new(2, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Rotates every atom by `angle` (two dimensions only).
    pub fn rotated(&self, angle: f64) -> Result<Self> {
        if self.dim != 2 {
            return Err(Error::Unsupported("rotation needs d = 2".into()));
        }
        let (s, c) = angle.sin_cos();
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let [x, y] = a.dir;
                let (rx, ry) = (c * x - s * y, s * x + c * y);
                let n = (rx * rx + ry * ry).sqrt();
                (vec![rx / n, ry / n], a.weight)
            })
            .collect();
        Self::new(2, atoms)
    }

    /// Scales all weights by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| (a.dir[..self.dim].to_vec(), a.weight * c))
            .collect();
        Self::new(self.dim, atoms)
    }

    /// Index of the atom pointing in direction `−θ_j`, if there is one.
    pub fn antipode(&self, j: usize) -> Option<usize> {
        let d = self.atoms[j].dir;
        self.atoms.iter().position(|a| {
            (0..self.dim).all(|i| (a.dir[i] + d[i]).abs() < 1e-12)
        })
    }
}

/// `ν^(α)(B) = ∫_S ∫_0^∞ 1_B(rθ) r^{-1-α} dr Σ(dθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StableLevyMeasure {
    alpha: f64,
    sigma: SphericalMeasure,
}

impl StableLevyMeasure {
    pub fn new(alpha: f64, sigma: SphericalMeasure) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        Ok(Self { alpha, sigma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> &SphericalMeasure {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim
    }

    /// `ν^(α)({|y| > ε}) = Σ(S) ε^{-α}/α`.
    pub fn tail_mass(&self, eps: f64) -> f64 {
        self.sigma.total_mass() * eps.powf(-self.alpha) / self.alpha
    }

    /// `∫ 1∧|y|² ν^(α)(dy) = Σ(S) (1/(2−α) + 1/α)`.
    pub fn truncated_second_moment(&self) -> f64 {
        self.sigma.total_mass() * (1.0 / (2.0 - self.alpha) + 1.0 / self.alpha)
    }

    /// `∫_{r<|y|<R} y ν^(α)(dy)`.
    pub fn annulus_first_moment(&self, r: f64, big_r: f64) -> Vec<f64> {
        let a = self.alpha;
        let radial = if a == 1.0 {
            (big_r / r).ln()
        } else {
            (big_r.powf(1.0 - a) - r.powf(1.0 - a)) / (1.0 - a)
        };
        let mut out = vec![0.0; self.dim()];
        for atom in &self.sigma.atoms {
            for (o, t) in out.iter_mut().zip(atom.dir_slice(self.dim())) {
                *o += atom.weight * t * radial;
            }
        }
        out
    }
}

/// Radial-angular density `m(r, θ)` modulating the reference stable measure.
#[derive(Clone)]
pub enum Density {
    /// `m ≡ c`.
    Constant(f64),
    /// `m = 1 + min(r, 1)^γ`, a density that is not smooth at the origin.
    RadialPower { gamma: f64 },
    /// `m = 1 + δ θ₁`.
    AngularWobble { delta: f64 },
    /// `m = 1` for `r ≤ cut`, zero beyond. Violates the lower bound; used
    /// only for finite-activity diagnostics.
    Truncated { cut: f64 },
    /// User supplied density with declared bounds.
    Custom {
        f: Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>,
        lo: f64,
        hi: f64,
    },
}

impl fmt::Debug for Density {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Constant(c) => write!(fm, "Constant({c})"),
            Density::RadialPower { gamma } => write!(fm, "RadialPower {{ gamma: {gamma} }}"),
            Density::AngularWobble { delta } => write!(fm, "AngularWobble {{ delta: {delta} }}"),
            Density::Truncated { cut } => write!(fm, "Truncated {{ cut: {cut} }}"),
            Density::Custom { lo, hi, .. } => write!(fm, "Custom {{ lo: {lo}, hi: {hi} }}"),
        }
    }
}

impl Density {
    pub fn eval(&self, r: f64, theta: &[f64]) -> f64 {
        match self {
            Density::Constant(c) => *c,
            Density::RadialPower { gamma } => 1.0 + r.min(1.0).powf(*gamma),
            Density::AngularWobble { delta } => 1.0 + delta * theta[0],
            Density::Truncated { cut } => {
                if r <= *cut {
                    1.0
                } else {
                    0.0
                }
            }
            Density::Custom { f, .. } => f(r, theta),
        }
    }

    /// Declared `(m_lo, m_hi)`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Density::Constant(c) => (*c, *c),
            Density::RadialPower { .. } => (1.0, 2.0),
            Density::AngularWobble { delta } => (1.0 - delta.abs(), 1.0 + delta.abs()),
            Density::Truncated { .. } => (0.0, 1.0),
            Density::Custom { lo, hi, .. } => (*lo, *hi),
        }
    }

    /// Radii where `m` may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::RadialPower { .. } => vec![1.0],
            Density::Truncated { cut } => vec![*cut],
            _ => Vec::new(),
        }
    }

    /// Whether `m(r, θ) = m(r, −θ)` for every `r`, `θ`.
    pub fn is_even(&self) -> bool {
        !matches!(self, Density::AngularWobble { delta } if *delta != 0.0)
            && !matches!(self, Density::Custom { .. })
    }
}

impl FromStr for Density {
    type Err = Error;

    /// Parses `constant[:c]`, `radial-power:γ`, `angular-wobble:δ`, `truncated:cut`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Config(format!("density '{name}' needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad density parameter in '{s}': {e}")))
        };
        match name {
            "constant" => Ok(Density::Constant(match arg {
                Some(_) => num(arg)?,
                None => 1.0,
            })),
            "radial-power" => {
                let gamma = num(arg)?;
                if gamma <= 0.0 {
                    return Err(Error::Config("radial-power exponent must be positive".into()));
                }
                Ok(Density::RadialPower { gamma })
            }
            "angular-wobble" => {
                let delta = num(arg)?;
                if delta.abs() >= 1.0 {
                    return Err(Error::Config("angular-wobble needs |δ| < 1".into()));
                }
                Ok(Density::AngularWobble { delta })
            }
            "truncated" => Ok(Density::Truncated { cut: num(arg)? }),
            other => Err(Error::Config(format!("unknown density '{other}'"))),
        }
    }
}

/// Quadrature part and analytic upper-bound remainder of a tail mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMass {
    pub quadrature: f64,
    pub remainder: f64,
}

impl TailMass {
    pub fn total(&self) -> f64 {
        self.quadrature + self.remainder
    }
}

/// Default radial truncation `R_max`.
pub const DEFAULT_R_MAX: f64 = 16.0 * PI;

/// `ν(dy) = m(y) ν^(α)(dy)` with `m_lo ≤ m ≤ m_hi`.
#[derive(Debug, Clone)]
pub struct BoundedLevyMeasure {
    reference: StableLevyMeasure,
    density: Density,
    m_lo: f64,
    m_hi: f64,
    r_max: f64,
}

impl BoundedLevyMeasure {
    /// Checks the declared bounds on a radial/angular sample of `m`; the lower
    /// bound must be positive.
    pub fn new(reference: StableLevyMeasure, density: Density) -> Result<Self> {
        let nu = Self::with_vanishing_density(reference, density)?;
        if nu.m_lo <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "density lower bound {} must be positive",
                nu.m_lo
            )));
        }
        Ok(nu)
    }

    /// Like [`BoundedLevyMeasure::new`] but admits `m_lo = 0` (finite-activity
    /// diagnostics only; the two-sided comparison with the stable measure fails).
    pub fn with_vanishing_density(reference: StableLevyMeasure, density: Density) -> Result<Self> {
        let (m_lo, m_hi) = density.bounds();
        if !(m_lo >= 0.0 && m_hi >= m_lo && m_hi > 0.0 && m_hi.is_finite()) {
            return Err(Error::Config(format!("invalid density bounds [{m_lo}, {m_hi}]")));
        }
        let nu = Self {
            reference,
            density,
            m_lo,
            m_hi,
            r_max: DEFAULT_R_MAX,
        };
        nu.check_density_bounds()?;
        Ok(nu)
    }

    /// Stable measure itself (`m ≡ 1`).
    pub fn stable(reference: StableLevyMeasure) -> Self {
        Self::new(reference, Density::Constant(1.0)).expect("unit density is admissible")
    }

    pub fn with_r_max(mut self, r_max: f64) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Config(format!("R_max must be positive, got {r_max}")));
        }
        self.r_max = r_max;
        Ok(self)
    }

    fn check_density_bounds(&self) -> Result<()> {
        let dim = self.dim();
        for atom in self.reference.sigma.atoms() {
            for i in 0..=64 {
                let r = 10f64.powf(-6.0 + 8.0 * i as f64 / 64.0);
                let m = self.density.eval(r, atom.dir_slice(dim));
                if !(m >= self.m_lo - 1e-12 && m <= self.m_hi + 1e-12) {
                    return Err(Error::Hypothesis(format!(
                        "density value {m} at r = {r:.3e} leaves [{}, {}]",
                        self.m_lo, self.m_hi
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn reference(&self) -> &StableLevyMeasure {
        &self.reference
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn alpha(&self) -> f64 {
        self.reference.alpha
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn atoms(&self) -> &[Atom] {
        self.reference.sigma.atoms()
    }

    pub fn m_lo(&self) -> f64 {
        self.m_lo
    }

    pub fn m_hi(&self) -> f64 {
        self.m_hi
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// `m(r, θ_j)` on atom `j`.
    pub fn m(&self, r: f64, atom: usize) -> f64 {
        let a = &self.atoms()[atom];
        self.density.eval(r, a.dir_slice(self.dim()))
    }

    /// `∫_{r1}^{r2} m(r, θ_j) r^q dr`; `r2` may be infinite when `q < −1`.
    pub fn radial_moment(&self, atom: usize, q: f64, r1: f64, r2: f64) -> Result<f64> {
        if r2 <= r1 {
            return Ok(0.0);
        }
        if r2.is_infinite() && q >= -1.0 {
            return Err(Error::Argument(format!(
                "∫ r^{q} dr diverges at infinity"
            )));
        }
        if r1 <= 0.0 && q <= -1.0 {
            return Err(Error::Argument(format!("∫ r^{q} dr diverges at zero")));
        }
        let mut cuts = vec![r1];
        for b in self.density.breakpoints() {
            if b > r1 && b < r2 {
                cuts.push(b);
            }
        }
        cuts.push(r2);
        let tol = Tolerance {
            abs: 1e-15,
            rel: 1e-12,
            max_intervals: 4000,
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += self.radial_piece(atom, q, w[0], w[1], tol)?;
        }
        Ok(total)
    }

    fn radial_piece(&self, atom: usize, q: f64, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
        // Substitution t = r^{q+1} (or t = ln r) turns the power into a constant weight.
        if (q + 1.0).abs() < 1e-14 {
            return integrate_real(|t| self.m(t.exp(), atom), a.ln(), b.ln(), tol);
        }
        let e = q + 1.0;
        let ta = a.powf(e);
        let tb = if b.is_infinite() { 0.0 } else { b.powf(e) };
        let v = integrate_real(
            |t| {
                if t <= 0.0 {
                    return self.m(if e > 0.0 { 0.0 } else { f64::INFINITY }, atom);
                }
                self.m(t.powf(1.0 / e), atom)
            },
            ta.min(tb),
            ta.max(tb),
            tol,
        )?;
        Ok(v / e.abs())
    }

    /// `ν({|y| > ε})`, integrated up to `R_max`, with the analytic bound of the
    /// mass beyond `R_max` reported separately.
    pub fn tail_mass(&self, eps: f64) -> Result<TailMass> {
        if !(eps > 0.0) {
            return Err(Error::Argument(format!("tail radius must be positive, got {eps}")));
        }
        let a = self.alpha();
        let mut quadrature = 0.0;
        if eps < self.r_max {
            for (j, atom) in self.atoms().iter().enumerate() {
                quadrature += atom.weight * self.radial_moment(j, -1.0 - a, eps, self.r_max)?;
            }
        }
        let outer = eps.max(self.r_max);
        let remainder = self.reference.sigma.total_mass() * self.m_hi * outer.powf(-a) / a;
        Ok(TailMass {
            quadrature,
            remainder,
        })
    }

    /// `∫_{r<|y|<R} y ν(dy)` by radial quadrature per atom.
    pub fn annulus_first_moment(&self, r: f64, big_r: f64) -> Result<Vec<f64>> {
        let dim = self.dim();
        let mut out = vec![0.0; dim];
        for (j, atom) in self.atoms().iter().enumerate() {
            let radial = self.radial_moment(j, -self.alpha(), r, big_r)?;
            for (o, t) in out.iter_mut().zip(atom.dir_slice(dim)) {
                *o += atom.weight * t * radial;
            }
        }
        Ok(out)
    }

    /// Checks `Σ_j w_j θ_j m(r, θ_j) = 0` at sampled radii, which is the
    /// `α = 1` condition `∫_{r<|y|<R} y ν(dy) = 0` for every annulus.
    pub fn check_odd_part_cancels(&self) -> Result<()> {
        let dim = self.dim();
        for i in 0..=40 {
            let r = 10f64.powf(-4.0 + 6.0 * i as f64 / 40.0);
            let mut v = [0.0; 2];
            let mut scale = 0.0;
            for (j, atom) in self.atoms().iter().enumerate() {
                let w = atom.weight * self.m(r, j);
                for (k, t) in atom.dir_slice(dim).iter().enumerate() {
                    v[k] += w * t;
                }
                scale += w;
            }
            let odd = (v[0] * v[0] + v[1] * v[1]).sqrt();
            if odd > 1e-12 * scale.max(1e-300) {
                return Err(Error::Hypothesis(format!(
                    "odd part of ν does not cancel at r = {r:.3e}: |Σ w θ m| = {odd:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// Minimum over sampled `θ₀` of `∫ |θ₀·θ|^α Σ(dθ)`, and whether it exceeds `1e-10`.
pub fn check_nondegenerate(
    sigma: &SphericalMeasure,
    alpha: f64,
    resolution: usize,
) -> Result<(bool, f64)> {
    if sigma.atoms().is_empty() {
        return Err(Error::Config("spherical measure has no atoms".into()));
    }
    if resolution < 64 {
        return Err(Error::Argument(format!(
            "nondegeneracy scan needs at least 64 directions, got {resolution}"
        )));
    }
    let probes: Vec<[f64; 2]> = match sigma.dim() {
        1 => vec![[1.0, 0.0], [-1.0, 0.0]],
        _ => (0..resolution)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / resolution as f64;
                [phi.cos(), phi.sin()]
            })
            .collect(),
    };
    let min_value = probes
        .iter()
        .map(|t0| {
            sigma
                .atoms()
                .iter()
                .map(|a| a.weight * (t0[0] * a.dir[0] + t0[1] * a.dir[1]).abs().powf(alpha))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok((min_value > 1e-10, min_value))
}

/// `1_{α=1} ∫_{r<|y|<R} y ν(dy)`; the zero vector when `α ≠ 1`.
pub fn check_alpha1_cancellation(nu: &BoundedLevyMeasure, r: f64, big_r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Argument(format!("annulus needs 0 < r < R, got ({r}, {big_r})")));
    }
    if nu.alpha() != 1.0 {
        return Ok(vec![0.0; nu.dim()]);
    }
    nu.annulus_first_moment(r, big_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_atom(alpha: f64, weight: f64) -> StableLevyMeasure {
        StableLevyMeasure::new(alpha, SphericalMeasure::new(1, vec![(vec![1.0], weight)]).unwrap())
            .unwrap()
    }

    fn axes(alpha: f64) -> SphericalMeasure {
        let _ = alpha;
        SphericalMeasure::new(
            2,
            vec![
                (vec![1.0, 0.0], 1.0),
                (vec![-1.0, 0.0], 1.0),
                (vec![0.0, 1.0], 1.0),
                (vec![0.0, -1.0], 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_invalid_atoms_and_orders() {
        assert!(SphericalMeasure::new(2, vec![(vec![1.0, 1.0], 1.0)]).is_err());
        assert!(SphericalMeasure::new(1, vec![(vec![1.0], 0.0)]).is_err());
        assert!(SphericalMeasure::new(1, vec![]).is_err());
        let s = SphericalMeasure::symmetric_1d(1.0).unwrap();
        assert!(StableLevyMeasure::new(2.0, s.clone()).is_err());
        assert!(StableLevyMeasure::new(0.0, s).is_err());
    }

    #[test]
    fn nondegeneracy_examples() {
        let ring = SphericalMeasure::equispaced_circle(16, 1.0).unwrap();
        let (ok, min) = check_nondegenerate(&ring, 1.5, 64).unwrap();
        assert!(ok && min > 0.0);

        let line = SphericalMeasure::new(2, vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 1.0)])
            .unwrap();
        let (ok, min) = check_nondegenerate(&line, 0.7, 64).unwrap();
        assert!(!ok && min.abs() < 1e-10);

        // brute force over a fine angular scan for the axis cross
        let cross = axes(1.0);
        let brute = (0..4096)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / 4096.0;
                2.0 * (phi.cos().abs() + phi.sin().abs())
            })
            .fold(f64::INFINITY, f64::min);
        let (_, min) = check_nondegenerate(&cross, 1.0, 256).unwrap();
        assert!((min - brute).abs() < 1e-12 && (min - 2.0).abs() < 1e-12);
        assert!(check_nondegenerate(&cross, 1.0, 32).is_err());
    }

    #[test]
    fn nondegeneracy_is_rotation_invariant() {
        let sigma = SphericalMeasure::new(
            2,
            vec![(vec![0.6, 0.8], 1.0), (vec![-1.0, 0.0], 0.5), (vec![0.0, -1.0], 2.0)],
        )
        .unwrap();
        let (_, base) = check_nondegenerate(&sigma, 1.3, 128).unwrap();
        for q in 1..4 {
            let rot = sigma.rotated(q as f64 * PI / 2.0).unwrap();
            let (_, v) = check_nondegenerate(&rot, 1.3, 128).unwrap();
            assert!((v - base).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha1_cancellation_examples() {
        let sym = StableLevyMeasure::new(1.0, axes(1.0)).unwrap();
        let nu = BoundedLevyMeasure::new(sym, Density::RadialPower { gamma: 0.5 }).unwrap();
        let v = check_alpha1_cancellation(&nu, 0.1, 5.0).unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-10));
        nu.check_odd_part_cancels().unwrap();

        let lone = BoundedLevyMeasure::stable(single_atom(1.0, 1.0));
        let v = check_alpha1_cancellation(&lone, 0.5, 2.0).unwrap();
        assert!((v[0] - 4f64.ln()).abs() < 1e-12);
        assert!(lone.check_odd_part_cancels().is_err());

        let lone15 = BoundedLevyMeasure::stable(single_atom(1.5, 1.0));
        assert_eq!(check_alpha1_cancellation(&lone15, 0.5, 2.0).unwrap(), vec![0.0]);
        assert!(check_alpha1_cancellation(&lone15, 2.0, 2.0).is_err());

        let wobble = StableLevyMeasure::new(1.0, axes(1.0)).unwrap();
        let nu = BoundedLevyMeasure::new(wobble, Density::AngularWobble { delta: 0.3 }).unwrap();
        assert!(nu.check_odd_part_cancels().is_err());
    }

    #[test]
    fn tail_mass_examples() {
        let nu = BoundedLevyMeasure::stable(single_atom(0.5, 1.0));
        let t = nu.tail_mass(1.0).unwrap();
        assert!((t.total() - 2.0).abs() < 1e-6);
        assert!((t.quadrature - (2.0 - 2.0 / DEFAULT_R_MAX.sqrt())).abs() < 1e-9);

        let far = nu.tail_mass(1e3).unwrap();
        assert_eq!(far.quadrature, 0.0);
        assert!((far.remainder - 2.0 / 1e3f64.sqrt()).abs() < 1e-12);

        let two = BoundedLevyMeasure::stable(single_atom(0.5, 2.0));
        let t2 = two.tail_mass(0.3).unwrap();
        let t1 = nu.tail_mass(0.3).unwrap();
        assert!((t2.total() - 2.0 * t1.total()).abs() < 1e-9);
    }

    #[test]
    fn constant_density_scales_stable_integrals() {
        for &alpha in &[0.4, 1.0, 1.7] {
            let base = StableLevyMeasure::new(alpha, axes(alpha)).unwrap();
            let nu = BoundedLevyMeasure::new(base.clone(), Density::Constant(2.5)).unwrap();
            for &eps in &[0.01, 0.5, 3.0] {
                let t = nu.tail_mass(eps).unwrap().total();
                assert!((t - 2.5 * base.tail_mass(eps)).abs() < 1e-9 * t);
            }
            let single = StableLevyMeasure::new(
                alpha,
                SphericalMeasure::new(2, vec![(vec![0.6, 0.8], 1.0)]).unwrap(),
            )
            .unwrap();
            let nu = BoundedLevyMeasure::new(single.clone(), Density::Constant(2.5)).unwrap();
            let q = nu.annulus_first_moment(0.2, 7.0).unwrap();
            let e = single.annulus_first_moment(0.2, 7.0);
            for (a, b) in q.iter().zip(&e) {
                assert!((a - 2.5 * b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn truncated_second_moment_matches_quadrature() {
        for &alpha in &[0.3, 1.0, 1.8] {
            let base = single_atom(alpha, 1.3);
            let nu = BoundedLevyMeasure::stable(base.clone());
            let inner = nu.radial_moment(0, 1.0 - alpha, 0.0, 1.0).unwrap();
            let outer = nu.radial_moment(0, -1.0 - alpha, 1.0, f64::INFINITY).unwrap();
            assert!((1.3 * (inner + outer) - base.truncated_second_moment()).abs() < 1e-10);
        }
    }

    #[test]
    fn density_parsing_and_bounds() {
        assert!(matches!("constant".parse::<Density>().unwrap(), Density::Constant(c) if c == 1.0));
        assert!(matches!(
            "radial-power:0.5".parse::<Density>().unwrap(),
            Density::RadialPower { gamma } if gamma == 0.5
        ));
        assert!("angular-wobble:1.5".parse::<Density>().is_err());
        assert!("mystery".parse::<Density>().is_err());
        let base = single_atom(1.2, 1.0);
        assert!(BoundedLevyMeasure::new(base.clone(), Density::Truncated { cut: 1.0 }).is_err());
        assert!(BoundedLevyMeasure::with_vanishing_density(base.clone(), Density::Truncated { cut: 1.0 }).is_ok());
        let liar = Density::Custom {
            f: Arc::new(|r, _| 1.0 + r),
            lo: 1.0,
            hi: 2.0,
        };
        assert!(BoundedLevyMeasure::new(base, liar).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tail_mass_decreases_and_scales(alpha in 0.2f64..1.9, e1 in 0.01f64..5.0, de in 0.01f64..5.0, c in 0.5f64..4.0) {
                let sigma = SphericalMeasure::symmetric_1d(1.0).unwrap();
                let base = StableLevyMeasure::new(alpha, sigma.clone()).unwrap();
                let nu = BoundedLevyMeasure::new(base, Density::RadialPower { gamma: 0.7 }).unwrap();
                let a = nu.tail_mass(e1).unwrap().total();
                let b = nu.tail_mass(e1 + de).unwrap().total();
                prop_assert!(b <= a);
                let scaled = StableLevyMeasure::new(alpha, sigma.scaled(c).unwrap()).unwrap();
                let nu_c = BoundedLevyMeasure::new(scaled, Density::RadialPower { gamma: 0.7 }).unwrap();
                let ac = nu_c.tail_mass(e1).unwrap().total();
                prop_assert!((ac - c * a).abs() < 1e-9 * ac);
            }
        }
    }
}
