//! Strict JSON run configuration. Physics parameters have no defaults;
//! numerical knobs do.

use nonlocal::ensemble::random_trig_poly;
use nonlocal::operator::{KernelCoefficient, QuadratureScheme};
use nonlocal::semigroup::SamplerConfig;
use nonlocal::solver::{Drift, Forcing, Problem};
use nonlocal::{
    BoundedLevyMeasure, Density, GridFunction, SphericalMeasure, StableLevyMeasure, TorusGrid,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub measure: MeasureConfig,
    pub coefficient: CoefficientConfig,
    pub drift: DriftConfig,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub sampler: SamplerSettings,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    #[serde(default = "default_points")]
    pub n: usize,
}

fn default_points() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub direction: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub alpha: f64,
    pub atoms: Vec<AtomConfig>,
    pub density: DensityConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum DensityConfig {
    Constant { value: f64 },
    RadialPower { gamma: f64 },
    AngularWobble { delta: f64 },
    Truncated { cut: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum CoefficientConfig {
    Constant { value: f64 },
    Separable { x_amp: f64, y_amp: f64, gamma: f64 },
    Modulated { x_amp: f64, y_amp: f64, gamma: f64 },
    RadialDini { y_amp: f64, gamma: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum DriftConfig {
    Zero,
    Constant { value: Vec<f64> },
    Cosine { amplitude: f64 },
}

/// A field on the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum FieldConfig {
    Zero,
    /// `Re e^{ik·x}`, scaled.
    PlaneWave {
        k: Vec<i64>,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// Random trigonometric polynomial with modes up to `kmax`.
    Random {
        seed: u64,
        kmax: usize,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// Real nodal values in grid order.
    Values {
        values: Vec<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub initial: FieldConfig,
    pub forcing: FieldConfig,
    pub horizon: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteConfig {
    Duhamel,
    Imex,
    Continuity,
    Nonlinear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum PotentialConfig {
    Quadratic,
    Wobble { delta: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_route")]
    pub route: RouteConfig,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
    /// `Λ` of the nonlinear flow.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_route() -> RouteConfig {
    RouteConfig::Imex
}

fn default_steps() -> usize {
    64
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_lambda() -> f64 {
    2.0
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            route: default_route(),
            steps: default_steps(),
            tolerance: default_tolerance(),
            potential: None,
            lambda: default_lambda(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default)]
    pub r_min: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub nodes_per_decade: Option<usize>,
    #[serde(default)]
    pub gauss_points: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSettings {
    #[serde(default)]
    pub r_cut: Option<f64>,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "unit")]
    pub t_end: f64,
    #[serde(default = "yes")]
    pub gaussian_correction: bool,
}

fn default_paths() -> usize {
    10_000
}

fn yes() -> bool {
    true
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            r_cut: None,
            paths: default_paths(),
            t_end: 1.0,
            gaussian_correction: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_exponents")]
    pub exponents: Vec<f64>,
    /// Largest relative change of an empirical constant under refinement.
    #[serde(default = "default_stability")]
    pub stability_tolerance: f64,
}

fn default_size() -> usize {
    100
}

fn default_kmax() -> usize {
    8
}

fn default_exponents() -> Vec<f64> {
    vec![1.5, 2.0, 4.0]
}

fn default_stability() -> f64 {
    0.15
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            size: default_size(),
            kmax: default_kmax(),
            exponents: default_exponents(),
            stability_tolerance: default_stability(),
        }
    }
}

fn usage(e: nonlocal::Error) -> CliError {
    CliError::Usage(e.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn grid(&self) -> Result<TorusGrid, CliError> {
        self.grid_with(self.grid.n)
    }

    pub fn grid_with(&self, n: usize) -> Result<TorusGrid, CliError> {
        TorusGrid::new(self.grid.dim, n).map_err(usage)
    }

    pub fn measure(&self) -> Result<BoundedLevyMeasure, CliError> {
        let m = &self.measure;
        let atoms = m
            .atoms
            .iter()
            .map(|a| (a.direction.clone(), a.weight))
            .collect();
        let sigma = SphericalMeasure::new(self.grid.dim, atoms).map_err(usage)?;
        let reference = StableLevyMeasure::new(m.alpha, sigma).map_err(usage)?;
        let density = match m.density {
            DensityConfig::Constant { value } => Density::Constant(value),
            DensityConfig::RadialPower { gamma } => Density::RadialPower { gamma },
            DensityConfig::AngularWobble { delta } => Density::AngularWobble { delta },
            DensityConfig::Truncated { cut } => Density::Truncated { cut },
        };
        match density {
            Density::Truncated { .. } => {
                BoundedLevyMeasure::with_vanishing_density(reference, density)
            }
            _ => BoundedLevyMeasure::new(reference, density),
        }
        .map_err(usage)
    }

    pub fn coefficient(&self) -> Result<KernelCoefficient, CliError> {
        match self.coefficient {
            CoefficientConfig::Constant { value } => KernelCoefficient::constant(value),
            CoefficientConfig::Separable {
                x_amp,
                y_amp,
                gamma,
            } => KernelCoefficient::separable(x_amp, y_amp, gamma),
            CoefficientConfig::Modulated {
                x_amp,
                y_amp,
                gamma,
            } => KernelCoefficient::modulated(x_amp, y_amp, gamma),
            CoefficientConfig::RadialDini { y_amp, gamma } => {
                KernelCoefficient::radial_dini(y_amp, gamma)
            }
        }
        .map_err(usage)
    }

    pub fn drift(&self) -> Result<Drift, CliError> {
        match &self.drift {
            DriftConfig::Zero => Ok(Drift::zero()),
            DriftConfig::Constant { value } => {
                if value.len() != self.grid.dim {
                    return Err(CliError::Usage(format!(
                        "drift has {} components on a {}-dimensional grid",
                        value.len(),
                        self.grid.dim
                    )));
                }
                let mut v = [0.0; 2];
                v[..value.len()].copy_from_slice(value);
                Ok(Drift::constant(v))
            }
            DriftConfig::Cosine { amplitude } => Ok(Drift::cosine(*amplitude)),
        }
    }

    pub fn scheme(&self) -> QuadratureScheme {
        let mut s = QuadratureScheme::default();
        let c = &self.scheme;
        s.r_min = c.r_min;
        s.r_max = c.r_max;
        if let Some(v) = c.nodes_per_decade {
            s.nodes_per_decade = v;
        }
        if let Some(v) = c.gauss_points {
            s.gauss_points = v;
        }
        s
    }

    pub fn sampler(&self, grid: TorusGrid) -> Result<SamplerConfig, CliError> {
        let c = &self.sampler;
        let mut cfg = SamplerConfig::for_grid(grid, self.seed).map_err(usage)?;
        if let Some(r) = c.r_cut {
            cfg = cfg.with_r_cut(r).map_err(usage)?;
        }
        cfg = cfg
            .with_paths(c.paths)
            .map_err(usage)?
            .with_gaussian_correction(c.gaussian_correction);
        if let DriftConfig::Constant { value } = &self.drift {
            let mut v = [0.0; 2];
            v[..value.len().min(2)].copy_from_slice(&value[..value.len().min(2)]);
            cfg = cfg.with_drift(move |_| v);
        }
        Ok(cfg)
    }

    pub fn problem_config(&self) -> Result<&ProblemConfig, CliError> {
        self.problem.as_ref().ok_or_else(|| {
            CliError::Usage("config has no \"problem\" block with initial data".into())
        })
    }

    /// The problem without hypothesis checks, for reporting them.
    pub fn assemble(&self) -> Result<Problem, CliError> {
        self.assemble_on(self.grid()?)
    }

    pub fn assemble_on(&self, grid: TorusGrid) -> Result<Problem, CliError> {
        let pc = self.problem_config()?;
        let phi = field(&pc.initial, grid)?;
        let forcing = match &pc.forcing {
            FieldConfig::Zero => Forcing::Zero,
            other => Forcing::Steady(field(other, grid)?),
        };
        Ok(Problem::assemble(
            self.measure()?,
            self.coefficient()?,
            self.drift()?,
            forcing,
            phi,
            pc.horizon,
            pc.p,
        )
        .map_err(usage)?
        .with_scheme(self.scheme()))
    }
}

pub fn field(spec: &FieldConfig, grid: TorusGrid) -> Result<GridFunction, CliError> {
    match spec {
        FieldConfig::Zero => Ok(GridFunction::zeros(grid)),
        FieldConfig::PlaneWave { k, amplitude } => {
            if k.len() != grid.dim() {
                return Err(CliError::Usage(format!(
                    "wavevector {k:?} does not match the grid dimension"
                )));
            }
            let kf: Vec<f64> = k.iter().map(|&v| v as f64).collect();
            Ok(GridFunction::from_fn(grid, |x| {
                amplitude * kf.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().cos()
            }))
        }
        FieldConfig::Random {
            seed,
            kmax,
            amplitude,
        } => Ok(random_trig_poly(grid, *seed, 0, *kmax, false)
            .map_err(usage)?
            .scale(*amplitude)),
        FieldConfig::Values { values } => GridFunction::from_real(grid, values).map_err(usage),
    }
}
