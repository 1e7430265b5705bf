//! Nonlocal parabolic equations driven by spatially dependent, non-smooth
//! stable-type Lévy kernels on the periodic torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: torus grids and grid functions with paired nodal/spectral data.
//! * [`measure`]: stable-type Lévy measures and their standing hypotheses.
//! * [`norms`]: L^p, Bessel potential, Sobolev–Slobodeckij and space-time norms.
//! * [`operator`]: the compensated nonlocal operator and its decompositions.
//! * [`semigroup`]: Lévy path sampling and the associated transition semigroup.
//! * [`solver`]: the linear Cauchy problem by three routes, the nonlinear flow,
//!   and the a priori estimate reporter.

pub mod ensemble;
pub mod error;
pub mod grid;
pub mod measure;
pub mod norms;
pub mod operator;
pub mod quad;
pub mod semigroup;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{GridFunction, TorusGrid};
pub use measure::{BoundedLevyMeasure, Density, SphericalMeasure, StableLevyMeasure};
