//! The Lévy process `X_t`, its transition semigroup `T_{t,s}` and the
//! characteristic exponent of the measure.

mod propagate;
mod sampler;
mod symbol;

pub use propagate::{
    check_char_function, check_factorization, propagate_mc, propagate_spectral, CharFunctionReport,
    FactorizationReport, McEstimate, SpectralPropagator,
};
pub use sampler::{sample_path, sample_path_on, LevyPathSample, SamplerConfig};
pub use symbol::{char_exponent, char_exponent_table};
