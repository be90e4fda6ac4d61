//! Moment/cumulant conversion, the tetilla law's cumulants, moments,
//! density and Cauchy transform.

mod density;
mod moments;
pub mod quadrature;

pub use density::{
    cardano_roots, cauchy_cubic, cauchy_transform_tetilla, density_from_cauchy, semicircular_density,
    tetilla_density, tetilla_moment_numeric, tetilla_support_edge, CUBIC_RESIDUAL_TOL,
};
pub use moments::{
    cumulants_from_moments, moments_from_cumulants, tetilla_cumulant, tetilla_moment_closed, CumulantSequence,
    DistributionSpec, MomentSequence, MAX_ORDER,
};
