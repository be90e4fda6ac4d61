//! Exact and floating-point tools for the tetilla law: non-crossing
//! partitions and contraction walks, moment/cumulant transforms, the
//! density and Cauchy transform, discretized Wigner-chaos kernels, the
//! contraction identities behind the fourth/sixth moment criteria, and a
//! random-matrix Monte Carlo oracle.

pub mod capacity;
pub mod chaos;
pub mod combinatorics;
pub mod error;
pub mod identities;
pub mod kernels;
pub mod rational;
pub mod rm_oracle;
pub mod scalar;
pub mod theorem;
pub mod transforms;

pub use capacity::Capacity;
pub use error::{Error, Result};
pub use kernels::{GridSpec, Kernel};
pub use rational::Rational;
pub use scalar::{Mode, Scalar};
