//! Central and non-central multivariate gamma distribution machinery:
//! Laplace transforms, densities, Wishart sampling, admissibility bounds,
//! and the numerical verification of the block-partition identities behind
//! them.
//!
//! The deterministic core is generic over the scalar type through
//! [`scalar::Scalar`]; `f64` aliases for the main types live at the crate
//! root. Stochastic and quadrature routines are `f64` throughout.

pub mod cli;
pub mod density;
pub mod error;
pub mod gamma;
pub mod io;
pub mod linalg;
pub mod quad;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod verify;
pub mod wishart;

pub use error::{Error, Result};
pub use rng::{MCEstimate, RngSeed};
pub use scalar::Scalar;

/// `f64` instantiations of the generic core types.
pub type CovMatrix = linalg::CovMatrix<f64>;
pub type Partition = linalg::Partition<f64>;
pub type FactorialForm = linalg::FactorialForm<f64>;
pub type DiagScale = linalg::DiagScale<f64>;
pub type ShapeParam = gamma::ShapeParam<f64>;
pub type NoncentralityMatrix = density::NoncentralityMatrix<f64>;
