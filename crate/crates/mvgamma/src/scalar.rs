//! Scalar abstraction for the numeric core.
//!
//! The deterministic machinery (matrix identities, gamma series, Laplace
//! transforms) is generic over the scalar type; sampling and quadrature are
//! `f64`-only. `f64` is the working precision everywhere in practice, the
//! `f32` instantiation exists for callers who trade precision for space.

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive};

pub trait Scalar: RealField + Float + FromPrimitive + Copy + Send + Sync {
    /// Lossy conversion from `f64`, for tolerances and literals.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 conversion")
    }

    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
