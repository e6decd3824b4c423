//! Hausdorff dimension and existence of k-multiple points for symmetric
//! operator semistable Lévy processes, with numerical checks of the integral
//! and series asymptotics the results reduce to.

pub mod error;
pub mod linalg;
pub mod scalar;
pub mod spectral;
pub mod closedform;
pub mod estimator;
pub mod kernels;
pub mod pathsim;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::SquareMatrix;
pub use scalar::{Field, Real};
pub use spectral::{
    classify_exponent, matrix_power_cb, CaseLabel, RealPart, SpectralProfile, StabilityExponent,
};

/// Exact rational used for boundary-sensitive existence checks.
pub type Rational = num_rational::Ratio<i64>;
pub type Exponent = StabilityExponent<f64>;
pub type ExponentF32 = StabilityExponent<f32>;
pub type Profile = SpectralProfile<f64>;
pub type Matrix = SquareMatrix<f64>;
pub use closedform::{
    beta_threshold_r2, dimension_terms, exists_multiple, hausdorff_dim_r2, DimensionReport, Source,
};
pub use kernels::{
    kernel_eval, multipoint_integrand, region_factor, region_membership, FirstFactor, KernelSpec,
    KernelVariant, RegionSpec,
};
