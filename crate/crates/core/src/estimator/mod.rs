//! Numerical checks of the shell-integral asymptotics, the series
//! threshold and the intersection criterion.

pub mod fit;
pub mod intersection;
pub mod region;
pub mod series;
pub mod stats;
pub mod verdict;

pub use fit::{asymptotic_exponent_fit, asymptotic_exponent_run, ols, target_exponent, Direction, ExponentRun, PowerLawFit};
pub use intersection::intersection_integral_verdict;
pub use region::{mc_region_integral, IntegralEstimate};
pub use series::{
    estimate_beta_threshold, estimate_beta_threshold_with, partial_sum_ladder, series_threshold_scan,
    ThresholdEstimate, DEFAULT_M_MAX,
};
pub use verdict::{judge, ConvergenceVerdict, Verdict};
