//! Closed-form dimension and existence results for k-multiple points.
//!
//! Everything here is written over [`Field`] so the same code runs on
//! floats and on exact rationals. Only the equality tests at the
//! discontinuities of the existence criteria differ between the two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{pmax, pmin, Field};
use crate::spectral::{CaseLabel, SpectralProfile};

/// Which result decided a [`DimensionReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Planar, diagonalizable or rotational, k >= 3: sign of
    /// `k - (k-1)(1/alpha_1 + 1/alpha_2)`.
    PlanarDimensionFormula,
    /// Planar nilpotent block, k >= 3: `alpha >= 2(k-1)/k`.
    PlanarNilpotentThreshold,
    /// Double points in the plane: `2 - 1/alpha_1 - 1/alpha_2 > 0`.
    PlanarDoublePoints,
    /// Double points in R^3 without a full nilpotent block.
    SpatialDoublePoints,
    /// Double points in R^3 with a single 3-block: `alpha >= 3/2`.
    SpatialNilpotentThreshold,
    /// No k-multiple points for k >= 3 in dimension >= 3.
    NoHigherMultiplePointsInSpace,
    /// No double points in dimension >= 4.
    NoDoublePointsAboveThree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport<F> {
    pub k: u32,
    /// Raw value of the planar dimension formula, possibly negative. Absent
    /// outside the plane.
    pub dim_value: Option<F>,
    pub dim_clamped: F,
    pub exists: bool,
    pub boundary_case: bool,
    /// The two arguments of the min in the planar dimension formula.
    pub formula_terms: Option<(F, F)>,
    pub source: Source,
}

fn check_pair<F: Field>(alpha1: F, alpha2: F, k: u32) -> Result<()> {
    let two = F::from_i64(2);
    if !(two >= alpha1 && alpha1 >= alpha2 && alpha2 > F::zero()) {
        return Err(Error::Domain(format!(
            "need 2 >= alpha1 >= alpha2 > 0, got ({alpha1:?}, {alpha2:?})"
        )));
    }
    if k < 2 {
        return Err(Error::Domain(format!("k must be at least 2, got {k}")));
    }
    Ok(())
}

/// The two arguments of the min in the planar dimension formula:
/// `alpha1 (k - (k-1) s)` and `2 - k alpha2 (s - 1)` with `s = 1/alpha1 + 1/alpha2`.
pub fn dimension_terms<F: Field>(alpha1: F, alpha2: F, k: u32) -> Result<(F, F)> {
    check_pair(alpha1, alpha2, k)?;
    let kf = F::from_i64(k as i64);
    let s = alpha1.recip() + alpha2.recip();
    let t1 = alpha1 * (kf - (kf - F::one()) * s);
    let t2 = F::from_i64(2) - kf * alpha2 * (s - F::one());
    Ok((t1, t2))
}

/// Hausdorff dimension of the k-multiple points in the plane. Negative
/// values mean the set is empty and are returned as computed.
pub fn hausdorff_dim_r2<F: Field>(alpha1: F, alpha2: F, k: u32) -> Result<F> {
    let (t1, t2) = dimension_terms(alpha1, alpha2, k)?;
    Ok(pmin(t1, t2))
}

/// Infimum of the `beta` for which the planar series converges. May exceed 2.
pub fn beta_threshold_r2<F: Field>(alpha1: F, alpha2: F, k: u32) -> Result<F> {
    let (t1, t2) = dimension_terms(alpha1, alpha2, k)?;
    let two = F::from_i64(2);
    Ok(pmax(two - t1, two - t2))
}

/// Existence of k-multiple points for the given profile.
///
/// Dimension one has no closed form here and returns [`Error::Unsupported`].
pub fn exists_multiple<F: Field>(profile: &SpectralProfile<F>, k: u32) -> Result<DimensionReport<F>> {
    if k < 2 {
        return Err(Error::Domain(format!("k must be at least 2, got {k}")));
    }
    let d = profile.alphas.len();
    let zero = F::zero();
    let two = F::from_i64(2);
    let kf = F::from_i64(k as i64);
    let label = profile.case_label;
    let a = &profile.alphas;
    let inv_sum = a.iter().fold(zero, |acc, &x| acc + x.recip());

    let empty = |source| DimensionReport {
        k,
        dim_value: None,
        dim_clamped: zero,
        exists: false,
        boundary_case: false,
        formula_terms: None,
        source,
    };

    match d {
        0 => Err(Error::InvalidInput("empty profile".into())),
        1 => Err(Error::Unsupported(
            "closed forms are only provided in dimension 2 and 3; use the numerical estimators for d = 1".into(),
        )),
        2 => {
            let (t1, t2) = dimension_terms(a[0], a[1], k)?;
            let dim = pmin(t1, t2);
            let (exists, boundary_case, source) = if k == 2 {
                (two - inv_sum > zero, false, Source::PlanarDoublePoints)
            } else if label == CaseLabel::A2 {
                let threshold = F::from_i64(2 * (k as i64 - 1)) / kf;
                let alpha = a[0];
                let at_edge = alpha.boundary_eq(threshold);
                (
                    at_edge || alpha > threshold,
                    at_edge,
                    Source::PlanarNilpotentThreshold,
                )
            } else {
                (
                    kf - (kf - F::one()) * inv_sum > zero,
                    false,
                    Source::PlanarDimensionFormula,
                )
            };
            let dim_clamped = if exists { pmax(dim, zero) } else { zero };
            // at the boundary the formula value may be a rounding error away from 0
            let dim_clamped = if boundary_case { zero } else { dim_clamped };
            Ok(DimensionReport {
                k,
                dim_value: Some(dim),
                dim_clamped,
                exists,
                boundary_case,
                formula_terms: Some((t1, t2)),
                source,
            })
        }
        3 if k == 2 => {
            if label == CaseLabel::B3 {
                let threshold = F::from_i64(3) / two;
                let at_edge = a[0].boundary_eq(threshold);
                Ok(DimensionReport {
                    exists: at_edge || a[0] > threshold,
                    boundary_case: at_edge,
                    ..empty(Source::SpatialNilpotentThreshold)
                })
            } else {
                Ok(DimensionReport {
                    exists: two - inv_sum > zero,
                    ..empty(Source::SpatialDoublePoints)
                })
            }
        }
        3 => Ok(empty(Source::NoHigherMultiplePointsInSpace)),
        _ if k == 2 => Ok(empty(Source::NoDoublePointsAboveThree)),
        _ => Ok(empty(Source::NoHigherMultiplePointsInSpace)),
    }
}
