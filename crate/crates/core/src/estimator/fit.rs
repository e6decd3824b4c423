//! Power-law fits of shell integrals along a ladder of `(q, r)` points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::region::{mc_region_integral_tagged, IntegralEstimate};
use crate::kernels::{KernelSpec, KernelVariant, RegionSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(ln abscissa, ln ordinate)` pairs that were fitted.
    pub points: Vec<(f64, f64)>,
    pub slope_std_error: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidInput("a fit needs at least two points".into()));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite fit point in {points:?}")));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    let slope_std_error = if n > 2 { (ss_res / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        points: points.to_vec(),
        slope_std_error,
    })
}

/// Which coordinate of the ladder moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    QAxis,
    RAxis,
    Diagonal,
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q_axis" | "q" => Ok(Direction::QAxis),
            "r_axis" | "r" => Ok(Direction::RAxis),
            "diagonal" | "diag" => Ok(Direction::Diagonal),
            _ => Err(Error::InvalidInput(format!("unknown direction {s:?}"))),
        }
    }
}

/// Fit together with the per-point estimates it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRun {
    pub fit: PowerLawFit,
    pub estimates: Vec<IntegralEstimate>,
    /// Exponent the shell asymptotics predict.
    pub target_slope: f64,
}

fn is_geometric(xs: &[f64]) -> bool {
    let ratio = xs[1] / xs[0];
    ratio > 1.0 + 1e-9
        && xs
            .windows(2)
            .all(|w| ((w[1] / w[0]) / ratio - 1.0).abs() < 1e-6)
}

fn check_ladder(direction: Direction, ladder: &[(f64, f64)]) -> Result<()> {
    if ladder.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "ladder needs at least 5 points, got {}",
            ladder.len()
        )));
    }
    let qs: Vec<f64> = ladder.iter().map(|p| p.0).collect();
    let rs: Vec<f64> = ladder.iter().map(|p| p.1).collect();
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    let ok = match direction {
        Direction::QAxis => constant(&rs) && is_geometric(&qs),
        Direction::RAxis => constant(&qs) && is_geometric(&rs),
        Direction::Diagonal => is_geometric(&qs) && is_geometric(&rs),
    };
    if !ok {
        return Err(Error::InvalidInput(format!(
            "ladder is not geometric along {direction:?}: {ladder:?}"
        )));
    }
    Ok(())
}

/// Predicted exponent and hypothesis check for the kernel and `k`.
pub fn target_exponent(kernel: &KernelSpec<f64>, k: usize) -> Result<f64> {
    if kernel.dim() != 2 {
        return Err(Error::Validity("shell asymptotics are planar".into()));
    }
    let kf = k as f64;
    match kernel.variant {
        KernelVariant::LogCorrected => {
            let a = kernel.alphas[0];
            if !(2.0 * (kf - 1.0) / kf < a && a < 2.0) {
                return Err(Error::Validity(format!(
                    "need 2(k-1)/k < alpha < 2, got alpha = {a}, k = {k}"
                )));
            }
            Ok(-(2.0 - kf * (2.0 - a)))
        }
        _ => {
            let (a1, a2) = (kernel.alphas[0], kernel.alphas[1]);
            if a1 < a2 {
                return Err(Error::Validity("indices must satisfy alpha_1 >= alpha_2".into()));
            }
            if a2 >= 2.0 {
                return Err(Error::Validity(
                    "alpha_2 = 2 is excluded (logarithmic corrections)".into(),
                ));
            }
            if k == 2 && a1 == 2.0 && a2 == 1.0 {
                return Err(Error::Validity(
                    "(alpha_1, alpha_2) = (2, 1) with k = 2 is excluded (logarithmic corrections)".into(),
                ));
            }
            let s = 1.0 / a1 + 1.0 / a2;
            if !(kf - (kf - 1.0) * s > 0.0) {
                return Err(Error::Validity(format!(
                    "k - (k-1)(1/a1 + 1/a2) = {} <= 0: the shell integral is infinite",
                    kf - (kf - 1.0) * s
                )));
            }
            Ok((kf - 1.0) * s - kf)
        }
    }
}

/// Fits `ln I(q, r)` against `ln(q^a1 + r^a2)`, or for the log-corrected
/// kernel against `ln(q ∨ r ln r)` after multiplying by `ln(q ∨ r)^(k-1)`.
pub fn asymptotic_exponent_fit(
    kernel: &KernelSpec<f64>,
    k: usize,
    direction: Direction,
    ladder: &[(f64, f64)],
    n_per_point: u64,
    seed: u64,
) -> Result<PowerLawFit> {
    Ok(asymptotic_exponent_run(kernel, k, direction, ladder, n_per_point, seed)?.fit)
}

pub fn asymptotic_exponent_run(
    kernel: &KernelSpec<f64>,
    k: usize,
    direction: Direction,
    ladder: &[(f64, f64)],
    n_per_point: u64,
    seed: u64,
) -> Result<ExponentRun> {
    kernel.validate()?;
    let target_slope = target_exponent(kernel, k)?;
    check_ladder(direction, ladder)?;
    let is_log = kernel.variant == KernelVariant::LogCorrected;
    let mut estimates = Vec::with_capacity(ladder.len());
    let mut points = Vec::with_capacity(ladder.len());
    for (i, &(q, r)) in ladder.iter().enumerate() {
        let region = if is_log {
            RegionSpec::log(k, q, r).map_err(|e| Error::Validity(e.to_string()))?
        } else {
            RegionSpec::new(k, q, r)?
        };
        let est = mc_region_integral_tagged(kernel, &region, n_per_point, seed, i as u64)?;
        if !(est.value > 0.0) {
            return Err(Error::Validity(format!(
                "estimate at (q, r) = ({q}, {r}) is not positive; increase the sample count"
            )));
        }
        let (x, y) = if is_log {
            let scale = q.max(r * r.ln());
            let correction = (kf(k) - 1.0) * q.max(r).ln().ln();
            (scale.ln(), est.value.ln() + correction)
        } else {
            let (a1, a2) = (kernel.alphas[0], kernel.alphas[1]);
            ((q.powf(a1) + r.powf(a2)).ln(), est.value.ln())
        };
        points.push((x, y));
        estimates.push(est);
    }
    Ok(ExponentRun {
        fit: ols(&points)?,
        estimates,
        target_slope,
    })
}

fn kf(k: usize) -> f64 {
    k as f64
}
