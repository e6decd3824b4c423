//! Two-sample check of `X(ct) =d c^B X(t)` at three times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathsim::ks::ks_two_sample;
use crate::pathsim::{batch_values, TAG_PATH};
use crate::spectral::{matrix_power_cb, SpectralProfile, StabilityExponent};

const TAG_SCALED: u64 = TAG_PATH ^ 0x5343_414c_4544_0000;
const TAG_DIRECT: u64 = TAG_PATH ^ 0x4449_5245_4354_0000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsEntry {
    pub t: f64,
    pub coordinate: usize,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub c: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub entries: Vec<KsEntry>,
}

impl KsReport {
    pub fn min_p_value(&self) -> f64 {
        self.entries.iter().map(|e| e.p_value).fold(1.0, f64::min)
    }

    pub fn max_p_value(&self) -> f64 {
        self.entries.iter().map(|e| e.p_value).fold(0.0, f64::max)
    }
}

/// Compares `X(ct)` against `c^B X(t)` for `t` in `{T/4, T/2, T}`, one KS
/// test per coordinate and time. The two sides use independent paths.
///
/// Paths come from the diagonal stable generator with the profile's indices
/// in coordinate order; `exp` only enters through `c^B`, so a wrong exponent
/// shows up as a failed test.
pub fn scaling_check(
    profile: &SpectralProfile<f64>,
    exp: &StabilityExponent<f64>,
    c: f64,
    t_end: f64,
    n_paths: usize,
    seed: u64,
) -> Result<KsReport> {
    if profile.rotation_b.is_some() || !profile.nilpotent_block_sizes.is_empty() {
        return Err(Error::Unsupported(format!(
            "path simulation covers diagonal exponents only, got case {}",
            profile.case_label
        )));
    }
    if exp.dim() != profile.dim() {
        return Err(Error::InvalidInput(format!(
            "exponent is {}x{} but the profile has {} indices",
            exp.dim(),
            exp.dim(),
            profile.dim()
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("c must be positive, got {c}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("T must be positive, got {t_end}")));
    }
    if n_paths < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 paths, got {n_paths}")));
    }
    let cb = matrix_power_cb(exp, c)?;
    let alphas = &profile.alphas;
    let d = alphas.len();
    // grid points 1, 2, 4 of a 4-step grid are T/4, T/2, T
    let scaled = batch_values(alphas, c * t_end, 4, n_paths, seed, TAG_SCALED);
    let direct = batch_values(alphas, t_end, 4, n_paths, seed, TAG_DIRECT);
    let mut entries = Vec::with_capacity(3 * d);
    for (i, t) in [(1usize, t_end / 4.0), (2, t_end / 2.0), (4, t_end)] {
        let lhs: Vec<&Vec<f64>> = scaled.iter().map(|p| &p[i]).collect();
        let rhs: Vec<Vec<f64>> = direct.iter().map(|p| cb.mul_vec(&p[i])).collect();
        for j in 0..d {
            let a: Vec<f64> = lhs.iter().map(|v| v[j]).collect();
            let b: Vec<f64> = rhs.iter().map(|v| v[j]).collect();
            let r = ks_two_sample(&a, &b);
            entries.push(KsEntry {
                t,
                coordinate: j,
                statistic: r.statistic,
                p_value: r.p_value,
            });
        }
    }
    Ok(KsReport {
        c,
        n_paths,
        seed,
        entries,
    })
}
