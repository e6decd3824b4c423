//! Sample paths of diagonal operator stable examples, a distributional
//! check of the scaling law and an ε-grid close-approach scanner.
//!
//! Correctness claims attach to the stable generator only. The discrete
//! scale mixture in [`semistable`] is an illustration, not a sampler for a
//! general semistable law.

pub mod ks;
pub mod scaling;
pub mod scan;
pub mod semistable;
pub mod stable;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::spectral::{CaseLabel, SpectralProfile};

pub use ks::{ks_two_sample, KsResult};
pub use scaling::{scaling_check, KsEntry, KsReport};
pub use scan::{close_approach_scan, close_approach_scan_brute, Candidate};
pub use semistable::simulate_discrete_semistable;
pub use stable::symmetric_stable;

pub(crate) const TAG_PATH: u64 = 0x5041_5448;

/// A path on a uniform grid. `values[i]` is the position at `times[i]`,
/// coordinates in the order the indices were given. The profile lists the
/// same indices sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub profile: SpectralProfile<f64>,
    pub seed: u64,
}

impl PathSample {
    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub(crate) fn diagonal_profile(alphas: &[f64]) -> Result<SpectralProfile<f64>> {
    let mut sorted = alphas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let label = match alphas.len() {
        1 => CaseLabel::D1,
        2 => CaseLabel::A1Diag,
        3 => CaseLabel::B1,
        _ => CaseLabel::HigherDim,
    };
    SpectralProfile::from_alphas(&sorted, label)
}

pub(crate) fn check_grid(t_end: f64, n_steps: usize) -> Result<()> {
    if n_steps < 2 {
        return Err(Error::InvalidInput(format!("n_steps must be at least 2, got {n_steps}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("T must be positive, got {t_end}")));
    }
    Ok(())
}

pub(crate) fn grid(t_end: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps)
        .map(|i| if i == n_steps { t_end } else { t_end * i as f64 / n_steps as f64 })
        .collect()
}

fn stable_values(alphas: &[f64], t_end: f64, n_steps: usize, seed: u64, tag: u64, index: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, tag, index);
    let dt = t_end / n_steps as f64;
    let scales: Vec<f64> = alphas.iter().map(|a| dt.powf(1.0 / a)).collect();
    let d = alphas.len();
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut x = vec![0.0; d];
    values.push(x.clone());
    for _ in 0..n_steps {
        for j in 0..d {
            x[j] += scales[j] * symmetric_stable(alphas[j], &mut rng);
        }
        values.push(x.clone());
    }
    values
}

/// Independent symmetric stable coordinates, coordinate `j` with index
/// `alphas[j]`, summed from i.i.d. increments of scale `(T/n)^(1/alpha_j)`.
pub fn simulate_diagonal_stable(alphas: &[f64], t_end: f64, n_steps: usize, seed: u64) -> Result<PathSample> {
    let profile = diagonal_profile(alphas)?;
    check_grid(t_end, n_steps)?;
    Ok(PathSample {
        times: grid(t_end, n_steps),
        values: stable_values(alphas, t_end, n_steps, seed, TAG_PATH, 0),
        profile,
        seed,
    })
}

/// Many independent paths, path `p` on its own stream. Path 0 equals
/// [`simulate_diagonal_stable`] with the same seed.
pub fn simulate_diagonal_stable_batch(
    alphas: &[f64],
    t_end: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<PathSample>> {
    let profile = diagonal_profile(alphas)?;
    check_grid(t_end, n_steps)?;
    let times = grid(t_end, n_steps);
    Ok(batch_values(alphas, t_end, n_steps, n_paths, seed, TAG_PATH)
        .into_iter()
        .map(|values| PathSample {
            times: times.clone(),
            values,
            profile: profile.clone(),
            seed,
        })
        .collect())
}

pub(crate) fn batch_values(
    alphas: &[f64],
    t_end: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    tag: u64,
) -> Vec<Vec<Vec<f64>>> {
    (0..n_paths)
        .into_par_iter()
        .map(|p| stable_values(alphas, t_end, n_steps, seed, tag, p as u64))
        .collect()
}
