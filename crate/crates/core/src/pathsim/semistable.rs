//! Approximate paths of a discrete-scale (semistable, not stable) example.
//!
//! Coordinate `j` has Lévy measure `sum_n c^-n (δ(c^(n/a)) + δ(-c^(n/a))) / 2`
//! with `a = alphas[j]`, which satisfies `ν(c^(1/a) A) = ν(A) / c`, so the
//! process is semi-selfsimilar at scale `c` only. The sampler is approximate:
//! levels with more than ~1000 jumps per step become a Gaussian of the same
//! variance, and levels with negligible rate over `[0, T]` are dropped.
//! Needs `alphas` in `(0, 2)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::pathsim::{check_grid, diagonal_profile, grid, PathSample, TAG_PATH};
use crate::rng::stream;

const TAG_SEMISTABLE: u64 = TAG_PATH ^ 0x5345_4d49_0000_0000;
const DENSE_RATE: f64 = 1000.0;
const NEGLIGIBLE: f64 = 1e-12;

struct Levels {
    sizes: Vec<f64>,
    /// Half the per-step rate, one per sign.
    half_rates: Vec<f64>,
    small_sd: f64,
}

impl Levels {
    fn new(a: f64, c: f64, dt: f64, t_end: f64) -> Self {
        let lc = c.ln();
        let n_lo = ((dt / DENSE_RATE).ln() / lc).ceil() as i64;
        let n_hi = ((t_end / NEGLIGIBLE).ln() / lc).ceil() as i64;
        let (mut sizes, mut half_rates) = (Vec::new(), Vec::new());
        for n in n_lo..=n_hi {
            sizes.push(c.powf(n as f64 / a));
            half_rates.push(0.5 * c.powf(-(n as f64)) * dt);
        }
        // sum_{n < n_lo} c^(n(2/a - 1)) per unit time
        let q = c.powf(2.0 / a - 1.0);
        let var = q.powf((n_lo - 1) as f64) / (1.0 - 1.0 / q) * dt;
        Self {
            sizes,
            half_rates,
            small_sd: var.sqrt(),
        }
    }

    fn step(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut x = self.small_sd * rng.sample::<f64, _>(StandardNormal);
        for (&s, &h) in self.sizes.iter().zip(&self.half_rates) {
            let p = Poisson::new(h).expect("positive rate");
            let up: f64 = p.sample(rng);
            let down: f64 = p.sample(rng);
            x += s * (up - down);
        }
        x
    }
}

/// See the module docs. The result's profile describes the stable indices
/// the example mimics; its case label is the diagonal one.
pub fn simulate_discrete_semistable(
    alphas: &[f64],
    c: f64,
    t_end: f64,
    n_steps: usize,
    seed: u64,
) -> Result<PathSample> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("c must exceed 1, got {c}")));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a < 2.0)) {
        return Err(Error::InvalidInput(format!(
            "discrete-scale example needs indices in (0, 2), got {alphas:?}"
        )));
    }
    let profile = diagonal_profile(alphas)?;
    check_grid(t_end, n_steps)?;
    let dt = t_end / n_steps as f64;
    let levels: Vec<Levels> = alphas.iter().map(|&a| Levels::new(a, c, dt, t_end)).collect();
    let mut rng = stream(seed, TAG_SEMISTABLE, 0);
    let mut x = vec![0.0; alphas.len()];
    let mut values = vec![x.clone()];
    for _ in 0..n_steps {
        for (xj, l) in x.iter_mut().zip(&levels) {
            *xj += l.step(&mut rng);
        }
        values.push(x.clone());
    }
    Ok(PathSample {
        times: grid(t_end, n_steps),
        values,
        profile,
        seed,
    })
}
