//! Truncated intersection integral
//! `∫_{|x| <= R} 1/(1 + kappa(sum x_j)) prod_{j<k} 1/(1 + kappa(x_j)) dx`
//! over `R^{d(k-1)}`, on a ladder of radii from a single set of samples.
//!
//! Variables are `x_1 .. x_{k-2}` and `s = x_1 + ... + x_{k-1}` (unit
//! Jacobian). Each is drawn from a radial proposal: a unit-ball core, and a
//! log-uniform radius with uniform direction outside it.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::stats::KahanSum;
use crate::estimator::verdict::{judge, ConvergenceVerdict};
use crate::kernels::{kernel_eval, KernelSpec, KernelVariant};
use crate::rng::{blocks, stream};

const CORE_WEIGHT: f64 = 0.2;
const TAG_INTERSECTION: u64 = 0x494e_5445_5253;

struct Radial {
    d: usize,
    ln_rmax: f64,
    ball_volume: f64,
}

impl Radial {
    fn new(d: usize, rmax: f64) -> Self {
        let ball_volume = match d {
            1 => 2.0,
            2 => std::f64::consts::PI,
            _ => 4.0 / 3.0 * std::f64::consts::PI,
        };
        Self {
            d,
            ln_rmax: rmax.ln(),
            ball_volume,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> f64 {
        let d = self.d;
        let mut n2 = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            n2 += *v * *v;
        }
        let n = n2.sqrt();
        let radius = if rng.gen::<f64>() < CORE_WEIGHT {
            rng.gen::<f64>().powf(1.0 / d as f64)
        } else {
            (self.ln_rmax * rng.gen::<f64>()).exp()
        };
        for v in out.iter_mut() {
            *v *= radius / n;
        }
        self.density(radius)
    }

    fn density(&self, radius: f64) -> f64 {
        let d = self.d as f64;
        if radius < 1.0 {
            CORE_WEIGHT / self.ball_volume
        } else {
            let surface = d * self.ball_volume;
            (1.0 - CORE_WEIGHT) / (self.ln_rmax * surface * radius.powf(d))
        }
    }
}

/// Ladder of truncated integrals and the resulting verdict.
pub fn intersection_integral_verdict(
    kernel: &KernelSpec<f64>,
    k: usize,
    d: usize,
    radius_ladder: &[f64],
    n: u64,
    seed: u64,
) -> Result<ConvergenceVerdict> {
    kernel.validate()?;
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidInput(format!("d must be 1, 2 or 3, got {d}")));
    }
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be at least 2, got {k}")));
    }
    if kernel.dim() != d {
        return Err(Error::InvalidInput(format!(
            "kernel has {} indices, expected {d}",
            kernel.dim()
        )));
    }
    if kernel.variant == KernelVariant::LogCorrected {
        return Err(Error::InvalidInput(
            "the log-corrected kernel is undefined near the origin; use the anisotropic kernel".into(),
        ));
    }
    if radius_ladder.len() < 3
        || radius_ladder[0] <= 0.0
        || radius_ladder.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(Error::InvalidInput(
            "radius ladder needs at least 3 positive increasing radii".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let r_top = *radius_ladder.last().unwrap();
    let rmax = ((k - 1) as f64).sqrt() * r_top * 1.01;
    let radial = Radial::new(d, rmax.max(2.0));
    let vars = k - 1;
    let nl = radius_ladder.len();

    let sizes = blocks(n as usize);
    let parts: Vec<Vec<KahanSum>> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &size)| {
            let mut rng = stream(seed, TAG_INTERSECTION, b as u64);
            let mut buckets = vec![KahanSum::default(); nl];
            let mut xs = vec![0.0; vars * d];
            let mut last = vec![0.0; d];
            for _ in 0..size {
                let mut dens = 1.0;
                for v in 0..vars {
                    dens *= radial.sample(&mut rng, &mut xs[v * d..(v + 1) * d]);
                }
                // xs[0..k-2] are x_j, xs[k-2] is s; recover x_{k-1}
                let s = &xs[(vars - 1) * d..vars * d];
                last.copy_from_slice(s);
                for v in 0..vars - 1 {
                    for c in 0..d {
                        last[c] -= xs[v * d + c];
                    }
                }
                let mut norm2: f64 = last.iter().map(|x| x * x).sum();
                let mut f = 1.0 / (1.0 + kernel_eval(kernel, s).unwrap_or(f64::INFINITY));
                f /= 1.0 + kernel_eval(kernel, &last).unwrap_or(f64::INFINITY);
                for v in 0..vars - 1 {
                    let x = &xs[v * d..(v + 1) * d];
                    norm2 += x.iter().map(|x| x * x).sum::<f64>();
                    f /= 1.0 + kernel_eval(kernel, x).unwrap_or(f64::INFINITY);
                }
                let norm = norm2.sqrt();
                if let Some(i) = radius_ladder.iter().position(|&r| norm <= r) {
                    buckets[i].add(f / dens);
                }
            }
            buckets
        })
        .collect();
    let mut totals = vec![KahanSum::default(); nl];
    for part in &parts {
        for (t, p) in totals.iter_mut().zip(part) {
            t.add(p.total());
        }
    }
    let mut acc = 0.0;
    let ladder: Vec<(f64, f64)> = radius_ladder
        .iter()
        .zip(&totals)
        .map(|(&r, t)| {
            acc += t.total();
            (r, acc / n as f64)
        })
        .collect();
    Ok(judge(ladder))
}
