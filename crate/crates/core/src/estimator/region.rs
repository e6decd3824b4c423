//! Importance-sampled shell integrals.
//!
//! The first `k - 1` points are drawn from a heavy-tailed proposal; the last
//! point is integrated out exactly over its admissible band, which for fixed
//! partial sums is a union of four unit squares minus a disk.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::stats::Moments;
use crate::kernels::{KernelSpec, KernelVariant, RegionSpec};
use crate::quadrature::gl16_unit;
use crate::rng::{blocks, stream, BLOCK};

/// Monte Carlo estimate of a shell integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub region: RegionSpec<f64>,
    pub kernel: KernelSpec<f64>,
}

/// Integrand of one point, evaluated at coordinate magnitudes.
#[derive(Debug, Clone, Copy)]
enum Factor {
    /// `1 / (c1 u^a1 + c2 v^a2)`, separable inside the band.
    Power { a1: f64, a2: f64, c1: f64, c2: f64 },
    /// `(u + v ln sqrt(u^2 + v^2))^-a`
    Log { a: f64 },
}

impl Factor {
    fn from_kernel(kernel: &KernelSpec<f64>) -> Result<Self> {
        if kernel.dim() != 2 {
            return Err(Error::InvalidInput("shell integrals are planar".into()));
        }
        let (a1, a2) = (kernel.alphas[0], kernel.alphas[1]);
        Ok(match kernel.variant {
            KernelVariant::Anisotropic => Factor::Power { a1, a2, c1: 1.0, c2: 1.0 },
            KernelVariant::TrueExponent => {
                let c = kernel.coefficients.as_deref().unwrap_or(&[1.0, 1.0]);
                Factor::Power { a1, a2, c1: c[0], c2: c[1] }
            }
            KernelVariant::LogCorrected => Factor::Log { a: a1 },
        })
    }

    #[inline]
    fn eval(&self, u: f64, v: f64) -> f64 {
        match *self {
            Factor::Power { a1, a2, c1, c2 } => 1.0 / (c1 * u.powf(a1) + c2 * v.powf(a2)),
            Factor::Log { a } => (u + v * u.hypot(v).ln()).powf(-a),
        }
    }
}

/// Exact-limit quadrature of one point's factor over planar bands.
struct Band {
    factor: Factor,
    rho: f64,
}

/// Splits `[lo, lo + w]` at zero and returns magnitude intervals.
fn magnitude_pieces(lo: f64, hi: f64, out: &mut Vec<(f64, f64)>) {
    if lo >= 0.0 {
        out.push((lo, hi));
    } else if hi <= 0.0 {
        out.push((-hi, -lo));
    } else {
        out.push((0.0, -lo));
        out.push((0.0, hi));
    }
}

impl Band {
    /// `∫∫ f` over `[a,b] x [c,d]` (magnitudes), full tensor rule.
    fn tensor(&self, a: f64, b: f64, c: f64, d: f64) -> f64 {
        let (xs, ws) = gl16_unit();
        let (hu, hv) = (b - a, d - c);
        match self.factor {
            Factor::Power { a1, a2, c1, c2 } => {
                let mut pu = [0.0; 16];
                let mut pv = [0.0; 16];
                for i in 0..16 {
                    pu[i] = c1 * (a + hu * xs[i]).powf(a1);
                    pv[i] = c2 * (c + hv * xs[i]).powf(a2);
                }
                let mut s = 0.0;
                for i in 0..16 {
                    let mut row = 0.0;
                    for j in 0..16 {
                        row += ws[j] / (pu[i] + pv[j]);
                    }
                    s += ws[i] * row;
                }
                s * hu * hv
            }
            Factor::Log { .. } => {
                let mut s = 0.0;
                for i in 0..16 {
                    let u = a + hu * xs[i];
                    let mut row = 0.0;
                    for j in 0..16 {
                        row += ws[j] * self.factor.eval(u, c + hv * xs[j]);
                    }
                    s += ws[i] * row;
                }
                s * hu * hv
            }
        }
    }

    /// `∫_{lo}^{hi} ∫_{w(u)}^{d} f dv du` with `w(u) = sqrt(rho^2 - u^2)`,
    /// using `u = rho - tau^2` to absorb the square-root edge at `u = rho`.
    fn curved(&self, lo: f64, hi: f64, d: f64) -> f64 {
        let (xs, ws) = gl16_unit();
        let rho = self.rho;
        let t_hi = (rho - lo).max(0.0).sqrt();
        let t_lo = (rho - hi).max(0.0).sqrt();
        let ht = t_hi - t_lo;
        let mut s = 0.0;
        for i in 0..16 {
            let tau = t_lo + ht * xs[i];
            let u = rho - tau * tau;
            let w = tau * (rho + u).sqrt();
            if w >= d {
                continue;
            }
            let hv = d - w;
            let mut inner = 0.0;
            for j in 0..16 {
                inner += ws[j] * self.factor.eval(u, w + hv * xs[j]);
            }
            s += ws[i] * inner * hv * 2.0 * tau;
        }
        s * ht
    }

    /// `∫∫ f` over `[a,b] x [c,d]` (magnitudes) minus the disk of radius rho.
    fn rect(&self, a: f64, b: f64, c: f64, d: f64) -> f64 {
        let r2 = self.rho * self.rho;
        if a * a + c * c >= r2 {
            return self.tensor(a, b, c, d);
        }
        if b * b + d * d <= r2 {
            return 0.0;
        }
        let u_empty = if d < self.rho { (r2 - d * d).sqrt() } else { 0.0 };
        let u_full = (r2 - c * c).sqrt();
        let mut total = 0.0;
        let lo = a.max(u_empty);
        let hi = b.min(u_full);
        if hi > lo {
            total += self.curved(lo, hi, d);
        }
        if b > u_full {
            total += self.tensor(a.max(u_full), b, c, d);
        }
        total
    }

    fn rect_refined(&self, a: f64, b: f64, c: f64, d: f64) -> f64 {
        let (mu, mv) = (0.5 * (a + b), 0.5 * (c + d));
        self.rect(a, mu, c, mv) + self.rect(mu, b, c, mv) + self.rect(a, mu, mv, d) + self.rect(mu, b, mv, d)
    }

    /// Integral of the last point's factor over
    /// `{x : q-1 <= |s1 + x1| < q, r-1 <= |s2 + x2| < r, |x| > rho}`.
    fn integral(&self, s1: f64, s2: f64, q: f64, r: f64, refined: bool) -> f64 {
        let mut p1 = Vec::with_capacity(4);
        let mut p2 = Vec::with_capacity(4);
        magnitude_pieces(q - 1.0 - s1, q - s1, &mut p1);
        magnitude_pieces(-q - s1, -q + 1.0 - s1, &mut p1);
        magnitude_pieces(r - 1.0 - s2, r - s2, &mut p2);
        magnitude_pieces(-r - s2, -r + 1.0 - s2, &mut p2);
        let mut total = 0.0;
        for &(a, b) in &p1 {
            for &(c, d) in &p2 {
                if b > a && d > c {
                    total += if refined {
                        self.rect_refined(a, b, c, d)
                    } else {
                        self.rect(a, b, c, d)
                    };
                }
            }
        }
        total
    }
}

/// Symmetric density `c min(1, |u|^(-1-g))` with `c = g / (2(1+g))`, mixed
/// 50/50 between scale 1 and scale `l`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TailProposal {
    gamma: f64,
    scale: f64,
}

impl TailProposal {
    fn base_density(&self, u: f64) -> f64 {
        let g = self.gamma;
        let c = g / (2.0 * (1.0 + g));
        let a = u.abs();
        if a <= 1.0 {
            c
        } else {
            c * a.powf(-1.0 - g)
        }
    }

    fn density(&self, u: f64) -> f64 {
        0.5 * self.base_density(u) + 0.5 * self.base_density(u / self.scale) / self.scale
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let g = self.gamma;
        let scale = if rng.gen::<bool>() { self.scale } else { 1.0 };
        let core = g / (1.0 + g);
        let x = if rng.gen::<f64>() < core {
            rng.gen_range(-1.0..1.0)
        } else {
            let m = (1.0 - rng.gen::<f64>()).powf(-1.0 / g);
            if rng.gen::<bool>() {
                m
            } else {
                -m
            }
        };
        x * scale
    }
}

/// Tail index multiplier `theta` with `gamma_j = theta alpha_j - 1`.
///
/// Weights have finite variance when `theta` exceeds `1 / alpha_min` (the
/// proposal is lighter-tailed than the squared integrand is heavy) and stays
/// below the bounds set by the partial-sum constraints on the first
/// `k - 1` points. The midpoint of that window is used.
pub(crate) fn tail_theta(alphas: (f64, f64), k: usize) -> Result<f64> {
    let (a1, a2) = alphas;
    let s = 1.0 / a1 + 1.0 / a2;
    let lower = 1.0 / a1.min(a2);
    let mut upper = f64::INFINITY;
    for j in 1..k {
        let jf = j as f64;
        upper = upper.min((jf + 1.0) / jf - s / 2.0);
        if j >= 2 {
            upper = upper.min(1.0 - (jf - 1.0) * s / (2.0 * jf));
        }
    }
    if !(upper > lower) {
        return Err(Error::ProposalMismatch(format!(
            "no tail index gives finite-variance weights for k = {k}, alphas = ({a1}, {a2}); \
             the shell integral is infinite when k - (k-1)(1/a1 + 1/a2) <= 0"
        )));
    }
    Ok(0.5 * (lower + upper))
}

pub(crate) const TAG_REGION: u64 = 0x5245_4749_4f4e;

/// `∫_{A_k(q,r)} prod_i f(x_i) dx`. For `k = 1` the band rule is used directly
/// and `std_error` is the quadrature error estimate (rule vs refined rule).
pub fn mc_region_integral(
    kernel: &KernelSpec<f64>,
    region: &RegionSpec<f64>,
    n: u64,
    seed: u64,
) -> Result<IntegralEstimate> {
    mc_region_integral_tagged(kernel, region, n, seed, 0)
}

pub(crate) fn mc_region_integral_tagged(
    kernel: &KernelSpec<f64>,
    region: &RegionSpec<f64>,
    n: u64,
    seed: u64,
    ladder_index: u64,
) -> Result<IntegralEstimate> {
    kernel.validate()?;
    region.validate()?;
    if region.subregion.is_some() {
        return Err(Error::InvalidInput(
            "sub-regions are for membership tests; integrate the full shell".into(),
        ));
    }
    let is_log = kernel.variant == KernelVariant::LogCorrected;
    if is_log != region.log_variant {
        return Err(Error::InvalidInput(
            "the log-corrected kernel goes with the log-variant shell and vice versa".into(),
        ));
    }
    let factor = Factor::from_kernel(kernel)?;
    let band = Band {
        factor,
        rho: region.floor_radius(),
    };
    let (q, r, k) = (region.q, region.r, region.k);
    let done = |value: f64, std_error: f64| IntegralEstimate {
        value,
        std_error,
        n_samples: n,
        seed,
        region: region.clone(),
        kernel: kernel.clone(),
    };

    if k == 1 {
        let coarse = band.integral(0.0, 0.0, q, r, false);
        let fine = band.integral(0.0, 0.0, q, r, true);
        return Ok(done(fine, (fine - coarse).abs()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }

    let (a1, a2) = (kernel.alphas[0], kernel.alphas[1]);
    let theta = tail_theta((a1, a2), k)?;
    let (l1, l2) = if is_log {
        let l = (q.powf(a1) + (r * r.ln()).powf(a1)).powf(1.0 / a1);
        (l, l)
    } else {
        let big_q = q.powf(a1) + r.powf(a2);
        (big_q.powf(1.0 / a1), big_q.powf(1.0 / a2))
    };
    let p1 = TailProposal {
        gamma: theta * a1 - 1.0,
        scale: l1,
    };
    let p2 = TailProposal {
        gamma: theta * a2 - 1.0,
        scale: l2,
    };
    let rho = band.rho;

    let sizes = blocks(n as usize);
    let parts: Vec<Moments> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &size)| {
            let mut rng = stream(seed, TAG_REGION ^ (ladder_index << 48), b as u64);
            let mut m = Moments::default();
            for _ in 0..size {
                let mut w = 1.0;
                let (mut s1, mut s2) = (0.0, 0.0);
                for _ in 0..k - 1 {
                    let x1 = p1.sample(&mut rng);
                    let x2 = p2.sample(&mut rng);
                    if x1.hypot(x2) <= rho {
                        w = 0.0;
                    } else if w != 0.0 {
                        w *= band.factor.eval(x1.abs(), x2.abs()) / (p1.density(x1) * p2.density(x2));
                    }
                    s1 += x1;
                    s2 += x2;
                }
                if w != 0.0 {
                    w *= band.integral(s1, s2, q, r, false);
                }
                m.push(w);
            }
            m
        })
        .collect();
    debug_assert!(sizes.iter().all(|&s| s <= BLOCK));
    let total = parts.iter().fold(Moments::default(), |acc, m| acc.merge(m));
    let mean = total.mean();
    if mean > 0.0 && total.max / mean > 1e6 {
        return Err(Error::ProposalMismatch(format!(
            "max weight / mean weight = {:.3e} exceeds 1e6",
            total.max / mean
        )));
    }
    Ok(done(mean, total.std_error()))
}
