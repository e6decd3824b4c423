//! Partial sums of the planar double series
//! `sum_{m,n} (m^b + n^b)^-1 (m^a1 + n^a2)^-E`, `E = k - (k-1)(1/a1 + 1/a2)`,
//! along `M = 2^j`, and bisection for the `beta` where they stop diverging.
//!
//! Shells up to `2^11` are summed term by term. Beyond that the sum over the
//! far index is replaced by its midpoint integral (error `O(f''/f) = O(M^-2)`
//! relative), keeping the near index exact up to 64.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::stats::KahanSum;
use crate::estimator::verdict::{judge, ConvergenceVerdict, Verdict};
use crate::quadrature::gl16_octaves;

const EXACT_LEVEL: u32 = 11;
const NEAR: usize = 64;
/// Default top of the ladder, `2^30`.
pub const DEFAULT_M_MAX: u64 = 1 << 30;

#[derive(Debug, Clone, Copy)]
struct Summand {
    beta: f64,
    a1: f64,
    a2: f64,
    e: f64,
}

impl Summand {
    #[inline]
    fn at(&self, m: f64, n: f64) -> f64 {
        (m.powf(self.a1) + n.powf(self.a2)).powf(-self.e) / (m.powf(self.beta) + n.powf(self.beta))
    }
}

fn check(alpha1: f64, alpha2: f64, k: u32) -> Result<f64> {
    if !(2.0 >= alpha1 && alpha1 >= alpha2 && alpha2 > 0.0) {
        return Err(Error::Domain(format!(
            "need 2 >= alpha1 >= alpha2 > 0, got ({alpha1}, {alpha2})"
        )));
    }
    if k < 2 {
        return Err(Error::Domain(format!("k must be at least 2, got {k}")));
    }
    let kf = k as f64;
    Ok(kf - (kf - 1.0) * (1.0 / alpha1 + 1.0 / alpha2))
}

/// Shell sums `D_j = S(2^j) - S(2^(j-1))` for `j = 1..=top`, with `D_0 = f(1,1)`.
fn shells(f: Summand, top: u32) -> Vec<f64> {
    let exact_top = top.min(EXACT_LEVEL);
    let mx = 1usize << exact_top;
    let pb: Vec<f64> = (0..=mx).map(|m| (m as f64).powf(f.beta)).collect();
    let p1: Vec<f64> = (0..=mx).map(|m| (m as f64).powf(f.a1)).collect();
    let p2: Vec<f64> = (0..=mx).map(|m| (m as f64).powf(f.a2)).collect();
    let term = |m: usize, n: usize| (p1[m] + p2[n]).powf(-f.e) / (pb[m] + pb[n]);

    let mut out = vec![term(1, 1)];
    for j in 1..=exact_top {
        let (lo, hi) = (1usize << (j - 1), 1usize << j);
        let mut s = KahanSum::default();
        for m in lo + 1..=hi {
            for n in 1..=hi {
                s.add(term(m, n));
            }
        }
        for m in 1..=lo {
            for n in lo + 1..=hi {
                s.add(term(m, n));
            }
        }
        out.push(s.total());
    }
    for j in exact_top + 1..=top {
        let (lo, hi) = (2f64.powi(j as i32 - 1), 2f64.powi(j as i32));
        let (l5, h5, n5) = (lo + 0.5, hi + 0.5, NEAR as f64 + 0.5);
        let mut s = KahanSum::default();
        // far m, near n exact
        for n in 1..=NEAR {
            let nf = n as f64;
            s.add(gl16_octaves(l5, h5, |x| f.at(x, nf)));
        }
        // far m, far n
        s.add(gl16_octaves(l5, h5, |x| gl16_octaves(n5, h5, |y| f.at(x, y))));
        // near m exact, far n
        for m in 1..=NEAR {
            let mf = m as f64;
            s.add(gl16_octaves(l5, h5, |y| f.at(mf, y)));
        }
        // middle m, far n
        s.add(gl16_octaves(n5, l5, |x| gl16_octaves(l5, h5, |y| f.at(x, y))));
        out.push(s.total());
    }
    out
}

/// Ladder `(M, S(M))` for `M = 1, 2, 4, ..., 2^top`.
pub fn partial_sum_ladder(alpha1: f64, alpha2: f64, k: u32, beta: f64, m_max: u64) -> Result<Vec<(f64, f64)>> {
    let e = check(alpha1, alpha2, k)?;
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 2], got {beta}")));
    }
    if m_max < 1000 {
        return Err(Error::InvalidInput(format!("m_max must be at least 1000, got {m_max}")));
    }
    let top = 63 - m_max.leading_zeros();
    let f = Summand { beta, a1: alpha1, a2: alpha2, e };
    let mut acc = KahanSum::default();
    Ok(shells(f, top)
        .into_iter()
        .enumerate()
        .map(|(j, d)| {
            acc.add(d);
            (2f64.powi(j as i32), acc.total())
        })
        .collect())
}

/// Verdict for each `beta` in the grid.
pub fn series_threshold_scan(
    alpha1: f64,
    alpha2: f64,
    k: u32,
    beta_grid: &[f64],
    m_max: u64,
) -> Result<Vec<(f64, ConvergenceVerdict)>> {
    check(alpha1, alpha2, k)?;
    if let Some(b) = beta_grid.iter().find(|&&b| !(b > 0.0 && b <= 2.0)) {
        return Err(Error::Domain(format!("beta grid must lie in (0, 2], got {b}")));
    }
    beta_grid
        .iter()
        .map(|&b| Ok((b, judge(partial_sum_ladder(alpha1, alpha2, k, b, m_max)?))))
        .collect()
}

/// Result of the threshold bisection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Midpoint between the divergent and convergent edges.
    pub value: f64,
    /// Largest `beta` not excluded from being divergent.
    pub lower: f64,
    /// Smallest `beta` known convergent (2 if none in range).
    pub upper: f64,
    /// Bracket of the smallest convergent `beta`.
    pub convergent_edge: (f64, f64),
    /// Bracket of the largest divergent `beta`.
    pub divergent_edge: (f64, f64),
    /// Whether no `beta <= 2` was convergent.
    pub saturated: bool,
    pub evaluations: usize,
}

/// Bisects for the edge of `pred` on `(0, 2]`, assuming `pred` switches
/// from `below` to `!below` once. Returns the bracket.
fn bisect_edge(mut pred: impl FnMut(f64) -> Result<bool>, below: bool, width: f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (0.0, 2.0);
    if pred(hi)? == below {
        return Ok((hi, hi));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Bisection on the series verdicts. The convergent edge (inconclusive
/// counts as not convergent) and the divergent edge are located separately;
/// the estimate is the midpoint between them.
pub fn estimate_beta_threshold(alpha1: f64, alpha2: f64, k: u32, tol: f64) -> Result<ThresholdEstimate> {
    estimate_beta_threshold_with(alpha1, alpha2, k, tol, DEFAULT_M_MAX)
}

pub fn estimate_beta_threshold_with(
    alpha1: f64,
    alpha2: f64,
    k: u32,
    tol: f64,
    m_max: u64,
) -> Result<ThresholdEstimate> {
    check(alpha1, alpha2, k)?;
    if !(tol >= 0.05) {
        return Err(Error::InvalidInput(format!("tol must be at least 0.05, got {tol}")));
    }
    let mut evaluations = 0usize;
    let mut verdict = |b: f64| -> Result<Verdict> {
        evaluations += 1;
        Ok(judge(partial_sum_ladder(alpha1, alpha2, k, b, m_max)?).verdict)
    };
    let conv = bisect_edge(|b| Ok(verdict(b)? != Verdict::Convergent), true, tol / 2.0)?;
    let div = bisect_edge(|b| Ok(verdict(b)? == Verdict::Divergent), true, tol / 2.0)?;
    let saturated = conv.0 >= 2.0;
    let value = 0.25 * (conv.0 + conv.1 + div.0 + div.1);
    Ok(ThresholdEstimate {
        value,
        lower: div.0,
        upper: conv.1,
        convergent_edge: conv,
        divergent_edge: div,
        saturated,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_matches_brute_force_where_exact() {
        let lad = partial_sum_ladder(1.8, 1.2, 2, 1.0, 1024).unwrap();
        let e = 2.0 - (1.0 / 1.8 + 1.0 / 1.2);
        let brute: f64 = (1..=64)
            .flat_map(|m| (1..=64).map(move |n| (m as f64, n as f64)))
            .map(|(m, n)| (m.powf(1.8) + n.powf(1.2)).powf(-e) / (m + n))
            .sum();
        let s64 = lad.iter().find(|p| p.0 == 64.0).unwrap().1;
        assert!((s64 - brute).abs() < 1e-12 * brute);
    }

    #[test]
    fn midpoint_shells_continue_exact_ones() {
        // shell 12 by the integral rule vs by direct summation
        let f = Summand { beta: 0.9, a1: 1.5, a2: 1.5, e: 2.0 - 2.0 / 1.5 };
        let d = shells(f, 12);
        let (lo, hi) = (2048usize, 4096usize);
        let mut s = KahanSum::default();
        for m in lo + 1..=hi {
            for n in 1..=hi {
                s.add(f.at(m as f64, n as f64));
            }
        }
        for m in 1..=lo {
            for n in lo + 1..=hi {
                s.add(f.at(m as f64, n as f64));
            }
        }
        let rel = (d[12] - s.total()).abs() / s.total();
        assert!(rel < 1e-5, "relative error {rel}");
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(series_threshold_scan(1.8, 1.2, 2, &[0.0], 4096).is_err());
        assert!(series_threshold_scan(1.8, 1.2, 2, &[1.0], 10).is_err());
        assert!(estimate_beta_threshold(1.8, 1.2, 2, 0.01).is_err());
    }
}
