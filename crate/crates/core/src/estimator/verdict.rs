//! Ternary convergence verdicts from a ladder of partial values.

use serde::{Deserialize, Serialize};

use crate::estimator::fit::ols;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub verdict: Verdict,
    /// Fitted exponent of the ladder increments against the radius. Zero
    /// when there were too few positive increments to fit.
    pub tail_exponent: f64,
    /// `(radius, partial value)`, radius increasing.
    pub ladder: Vec<(f64, f64)>,
}

/// Increments whose fitted decay exponent is below this are convergent.
pub const CONVERGENT_BELOW: f64 = -0.1;
/// Increments whose fitted exponent is above this are divergent.
pub const DIVERGENT_ABOVE: f64 = -0.05;
/// Rung-over-rung growth that counts as unbounded at the top of the ladder.
pub const GROWTH_PER_RUNG: f64 = 0.05;
/// How many top increments enter the fit.
pub const FIT_RUNGS: usize = 5;

/// Applies the verdict rule to a geometric ladder of partial values.
pub fn judge(ladder: Vec<(f64, f64)>) -> ConvergenceVerdict {
    let n = ladder.len();
    let incs: Vec<(f64, f64)> = (1..n)
        .map(|i| (ladder[i].0, ladder[i].1 - ladder[i - 1].1))
        .collect();
    let top = &incs[incs.len().saturating_sub(FIT_RUNGS)..];
    let pts: Vec<(f64, f64)> = top
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|&(r, d)| (r.ln(), d.ln()))
        .collect();
    let tail_exponent = if pts.len() >= 2 {
        ols(&pts).map(|f| f.slope).unwrap_or(0.0)
    } else {
        0.0
    };
    let growth = n >= 4
        && (n - 3..n).all(|i| {
            let (prev, cur) = (ladder[i - 1].1, ladder[i].1);
            prev > 0.0 && cur > prev * (1.0 + GROWTH_PER_RUNG)
        });
    let verdict = if pts.len() < 2 {
        Verdict::Inconclusive
    } else if tail_exponent < CONVERGENT_BELOW {
        Verdict::Convergent
    } else if tail_exponent > DIVERGENT_ABOVE || growth {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    ConvergenceVerdict {
        verdict,
        tail_exponent,
        ladder,
    }
}
