//! ε-approximate multiple points: `k` grid times, pairwise at least
//! `min_sep` apart, whose positions fit in one closed box of side `eps`.
//! These are candidates only; nothing here certifies a true multiple point.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathsim::PathSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Grid indices, increasing.
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
}

struct Setup {
    gap: usize,
}

fn setup(path: &PathSample, k: usize, eps: f64, min_sep: f64) -> Result<Setup> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if !(min_sep > 0.0 && min_sep.is_finite()) {
        return Err(Error::InvalidInput(format!("min_sep must be positive, got {min_sep}")));
    }
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be at least 2, got {k}")));
    }
    if path.len() < 2 {
        return Err(Error::InvalidInput("path has fewer than two points".into()));
    }
    let dt = path.times[1] - path.times[0];
    // index gap, with slack so that min_sep = m dt admits a gap of m
    let gap = ((min_sep / dt) * (1.0 - 1e-9)).ceil().max(1.0) as usize;
    Ok(Setup { gap })
}

/// Running coordinate-wise bounds of a partial tuple.
#[derive(Clone)]
struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Bounds {
    fn of(x: &[f64]) -> Self {
        Self {
            lo: x.to_vec(),
            hi: x.to_vec(),
        }
    }

    fn with(&self, x: &[f64], eps: f64) -> Option<Self> {
        let mut b = self.clone();
        for (j, &v) in x.iter().enumerate() {
            b.lo[j] = b.lo[j].min(v);
            b.hi[j] = b.hi[j].max(v);
            if b.hi[j] - b.lo[j] > eps {
                return None;
            }
        }
        Some(b)
    }
}

#[allow(clippy::too_many_arguments)]
fn extend(
    path: &PathSample,
    pool: &[usize],
    from: usize,
    chosen: &mut Vec<usize>,
    bounds: &Bounds,
    k: usize,
    eps: f64,
    gap: usize,
    out: &mut Vec<Candidate>,
) {
    if chosen.len() == k {
        out.push(Candidate {
            indices: chosen.clone(),
            times: chosen.iter().map(|&i| path.times[i]).collect(),
        });
        return;
    }
    let last = *chosen.last().unwrap();
    for (p, &j) in pool.iter().enumerate().skip(from) {
        // pool is sorted, so separation from the last pick implies it for all
        if j < last + gap {
            continue;
        }
        if let Some(b) = bounds.with(&path.values[j], eps) {
            chosen.push(j);
            extend(path, pool, p + 1, chosen, &b, k, eps, gap, out);
            chosen.pop();
        }
    }
}

fn cell(x: &[f64], eps: f64) -> Vec<i64> {
    x.iter().map(|v| (v / eps).floor() as i64).collect()
}

/// Hashes points on an `eps` grid. A tuple in a common box lies within the
/// 3^d cells around its first point, so each tuple is found once, from its
/// smallest index.
pub fn close_approach_scan(path: &PathSample, k: usize, eps: f64, min_sep: f64) -> Result<Vec<Candidate>> {
    let Setup { gap } = setup(path, k, eps, min_sep)?;
    let d = path.dim();
    let mut table: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, x) in path.values.iter().enumerate() {
        table.entry(cell(x, eps)).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut pool = Vec::new();
    let mut key = vec![0i64; d];
    for (i, x) in path.values.iter().enumerate() {
        let home = cell(x, eps);
        pool.clear();
        for off in &offsets {
            for j in 0..d {
                key[j] = home[j] + off[j];
            }
            if let Some(members) = table.get(&key) {
                let start = members.partition_point(|&m| m < i + gap);
                pool.extend(
                    members[start..]
                        .iter()
                        .copied()
                        .filter(|&m| Bounds::of(x).with(&path.values[m], eps).is_some()),
                );
            }
        }
        if pool.len() + 1 < k {
            continue;
        }
        pool.sort_unstable();
        let mut chosen = vec![i];
        extend(path, &pool, 0, &mut chosen, &Bounds::of(x), k, eps, gap, &mut out);
    }
    out.sort_by(|a, b| a.indices.cmp(&b.indices));
    Ok(out)
}

/// All-tuples reference scan, `O(n^k)`. Only for small paths.
pub fn close_approach_scan_brute(path: &PathSample, k: usize, eps: f64, min_sep: f64) -> Result<Vec<Candidate>> {
    let Setup { gap } = setup(path, k, eps, min_sep)?;
    let all: Vec<usize> = (0..path.len()).collect();
    let mut out = Vec::new();
    for i in 0..path.len() {
        let mut chosen = vec![i];
        let b = Bounds::of(&path.values[i]);
        extend(path, &all, i + 1, &mut chosen, &b, k, eps, gap, &mut out);
    }
    Ok(out)
}
