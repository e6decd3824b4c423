//! Execution of a validated plan. Nothing here touches the file system.

use anyhow::Result;
use levy_multipoint::closedform::DimensionReport;
use levy_multipoint::estimator::{
    asymptotic_exponent_run, estimate_beta_threshold_with, intersection_integral_verdict, series_threshold_scan,
    Direction, ExponentRun, Verdict,
};
use levy_multipoint::pathsim::{
    close_approach_scan, scaling_check, simulate_diagonal_stable_batch, simulate_discrete_semistable, Candidate,
    PathSample,
};
use levy_multipoint::{
    beta_threshold_r2, classify_exponent, exists_multiple, Error, Exponent, Field, KernelSpec, Profile,
    SpectralProfile,
};
use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{default_case, variant_name, ExponentInput, Plan, ScanPlan};
use crate::output::{Artifact, Cell, Csv};

/// What a run produced.
pub struct Outcome {
    pub summary: Value,
    /// Human-readable text for stderr.
    pub table: Option<String>,
    pub artifacts: Vec<Artifact>,
    /// A verdict came back inconclusive, or a scaling test rejected.
    pub inconclusive: bool,
}

impl Outcome {
    fn new(summary: Value, artifacts: Vec<Artifact>) -> Self {
        Self {
            summary,
            table: None,
            artifacts,
            inconclusive: false,
        }
    }
}

type Exact = Ratio<i128>;

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn float_profile(input: &ExponentInput, c: f64, tol: f64) -> Result<Profile> {
    Ok(match input {
        ExponentInput::Matrix(rows) => classify_exponent(&Exponent::new(rows, c)?, tol)?,
        ExponentInput::Alphas { values, case, .. } => {
            let case = case.unwrap_or_else(|| default_case(values.len()));
            SpectralProfile::from_alphas(&sorted_desc(values), case)?
        }
    })
}

fn to_float_report<F: Field>(r: &DimensionReport<F>) -> DimensionReport<f64> {
    DimensionReport {
        k: r.k,
        dim_value: r.dim_value.map(Field::to_f64),
        dim_clamped: r.dim_clamped.to_f64(),
        exists: r.exists,
        boundary_case: r.boundary_case,
        formula_terms: r.formula_terms.map(|(a, b)| (a.to_f64(), b.to_f64())),
        source: r.source,
    }
}

fn report_table(alphas: &[f64], label: &str, r: &DimensionReport<f64>) -> String {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    let mut s = String::new();
    s.push_str(&format!("{:<16}{}\n", "indices", alphas.iter().map(|a| format!("{a:.6}")).collect::<Vec<_>>().join(", ")));
    s.push_str(&format!("{:<16}{label}\n", "case"));
    s.push_str(&format!("{:<16}{}\n", "k", r.k));
    s.push_str(&format!("{:<16}{}\n", "dimension", opt(r.dim_value)));
    s.push_str(&format!("{:<16}{:.6}\n", "clamped", r.dim_clamped));
    s.push_str(&format!("{:<16}{}\n", "exists", r.exists));
    s.push_str(&format!("{:<16}{}\n", "boundary case", r.boundary_case));
    if let Some((a, b)) = r.formula_terms {
        s.push_str(&format!("{:<16}{a:.6}, {b:.6}\n", "formula terms"));
    }
    s.push_str(&format!("{:<16}{:?}\n", "decided by", r.source));
    s
}

fn json_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn report(input: &ExponentInput, c: f64, tol: f64, k: u32, dim_only: bool) -> Result<Outcome> {
    let exact = match input {
        ExponentInput::Alphas { exact: Some(ex), case, .. } => {
            let mut ex: Vec<Exact> = ex.iter().map(|r| Exact::new(*r.numer() as i128, *r.denom() as i128)).collect();
            ex.sort_by(|a, b| b.cmp(a));
            let case = case.unwrap_or_else(|| default_case(ex.len()));
            Some(SpectralProfile::from_alphas(&ex, case)?)
        }
        _ => None,
    };
    let profile = float_profile(input, c, tol)?;
    if dim_only && profile.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "the dimension formula is planar; got {} indices (use `exists` for existence)",
            profile.dim()
        ))
        .into());
    }
    let mut artifacts = Vec::new();
    let float_report = match &exact {
        Some(p) => {
            let r = exists_multiple(p, k)?;
            artifacts.push(Artifact::json("report_exact.json", &r)?);
            to_float_report(&r)
        }
        None => exists_multiple(&profile, k)?,
    };
    artifacts.insert(0, Artifact::json("report.json", &float_report)?);
    let table = report_table(&profile.alphas, &profile.case_label.to_string(), &float_report);
    let mut out = Outcome::new(json_value(&float_report)?, artifacts);
    out.table = Some(table);
    Ok(out)
}

fn region_csv(run: &ExponentRun) -> Csv {
    let mut csv = Csv::new(&["q", "r", "estimate", "std_error", "n"]);
    for e in &run.estimates {
        csv.row(&[
            Cell::F(e.region.q),
            Cell::F(e.region.r),
            Cell::F(e.value),
            Cell::F(e.std_error),
            Cell::I(e.n_samples),
        ]);
    }
    csv
}

fn shell_fit(
    kernel: KernelSpec<f64>,
    k: usize,
    direction: Direction,
    ladder: &[(f64, f64)],
    samples: u64,
    seed: u64,
) -> Result<Outcome> {
    let run = asymptotic_exponent_run(&kernel, k, direction, ladder, samples, seed)?;
    let summary = json!({
        "kernel": variant_name(kernel.variant),
        "alphas": kernel.alphas,
        "k": k,
        "slope": run.fit.slope,
        "target_slope": run.target_slope,
        "r_squared": run.fit.r_squared,
        "slope_std_error": run.fit.slope_std_error,
    });
    let artifacts = vec![
        Artifact::csv("region.csv", region_csv(&run)),
        Artifact::json("fit.json", &run.fit)?,
        Artifact::json("run.json", &run)?,
    ];
    Ok(Outcome::new(summary, artifacts))
}

fn threshold(alphas: [f64; 2], k: u32, grid: Option<&[f64]>, m_max: u64, tol: f64) -> Result<Outcome> {
    let [a1, a2] = alphas;
    let mut artifacts = Vec::new();
    let mut inconclusive = false;
    let mut scan_summary = Value::Null;
    if let Some(grid) = grid {
        let scan = series_threshold_scan(a1, a2, k, grid, m_max)?;
        let mut csv = Csv::new(&["beta", "M", "partial_sum"]);
        for (beta, v) in &scan {
            for &(m, s) in &v.ladder {
                csv.row(&[Cell::F(*beta), Cell::I(m as u64), Cell::F(s)]);
            }
        }
        inconclusive = scan.iter().any(|(_, v)| v.verdict == Verdict::Inconclusive);
        scan_summary = scan
            .iter()
            .map(|(b, v)| json!({"beta": b, "verdict": v.verdict, "tail_exponent": v.tail_exponent}))
            .collect();
        artifacts.push(Artifact::csv("scan.csv", csv));
        artifacts.push(Artifact::json("verdicts.json", &scan)?);
    }
    let est = estimate_beta_threshold_with(a1, a2, k, tol, m_max)?;
    let closed = beta_threshold_r2(a1, a2, k)?;
    artifacts.push(Artifact::json("threshold.json", &est)?);
    let mut out = Outcome::new(
        json!({
            "alphas": alphas,
            "k": k,
            "estimate": est.value,
            "bracket": [est.lower, est.upper],
            "saturated": est.saturated,
            "closed_form": closed,
            "scan": scan_summary,
        }),
        artifacts,
    );
    out.inconclusive = inconclusive;
    Ok(out)
}

fn intersection(alphas: &[f64], k: usize, d: usize, radii: &[f64], samples: u64, seed: u64) -> Result<Outcome> {
    let kernel = KernelSpec::anisotropic(alphas)?;
    let v = intersection_integral_verdict(&kernel, k, d, radii, samples, seed)?;
    let mut csv = Csv::new(&["radius", "partial_value"]);
    for &(r, p) in &v.ladder {
        csv.row(&[Cell::F(r), Cell::F(p)]);
    }
    let mut out = Outcome::new(
        json!({"alphas": alphas, "k": k, "d": d, "verdict": v.verdict, "tail_exponent": v.tail_exponent}),
        vec![Artifact::csv("ladder.csv", csv), Artifact::json("verdict.json", &v)?],
    );
    out.inconclusive = v.verdict == Verdict::Inconclusive;
    Ok(out)
}

fn path_csv(p: &PathSample) -> Csv {
    let d = p.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|j| format!("x{j}")));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&refs);
    for (t, x) in p.times.iter().zip(&p.values) {
        let mut row = vec![Cell::F(*t)];
        row.extend(x.iter().map(|&v| Cell::F(v)));
        csv.row(&row);
    }
    csv
}

#[derive(Serialize)]
struct PathCandidates {
    path: usize,
    candidates: Vec<Candidate>,
}

const TAG_SEMISTABLE_SEEDS: u64 = 0x5345_4544;

#[allow(clippy::too_many_arguments)]
fn simulate(
    alphas: &[f64],
    c: f64,
    semistable: bool,
    t_end: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    scan: Option<&ScanPlan>,
) -> Result<Outcome> {
    let paths: Vec<PathSample> = if semistable {
        let mut seeds = levy_multipoint::rng::stream(seed, TAG_SEMISTABLE_SEEDS, 0);
        let seeds: Vec<u64> = (0..n_paths).map(|_| seeds.gen()).collect();
        seeds
            .par_iter()
            .map(|&s| simulate_discrete_semistable(alphas, c, t_end, n_steps, s))
            .collect::<Result<_, _>>()?
    } else {
        simulate_diagonal_stable_batch(alphas, t_end, n_steps, n_paths, seed)?
    };
    let mut artifacts: Vec<Artifact> = if n_paths == 1 {
        vec![Artifact::csv("path.csv", path_csv(&paths[0]))]
    } else {
        paths
            .iter()
            .enumerate()
            .map(|(i, p)| Artifact::csv(&format!("paths/path_{i:05}.csv"), path_csv(p)))
            .collect()
    };
    let mut summary = json!({
        "alphas": alphas,
        "generator": if semistable { "discrete_semistable_approximate" } else { "diagonal_stable" },
        "t_end": t_end,
        "n_steps": n_steps,
        "n_paths": n_paths,
        "seed": seed,
    });
    if let Some(sp) = scan {
        let found: Vec<PathCandidates> = paths
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                close_approach_scan(p, sp.k, sp.eps, sp.min_sep).map(|candidates| PathCandidates { path: i, candidates })
            })
            .collect::<Result<_, _>>()?;
        summary["candidate_counts"] = found.iter().map(|f| f.candidates.len()).collect();
        artifacts.push(Artifact::json("candidates.json", &found)?);
    }
    Ok(Outcome::new(summary, artifacts))
}

fn scaling(alphas: &[f64], c: f64, t_end: f64, n_paths: usize, seed: u64, perturb: f64) -> Result<Outcome> {
    let profile = SpectralProfile::from_alphas(alphas, default_case(alphas.len()))?;
    // the exponent's own scale is metadata here; c only enters through c^B
    let exp = Exponent::diagonal(alphas, if c > 1.0 { c } else { 2.0 })?;
    let exp = if perturb != 0.0 { exp.shifted(perturb) } else { exp };
    let report = scaling_check(&profile, &exp, c, t_end, n_paths, seed)?;
    let mut csv = Csv::new(&["t", "coordinate", "statistic", "p_value"]);
    for e in &report.entries {
        csv.row(&[Cell::F(e.t), Cell::I(e.coordinate as u64 + 1), Cell::F(e.statistic), Cell::F(e.p_value)]);
    }
    let mut out = Outcome::new(
        json!({
            "alphas": alphas,
            "c": c,
            "perturb": perturb,
            "min_p_value": report.min_p_value(),
            "entries": report.entries,
        }),
        vec![Artifact::csv("ks.csv", csv), Artifact::json("ks.json", &report)?],
    );
    out.inconclusive = report.min_p_value() < 0.01;
    Ok(out)
}

pub fn run(plan: &Plan) -> Result<Outcome> {
    match plan {
        Plan::Analyze { input, c, tol } => {
            let p = float_profile(input, *c, *tol)?;
            Ok(Outcome::new(json_value(&p)?, vec![Artifact::json("profile.json", &p)?]))
        }
        Plan::Report { input, c, tol, k, dim_only } => report(input, *c, *tol, *k, *dim_only),
        Plan::Prop31 { alphas, k, direction, ladder, samples, seed } => {
            shell_fit(KernelSpec::anisotropic(alphas)?, *k, *direction, ladder, *samples, *seed)
        }
        Plan::Prop42 { alpha, k, direction, ladder, samples, seed } => {
            shell_fit(KernelSpec::log_corrected(*alpha)?, *k, *direction, ladder, *samples, *seed)
        }
        Plan::Threshold { alphas, k, grid, m_max, tol } => threshold(*alphas, *k, grid.as_deref(), *m_max, *tol),
        Plan::Intersection { alphas, k, d, radii, samples, seed } => {
            intersection(alphas, *k, *d, radii, *samples, *seed)
        }
        Plan::Simulate { alphas, c, semistable, t_end, n_steps, n_paths, seed, scan } => {
            simulate(alphas, *c, *semistable, *t_end, *n_steps, *n_paths, *seed, scan.as_ref())
        }
        Plan::Scaling { alphas, c, t_end, n_paths, seed, perturb } => {
            scaling(alphas, *c, *t_end, *n_paths, *seed, *perturb)
        }
    }
}
