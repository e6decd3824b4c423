//! Run configuration: a JSON or TOML file merged with command-line flags,
//! then resolved into a fully validated [`Plan`] before anything runs.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use levy_multipoint::estimator::{Direction, DEFAULT_M_MAX};
use levy_multipoint::spectral::DEFAULT_TOL;
use levy_multipoint::{CaseLabel, KernelVariant, Rational};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Analyze,
    Dim,
    Exists,
    VerifyProp31,
    VerifyProp42,
    VerifyThreshold,
    VerifyIntersection,
    Simulate,
    ScalingCheck,
}

/// An index as written by the user: a number, or text such as `4/3` or
/// `1.8` that is read exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaInput {
    Number(f64),
    Text(String),
}

/// Everything a run can be configured with. Every field is optional here;
/// which ones are required depends on the command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    /// Exponent matrix as a JSON array of rows, e.g. "[[0.75,0],[1,0.75]]".
    #[arg(long, value_parser = parse_matrix)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Rows>,
    /// Indices, comma separated; fractions such as 4/3 are read exactly.
    #[arg(long, value_delimiter = ',', value_parser = parse_alpha)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<AlphaInput>>,
    /// Case label to attach to --alphas (A1_diag, A1_rot, A2, B1, B2, B3, D1, higher).
    #[arg(long = "case")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    /// Semistable scale c > 1 (default 2).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_c: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Monte Carlo samples per point.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Ladder of moving coordinates (shell fits) or radii (intersection).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
    /// Directory for report files; nothing is written without it.
    #[arg(long = "output")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Eigenvalue clustering and rank tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Bracket width for the threshold bisection (default 0.05).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_tol: Option<f64>,
    /// Exit with status 3 on an inconclusive verdict or a failed scaling test.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u64>,
    /// q_axis, r_axis or diagonal.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    /// Fixed q for an r_axis ladder.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Fixed r for a q_axis ladder.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Time horizon T.
    #[arg(long = "t-end")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    /// Ambient dimension for verify-intersection (defaults to the number of indices).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Close-approach box size for simulate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Minimum time separation for close-approach candidates.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_sep: Option<f64>,
    /// Use the discrete-scale example generator in simulate.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semistable: Option<bool>,
    /// Shift added to the exponent in scaling-check, for a control run.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturb: Option<f64>,
}

/// Matrix rows. An alias so the flag parser takes the matrix as one value.
pub type Rows = Vec<Vec<f64>>;

fn parse_matrix(s: &str) -> Result<Rows, String> {
    serde_json::from_str(s).map_err(|e| format!("matrix must be a JSON array of rows: {e}"))
}

fn parse_alpha(s: &str) -> Result<AlphaInput, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty index".into());
    }
    Ok(AlphaInput::Text(t.to_string()))
}

/// A configuration problem: reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Reads a config file, JSON or TOML by extension, with field paths in
/// error messages.
pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        let de = toml::Deserializer::new(&text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError(format!("{}: at `{}`: {}", path.display(), e.path(), e.inner().message())))
    } else {
        let mut de = serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(&mut de)
            .map_err(|e| ConfigError(format!("{}: at `{}`: {}", path.display(), e.path(), e.inner())))
    }
}

macro_rules! take {
    ($base:ident, $flags:ident, $($f:ident),*) => {
        $( if $flags.$f.is_some() { $base.$f = $flags.$f.clone(); } )*
    };
}

/// Flags win over the file. Giving either exponent input on the command
/// line replaces both from the file, so the two sources never mix.
pub fn merge(mut base: RunConfig, flags: &RunConfig) -> RunConfig {
    if flags.matrix.is_some() || flags.alphas.is_some() {
        base.matrix = None;
        base.alphas = None;
    }
    take!(
        base, flags, command, matrix, alphas, case, scale_c, k, seed, samples, ladder, output_path, tol,
        threshold_tol, strict, beta_grid, m_max, direction, q, r, t_end, n_steps, n_paths, d, eps,
        min_sep, semistable, perturb
    );
    base
}

/// Exponent as given.
#[derive(Debug, Clone)]
pub enum ExponentInput {
    Matrix(Vec<Vec<f64>>),
    Alphas {
        values: Vec<f64>,
        /// Present when every index was given as exact text.
        exact: Option<Vec<Rational>>,
        case: Option<CaseLabel>,
    },
}

#[derive(Debug, Clone)]
pub struct Common {
    pub output: Option<PathBuf>,
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct ScanPlan {
    pub k: usize,
    pub eps: f64,
    pub min_sep: f64,
}

#[derive(Debug, Clone)]
pub enum Plan {
    Analyze { input: ExponentInput, c: f64, tol: f64 },
    Report { input: ExponentInput, c: f64, tol: f64, k: u32, dim_only: bool },
    Prop31 { alphas: [f64; 2], k: usize, direction: Direction, ladder: Vec<(f64, f64)>, samples: u64, seed: u64 },
    Prop42 { alpha: f64, k: usize, direction: Direction, ladder: Vec<(f64, f64)>, samples: u64, seed: u64 },
    Threshold { alphas: [f64; 2], k: u32, grid: Option<Vec<f64>>, m_max: u64, tol: f64 },
    Intersection { alphas: Vec<f64>, k: usize, d: usize, radii: Vec<f64>, samples: u64, seed: u64 },
    Simulate { alphas: Vec<f64>, c: f64, semistable: bool, t_end: f64, n_steps: usize, n_paths: usize, seed: u64, scan: Option<ScanPlan> },
    Scaling { alphas: Vec<f64>, c: f64, t_end: f64, n_paths: usize, seed: u64, perturb: f64 },
}

/// Exact value of a decimal or fraction, if it fits.
/// Exact parsing stops here so the rational formulas stay far from `i128`
/// overflow; longer inputs are treated as floats only.
const EXACT_DIGITS: usize = 9;
const EXACT_LIMIT: i64 = 1_000_000_000;

pub fn exact_alpha(s: &str) -> Option<Rational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        let small = |x: i64| x.unsigned_abs() <= EXACT_LIMIT as u64;
        return (d != 0 && small(n) && small(d)).then(|| Rational::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if frac.len() > EXACT_DIGITS || int.len() > 3 {
        return None;
    }
    let den = 10i64.pow(frac.len() as u32);
    let num: i64 = format!("{int}{frac}").parse().ok()?;
    Some(Rational::new(num, den))
}

fn alpha_value(a: &AlphaInput) -> Result<f64, ConfigError> {
    match a {
        AlphaInput::Number(x) => Ok(*x),
        AlphaInput::Text(s) => {
            if let Some(r) = exact_alpha(s) {
                return Ok(*r.numer() as f64 / *r.denom() as f64);
            }
            s.trim().parse::<f64>().map_err(|_| ConfigError(format!("alphas: cannot read {s:?} as a number")))
        }
    }
}

fn exponent_input(cfg: &RunConfig) -> Result<ExponentInput, ConfigError> {
    match (&cfg.matrix, &cfg.alphas) {
        (Some(_), Some(_)) => bad("give exactly one of matrix and alphas, not both"),
        (None, None) => bad("one of matrix or alphas is required"),
        (Some(m), None) => {
            if cfg.case.is_some() {
                return bad("case: the case label is derived from the matrix; only give it with alphas");
            }
            Ok(ExponentInput::Matrix(m.clone()))
        }
        (None, Some(a)) => {
            if a.is_empty() {
                return bad("alphas: empty list");
            }
            let values = a.iter().map(alpha_value).collect::<Result<Vec<_>, _>>()?;
            let exact = a
                .iter()
                .map(|x| match x {
                    AlphaInput::Text(s) => exact_alpha(s),
                    AlphaInput::Number(_) => None,
                })
                .collect::<Option<Vec<_>>>();
            let case = cfg
                .case
                .as_deref()
                .map(|s| s.parse::<CaseLabel>().map_err(|e| ConfigError(format!("case: {e}"))))
                .transpose()?;
            Ok(ExponentInput::Alphas { values, exact, case })
        }
    }
}

fn need<T: Clone>(v: &Option<T>, name: &str, cmd: CommandName) -> Result<T, ConfigError> {
    v.clone()
        .ok_or_else(|| ConfigError(format!("{name} is required for {}", cmd_name(cmd))))
}

pub fn cmd_name(cmd: CommandName) -> String {
    cmd.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn positive(v: f64, name: &str) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bad(format!("{name} must be positive, got {v}"))
    }
}

/// Indices for the numerical commands: from alphas directly, or from the
/// diagonal of a diagonal matrix.
fn plain_alphas(cfg: &RunConfig, cmd: CommandName) -> Result<Vec<f64>, ConfigError> {
    match exponent_input(cfg)? {
        ExponentInput::Alphas { values, .. } => Ok(values),
        ExponentInput::Matrix(m) => {
            let n = m.len();
            if m.iter().any(|row| row.len() != n) {
                return bad("matrix: rows must all have length equal to the number of rows");
            }
            for (i, row) in m.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if i != j && v != 0.0 {
                        return bad(format!(
                            "matrix: {} needs a diagonal exponent (or alphas); entry ({i}, {j}) is {v}",
                            cmd_name(cmd)
                        ));
                    }
                }
            }
            m.iter()
                .enumerate()
                .map(|(i, row)| positive(row[i], "matrix diagonal").map(|b| 1.0 / b))
                .collect()
        }
    }
}

fn sorted_pair(alphas: &[f64], what: &str) -> Result<[f64; 2], ConfigError> {
    if alphas.len() != 2 {
        return bad(format!("alphas: {what} needs exactly two indices, got {}", alphas.len()));
    }
    Ok([alphas[0].max(alphas[1]), alphas[0].min(alphas[1])])
}

fn parse_direction(cfg: &RunConfig, default: Direction) -> Result<Direction, ConfigError> {
    cfg.direction
        .as_deref()
        .map(|s| s.parse::<Direction>().map_err(|e| ConfigError(format!("direction: {e}"))))
        .transpose()
        .map(|d| d.unwrap_or(default))
}

fn shell_ladder(cfg: &RunConfig, direction: Direction, default_fixed: Option<f64>) -> Result<Vec<(f64, f64)>, ConfigError> {
    let values = cfg.ladder.clone().unwrap_or_else(|| vec![10.0, 20.0, 40.0, 80.0, 160.0]);
    Ok(match direction {
        Direction::Diagonal => values.iter().map(|&v| (v, v)).collect(),
        Direction::QAxis => {
            let r = cfg.r.or(default_fixed).ok_or_else(|| ConfigError("r is required for a q_axis ladder".into()))?;
            values.iter().map(|&v| (v, r)).collect()
        }
        Direction::RAxis => {
            let q = cfg.q.or(default_fixed).ok_or_else(|| ConfigError("q is required for an r_axis ladder".into()))?;
            values.iter().map(|&v| (q, v)).collect()
        }
    })
}

/// Checks everything the command needs and fills defaults.
pub fn plan(cfg: &RunConfig) -> Result<(Plan, Common), ConfigError> {
    let cmd = cfg
        .command
        .ok_or_else(|| ConfigError("no command given (on the command line or as `command` in the config)".into()))?;
    let common = Common {
        output: cfg.output_path.clone(),
        strict: cfg.strict.unwrap_or(false),
    };
    let c = cfg.scale_c.unwrap_or(2.0);
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol < 1.0) {
        return bad(format!("tol must lie in (0, 1), got {tol}"));
    }
    let seed = cfg.seed.unwrap_or(1);
    let plan = match cmd {
        CommandName::Analyze => Plan::Analyze { input: exponent_input(cfg)?, c, tol },
        CommandName::Dim | CommandName::Exists => {
            let k = need(&cfg.k, "k", cmd)?;
            if k < 2 {
                return bad(format!("k must be at least 2, got {k}"));
            }
            Plan::Report { input: exponent_input(cfg)?, c, tol, k, dim_only: cmd == CommandName::Dim }
        }
        CommandName::VerifyProp31 => {
            let alphas = sorted_pair(&plain_alphas(cfg, cmd)?, "verify-prop31")?;
            let k = need(&cfg.k, "k", cmd)? as usize;
            let direction = parse_direction(cfg, Direction::Diagonal)?;
            Plan::Prop31 {
                alphas,
                k,
                direction,
                ladder: shell_ladder(cfg, direction, None)?,
                samples: cfg.samples.unwrap_or(1_000_000),
                seed,
            }
        }
        CommandName::VerifyProp42 => {
            let a = plain_alphas(cfg, cmd)?;
            if a.is_empty() || a.iter().any(|&x| x != a[0]) || a.len() > 2 {
                return bad("alphas: verify-prop42 needs one index (or two equal ones)");
            }
            let k = need(&cfg.k, "k", cmd)? as usize;
            let direction = parse_direction(cfg, Direction::RAxis)?;
            Plan::Prop42 {
                alpha: a[0],
                k,
                direction,
                ladder: shell_ladder(cfg, direction, Some(3.0))?,
                samples: cfg.samples.unwrap_or(1_000_000),
                seed,
            }
        }
        CommandName::VerifyThreshold => {
            let alphas = sorted_pair(&plain_alphas(cfg, cmd)?, "verify-threshold")?;
            Plan::Threshold {
                alphas,
                k: need(&cfg.k, "k", cmd)?,
                grid: cfg.beta_grid.clone(),
                m_max: cfg.m_max.unwrap_or(DEFAULT_M_MAX),
                tol: cfg.threshold_tol.unwrap_or(0.05),
            }
        }
        CommandName::VerifyIntersection => {
            let alphas = plain_alphas(cfg, cmd)?;
            let d = cfg.d.unwrap_or(alphas.len());
            if d != alphas.len() {
                return bad(format!("d = {d} but {} indices were given", alphas.len()));
            }
            Plan::Intersection {
                alphas,
                k: need(&cfg.k, "k", cmd)? as usize,
                d,
                radii: cfg.ladder.clone().unwrap_or_else(|| (0..8).map(|i| 4.0 * 2f64.powi(i)).collect()),
                samples: cfg.samples.unwrap_or(1_000_000),
                seed,
            }
        }
        CommandName::Simulate => {
            let alphas = plain_alphas(cfg, cmd)?;
            let t_end = positive(cfg.t_end.unwrap_or(1.0), "t_end")?;
            let scan = match cfg.eps {
                Some(eps) => Some(ScanPlan {
                    k: cfg.k.unwrap_or(2) as usize,
                    eps: positive(eps, "eps")?,
                    min_sep: positive(cfg.min_sep.unwrap_or(0.1 * t_end), "min_sep")?,
                }),
                None => None,
            };
            let n_paths = cfg.n_paths.unwrap_or(1);
            if n_paths == 0 {
                return bad("n_paths must be at least 1");
            }
            Plan::Simulate {
                alphas,
                c,
                semistable: cfg.semistable.unwrap_or(false),
                t_end,
                n_steps: cfg.n_steps.unwrap_or(1000),
                n_paths,
                seed,
                scan,
            }
        }
        CommandName::ScalingCheck => {
            let mut alphas = plain_alphas(cfg, cmd)?;
            alphas.sort_by(|a, b| b.total_cmp(a));
            Plan::Scaling {
                alphas,
                c: positive(c, "scale_c")?,
                t_end: positive(cfg.t_end.unwrap_or(1.0), "t_end")?,
                n_paths: cfg.n_paths.unwrap_or(10_000),
                seed,
                perturb: cfg.perturb.unwrap_or(0.0),
            }
        }
    };
    Ok((plan, common))
}

/// Default case label for indices given without one.
pub fn default_case(d: usize) -> CaseLabel {
    match d {
        1 => CaseLabel::D1,
        2 => CaseLabel::A1Diag,
        3 => CaseLabel::B1,
        _ => CaseLabel::HigherDim,
    }
}

pub fn variant_name(v: KernelVariant) -> &'static str {
    match v {
        KernelVariant::Anisotropic => "anisotropic",
        KernelVariant::LogCorrected => "log_corrected",
        KernelVariant::TrueExponent => "true_exponent",
    }
}
