//! Spectral classification of a stability exponent.
//!
//! The indices `alpha_j` are the reciprocals of the real parts of the
//! eigenvalues of `B`, repeated with multiplicity and sorted non-increasing.
//! The Jordan case is decided without computing a Jordan form: eigenvalues
//! are clustered, and for each real cluster the nullities of the powers of
//! `B - lambda I` are read off from singular values.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::scalar::{Field, Real};

pub const DEFAULT_TOL: f64 = 1e-8;

/// The matrix exponent `B` of an operator semistable law together with its
/// scale `c > 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityExponent<T> {
    matrix: SquareMatrix<T>,
    scale_c: T,
}

impl<T: Real> StabilityExponent<T> {
    /// Validates shape, finiteness and `c > 1`. Spectral constraints are
    /// checked by [`classify_exponent`].
    pub fn new(rows: &[Vec<T>], scale_c: T) -> Result<Self> {
        let matrix = SquareMatrix::from_rows(rows)?;
        Self::from_matrix(matrix, scale_c)
    }

    pub fn from_matrix(matrix: SquareMatrix<T>, scale_c: T) -> Result<Self> {
        if !(1..=3).contains(&matrix.dim()) {
            return Err(Error::InvalidInput(format!(
                "dimension must be 1, 2 or 3, got {}",
                matrix.dim()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        if !(scale_c.is_finite() && scale_c > T::one()) {
            return Err(Error::InvalidInput(format!(
                "scale c must be finite and > 1, got {scale_c}"
            )));
        }
        Ok(Self { matrix, scale_c })
    }

    pub fn diagonal(alphas: &[T], scale_c: T) -> Result<Self> {
        let diag: Vec<T> = alphas.iter().map(|a| a.recip()).collect();
        Self::from_matrix(SquareMatrix::diagonal(&diag), scale_c)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.matrix
    }

    pub fn scale_c(&self) -> T {
        self.scale_c
    }

    /// `B + shift * I`; used to build deliberately wrong exponents.
    pub fn shifted(&self, shift: T) -> Self {
        Self {
            matrix: self.matrix.shift(-shift),
            scale_c: self.scale_c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// d = 2, diagonalizable over the reals.
    #[serde(rename = "A1_diag")]
    A1Diag,
    /// d = 2, complex-conjugate pair.
    #[serde(rename = "A1_rot")]
    A1Rot,
    /// d = 2, single nilpotent 2-block.
    A2,
    /// d = 3, no nilpotent part (possibly with a rotation pair).
    B1,
    /// d = 3, one nilpotent 2-block.
    B2,
    /// d = 3, single nilpotent 3-block.
    B3,
    /// d = 1.
    D1,
    /// Synthetic profiles of dimension >= 4. Never produced by classification.
    #[serde(rename = "higher")]
    HigherDim,
}

impl CaseLabel {
    pub fn is_nilpotent(self) -> bool {
        matches!(self, CaseLabel::A2 | CaseLabel::B2 | CaseLabel::B3)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseLabel::A1Diag => "A1_diag",
            CaseLabel::A1Rot => "A1_rot",
            CaseLabel::A2 => "A2",
            CaseLabel::B1 => "B1",
            CaseLabel::B2 => "B2",
            CaseLabel::B3 => "B3",
            CaseLabel::D1 => "D1",
            CaseLabel::HigherDim => "higher",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A1_diag" | "A1" => CaseLabel::A1Diag,
            "A1_rot" => CaseLabel::A1Rot,
            "A2" => CaseLabel::A2,
            "B1" => CaseLabel::B1,
            "B2" => CaseLabel::B2,
            "B3" => CaseLabel::B3,
            "D1" => CaseLabel::D1,
            "higher" => CaseLabel::HigherDim,
            other => return Err(Error::InvalidInput(format!("unknown case label {other:?}"))),
        })
    }
}

/// A distinct eigenvalue real part and the dimension of its invariant subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPart<T> {
    pub value: T,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile<T> {
    pub alphas: Vec<T>,
    pub real_parts: Vec<RealPart<T>>,
    pub case_label: CaseLabel,
    pub rotation_b: Option<T>,
    pub nilpotent_block_sizes: Vec<usize>,
}

impl<T: Field> SpectralProfile<T> {
    /// Builds a profile directly from indices, bypassing any matrix. Used for
    /// alphas-only input and for synthetic higher-dimensional profiles.
    pub fn from_alphas(alphas: &[T], case_label: CaseLabel) -> Result<Self> {
        let d = alphas.len();
        if d == 0 {
            return Err(Error::InvalidInput("no indices given".into()));
        }
        if alphas.iter().any(|&a| !(a > T::zero() && a <= T::from_i64(2))) {
            return Err(Error::NonFullSpectrum(format!(
                "every index must lie in (0, 2], got {alphas:?}"
            )));
        }
        if alphas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!(
                "indices must be sorted non-increasing, got {alphas:?}"
            )));
        }
        let expected_dim = match case_label {
            CaseLabel::D1 => Some(1),
            CaseLabel::A1Diag | CaseLabel::A1Rot | CaseLabel::A2 => Some(2),
            CaseLabel::B1 | CaseLabel::B2 | CaseLabel::B3 => Some(3),
            CaseLabel::HigherDim => None,
        };
        match expected_dim {
            Some(e) if e != d => {
                return Err(Error::InvalidInput(format!(
                    "case {case_label} needs {e} indices, got {d}"
                )))
            }
            None if d < 4 => {
                return Err(Error::InvalidInput(
                    "the synthetic label is reserved for dimension >= 4".into(),
                ))
            }
            _ => {}
        }
        let all_equal = |xs: &[T]| xs.windows(2).all(|w| w[0] == w[1]);
        let nilpotent_block_sizes = match case_label {
            CaseLabel::A2 | CaseLabel::A1Rot => {
                if !all_equal(alphas) {
                    return Err(Error::InvalidInput(format!(
                        "case {case_label} requires alpha_1 = alpha_2"
                    )));
                }
                if case_label == CaseLabel::A2 {
                    vec![2]
                } else {
                    vec![]
                }
            }
            CaseLabel::B3 => {
                if !all_equal(alphas) {
                    return Err(Error::InvalidInput(
                        "case B3 requires alpha_1 = alpha_2 = alpha_3".into(),
                    ));
                }
                vec![3]
            }
            CaseLabel::B2 => {
                if !(alphas[0] == alphas[1] || alphas[1] == alphas[2]) {
                    return Err(Error::InvalidInput(
                        "case B2 requires a repeated index".into(),
                    ));
                }
                vec![2]
            }
            _ => vec![],
        };
        let mut real_parts: Vec<RealPart<T>> = Vec::new();
        for &a in alphas.iter().rev() {
            let v = Field::recip(a);
            match real_parts.last_mut() {
                Some(rp) if rp.value == v => rp.multiplicity += 1,
                _ => real_parts.push(RealPart {
                    value: v,
                    multiplicity: 1,
                }),
            }
        }
        Ok(Self {
            alphas: alphas.to_vec(),
            real_parts,
            case_label,
            rotation_b: None,
            nilpotent_block_sizes,
        })
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }
}

#[derive(Debug, Clone)]
struct Cluster<T> {
    members: Vec<Complex<T>>,
}

impl<T: Real> Cluster<T> {
    fn mean(&self) -> Complex<T> {
        let n = T::lit(self.members.len() as f64);
        let s = self
            .members
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b);
        s / n
    }
}

/// Outcome of validating a real eigenvalue cluster.
enum ClusterCheck {
    /// Genuine multiple eigenvalue with these Jordan block sizes.
    Multiple(Vec<usize>),
    /// The cluster does not behave like a single multiple eigenvalue.
    Split,
}

/// Classifies `B` into its Jordan case and extracts the indices.
///
/// `tol` drives three decisions: eigenvalues closer than
/// `sqrt(tol) * (1 + |lambda|)` are candidates for a multiple eigenvalue;
/// a singular value counts as zero when it is below `tol * sigma_max(B)^j`
/// for the j-th power; and any singular value within a factor 10 of that
/// cutoff makes the answer [`Error::AmbiguousJordan`].
pub fn classify_exponent<T: Real>(exp: &StabilityExponent<T>, tol: T) -> Result<SpectralProfile<T>> {
    if !(tol > T::zero() && tol < T::one()) {
        return Err(Error::InvalidInput(format!("tol must be in (0, 1), got {tol}")));
    }
    let b = exp.matrix();
    let d = b.dim();
    let eigs = b.eigenvalues()?;
    let two = T::lit(2.0);

    for z in &eigs {
        let a = z.re;
        if !(a > T::zero()) || a.recip() > two + tol {
            return Err(Error::NonFullSpectrum(format!(
                "eigenvalue {z} has real part {a}; indices must lie in (0, 2]"
            )));
        }
    }

    let radius = |z: Complex<T>| tol.sqrt() * (T::one() + z.norm());
    let clusters = single_linkage(&eigs, radius);

    let sigma_max = b.singular_values()[0].max(T::min_positive_value());
    let mut blocks: Vec<usize> = Vec::new();
    // (mean real part, multiplicity)
    let mut parts: Vec<(T, usize)> = Vec::new();
    let mut rotation_b: Option<T> = None;

    let mut queue = clusters;
    while let Some(cluster) = queue.pop() {
        let mean = cluster.mean();
        let m = cluster.members.len();
        let is_complex = cluster.members.iter().any(|z| z.im.abs() > radius(*z));
        if is_complex || m == 1 {
            for z in &cluster.members {
                if z.im.abs() > radius(*z) {
                    let im = z.im.abs();
                    rotation_b = Some(rotation_b.map_or(im, |r: T| r.max(im)));
                }
                parts.push((z.re, 1));
            }
            continue;
        }
        match check_cluster(b, mean.re, m, tol, sigma_max)? {
            ClusterCheck::Multiple(sizes) => {
                blocks.extend(sizes.into_iter().filter(|&s| s > 1));
                parts.push((mean.re, m));
            }
            ClusterCheck::Split => {
                // drop the member farthest from the mean and retry
                let (far, _) = cluster
                    .members
                    .iter()
                    .enumerate()
                    .map(|(i, z)| (i, (*z - mean).norm()))
                    .fold((0, T::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
                let mut rest = cluster.members.clone();
                let lone = rest.remove(far);
                queue.push(Cluster { members: vec![lone] });
                queue.push(Cluster { members: rest });
            }
        }
    }

    // group real parts (complex pairs share theirs)
    parts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut real_parts: Vec<RealPart<T>> = Vec::new();
    for (v, mult) in parts {
        match real_parts.last_mut() {
            Some(rp) if (rp.value - v).abs() <= tol * (T::one() + v.abs()) => {
                let total = rp.multiplicity + mult;
                rp.value = (rp.value * T::lit(rp.multiplicity as f64) + v * T::lit(mult as f64))
                    / T::lit(total as f64);
                rp.multiplicity = total;
            }
            _ => real_parts.push(RealPart {
                value: v,
                multiplicity: mult,
            }),
        }
    }
    let mut alphas: Vec<T> = Vec::with_capacity(d);
    for rp in &real_parts {
        // a slightly below 1/2 is tolerated as index 2
        let alpha = rp.value.recip().min(two);
        alphas.extend(std::iter::repeat_n(alpha, rp.multiplicity));
    }

    blocks.sort_unstable_by(|a, b| b.cmp(a));
    let case_label = match d {
        1 => CaseLabel::D1,
        2 if rotation_b.is_some() => CaseLabel::A1Rot,
        2 if !blocks.is_empty() => CaseLabel::A2,
        2 => CaseLabel::A1Diag,
        _ if blocks.contains(&3) => CaseLabel::B3,
        _ if blocks.contains(&2) => CaseLabel::B2,
        _ => CaseLabel::B1,
    };

    Ok(SpectralProfile {
        alphas,
        real_parts,
        case_label,
        rotation_b,
        nilpotent_block_sizes: blocks,
    })
}

fn single_linkage<T: Real>(eigs: &[Complex<T>], radius: impl Fn(Complex<T>) -> T) -> Vec<Cluster<T>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let r = radius(eigs[i]).max(radius(eigs[j]));
            if (eigs[i] - eigs[j]).norm() < r {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut out: Vec<(usize, Cluster<T>)> = Vec::new();
    for (i, &z) in eigs.iter().enumerate() {
        let root = find(&mut parent, i);
        match out.iter_mut().find(|(r, _)| *r == root) {
            Some((_, c)) => c.members.push(z),
            None => out.push((root, Cluster { members: vec![z] })),
        }
    }
    out.into_iter().map(|(_, c)| c).collect()
}

fn check_cluster<T: Real>(
    b: &SquareMatrix<T>,
    lambda: T,
    m: usize,
    tol: T,
    sigma_max: T,
) -> Result<ClusterCheck> {
    let shifted = b.shift(lambda);
    let mut power = SquareMatrix::identity(b.dim());
    let mut nullities = vec![0usize];
    for j in 1..=m {
        power = power.matmul(&shifted);
        let cutoff = tol * sigma_max.powi(j as i32);
        let sv = power.singular_values();
        if let Some(s) = sv
            .iter()
            .find(|&&s| s > cutoff / T::lit(10.0) && s < cutoff * T::lit(10.0))
        {
            return Err(Error::AmbiguousJordan(format!(
                "singular value {s} of (B - {lambda} I)^{j} is within 10x of the cutoff {cutoff}"
            )));
        }
        nullities.push(sv.iter().filter(|&&s| s <= cutoff).count());
    }
    if nullities[1] == 0 || nullities[m] != m {
        return Ok(ClusterCheck::Split);
    }
    // blocks of size >= j
    let at_least: Vec<usize> = (1..=m).map(|j| nullities[j] - nullities[j - 1]).collect();
    let mut sizes = Vec::new();
    for j in 1..=m {
        let next = if j < m { at_least[j] } else { 0 };
        let exactly = at_least[j - 1].saturating_sub(next);
        sizes.extend(std::iter::repeat_n(j, exactly));
    }
    Ok(ClusterCheck::Multiple(sizes))
}

/// `t^B = exp(ln(t) B)`.
pub fn matrix_power_cb<T: Real>(exp: &StabilityExponent<T>, t: T) -> Result<SquareMatrix<T>> {
    if !(t > T::zero() && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive and finite, got {t}")));
    }
    Ok(exp.matrix().scale(t.ln()).expm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp2(rows: &[[f64; 2]; 2]) -> StabilityExponent<f64> {
        StabilityExponent::new(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), 2.0).unwrap()
    }

    fn exp3(rows: &[[f64; 3]; 3]) -> StabilityExponent<f64> {
        StabilityExponent::new(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), 2.0).unwrap()
    }

    #[test]
    fn diagonal_case() {
        let e = exp2(&[[1.0 / 1.8, 0.0], [0.0, 1.0 / 1.5]]);
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.case_label, CaseLabel::A1Diag);
        assert_relative_eq!(p.alphas[0], 1.8, max_relative = 1e-14);
        assert_relative_eq!(p.alphas[1], 1.5, max_relative = 1e-14);
        assert!(p.nilpotent_block_sizes.is_empty());
    }

    #[test]
    fn jordan_block_2() {
        let e = exp2(&[[0.75, 0.0], [1.0, 0.75]]);
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.case_label, CaseLabel::A2);
        assert_eq!(p.nilpotent_block_sizes, vec![2]);
        assert_relative_eq!(p.alphas[0], 4.0 / 3.0, max_relative = 1e-12);
        assert_eq!(p.alphas[0], p.alphas[1]);
        assert_eq!(p.real_parts.len(), 1);
        assert_eq!(p.real_parts[0].multiplicity, 2);
    }

    #[test]
    fn rotation_case() {
        let e = exp2(&[[0.6, -1.0], [1.0, 0.6]]);
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.case_label, CaseLabel::A1Rot);
        assert_relative_eq!(p.alphas[0], 5.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(p.alphas[1], 5.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(p.rotation_b.unwrap(), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn jordan_block_3() {
        let t = 2.0 / 3.0;
        let e = exp3(&[[t, 0.0, 0.0], [1.0, t, 0.0], [0.0, 1.0, t]]);
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.case_label, CaseLabel::B3);
        assert_eq!(p.nilpotent_block_sizes, vec![3]);
        for a in &p.alphas {
            assert_relative_eq!(*a, 1.5, max_relative = 1e-10);
        }
    }

    #[test]
    fn scalar_multiple_of_identity_is_semisimple() {
        let e = exp2(&[[0.5, 0.0], [0.0, 0.5]]);
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.case_label, CaseLabel::A1Diag);
        assert_eq!(p.alphas, vec![2.0, 2.0]);
    }

    #[test]
    fn b2_with_separate_third() {
        let e = exp3(&[[0.6, 0.0, 0.0], [1.0, 0.6, 0.0], [0.0, 0.0, 0.8]]);
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.case_label, CaseLabel::B2);
        assert_relative_eq!(p.alphas[0], 1.0 / 0.6, max_relative = 1e-12);
        assert_relative_eq!(p.alphas[2], 1.25, max_relative = 1e-12);
    }

    #[test]
    fn d1() {
        let e = StabilityExponent::new(&[vec![0.8]], 3.0).unwrap();
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.case_label, CaseLabel::D1);
        assert_relative_eq!(p.alphas[0], 1.25);
    }

    #[test]
    fn rejects_index_above_two() {
        let e = exp2(&[[0.4, 0.0], [0.0, 0.7]]);
        assert!(matches!(
            classify_exponent(&e, DEFAULT_TOL),
            Err(Error::NonFullSpectrum(_))
        ));
        let e = exp2(&[[-0.4, 0.0], [0.0, 0.7]]);
        assert!(matches!(
            classify_exponent(&e, DEFAULT_TOL),
            Err(Error::NonFullSpectrum(_))
        ));
    }

    #[test]
    fn index_at_two_within_tol_is_clamped() {
        let e = exp2(&[[0.5 - 1e-12, 0.0], [0.0, 0.7]]);
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.alphas[0], 2.0);
    }

    #[test]
    fn near_cutoff_is_ambiguous() {
        // off-diagonal coupling at the cutoff scale
        let e = exp2(&[[0.75, 0.0], [1e-8, 0.75]]);
        assert!(matches!(
            classify_exponent(&e, DEFAULT_TOL),
            Err(Error::AmbiguousJordan(_))
        ));
    }

    #[test]
    fn close_but_distinct_eigenvalues_split() {
        let e = exp2(&[[0.75, 0.0], [0.0, 0.75 + 1e-5]]);
        let p = classify_exponent(&e, DEFAULT_TOL).unwrap();
        assert_eq!(p.case_label, CaseLabel::A1Diag);
        assert!(p.alphas[0] > p.alphas[1]);
    }

    #[test]
    fn construction_validation() {
        assert!(StabilityExponent::new(&[vec![0.5, 0.0], vec![0.0, 0.5]], 1.0).is_err());
        assert!(StabilityExponent::new(&[vec![0.5, 0.0], vec![0.0]], 2.0).is_err());
        assert!(StabilityExponent::new(&[vec![f64::NAN]], 2.0).is_err());
        let four = vec![vec![0.5; 4]; 4];
        assert!(StabilityExponent::new(&four, 2.0).is_err());
    }

    #[test]
    fn power_examples() {
        let e = exp2(&[[0.5, 0.0], [0.0, 0.5]]);
        let m = matrix_power_cb(&e, 4.0).unwrap();
        assert_relative_eq!(m[(0, 0)], 2.0, max_relative = 1e-14);
        assert_relative_eq!(m[(1, 1)], 2.0, max_relative = 1e-14);
        assert_eq!(m[(0, 1)], 0.0);

        let e = exp2(&[[0.75, 0.0], [1.0, 0.75]]);
        let id = matrix_power_cb(&e, 1.0).unwrap();
        assert_eq!(id, SquareMatrix::identity(2));

        let m = matrix_power_cb(&e, std::f64::consts::E).unwrap();
        let g = 0.75f64.exp();
        assert_relative_eq!(m[(0, 0)], g, max_relative = 1e-13);
        assert_relative_eq!(m[(1, 0)], g, max_relative = 1e-13);
        assert_relative_eq!(m[(1, 1)], g, max_relative = 1e-13);
        assert!(m[(0, 1)].abs() < 1e-15);
        assert!(matrix_power_cb(&e, 0.0).is_err());
    }

    #[test]
    fn from_alphas_checks_case_invariants() {
        assert!(SpectralProfile::from_alphas(&[1.5, 1.2], CaseLabel::A2).is_err());
        assert!(SpectralProfile::from_alphas(&[1.2, 1.5], CaseLabel::A1Diag).is_err());
        let p = SpectralProfile::from_alphas(&[1.5, 1.5, 1.5], CaseLabel::B3).unwrap();
        assert_eq!(p.nilpotent_block_sizes, vec![3]);
        assert_eq!(p.real_parts.len(), 1);
        let p = SpectralProfile::from_alphas(&[2.0, 2.0, 2.0, 2.0], CaseLabel::HigherDim).unwrap();
        assert_eq!(p.dim(), 4);
        assert!(SpectralProfile::from_alphas(&[2.0, 2.0], CaseLabel::HigherDim).is_err());
    }
}
