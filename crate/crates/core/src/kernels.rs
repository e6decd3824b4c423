//! Anisotropic kernels standing in for `1 + Psi` and the shell regions
//! `A_k(q, r)` the integral estimates are taken over.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    /// `sum_j |x_j|^alpha_j`
    Anisotropic,
    /// `|x_1|^a + |x_2|^a (ln |x|)^a`, planar, for `|x| >= e`.
    LogCorrected,
    /// `sum_j c_j |x_j|^alpha_j`, the exponent of a diagonal stable law.
    TrueExponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    pub variant: KernelVariant,
    pub alphas: Vec<T>,
    pub cutoff_radius: T,
    #[serde(default)]
    pub coefficients: Option<Vec<T>>,
}

impl<T: Real> KernelSpec<T> {
    pub fn anisotropic(alphas: &[T]) -> Result<Self> {
        Self::validated(KernelVariant::Anisotropic, alphas.to_vec(), T::one(), None)
    }

    pub fn log_corrected(alpha: T) -> Result<Self> {
        Self::validated(KernelVariant::LogCorrected, vec![alpha, alpha], T::E(), None)
    }

    pub fn true_exponent(alphas: &[T], coefficients: &[T]) -> Result<Self> {
        Self::validated(
            KernelVariant::TrueExponent,
            alphas.to_vec(),
            T::one(),
            Some(coefficients.to_vec()),
        )
    }

    pub fn validated(
        variant: KernelVariant,
        alphas: Vec<T>,
        cutoff_radius: T,
        coefficients: Option<Vec<T>>,
    ) -> Result<Self> {
        let spec = Self {
            variant,
            alphas,
            cutoff_radius,
            coefficients,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Re-checks the invariants, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        let two = T::lit(2.0);
        if self.alphas.is_empty() || self.alphas.iter().any(|&a| !(a > T::zero() && a <= two)) {
            return Err(Error::InvalidInput(format!(
                "kernel indices must lie in (0, 2], got {:?}",
                self.alphas
            )));
        }
        if !(self.cutoff_radius >= T::one()) {
            return Err(Error::InvalidInput("cutoff radius must be >= 1".into()));
        }
        match self.variant {
            KernelVariant::LogCorrected => {
                if self.alphas.len() != 2 || self.alphas[0] != self.alphas[1] {
                    return Err(Error::InvalidInput(
                        "the log-corrected kernel is planar with equal indices".into(),
                    ));
                }
                if self.cutoff_radius < T::E() {
                    return Err(Error::InvalidInput(
                        "the log-corrected kernel needs cutoff radius >= e".into(),
                    ));
                }
            }
            KernelVariant::TrueExponent => match &self.coefficients {
                Some(c) if c.len() == self.alphas.len() && c.iter().all(|&v| v > T::zero()) => {}
                _ => {
                    return Err(Error::InvalidInput(
                        "true exponent needs one positive coefficient per index".into(),
                    ))
                }
            },
            KernelVariant::Anisotropic => {}
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, kernel expects {}",
                x.len(),
                self.dim()
            )));
        }
        if self.variant == KernelVariant::LogCorrected && norm(x) < T::E() {
            return Err(Error::Domain(format!(
                "log-corrected kernel is defined for |x| >= e, got |x| = {}",
                norm(x)
            )));
        }
        Ok(())
    }
}

fn norm<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()
}

/// `kappa(x)` for the given kernel.
pub fn kernel_eval<T: Real>(spec: &KernelSpec<T>, x: &[T]) -> Result<T> {
    spec.check_point(x)?;
    Ok(match spec.variant {
        KernelVariant::Anisotropic => x
            .iter()
            .zip(&spec.alphas)
            .fold(T::zero(), |s, (&v, &a)| s + v.abs().powf(a)),
        KernelVariant::LogCorrected => {
            let a = spec.alphas[0];
            let l = norm(x).ln();
            x[0].abs().powf(a) + x[1].abs().powf(a) * l.powf(a)
        }
        KernelVariant::TrueExponent => {
            let c = spec.coefficients.as_deref().unwrap_or(&[]);
            x.iter()
                .zip(&spec.alphas)
                .zip(c)
                .fold(T::zero(), |s, ((&v, &a), &cj)| s + cj * v.abs().powf(a))
        }
    })
}

/// Per-point factor integrated over the shell regions: `1 / kappa(x)`, or
/// `(|x_1| + |x_2| ln|x|)^-a` for the log-corrected kernel. The two forms of
/// the latter are comparable; this one is what the shell estimate is stated
/// for.
pub fn region_factor<T: Real>(spec: &KernelSpec<T>, x: &[T]) -> Result<T> {
    spec.check_point(x)?;
    match spec.variant {
        KernelVariant::LogCorrected => {
            let a = spec.alphas[0];
            Ok((x[0].abs() + x[1].abs() * norm(x).ln()).powf(-a))
        }
        _ => Ok(kernel_eval(spec, x)?.recip()),
    }
}

/// Shape of the first factor of the multipoint integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstFactor {
    /// `1 / (1 + |sum xi|^beta)` with the Euclidean norm.
    EuclideanNorm,
    /// `1 / (1 + sum_j |sum_l xi_lj|^beta)`.
    CoordinateSum,
}

/// `[first factor] * prod_j 1 / (1 + kappa(xi_j))`.
pub fn multipoint_integrand<T: Real>(
    spec: &KernelSpec<T>,
    beta: T,
    xis: &[Vec<T>],
    first: FirstFactor,
) -> Result<T> {
    let d = spec.dim();
    if !(beta > T::zero() && beta <= T::lit(d as f64)) {
        return Err(Error::Domain(format!("beta must lie in (0, {d}], got {beta}")));
    }
    if xis.is_empty() {
        return Err(Error::InvalidInput("need at least one point".into()));
    }
    let mut sum = vec![T::zero(); d];
    let mut prod = T::one();
    for xi in xis {
        let kappa = kernel_eval(spec, xi)?;
        prod /= T::one() + kappa;
        for (s, &v) in sum.iter_mut().zip(xi) {
            *s += v;
        }
    }
    let head = match first {
        FirstFactor::EuclideanNorm => norm(&sum).powf(beta),
        FirstFactor::CoordinateSum => sum.iter().fold(T::zero(), |a, &v| a + v.abs().powf(beta)),
    };
    Ok(prod / (T::one() + head))
}

/// The planar shell `A_k(q, r)`, optionally restricted to one of the sixteen
/// pieces `A_k^{i,j}(q, r)` that cover it after reflecting the last point
/// into the positive quadrant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec<T> {
    pub k: usize,
    pub q: T,
    pub r: T,
    #[serde(default)]
    pub subregion: Option<(u8, u8)>,
    #[serde(default)]
    pub log_variant: bool,
}

impl<T: Real> RegionSpec<T> {
    pub fn new(k: usize, q: T, r: T) -> Result<Self> {
        let s = Self {
            k,
            q,
            r,
            subregion: None,
            log_variant: false,
        };
        s.validate()?;
        Ok(s)
    }

    /// Shell for the log-corrected kernel: points kept outside radius `e`
    /// and `q, r >= 3`.
    pub fn log(k: usize, q: T, r: T) -> Result<Self> {
        let s = Self {
            k,
            q,
            r,
            subregion: None,
            log_variant: true,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_subregion(mut self, i: u8, j: u8) -> Result<Self> {
        self.subregion = Some((i, j));
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        let min = if self.log_variant { T::lit(3.0) } else { T::one() };
        if !(self.q >= min && self.r >= min && self.q.is_finite() && self.r.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "q and r must be finite and >= {min}, got ({}, {})",
                self.q, self.r
            )));
        }
        if let Some((i, j)) = self.subregion {
            if !(1..=4).contains(&i) || !(1..=4).contains(&j) {
                return Err(Error::InvalidInput(format!("subregion ({i}, {j}) out of range")));
            }
        }
        Ok(())
    }

    /// Radius every point must stay outside of.
    pub fn floor_radius(&self) -> T {
        if self.log_variant {
            T::E()
        } else {
            T::one()
        }
    }
}

fn case_holds<T: Real>(case: u8, s: T, y: T, p: T) -> bool {
    let one = T::one();
    let s = s.abs();
    match case {
        1 => y >= one && p + y - one <= s && s <= p + y,
        2 => y >= one && y <= p - one && p - y - one <= s && s <= p - y,
        3 => s <= T::lit(2.0) && p - one <= y && y <= p + one,
        4 => y >= p + one && y - p <= s && s <= y - p + one,
        _ => false,
    }
}

/// Whether the `k` planar points lie in the region.
pub fn region_membership<T: Real>(region: &RegionSpec<T>, xs: &[[T; 2]]) -> bool {
    if xs.len() != region.k || region.k == 0 {
        return false;
    }
    match region.subregion {
        None => {
            let rho = region.floor_radius();
            if xs.iter().any(|x| !(x[0].hypot(x[1]) > rho)) {
                return false;
            }
            let s1 = xs.iter().fold(T::zero(), |a, x| a + x[0]).abs();
            let s2 = xs.iter().fold(T::zero(), |a, x| a + x[1]).abs();
            let one = T::one();
            region.q - one <= s1 && s1 < region.q && region.r - one <= s2 && s2 < region.r
        }
        Some((i, j)) => {
            let one = T::one();
            let (head, last) = xs.split_at(region.k - 1);
            let last = last[0];
            if !(last[0] >= one && last[1] >= one) {
                return false;
            }
            if head.iter().any(|x| !(x[0].abs() >= one && x[1].abs() >= one)) {
                return false;
            }
            let s1 = head.iter().fold(T::zero(), |a, x| a + x[0]);
            let s2 = head.iter().fold(T::zero(), |a, x| a + x[1]);
            case_holds(i, s1, last[0], region.q) && case_holds(j, s2, last[1], region.r)
        }
    }
}
