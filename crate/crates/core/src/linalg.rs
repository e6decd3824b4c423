//! Small dense square matrices (d <= 3 in practice) and the handful of
//! factorizations the spectral module needs.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// `self - lambda * I`
    pub fn shift(&self, lambda: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] -= lambda;
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::identity(self.n);
        for _ in 0..e {
            out = out.matmul(self);
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, j)].abs()))
            .fold(T::zero(), T::max)
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[(r, col)].abs() > a[(piv, col)].abs() {
                    piv = r;
                }
            }
            if a[(piv, col)] == T::zero() {
                return Err(Error::Domain("singular matrix in solve".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    b.data.swap(piv * n + j, col * n + j);
                }
            }
            let d = a[(col, col)];
            for r in col + 1..n {
                let f = a[(r, col)] / d;
                if f == T::zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= f * v;
                }
                for j in 0..n {
                    let v = b[(col, j)];
                    b[(r, j)] -= f * v;
                }
            }
        }
        for col in (0..n).rev() {
            let d = a[(col, col)];
            for j in 0..n {
                let mut s = b[(col, j)];
                for k in col + 1..n {
                    s -= a[(col, k)] * b[(k, j)];
                }
                b[(col, j)] = s / d;
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.n))
    }

    /// Singular values in non-increasing order (one-sided Jacobi).
    pub fn singular_values(&self) -> Vec<T> {
        let n = self.n;
        // columns of the working copy are rotated until mutually orthogonal
        let mut u = self.clone();
        let eps = T::epsilon();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for i in 0..n {
                        let up = u[(i, p)];
                        let uq = u[(i, q)];
                        alpha += up * up;
                        beta += uq * uq;
                        gamma += up * uq;
                    }
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let two = T::lit(2.0);
                    let zeta = (beta - alpha) / (two * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for i in 0..n {
                        let up = u[(i, p)];
                        let uq = u[(i, q)];
                        u[(i, p)] = c * up - s * uq;
                        u[(i, q)] = s * up + c * uq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<T> = (0..n)
            .map(|j| (0..n).fold(T::zero(), |acc, i| acc + u[(i, j)] * u[(i, j)]).sqrt())
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        sv
    }

    /// Eigenvalues from the characteristic polynomial (n <= 3).
    pub fn eigenvalues(&self) -> Result<Vec<Complex<T>>> {
        let m = self;
        match self.n {
            1 => Ok(vec![Complex::new(m[(0, 0)], T::zero())]),
            2 => {
                let tr = m.trace();
                let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
                Ok(quadratic_roots(-tr, det).to_vec())
            }
            3 => {
                let a = -m.trace();
                let b = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
                    + m[(0, 0)] * m[(2, 2)]
                    - m[(0, 2)] * m[(2, 0)]
                    + m[(1, 1)] * m[(2, 2)]
                    - m[(1, 2)] * m[(2, 1)];
                let c = -m.determinant();
                Ok(cubic_roots(a, b, c).to_vec())
            }
            n => Err(Error::InvalidInput(format!(
                "eigenvalues supported for dimension <= 3, got {n}"
            ))),
        }
    }

    pub fn determinant(&self) -> T {
        let m = self;
        match self.n {
            1 => m[(0, 0)],
            2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
            3 => {
                m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                    - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                    + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
            }
            _ => {
                // generic LU determinant
                let n = self.n;
                let mut a = self.clone();
                let mut det = T::one();
                for col in 0..n {
                    let mut piv = col;
                    for r in col + 1..n {
                        if a[(r, col)].abs() > a[(piv, col)].abs() {
                            piv = r;
                        }
                    }
                    if a[(piv, col)] == T::zero() {
                        return T::zero();
                    }
                    if piv != col {
                        for j in 0..n {
                            a.data.swap(piv * n + j, col * n + j);
                        }
                        det = -det;
                    }
                    let d = a[(col, col)];
                    det *= d;
                    for r in col + 1..n {
                        let f = a[(r, col)] / d;
                        for j in col..n {
                            let v = a[(col, j)];
                            a[(r, j)] -= f * v;
                        }
                    }
                }
                det
            }
        }
    }

    /// Matrix exponential by scaling and squaring with a fixed [6/6] Padé
    /// approximant.
    pub fn expm(&self) -> Self {
        const PADE6: [f64; 7] = [
            1.0,
            0.5,
            5.0 / 44.0,
            1.0 / 66.0,
            1.0 / 792.0,
            1.0 / 15840.0,
            1.0 / 665280.0,
        ];
        let n = self.n;
        let norm = self.norm_one().as_f64();
        let mut squarings = 0i32;
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as i32;
        }
        let a = self.scale(T::lit(2f64.powi(-squarings)));
        let mut num = Self::zeros(n);
        let mut den = Self::zeros(n);
        let mut power = Self::identity(n);
        for (j, &c) in PADE6.iter().enumerate() {
            let term = power.scale(T::lit(c));
            num = num.add(&term);
            den = if j % 2 == 0 { den.add(&term) } else { den.sub(&term) };
            power = power.matmul(&a);
        }
        let mut r = den
            .solve(&num)
            .expect("Padé denominator is nonsingular for ||A|| <= 1/2");
        for _ in 0..squarings {
            r = r.matmul(&r);
        }
        r
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Real> Mul for &SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn mul(self, rhs: Self) -> SquareMatrix<T> {
        self.matmul(rhs)
    }
}

/// Roots of `x^2 + b x + c`, cancellation-free.
fn quadratic_roots<T: Real>(b: T, c: T) -> [Complex<T>; 2] {
    let two = T::lit(2.0);
    let disc = b * b - T::lit(4.0) * c;
    if disc >= T::zero() {
        let sq = disc.sqrt();
        let q = -(b + b.signum() * sq) / two;
        if q == T::zero() {
            return [Complex::new(T::zero(), T::zero()); 2];
        }
        let r1 = q;
        let r2 = c / q;
        [Complex::new(r1, T::zero()), Complex::new(r2, T::zero())]
    } else {
        let re = -b / two;
        let im = (-disc).sqrt() / two;
        [Complex::new(re, im), Complex::new(re, -im)]
    }
}

/// Roots of `x^3 + a x^2 + b x + c`: one real root from the closed form,
/// polished by Newton, then deflation to a quadratic.
fn cubic_roots<T: Real>(a: T, b: T, c: T) -> [Complex<T>; 3] {
    let three = T::lit(3.0);
    let p = b - a * a / three;
    let q = T::lit(2.0) * a * a * a / T::lit(27.0) - a * b / three + c;
    let disc = (q / T::lit(2.0)).powi(2) + (p / three).powi(3);
    let shift = -a / three;
    let mut r = if disc > T::zero() {
        let sq = disc.sqrt();
        (-q / T::lit(2.0) + sq).cbrt() + (-q / T::lit(2.0) - sq).cbrt() + shift
    } else if p == T::zero() {
        shift
    } else {
        // three real roots; take the largest
        let m = T::lit(2.0) * (-p / three).sqrt();
        let arg = (T::lit(3.0) * q / (p * m)).max(-T::one()).min(T::one());
        m * (arg.acos() / three).cos() + shift
    };
    let f = |x: T| ((x + a) * x + b) * x + c;
    let df = |x: T| (three * x + T::lit(2.0) * a) * x + b;
    for _ in 0..3 {
        let d = df(r);
        if d == T::zero() {
            break;
        }
        let step = f(r) / d;
        if !step.is_finite() {
            break;
        }
        let nr = r - step;
        if f(nr).abs() >= f(r).abs() {
            break;
        }
        r = nr;
    }
    // x^3 + a x^2 + b x + c = (x - r)(x^2 + (a + r) x + (b + (a + r) r))
    let b2 = a + r;
    let c2 = b + b2 * r;
    let [z1, z2] = quadratic_roots(b2, c2);
    [Complex::new(r, T::zero()), z1, z2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[&[f64]]) -> SquareMatrix<f64> {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn expm_of_diagonal() {
        let a = m(&[&[1.0, 0.0], &[0.0, -2.0]]);
        let e = a.expm();
        assert_relative_eq!(e[(0, 0)], 1f64.exp(), max_relative = 1e-14);
        assert_relative_eq!(e[(1, 1)], (-2f64).exp(), max_relative = 1e-14);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let th = 2.5;
        let a = m(&[&[0.0, -th], &[th, 0.0]]);
        let e = a.expm();
        assert_relative_eq!(e[(0, 0)], th.cos(), epsilon = 1e-14);
        assert_relative_eq!(e[(1, 0)], th.sin(), epsilon = 1e-14);
    }

    #[test]
    fn singular_values_known() {
        let a = m(&[&[3.0, 0.0], &[4.0, 5.0]]);
        let sv = a.singular_values();
        // sigma^2 are eigenvalues of A^T A = [[25,20],[20,25]] -> 45, 5
        assert_relative_eq!(sv[0], 45f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(sv[1], 5f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn tiny_singular_value_is_resolved() {
        let a = m(&[&[1.0, 0.0], &[0.0, 1e-14]]);
        let sv = a.singular_values();
        assert_relative_eq!(sv[1], 1e-14, max_relative = 1e-10);
    }

    #[test]
    fn cubic_with_complex_pair() {
        // (x - 2)(x^2 + 1)
        let r = cubic_roots(-2.0f64, 1.0, -2.0);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(re[2], 2.0, epsilon = 1e-12);
        assert!(r.iter().filter(|z| z.im.abs() > 0.5).count() == 2);
    }

    #[test]
    fn cubic_three_real() {
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let r = cubic_roots(-6.0f64, 11.0, -6.0);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, want) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert_relative_eq!(*x, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn solve_and_inverse() {
        let a = m(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]);
        let inv = a.inverse().unwrap();
        let id = a.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(id[(i, j)], want, epsilon = 1e-14);
            }
        }
        assert_relative_eq!(a.determinant(), 18.0, epsilon = 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let a = SquareMatrix::<f32>::diagonal(&[0.5, 0.25]);
        let e = a.scale(4f32.ln()).expm();
        assert!((e[(0, 0)] - 2.0).abs() < 1e-5);
    }
}
