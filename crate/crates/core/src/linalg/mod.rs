//! Dense column-major matrices and the kernels behind the eigensolver.
//!
//! Everything here is written for the pencils this crate produces: square,
//! often banded, real at zero dissipation and complex-symmetric otherwise.

mod band_lu;
mod hessenberg;
mod qr;

pub use band_lu::BandLu;
pub use hessenberg::{balance, reduce_to_hessenberg};
pub use qr::{complex_hessenberg_eigenvalues, real_hessenberg_eigenvalues};

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub type C64 = Complex64;

/// Field element the kernels are generic over (`f64` or `Complex64`).
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    /// Modulus.
    fn abs(self) -> f64;
    /// `|re| + |im|`, the cheap norm used for pivoting and deflation tests.
    fn abs1(self) -> f64;
    fn conj(self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn to_complex(self) -> C64;

    fn norm_sqr(self) -> f64 {
        let a = self.abs();
        a * a
    }

    fn is_zero(self) -> bool {
        self == Self::zero()
    }
}

impl Scalar for f64 {
    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn abs1(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn to_complex(self) -> C64 {
        C64::new(self, 0.0)
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
}

impl Scalar for C64 {
    #[inline]
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    #[inline]
    fn abs(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn abs1(self) -> f64 {
        self.re.abs() + self.im.abs()
    }
    #[inline]
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn to_complex(self) -> C64 {
        self
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        C64::norm_sqr(&self)
    }
}

/// Dense column-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Debug for Matrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Matrix<{}x{}>", self.rows, self.cols)
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from row-major nested slices (handy in tests).
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Two distinct columns, mutably.
    pub fn cols_mut2(&mut self, a: usize, b: usize) -> (&mut [T], &mut [T]) {
        assert!(a < b);
        let r = self.rows;
        let (lo, hi) = self.data.split_at_mut(b * r);
        (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
    }

    /// Column `j` and the `count - 1` columns after it, as two slices.
    pub fn cols_mut_from(&mut self, j: usize, count: usize) -> (&mut [T], &mut [T]) {
        let r = self.rows;
        self.data[j * r..(j + count) * r].split_at_mut(r)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b * s)
                .collect(),
        }
    }

    pub fn add_assign_at(&mut self, i: usize, j: usize, v: T) {
        let r = self.rows;
        self.data[j * r + i] += v;
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖A - Aᵀ‖_F` (plain transpose, no conjugation).
    pub fn asymmetry(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.cols {
            for i in 0..self.rows {
                s += (self[(i, j)] - self[(j, i)]).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|&x| x.to_complex().im == 0.0)
    }

    /// Lower and upper bandwidths (largest `i - j` and `j - i` over nonzeros).
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for j in 0..self.cols {
            for (i, x) in self.col(j).iter().enumerate() {
                if !x.is_zero() {
                    if i > j {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        (kl, ku)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        self.matvec_banded(x, self.rows.saturating_sub(1), self.cols.saturating_sub(1))
    }

    /// `A x` touching only the band `j - ku ≤ i ≤ j + kl`.
    pub fn matvec_banded(&self, x: &[T], kl: usize, ku: usize) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![T::zero(); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            let lo = j.saturating_sub(ku);
            let hi = (j + kl + 1).min(self.rows);
            let col = &self.col(j)[lo..hi];
            for (yi, &a) in y[lo..hi].iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
        y
    }

    /// Bilinear form `xᵀ A y` (no conjugation).
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        dot_t(x, &self.matvec(y))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j).to_vec();
            let dst = out.col_mut(j);
            for (k, &b) in oc.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let src = &self.data[k * self.rows..(k + 1) * self.rows];
                for (d, &a) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// `Σ x_i y_i` without conjugation.
pub fn dot_t<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

/// `Σ conj(x_i) y_i`.
pub fn dot_c<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
