//! Dense column-major matrices and the small Hermitian solves used by the
//! zero-forcing detector.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense column-major matrix. Column `j` occupies `data[j*rows .. (j+1)*rows]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

pub type RMatrix<T> = Matrix<T>;
pub type CMatrix<T> = Matrix<Complex<T>>;

impl<E: Copy> Matrix<E> {
    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> E {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: E) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[E] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [E] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = E> + '_ {
        (0..self.cols).map(move |j| self.get(i, j))
    }

    pub fn map<F: Copy>(&self, f: impl Fn(E) -> F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Entrywise combination of two equally shaped matrices.
    pub fn zip_map<F: Copy, G: Copy>(&self, other: &Matrix<F>, f: impl Fn(E, F) -> G) -> Result<Matrix<G>> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = E> + '_ {
        self.data.iter().copied()
    }

    /// Entries as `(row, col, value)` in column-major order.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, usize, E)> + '_ {
        let rows = self.rows;
        self.data.iter().enumerate().map(move |(n, &v)| (n % rows, n / rows, v))
    }
}

impl<T: Real> Matrix<Complex<T>> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    /// `self† * other`.
    pub fn adjoint_mul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch {
                expected: (self.rows, other.cols),
                found: other.shape(),
            });
        }
        Ok(Self::from_fn(self.cols, other.cols, |i, j| cdot(self.col(i), other.col(j))))
    }

    /// `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                expected: (self.cols, other.cols),
                found: other.shape(),
            });
        }
        let mut out = Self::filled(self.rows, other.cols, Complex::zero());
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for p in 0..self.cols {
                let w = other.get(p, j);
                for (d, &a) in dst.iter_mut().zip(self.col(p)) {
                    *d = *d + a * w;
                }
            }
        }
        Ok(out)
    }

    /// Squared Euclidean norm of column `j`.
    pub fn col_norm_sqr(&self, j: usize) -> T {
        self.col(j).iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }
}

/// Conjugated dot product `Σ conj(a_i) b_i`.
#[inline]
pub fn cdot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let mut re = T::zero();
    let mut im = T::zero();
    for (x, y) in a.iter().zip(b) {
        re = re + x.re * y.re + x.im * y.im;
        im = im + x.re * y.im - x.im * y.re;
    }
    Complex::new(re, im)
}

/// Gram matrix `G†G` of a tall matrix. Only the lower triangle is computed and
/// mirrored, so the result is exactly Hermitian.
pub fn gram<T: Real>(g: &CMatrix<T>) -> CMatrix<T> {
    let k = g.cols();
    let mut out = CMatrix::filled(k, k, Complex::zero());
    for j in 0..k {
        let cj = g.col(j);
        let d = g.col_norm_sqr(j);
        out.set(j, j, Complex::new(d, T::zero()));
        for i in (j + 1)..k {
            let v = cdot(g.col(i), cj);
            out.set(i, j, v);
            out.set(j, i, v.conj());
        }
    }
    out
}

/// Lower Cholesky factor `R` with `M = R R†`. Returns `None` if a pivot is
/// not strictly positive.
pub fn cholesky<T: Real>(m: &CMatrix<T>) -> Option<CMatrix<T>> {
    let n = m.rows();
    let mut r = CMatrix::filled(n, n, Complex::zero());
    for j in 0..n {
        let mut d = m.get(j, j).re;
        for p in 0..j {
            d = d - r.get(j, p).norm_sqr();
        }
        if !(d > T::zero()) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        r.set(j, j, Complex::new(djj, T::zero()));
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for p in 0..j {
                s = s - r.get(i, p) * r.get(j, p).conj();
            }
            r.set(i, j, s / djj);
        }
    }
    Some(r)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_triangular_inverse<T: Real>(r: &CMatrix<T>) -> CMatrix<T> {
    let n = r.rows();
    let mut w = CMatrix::filled(n, n, Complex::<T>::zero());
    for j in 0..n {
        w.set(j, j, Complex::<T>::one() / r.get(j, j));
        for i in (j + 1)..n {
            let mut s = Complex::<T>::zero();
            for p in j..i {
                s = s + r.get(i, p) * w.get(p, j);
            }
            w.set(i, j, -s / r.get(i, i));
        }
    }
    w
}

/// Inverse of a Hermitian positive-definite matrix from its Cholesky factor:
/// `M⁻¹ = W†W` with `W = R⁻¹`.
pub fn inverse_from_cholesky<T: Real>(r: &CMatrix<T>) -> CMatrix<T> {
    let w = lower_triangular_inverse(r);
    let n = r.rows();
    let mut inv = CMatrix::filled(n, n, Complex::zero());
    for j in 0..n {
        for i in j..n {
            // (W†W)_{ij} = Σ_p conj(W_{pi}) W_{pj}, W lower so p ≥ max(i, j) = i.
            let mut s = Complex::zero();
            for p in i..n {
                s = s + w.get(p, i).conj() * w.get(p, j);
            }
            inv.set(i, j, s);
            inv.set(j, i, s.conj());
        }
    }
    for i in 0..n {
        let d = inv.get(i, i).re;
        inv.set(i, i, Complex::new(d, T::zero()));
    }
    inv
}

/// Inverse by Gaussian elimination with partial pivoting. Returns `None` for
/// an exactly singular pivot.
pub fn lu_inverse<T: Real>(m: &CMatrix<T>) -> Option<CMatrix<T>> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = CMatrix::identity(n);
    for c in 0..n {
        let (piv, mag) = (c..n)
            .map(|r| (r, a.get(r, c).norm()))
            .fold((c, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(mag > T::zero()) {
            return None;
        }
        if piv != c {
            for j in 0..n {
                let (x, y) = (a.get(c, j), a.get(piv, j));
                a.set(c, j, y);
                a.set(piv, j, x);
                let (x, y) = (inv.get(c, j), inv.get(piv, j));
                inv.set(c, j, y);
                inv.set(piv, j, x);
            }
        }
        let p = a.get(c, c);
        for j in 0..n {
            a.set(c, j, a.get(c, j) / p);
            inv.set(c, j, inv.get(c, j) / p);
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a.get(r, c);
            if f == Complex::zero() {
                continue;
            }
            for j in 0..n {
                a.set(r, j, a.get(r, j) - f * a.get(c, j));
                inv.set(r, j, inv.get(r, j) - f * inv.get(c, j));
            }
        }
    }
    Some(inv)
}

/// Maximum absolute column sum.
pub fn norm1<T: Real>(m: &CMatrix<T>) -> T {
    (0..m.cols())
        .map(|j| m.col(j).iter().fold(T::zero(), |s, z| s + z.norm()))
        .fold(T::zero(), T::max)
}
