//! Small dense linear algebra over [`Scalar`]: enough for frames, rotations
//! and the tangent-space Newton polish. Matrices here are at most a few dozen
//! rows, so everything is straightforward row-major loops.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    /// Builds an `n × cols.len()` matrix whose columns are `cols`.
    pub fn from_cols(n: usize, cols: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n, "column length mismatch");
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀx`.
    pub fn tmatvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.rows, x.len());
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * xi;
            }
        }
        out
    }

    /// Max-abs entry of `AᵀA − I`.
    pub fn orthonormality_defect(&self) -> T {
        let g = self.transpose().matmul(self);
        let mut worst = T::zero();
        for i in 0..g.rows {
            for j in 0..g.cols {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&a| a * a).sum::<T>().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn add_scaled(&self, other: &Self, s: T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + s * b)
                .collect(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Returns `a / ‖a‖`, or `None` for the zero vector.
pub fn normalized<T: Scalar>(a: &[T]) -> Option<Vec<T>> {
    let n = norm2(a);
    if n == T::zero() || !n.is_finite() {
        return None;
    }
    Some(a.iter().map(|&x| x / n).collect())
}

/// Removes the components of `v` along each (orthonormal) vector of `basis`,
/// twice, and returns the residual.
fn orthogonalize<T: Scalar>(v: &[T], basis: &[Vec<T>]) -> Vec<T> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot(&r, b);
            for (ri, &bi) in r.iter_mut().zip(b) {
                *ri = *ri - c * bi;
            }
        }
    }
    r
}

/// Thin QR of an `n × k` matrix (`k ≤ n`) returning the `Q` factor with the
/// diagonal of `R` forced positive. Columns that become numerically dependent
/// are replaced by the first standard basis vector that extends the basis, so
/// the result is always an orthonormal frame.
pub fn qr_q<T: Scalar>(m: &Mat<T>) -> Mat<T> {
    let n = m.rows();
    let k = m.cols();
    let scale = m.frobenius().max(T::one());
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(k);
    for j in 0..k {
        let r = orthogonalize(&m.col(j), &basis);
        let rn = norm2(&r);
        if rn > T::rank_tol() * scale {
            basis.push(r.iter().map(|&x| x / rn).collect());
        } else {
            let fill = complete_basis(&basis, n);
            basis.push(fill.col(basis.len()));
        }
    }
    Mat::from_cols(n, &basis)
}

/// Column-pivoted Gram–Schmidt: returns an orthonormal basis of the span of
/// `vectors`, picking at each step the remaining vector with the largest
/// residual and stopping once every residual norm is at most `tol`.
pub fn pivoted_basis<T: Scalar>(vectors: &[Vec<T>], tol: T) -> Vec<Vec<T>> {
    let mut residuals: Vec<Vec<T>> = vectors.to_vec();
    let mut basis: Vec<Vec<T>> = Vec::new();
    loop {
        let mut best: Option<(usize, T)> = None;
        for (i, r) in residuals.iter().enumerate() {
            let rn = norm2(r);
            // ties go to the lowest index
            if rn > tol && best.is_none_or(|(_, b)| rn > b) {
                best = Some((i, rn));
            }
        }
        let Some((i, _)) = best else { break };
        let r = orthogonalize(&residuals[i], &basis);
        let rn = norm2(&r);
        if rn <= tol {
            residuals[i] = vec![T::zero(); r.len()];
            continue;
        }
        let q: Vec<T> = r.iter().map(|&x| x / rn).collect();
        for res in residuals.iter_mut() {
            let c = dot(res, &q);
            for (a, &b) in res.iter_mut().zip(&q) {
                *a = *a - c * b;
            }
        }
        basis.push(q);
    }
    basis
}

/// Extends an orthonormal family to an orthonormal basis of `Tⁿ` by
/// Gram–Schmidt against `e₁, …, eₙ` in index order. The given vectors come
/// first, as columns of the returned `n × n` matrix.
pub fn complete_basis<T: Scalar>(basis: &[Vec<T>], n: usize) -> Mat<T> {
    let mut cols: Vec<Vec<T>> = basis.to_vec();
    // A standard vector is accepted once its residual is clearly nonzero;
    // the double orthogonalization keeps the result orthonormal to rounding.
    let accept = T::lit(1e-3).min(T::one() / T::lit((2 * n.max(1)) as f64).sqrt());
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = vec![T::zero(); n];
        e[i] = T::one();
        let r = orthogonalize(&e, &cols);
        let rn = norm2(&r);
        if rn > accept {
            cols.push(r.iter().map(|&x| x / rn).collect());
        }
    }
    assert_eq!(cols.len(), n, "failed to complete basis");
    Mat::from_cols(n, &cols)
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
/// eigenvalues and the matrix whose columns are the matching eigenvectors.
pub fn sym_eigen<T: Scalar>(a: &Mat<T>) -> (Vec<T>, Mat<T>) {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + m[(i, j)] * m[(i, j)];
            }
        }
        let total = m.frobenius();
        if off.sqrt() <= T::epsilon() * total * T::lit(1e-2) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}
