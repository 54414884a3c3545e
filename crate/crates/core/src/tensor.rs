//! Dense symmetric tensor view of a homogeneous polynomial, used for the
//! frame objective `g(B) = ‖p_V‖²` and its gradient.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::poly::{multinomial_unchecked, HomPoly};
use crate::scalar::Scalar;

/// Upper bound on `nᵈ` entries materialized for frame optimization.
pub(crate) const DENSE_LIMIT: usize = 10_000_000;

/// `A` with `A[i₁,…,i_d] = p_α / binom(d; α)` where `α` counts the indices,
/// so that `‖A‖_F` is the Bombieri norm of `p`.
pub(crate) struct DenseSym<T> {
    n: usize,
    d: u32,
    data: Vec<T>,
}

impl<T: Scalar> DenseSym<T> {
    pub(crate) fn from_poly(p: &HomPoly<T>) -> Result<Self> {
        let n = p.n();
        let d = p.d();
        let size = (n as u128).checked_pow(d).unwrap_or(u128::MAX);
        if size > DENSE_LIMIT as u128 {
            return Err(Error::Config(format!(
                "dense expansion of {size} entries exceeds limit {DENSE_LIMIT}"
            )));
        }
        let mut data = vec![T::zero(); size as usize];
        let mut idx = Vec::with_capacity(d as usize);
        for (e, &c) in p.terms() {
            let v = c / T::lit(multinomial_unchecked(e.as_slice()) as f64);
            let mut counts = e.as_slice().to_vec();
            fill_permutations(&mut counts, &mut idx, d as usize, n, &mut |flat| {
                data[flat] = v
            });
        }
        Ok(Self { n, d, data })
    }

    /// Frame objective and its Euclidean gradient with respect to the `n × k`
    /// basis `B`: `g = ‖A ×₁ Bᵀ ⋯ ×_d Bᵀ‖²`, `∇g = 2d·S·Tᵀ` with
    /// `S = A ×₂ Bᵀ ⋯ ×_d Bᵀ` and `T = Bᵀ S`.
    pub(crate) fn frame_objective(&self, b: &Mat<T>, want_grad: bool) -> (T, Option<Mat<T>>) {
        let n = self.n;
        let k = b.cols();
        let d = self.d as usize;
        let mut shape = vec![n; d];
        let mut cur = self.data.clone();
        for mode in 1..d {
            cur = contract(&cur, &shape, mode, b);
            shape[mode] = k;
        }
        let big_k = cur.len() / n;
        // T = Bᵀ S, row-major k × K
        let mut t = vec![T::zero(); k * big_k];
        for i in 0..n {
            let srow = &cur[i * big_k..(i + 1) * big_k];
            for j in 0..k {
                let bij = b[(i, j)];
                if bij == T::zero() {
                    continue;
                }
                let trow = &mut t[j * big_k..(j + 1) * big_k];
                for (tv, &sv) in trow.iter_mut().zip(srow) {
                    *tv = *tv + bij * sv;
                }
            }
        }
        let g: T = t.iter().map(|&v| v * v).sum();
        if !want_grad {
            return (g, None);
        }
        let two_d = T::lit(2.0 * d as f64);
        let mut grad = Mat::zeros(n, k);
        for i in 0..n {
            let srow = &cur[i * big_k..(i + 1) * big_k];
            for j in 0..k {
                let trow = &t[j * big_k..(j + 1) * big_k];
                let s: T = srow.iter().zip(trow).map(|(&a, &c)| a * c).sum();
                grad[(i, j)] = two_d * s;
            }
        }
        (g, Some(grad))
    }
}

/// Contracts `mode` of a row-major tensor with `B` (`shape[mode] × k`).
fn contract<T: Scalar>(x: &[T], shape: &[usize], mode: usize, b: &Mat<T>) -> Vec<T> {
    let pre: usize = shape[..mode].iter().product();
    let m = shape[mode];
    let post: usize = shape[mode + 1..].iter().product();
    let k = b.cols();
    let mut out = vec![T::zero(); pre * k * post];
    for a in 0..pre {
        for i in 0..m {
            let src = &x[(a * m + i) * post..(a * m + i + 1) * post];
            if src.iter().all(|v| *v == T::zero()) {
                continue;
            }
            for j in 0..k {
                let bij = b[(i, j)];
                if bij == T::zero() {
                    continue;
                }
                let dst = &mut out[(a * k + j) * post..(a * k + j + 1) * post];
                for (o, &s) in dst.iter_mut().zip(src) {
                    *o = *o + bij * s;
                }
            }
        }
    }
    out
}

/// Visits the flat offset of every distinct ordering of the index multiset
/// described by `counts`.
fn fill_permutations(
    counts: &mut [u32],
    idx: &mut Vec<usize>,
    d: usize,
    n: usize,
    f: &mut impl FnMut(usize),
) {
    if idx.len() == d {
        let flat = idx.iter().fold(0usize, |acc, &i| acc * n + i);
        f(flat);
        return;
    }
    for i in 0..counts.len() {
        if counts[i] == 0 {
            continue;
        }
        counts[i] -= 1;
        idx.push(i);
        fill_permutations(counts, idx, d, n, f);
        idx.pop();
        counts[i] += 1;
    }
}
