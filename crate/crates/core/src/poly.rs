//! Sparse `d`-homogeneous polynomials and the Bombieri geometry on them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::linalg::{norm2, Mat};
use crate::scalar::Scalar;

/// Largest supported degree. Multinomials up to `20!` fit comfortably in `u128`.
pub const MAX_DEGREE: u32 = 20;

/// Exponent vector `α` of a monomial `x₁^α₁ ⋯ xₙ^αₙ`.
///
/// Ordered graded-lexicographically: first by total degree, then
/// lexicographically with `x₁ > x₂ > ⋯`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(alpha: Vec<u32>) -> Self {
        Self(alpha)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize, power: u32) -> Self {
        let mut a = vec![0; n];
        a[i] = power;
        Self(a)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Exact multinomial coefficient `d! / (α₁! ⋯ αₙ!)`.
pub fn multinomial(d: u32, alpha: &[u32]) -> Result<u128> {
    let w: u32 = alpha.iter().sum();
    if w != d {
        return Err(Error::DegreeMismatch {
            expected: d,
            got: w,
        });
    }
    if d > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange(d));
    }
    Ok(multinomial_unchecked(alpha))
}

/// Product of binomials `C(a₁+⋯+aᵢ, aᵢ)`; every partial result is an integer
/// no larger than the final value, so nothing overflows for weights ≤ 20.
pub(crate) fn multinomial_unchecked(alpha: &[u32]) -> u128 {
    let mut acc: u128 = 1;
    let mut total: u128 = 0;
    for &a in alpha {
        for j in 1..=a as u128 {
            total += 1;
            acc = acc * total / j;
        }
    }
    acc
}

/// Binomial coefficient `C(n, k)` as `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=k as u128 {
        acc = acc * (n as u128 - k as u128 + j) / j;
    }
    acc
}

/// `d!` as an exact integer.
pub fn factorial(d: u32) -> u128 {
    (1..=d as u128).product()
}

fn check_degree(d: u32) -> Result<()> {
    if d == 0 || d > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange(d));
    }
    Ok(())
}

/// A `d`-homogeneous polynomial in `n` variables stored as a sparse
/// exponent → coefficient map with no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct HomPoly<T> {
    n: usize,
    d: u32,
    terms: BTreeMap<Exponent, T>,
}

impl<T: Scalar> HomPoly<T> {
    /// The zero polynomial of degree `d` in `n` variables.
    pub fn zero(n: usize, d: u32) -> Result<Self> {
        check_degree(d)?;
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self::zero_any(n, d))
    }

    /// Zero polynomial without the `d ≥ 1` check; degree-0 parts only arise
    /// inside α-decompositions.
    pub(crate) fn zero_any(n: usize, d: u32) -> Self {
        Self {
            n,
            d,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from `(α, c)` pairs. Repeated exponents are summed
    /// and zero coefficients dropped.
    pub fn from_terms<I, E>(n: usize, d: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, T)>,
        E: Into<Exponent>,
    {
        check_degree(d)?;
        Self::from_terms_any(n, d, terms)
    }

    pub(crate) fn from_terms_any<I, E>(n: usize, d: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, T)>,
        E: Into<Exponent>,
    {
        let mut p = Self::zero_any(n, d);
        for (e, c) in terms {
            let e = e.into();
            p.check_exponent(&e)?;
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn check_exponent(&self, e: &Exponent) -> Result<()> {
        if e.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: e.len(),
            });
        }
        if e.weight() != self.d {
            return Err(Error::DegreeMismatch {
                expected: self.d,
                got: e.weight(),
            });
        }
        Ok(())
    }

    /// Adds `c·x^e` in place. `e` must already be valid for `self`.
    pub(crate) fn add_term(&mut self, e: Exponent, c: T) {
        if c == T::zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = *v + c;
                if *v == T::zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing graded-lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &T)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &[u32]) -> T {
        self.terms
            .get(&Exponent(alpha.to_vec()))
            .copied()
            .unwrap_or_else(T::zero)
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.d != other.d {
            return Err(Error::DegreeMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        Ok(())
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = Self::zero_any(self.n, self.d);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: T) -> Result<Self> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), s * c);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -T::one())
    }

    /// Drops every coefficient with `|c| ≤ threshold`.
    pub fn pruned(mut self, threshold: T) -> Self {
        self.terms.retain(|_, c| c.abs() > threshold);
        self
    }

    /// `‖p‖∞`: largest coefficient magnitude.
    pub fn max_coeff_norm(&self) -> T {
        self.terms.values().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    /// Bombieri weight `1 / binom(d; α)` for a stored exponent.
    #[inline]
    fn weight_of(e: &Exponent) -> T {
        T::one() / T::lit(multinomial_unchecked(e.as_slice()) as f64)
    }

    /// `⟨p, q⟩ = Σ_α binom(d; α)⁻¹ p_α q_α`.
    pub fn bombieri_inner(&self, other: &Self) -> Result<T> {
        self.check_same_space(other)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(small
            .terms
            .iter()
            .filter_map(|(e, &a)| large.terms.get(e).map(|&b| Self::weight_of(e) * a * b))
            .sum())
    }

    pub fn bombieri_norm_sq(&self) -> T {
        self.terms
            .iter()
            .map(|(e, &c)| Self::weight_of(e) * c * c)
            .sum()
    }

    pub fn bombieri_norm(&self) -> T {
        self.bombieri_norm_sq().sqrt()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> T {
        self.terms.values().map(|&c| c * c).sum::<T>().sqrt()
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, &c)| {
                e.as_slice()
                    .iter()
                    .zip(x)
                    .filter(|(&a, _)| a > 0)
                    .fold(c, |acc, (&a, &xi)| acc * xi.powi(a as i32))
            })
            .sum())
    }

    /// `∂p/∂xᵢ`, a polynomial of degree `d − 1` (possibly 0).
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero_any(self.n, self.d - 1);
        for (e, &c) in &self.terms {
            let a = e.0[i];
            if a == 0 {
                continue;
            }
            let mut f = e.0.clone();
            f[i] -= 1;
            out.add_term(Exponent(f), c * T::lit(a as f64));
        }
        out
    }

    /// `(u·x)^d` expanded: coefficients `binom(d; α)·u^α`.
    pub fn pow_linear(u: &[T], d: u32) -> Result<Self> {
        check_degree(d)?;
        if u.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if u.iter().all(|&c| c == T::zero()) {
            return Err(Error::ZeroVector);
        }
        Ok(pow_linear_any(u, d))
    }

    /// `p(L·y)` for an `n × m` matrix `L`: the result lives in `m` variables.
    /// Coefficients at or below `1e−14·‖p‖∞` (type-dependent) are pruned.
    pub fn substitute(&self, l: &Mat<T>) -> Result<Self> {
        if l.rows() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: l.rows(),
            });
        }
        let m = l.cols();
        let mut cache: HashMap<(usize, u32), BTreeMap<Exponent, T>> = HashMap::new();
        let mut out: BTreeMap<Exponent, T> = BTreeMap::new();
        for (e, &c) in &self.terms {
            let mut acc: BTreeMap<Exponent, T> = BTreeMap::new();
            acc.insert(Exponent::zeros(m), c);
            for (i, &a) in e.as_slice().iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let factor = cache
                    .entry((i, a))
                    .or_insert_with(|| pow_linear_any(l.row(i), a).terms);
                acc = mul_maps(&acc, factor);
            }
            for (f, v) in acc {
                let slot = out.entry(f).or_insert_with(T::zero);
                *slot = *slot + v;
            }
        }
        let threshold = T::prune_rel() * self.max_coeff_norm();
        out.retain(|_, c| c.abs() > threshold);
        Ok(Self {
            n: m,
            d: self.d,
            terms: out,
        })
    }

    /// `p∘Q`: substitutes `xᵢ ← Σⱼ Qᵢⱼ yⱼ` for an orthogonal `Q`.
    pub fn apply_orthogonal(&self, q: &Mat<T>) -> Result<Self> {
        if q.rows() != self.n || q.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: if q.rows() != self.n {
                    q.rows()
                } else {
                    q.cols()
                },
            });
        }
        let dev = q.orthonormality_defect();
        if !(dev <= T::ortho_tol()) {
            return Err(Error::NotOrthogonal(dev.to_f64_lossy()));
        }
        self.substitute(q)
    }

    /// `p_V = p∘π_V` with `π_V = B·Bᵀ`, expressed again in `n` variables.
    pub fn project_subspace(&self, v: &Frame<T>) -> Result<Self> {
        if v.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.n(),
            });
        }
        self.substitute(&v.projector())
    }

    /// Sets every variable outside `keep` (0-based indices) to zero.
    pub fn restrict_zero(&self, keep: &[usize]) -> Result<Self> {
        let mut mask = vec![false; self.n];
        for &i in keep {
            if i >= self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: i + 1,
                });
            }
            mask[i] = true;
        }
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.as_slice().iter().zip(&mask).all(|(&a, &m)| m || a == 0))
            .map(|(e, &c)| (e.clone(), c))
            .collect();
        Ok(Self {
            n: self.n,
            d: self.d,
            terms,
        })
    }

    /// Re-embeds a polynomial in `m ≥ n` variables, padding exponents with zeros.
    pub fn embed(&self, m: usize) -> Result<Self> {
        if m < self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: m,
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| {
                let mut a = e.0.clone();
                a.resize(m, 0);
                (Exponent(a), c)
            })
            .collect();
        Ok(Self {
            n: m,
            d: self.d,
            terms,
        })
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(T) -> U) -> HomPoly<U> {
        let mut out = HomPoly::zero_any(self.n, self.d);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }
}

/// Expansion of `(u·x)^d` without argument checks; `d = 0` gives the constant 1.
pub(crate) fn pow_linear_any<T: Scalar>(u: &[T], d: u32) -> HomPoly<T> {
    let n = u.len();
    let mut out = HomPoly::zero_any(n, d);
    let mut alpha = vec![0u32; n];
    compositions(&mut alpha, 0, d, &mut |a| {
        let c = a.iter().zip(u).filter(|(&ai, _)| ai > 0).fold(
            T::lit(multinomial_unchecked(a) as f64),
            |acc, (&ai, &ui)| acc * ui.powi(ai as i32),
        );
        out.add_term(Exponent(a.to_vec()), c);
    });
    out
}

/// Calls `f` on every `α ∈ ℕⁿ` with `|α| = remaining` (starting at `pos`).
pub(crate) fn compositions(
    alpha: &mut [u32],
    pos: usize,
    remaining: u32,
    f: &mut impl FnMut(&[u32]),
) {
    let n = alpha.len();
    if n == 0 {
        if remaining == 0 {
            f(alpha);
        }
        return;
    }
    if pos == n - 1 {
        alpha[pos] = remaining;
        f(alpha);
        alpha[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        alpha[pos] = a;
        compositions(alpha, pos + 1, remaining - a, f);
    }
    alpha[pos] = 0;
}

fn mul_maps<T: Scalar>(
    a: &BTreeMap<Exponent, T>,
    b: &BTreeMap<Exponent, T>,
) -> BTreeMap<Exponent, T> {
    let mut out = BTreeMap::new();
    for (ea, &ca) in a {
        for (eb, &cb) in b {
            let slot = out.entry(ea.add(eb)).or_insert_with(T::zero);
            *slot = *slot + ca * cb;
        }
    }
    out
}

/// Number of monomials of degree exactly `d` in `n` variables.
pub fn monomial_count(n: usize, d: u32) -> u128 {
    if n == 0 {
        return u128::from(d == 0);
    }
    binomial(n as u64 + d as u64 - 1, d as u64)
}

/// Returns the unit vector `u/‖u‖`, rejecting the zero vector.
pub fn unit_vector<T: Scalar>(u: &[T]) -> Result<Vec<T>> {
    let nrm = norm2(u);
    if nrm == T::zero() {
        return Err(Error::ZeroVector);
    }
    Ok(u.iter().map(|&x| x / nrm).collect())
}
