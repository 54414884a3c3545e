//! Variable concentration: splitting `p = Σ_α x^α p_α` over head variables
//! `x₁…x_k`, measuring how much of `p` escapes the head, and the constructive
//! rotation pipeline that finds a good head from a greedy Waring
//! approximation.
//!
//! Given `q = Σ λᵢ(uᵢ·x)^d` with `U = span{uᵢ}` rotated onto the first `k`
//! coordinates, and `V = ℝᵏ ⊕ span{z_α}` where `z_α` maximizes `|p_α|` on the
//! tail sphere, the quantities in [`ChainValues`] satisfy
//!
//! ```text
//! Σ_{|α|<d} ‖p_α‖ₒ²  ≤  Σ_α ‖(p_V − p_U)_α‖²  ≤  d!‖p_V − p_U‖²
//!                    ≤  d!‖p_V − q‖²  =  d!‖(p − q)_V‖²  ≤  d!‖p − q‖₍dim V₎²
//! ```
//!
//! [`verify_chain`] recomputes every member through separate code paths and
//! checks each link.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::frame::Frame;
use crate::linalg::{complete_basis, pivoted_basis, Mat};
use crate::low_rank::{greedy_approximate, reconstruct, LowRankApprox};
use crate::poly::{factorial, monomial_count, multinomial_unchecked, Exponent, HomPoly};
use crate::scalar::Scalar;
use crate::sphere::{operator_norm, subspace_norm_from, OptimizerConfig};

/// `p = Σ_α x^α p_α` with `α` over the first `k` variables (`|α| ≤ d`) and
/// `p_α` a polynomial of degree `d − |α|` in the remaining `n − k` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaDecomposition<T> {
    pub n: usize,
    pub d: u32,
    pub k: usize,
    pub parts: BTreeMap<Exponent, HomPoly<T>>,
}

impl<T: Scalar> AlphaDecomposition<T> {
    /// Reassembles `Σ_α x^α p_α` in `n` variables.
    pub fn reassemble(&self) -> HomPoly<T> {
        let mut out = HomPoly::zero_any(self.n, self.d);
        for (alpha, part) in &self.parts {
            for (beta, &c) in part.terms() {
                let mut e = alpha.as_slice().to_vec();
                e.extend_from_slice(beta.as_slice());
                out.add_term(Exponent::new(e), c);
            }
        }
        out
    }
}

/// Splits `p` at head size `k`, `1 ≤ k < n`.
pub fn alpha_decompose<T: Scalar>(p: &HomPoly<T>, k: usize) -> Result<AlphaDecomposition<T>> {
    if k == 0 || k >= p.n() {
        return Err(out_of_range("k", k, &format!("1..{}", p.n())));
    }
    Ok(decompose_any(p, k))
}

/// Same as [`alpha_decompose`] but also accepts the edge sizes `k = 0` and
/// `k = n`.
pub(crate) fn decompose_any<T: Scalar>(p: &HomPoly<T>, k: usize) -> AlphaDecomposition<T> {
    let n = p.n();
    let d = p.d();
    let mut parts: BTreeMap<Exponent, HomPoly<T>> = BTreeMap::new();
    for (e, &c) in p.terms() {
        let (head, tail) = e.as_slice().split_at(k);
        let head = Exponent::new(head.to_vec());
        let tail_deg = d - head.weight();
        parts
            .entry(head)
            .or_insert_with(|| HomPoly::zero_any(n - k, tail_deg))
            .add_term(Exponent::new(tail.to_vec()), c);
    }
    AlphaDecomposition { n, d, k, parts }
}

/// Number of monomials of degree `< d` in `k` variables:
/// `Σ_{j=0}^{d−1} binom(k + j − 1, j)`.
pub fn monomial_count_below(k: usize, d: u32) -> u128 {
    (0..d).map(|j| monomial_count(k, j)).sum()
}

/// `f(k) = k + monomial_count_below(k, d)`: bound on `dim V` in the pipeline.
pub fn frame_dim_bound(k: usize, d: u32) -> u128 {
    k as u128 + monomial_count_below(k, d)
}

/// Contribution of one head monomial to the concentration defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPart<T> {
    pub alpha: Vec<u32>,
    /// `‖p_α‖ₒ²` (estimated; attained at `z`).
    pub opnorm_sq: T,
    /// `‖p_α‖∞²`.
    pub max_coeff_sq: T,
    /// Maximizer of `|p_α|` on the tail sphere; absent for zero parts.
    pub z: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defect<T> {
    pub k: usize,
    /// `Σ_{|α|<d} ‖p_α‖ₒ²`.
    pub defect: T,
    /// `Σ_{|α|<d} ‖p_α‖∞²`.
    pub defect_inf: T,
    pub per_alpha: Vec<AlphaPart<T>>,
}

/// Concentration defect of `p` on its first `k` variables, `1 ≤ k < n`.
pub fn concentration_defect<T: Scalar>(
    p: &HomPoly<T>,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<Defect<T>> {
    if k == 0 || k >= p.n() {
        return Err(out_of_range("k", k, &format!("1..{}", p.n())));
    }
    defect_any(p, k, cfg)
}

pub(crate) fn defect_any<T: Scalar>(
    p: &HomPoly<T>,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<Defect<T>> {
    cfg.validate()?;
    let dec = decompose_any(p, k);
    let mut per_alpha = Vec::new();
    for (i, (alpha, part)) in dec.parts.iter().enumerate() {
        if alpha.weight() >= p.d() {
            continue;
        }
        let inf = part.max_coeff_norm();
        let (opnorm_sq, z) = if part.is_zero() {
            (T::zero(), None)
        } else {
            let m = operator_norm(part, &cfg.derive(0xa1fa_0000 + i as u64))?;
            (m.value * m.value, Some(m.argmax))
        };
        per_alpha.push(AlphaPart {
            alpha: alpha.as_slice().to_vec(),
            opnorm_sq,
            max_coeff_sq: inf * inf,
            z,
        });
    }
    Ok(Defect {
        k,
        defect: per_alpha.iter().map(|a| a.opnorm_sq).sum(),
        defect_inf: per_alpha.iter().map(|a| a.max_coeff_sq).sum(),
        per_alpha,
    })
}

/// Members of the inequality chain, all in rotated coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainValues<T> {
    /// `Σ_{|α|<d} ‖p_α‖ₒ²`
    pub lhs: T,
    /// `Σ_{|α|≤d} ‖(p_V − p_U)_α‖²`
    pub mid1: T,
    /// `d!·‖p_V − p_U‖²`
    pub mid2: T,
    /// `d!·‖p_V − q‖²`
    pub mid3: T,
    /// `d!·‖(p − q)_V‖²`
    pub mid4: T,
    /// `d!·(estimate of ‖p − q‖₍dim V₎)²`
    pub rhs_bound: T,
    /// `ε²‖p‖²`, the end-to-end target `mid4` is compared against (reported,
    /// not asserted).
    pub eps_sq_norm_sq: T,
    pub k: usize,
    pub dim_v: usize,
    pub f_k: u128,
}

/// The defect normalized the three ways one might read the definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRatios<T> {
    pub over_norm: T,
    pub over_norm_sq: T,
    pub over_eps_sq_norm_sq: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport<T> {
    pub n: usize,
    pub d: u32,
    pub eps: T,
    /// Accuracy passed to the greedy approximation (default `ε / d!`).
    pub eps_inner: T,
    pub k: usize,
    /// Orthogonal `Q`; the analysed polynomial is `p∘Q`.
    pub rotation: Mat<T>,
    pub defect: T,
    pub defect_inf: T,
    pub per_alpha: Vec<AlphaPart<T>>,
    pub ratios: DefectRatios<T>,
    pub input_norm: T,
    /// `‖p − q‖` before rotation.
    pub residual_norm: T,
    /// `‖p∘Q‖` and `‖(p − q)∘Q‖`, which must match the two above.
    pub rotated_input_norm: T,
    pub rotated_residual_norm: T,
    /// The greedy approximant `q`, in original coordinates.
    pub approx: LowRankApprox<T>,
    /// Orthonormal basis of `V` in rotated coordinates.
    pub v_frame: Frame<T>,
    pub chain: ChainValues<T>,
}

fn d_factorial<T: Scalar>(d: u32) -> T {
    T::lit(factorial(d) as f64)
}

/// Constructive concentration: greedy approximation at `eps_inner`
/// (default `ε/d!`), rotation of its direction span onto the leading
/// coordinates, defect at that head size, and the full chain.
pub fn concentrate<T: Scalar>(
    p: &HomPoly<T>,
    eps: T,
    cfg: &OptimizerConfig,
    eps_inner: Option<T>,
) -> Result<ConcentrationReport<T>> {
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(out_of_range("eps", eps, "(0, 1]"));
    }
    cfg.validate()?;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = p.n();
    let d = p.d();
    let dfact = d_factorial::<T>(d);
    let eps_inner = eps_inner.unwrap_or(eps / dfact);

    let approx = greedy_approximate(p, eps_inner, &cfg.derive(1))?;
    let dirs: Vec<Vec<T>> = approx.terms.iter().map(|t| t.u.clone()).collect();
    let u_basis = pivoted_basis(&dirs, T::rank_tol());
    let k = u_basis.len();
    let rotation = complete_basis(&u_basis, n);

    let q = reconstruct(&approx, n, d)?;
    let p_rot = p.apply_orthogonal(&rotation)?;
    // q∘Q lives in the head variables up to rounding
    let q_rot = q
        .apply_orthogonal(&rotation)?
        .restrict_zero(&(0..k).collect::<Vec<_>>())?;

    let defect = if k == n {
        Defect {
            k,
            defect: T::zero(),
            defect_inf: T::zero(),
            per_alpha: Vec::new(),
        }
    } else {
        defect_any(&p_rot, k, &cfg.derive(2))?
    };

    // V = ℝᵏ ⊕ span{z_α}
    let mut v_vectors: Vec<Vec<T>> = (0..k)
        .map(|i| {
            let mut e = vec![T::zero(); n];
            e[i] = T::one();
            e
        })
        .collect();
    for part in &defect.per_alpha {
        if let Some(z) = &part.z {
            let mut v = vec![T::zero(); k];
            v.extend_from_slice(z);
            v_vectors.push(v);
        }
    }
    let v_frame = Frame::gram_schmidt(n, &v_vectors)?;
    let dim_v = v_frame.k();

    let p_v = p_rot.project_subspace(&v_frame)?;
    let p_u = p_v.restrict_zero(&(0..k).collect::<Vec<_>>())?;
    let diff_vu = p_v.sub(&p_u)?;
    let mid1 = decompose_any(&diff_vu, k)
        .parts
        .values()
        .map(HomPoly::bombieri_norm_sq)
        .sum();
    let mid2 = dfact * diff_vu.bombieri_norm_sq();
    let mid3 = dfact * p_v.sub(&q_rot)?.bombieri_norm_sq();
    let res_rot = p_rot.sub(&q_rot)?;
    let mid4 = dfact * res_rot.project_subspace(&v_frame)?.bombieri_norm_sq();
    let rhs_bound = if dim_v == 0 || res_rot.is_zero() {
        T::zero()
    } else {
        let est = subspace_norm_from(
            &res_rot,
            dim_v,
            &cfg.derive(3),
            std::slice::from_ref(&v_frame),
        )?;
        dfact * est.value * est.value
    };

    let input_norm = p.bombieri_norm();
    let norm_sq = input_norm * input_norm;
    let ratios = DefectRatios {
        over_norm: defect.defect / input_norm,
        over_norm_sq: defect.defect / norm_sq,
        over_eps_sq_norm_sq: defect.defect / (eps * eps * norm_sq),
    };

    Ok(ConcentrationReport {
        n,
        d,
        eps,
        eps_inner,
        k,
        rotation,
        defect: defect.defect,
        defect_inf: defect.defect_inf,
        per_alpha: defect.per_alpha,
        ratios,
        input_norm,
        residual_norm: p.sub(&q)?.bombieri_norm(),
        rotated_input_norm: p_rot.bombieri_norm(),
        rotated_residual_norm: res_rot.bombieri_norm(),
        approx,
        v_frame,
        chain: ChainValues {
            lhs: defect.defect,
            mid1,
            mid2,
            mid3,
            mid4,
            rhs_bound,
            eps_sq_norm_sq: eps * eps * norm_sq,
            k,
            dim_v,
            f_k: frame_dim_bound(k, d),
        },
    })
}

/// One checked link of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCheck<T> {
    pub name: String,
    pub left: T,
    pub right: T,
    /// `right − left` for inequalities, `−|right − left|` for the equality;
    /// the link passes when `margin ≥ −tol`.
    pub margin: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainVerdict<T> {
    pub tol: T,
    pub values: ChainValues<T>,
    pub links: Vec<LinkCheck<T>>,
    /// Every `(α, β)` weight satisfies `binom(d−|α|; β)⁻¹ ≤ d!·binom(d; α, β)⁻¹`.
    pub weights_ok: bool,
    /// `dim V ≤ f(k)`.
    pub dims_ok: bool,
    pub all_pass: bool,
}

fn factorial_product(e: &[u32]) -> u128 {
    e.iter().map(|&a| factorial(a)).product()
}

/// Independently recomputes the chain for `report` on `p` and checks every
/// link with tolerance `1e−6·‖p‖²`.
pub fn verify_chain<T: Scalar>(
    p: &HomPoly<T>,
    report: &ConcentrationReport<T>,
    cfg: &OptimizerConfig,
) -> Result<ChainVerdict<T>> {
    let n = p.n();
    let d = p.d();
    if report.n != n || report.d != d {
        return Err(Error::ReportMismatch(format!(
            "report is for n = {}, d = {}; polynomial has n = {n}, d = {d}",
            report.n, report.d
        )));
    }
    let k = report.k;
    if k > n || report.v_frame.n() != n || report.rotation.rows() != n {
        return Err(Error::ReportMismatch("inconsistent dimensions".into()));
    }
    // re-validate the frame rather than trusting deserialized data
    let v = Frame::new(report.v_frame.basis().clone())?;
    let dim_v = v.k();
    let dfact = d_factorial::<T>(d);
    let tol = T::lit(1e-6) * p.bombieri_norm_sq();

    let p_rot = p.apply_orthogonal(&report.rotation)?;
    let q = reconstruct(&report.approx, n, d)?;
    let q_rot = q
        .apply_orthogonal(&report.rotation)?
        .restrict_zero(&(0..k).collect::<Vec<_>>())?;

    // p_V through the reduced polynomial p(B·) and back via Bᵀ
    let through_v = |h: &HomPoly<T>| -> Result<HomPoly<T>> {
        if dim_v == 0 {
            return Ok(HomPoly::zero_any(n, d));
        }
        h.substitute(v.basis())?.substitute(&v.basis().transpose())
    };
    let p_v = through_v(&p_rot)?;
    let p_u = p_v.project_subspace(&Frame::coordinate(n, &(0..k).collect::<Vec<_>>())?)?;
    let diff = p_v.sub(&p_u)?;

    // lhs: |p_α(z_α)|² straight from the rotated coefficients
    let mut lhs = T::zero();
    for part in &report.per_alpha {
        let Some(z) = &part.z else { continue };
        if part.alpha.len() != k || z.len() != n - k {
            return Err(Error::ReportMismatch("malformed per-alpha entry".into()));
        }
        let mut val = T::zero();
        for (e, &c) in p_rot.terms() {
            let (head, tail) = e.as_slice().split_at(k);
            if head == part.alpha.as_slice() {
                val = val
                    + tail
                        .iter()
                        .zip(z)
                        .fold(c, |acc, (&b, &zi)| acc * zi.powi(b as i32));
            }
        }
        lhs = lhs + val * val;
    }

    let mut mid1 = T::zero();
    let mut mid2 = T::zero();
    let mut weights_ok = true;
    let dfact_int = factorial(d);
    for (e, &c) in diff.terms() {
        let (head, tail) = e.as_slice().split_at(k);
        let head_w: u32 = head.iter().sum();
        let tail_mult = multinomial_unchecked(tail);
        mid1 = mid1 + c * c / T::lit(tail_mult as f64);
        // d!·binom(d; α, β)⁻¹ = α!·β!
        mid2 = mid2 + c * c * T::lit(factorial_product(e.as_slice()) as f64);
        let mut head_and_rest = head.to_vec();
        head_and_rest.push(d - head_w);
        if multinomial_unchecked(&head_and_rest) > dfact_int {
            weights_ok = false;
        }
    }
    let mid3 = dfact * p_v.sub(&q_rot)?.bombieri_norm_sq();
    let res_rot = p_rot.sub(&q_rot)?;
    let mid4 = dfact * through_v(&res_rot)?.bombieri_norm_sq();
    let rhs_bound = if dim_v == 0 || res_rot.is_zero() {
        T::zero()
    } else {
        let est = subspace_norm_from(&res_rot, dim_v, &cfg.derive(3), std::slice::from_ref(&v))?;
        dfact * est.value * est.value
    };

    let le = |name: &str, a: T, b: T| {
        let margin = b - a;
        LinkCheck {
            name: name.to_string(),
            left: a,
            right: b,
            margin,
            pass: margin >= -tol,
        }
    };
    let eq = |name: &str, a: T, b: T| {
        let margin = -(b - a).abs();
        LinkCheck {
            name: name.to_string(),
            left: a,
            right: b,
            margin,
            pass: margin >= -tol,
        }
    };
    let links = vec![
        le("lhs <= mid1", lhs, mid1),
        le("mid1 <= mid2", mid1, mid2),
        le("mid2 <= mid3", mid2, mid3),
        eq("mid3 == mid4", mid3, mid4),
        le("mid4 <= rhs_bound", mid4, rhs_bound),
    ];
    let f_k = frame_dim_bound(k, d);
    let dims_ok = dim_v as u128 <= f_k;
    let all_pass = links.iter().all(|l| l.pass) && weights_ok && dims_ok;
    Ok(ChainVerdict {
        tol,
        values: ChainValues {
            lhs,
            mid1,
            mid2,
            mid3,
            mid4,
            rhs_bound,
            eps_sq_norm_sq: report.eps * report.eps * p.bombieri_norm_sq(),
            k,
            dim_v,
            f_k,
        },
        links,
        weights_ok,
        dims_ok,
        all_pass,
    })
}
