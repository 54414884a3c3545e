//! Greedy rank-1 deflation in the Bombieri geometry.
//!
//! Each step subtracts `λ(u·x)^d` with `u` the (estimated) maximizer of
//! `|res|` on the sphere and `λ = res(u)`. The reproducing identity
//! `⟨res, (u·x)^d⟩ = res(u)` makes the update orthogonal, so
//! `‖res′‖² = ‖res‖² − λ²` and a step is only taken while
//! `λ² > ε²‖p‖²`. At most `⌊ε⁻²⌋` steps can therefore be executed.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::poly::{Exponent, HomPoly};
use crate::scalar::Scalar;
use crate::sphere::{operator_norm, rank1_from_max, OptimizerConfig, RestartSpread};

/// `λ·(u·x)^d` with `‖u‖ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank1Term<T> {
    pub lambda: T,
    pub u: Vec<T>,
}

impl<T: Scalar> Rank1Term<T> {
    pub fn to_poly(&self, d: u32) -> Result<HomPoly<T>> {
        Ok(HomPoly::pow_linear(&self.u, d)?.scale(self.lambda))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Estimated `‖res‖ₒ ≤ ε‖p‖`.
    Threshold,
    /// The residual vanished exactly.
    ZeroResidual,
    /// The caller's step budget was exhausted.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowRankApprox<T> {
    pub n: usize,
    pub d: u32,
    pub eps: T,
    pub input_norm: T,
    pub terms: Vec<Rank1Term<T>>,
    /// `‖res‖` before the first step and after every executed step.
    pub residual_bombieri: Vec<T>,
    /// Operator-norm estimate of the residual at each check.
    pub residual_opnorm_est: Vec<T>,
    /// Restart spread of each operator-norm estimate.
    pub restart_spread: Vec<RestartSpread<T>>,
    pub stop: StopReason,
}

impl<T: Scalar> LowRankApprox<T> {
    /// Upper bound on the Waring rank of the approximant.
    pub fn rank_bound(&self) -> usize {
        self.terms.len()
    }

    pub fn final_residual_opnorm(&self) -> T {
        *self
            .residual_opnorm_est
            .last()
            .expect("at least one check is always recorded")
    }
}

/// `⌊ε⁻²⌋`.
pub fn step_bound(eps: f64) -> usize {
    (1.0 / (eps * eps)).floor() as usize
}

fn check_eps<T: Scalar>(eps: T) -> Result<()> {
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(out_of_range("eps", eps, "(0, 1]"));
    }
    Ok(())
}

/// Greedy deflation until the estimated residual operator norm drops to
/// `ε‖p‖`. Terminates within `⌊ε⁻²⌋` steps.
pub fn greedy_approximate<T: Scalar>(
    p: &HomPoly<T>,
    eps: T,
    cfg: &OptimizerConfig,
) -> Result<LowRankApprox<T>> {
    check_eps(eps)?;
    let budget = step_bound(eps.to_f64_lossy()).max(1);
    greedy_with_budget(p, eps, budget, cfg)
}

/// Greedy deflation with an explicit cap on the number of terms.
pub fn greedy_with_budget<T: Scalar>(
    p: &HomPoly<T>,
    eps: T,
    max_terms: usize,
    cfg: &OptimizerConfig,
) -> Result<LowRankApprox<T>> {
    check_eps(eps)?;
    cfg.validate()?;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let d = p.d();
    let input_norm = p.bombieri_norm();
    let threshold = eps * input_norm;
    let prune = T::prune_rel() * p.max_coeff_norm();

    let mut res = p.clone();
    let mut terms = Vec::new();
    let mut residual_bombieri = vec![input_norm];
    let mut residual_opnorm_est = Vec::new();
    let mut restart_spread = Vec::new();
    let stop = loop {
        if res.is_zero() {
            residual_opnorm_est.push(T::zero());
            break StopReason::ZeroResidual;
        }
        let m = operator_norm(&res, &cfg.derive(terms.len() as u64))?;
        residual_opnorm_est.push(m.value);
        restart_spread.push(m.spread.clone());
        if m.value <= threshold {
            break StopReason::Threshold;
        }
        if terms.len() >= max_terms {
            break StopReason::Budget;
        }
        let t = rank1_from_max(&res, &m)?;
        // same test as above in squared form; never store a term that fails it
        if t.lambda * t.lambda <= threshold * threshold {
            break StopReason::Threshold;
        }
        res = res.sub(&t.to_poly(d)?)?.pruned(prune);
        residual_bombieri.push(res.bombieri_norm());
        terms.push(t);
    };

    Ok(LowRankApprox {
        n: p.n(),
        d,
        eps,
        input_norm,
        terms,
        residual_bombieri,
        residual_opnorm_est,
        restart_spread,
        stop,
    })
}

/// `Σᵢ λᵢ (uᵢ·x)^d`.
pub fn reconstruct<T: Scalar>(a: &LowRankApprox<T>, n: usize, d: u32) -> Result<HomPoly<T>> {
    let mut q = HomPoly::zero(n, d)?;
    for t in &a.terms {
        if t.u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: t.u.len(),
            });
        }
        q = q.add(&t.to_poly(d)?)?;
    }
    Ok(q)
}

/// `Σᵢ xᵢ²`: no fixed number of rank-1 terms approximates it well in the
/// Bombieri norm as `n` grows, yet its operator norm is 1.
pub fn hard_family<T: Scalar>(n: usize) -> Result<HomPoly<T>> {
    if n == 0 {
        return Err(out_of_range("n", n, "n ≥ 1"));
    }
    HomPoly::from_terms(n, 2, (0..n).map(|i| (Exponent::unit(n, i, 2), T::one())))
}
