//! Maximization on the unit sphere and over orthonormal frames.
//!
//! * [`operator_norm`] estimates `‖p‖ₒ = max_{‖x‖=1} |p(x)|` with a shifted
//!   symmetric power iteration followed by a safeguarded Riemannian Newton
//!   polish, from seeded random starts plus the `2n` signed coordinate
//!   directions.
//! * [`subspace_norm`] estimates `‖p‖₍ₖ₎ = sup_{dim V ≤ k} ‖p_V‖` by
//!   projected-gradient ascent of `‖p_V‖²` over orthonormal `n × k` frames.
//!
//! Every value returned is attained at the returned point or frame, so it is
//! a lower bound on the true maximum. Restarts run in parallel; reductions are
//! done serially in restart order, which keeps results bit-identical for any
//! thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiled::CompiledPoly;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::linalg::{complete_basis, dot, norm2, normalized, qr_q, sym_eigen, Mat};
use crate::low_rank::Rank1Term;
use crate::poly::HomPoly;
use crate::scalar::Scalar;
use crate::tensor::DenseSym;

/// Values closer than this (relative to the normalized problem) are ties.
const TIE_TOL: f64 = 1e-12;

/// Power iteration hands over to Newton once iterates move less than this.
const NEWTON_SWITCH: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Convergence tolerance on iterate movement.
    pub tol: f64,
    pub seed: u64,
    /// Power-iteration shift in the units of `p`. `None` selects
    /// `(d − 1)·‖p‖`, which makes the shifted objective convex on the ball.
    pub shift: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 500,
            tol: 1e-10,
            seed: 0,
            shift: None,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be ≥ 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be ≥ 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be > 0".into()));
        }
        if let Some(s) = self.shift {
            if !(s >= 0.0) {
                return Err(Error::Config("shift must be ≥ 0".into()));
            }
        }
        Ok(())
    }

    /// Same settings with a seed deterministically mixed with `salt`.
    pub fn derive(&self, salt: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(salt.wrapping_add(0x5851_f42d_4c95_7f2d))),
            ..self.clone()
        }
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn stream_rng(seed: u64, tag: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ splitmix64(tag));
    rng.set_stream(stream);
    rng
}

pub(crate) fn random_unit<T: Scalar>(rng: &mut impl Rng, n: usize) -> Vec<T> {
    loop {
        let v: Vec<T> = (0..n)
            .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

/// Min / median / max of the per-start best values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSpread<T> {
    pub min: T,
    pub median: T,
    pub max: T,
    pub count: usize,
}

impl<T: Scalar> RestartSpread<T> {
    fn from_values(mut v: Vec<T>) -> Self {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let count = v.len();
        let median = if count % 2 == 1 {
            v[count / 2]
        } else {
            (v[count / 2 - 1] + v[count / 2]) / T::lit(2.0)
        };
        Self {
            min: v[0],
            median,
            max: v[count - 1],
            count,
        }
    }

    fn scaled(&self, s: T) -> Self {
        Self {
            min: self.min * s,
            median: self.median * s,
            max: self.max * s,
            count: self.count,
        }
    }
}

/// Best point found for `|p|` on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereMax<T> {
    /// `|p(argmax)|`, a certified lower bound on `‖p‖ₒ`.
    pub value: T,
    pub argmax: Vec<T>,
    pub converged: bool,
    pub iterations_used: usize,
    pub spread: RestartSpread<T>,
}

/// Best frame found for `‖p_V‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMax<T> {
    /// `‖p_V‖` for `V = span(frame)`, a lower bound on `‖p‖₍ₖ₎`.
    pub value: T,
    pub frame: Frame<T>,
    pub converged: bool,
    pub iterations_used: usize,
    pub spread: RestartSpread<T>,
}

struct RunResult<T> {
    x: Vec<T>,
    value: T,
    converged: bool,
    iters: usize,
}

/// Ascent of `f` on the sphere from `x0`.
fn sphere_ascent<T: Scalar>(
    f: &CompiledPoly<T>,
    x0: Vec<T>,
    d: u32,
    shift: T,
    cfg: &OptimizerConfig,
) -> RunResult<T> {
    let n = x0.len();
    let tol = T::lit(cfg.tol);
    let switch = T::lit(NEWTON_SWITCH).max(tol);
    let inv_d = T::one() / T::lit(d as f64);
    let mut x = x0;
    let mut g = vec![T::zero(); n];
    let mut iters = 0;
    let mut converged = false;

    while iters < cfg.max_iters {
        f.value_grad(&x, &mut g);
        let y: Vec<T> = g
            .iter()
            .zip(&x)
            .map(|(&gi, &xi)| gi * inv_d + shift * xi)
            .collect();
        let Some(xn) = normalized(&y) else { break };
        let mv = x
            .iter()
            .zip(&xn)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt();
        x = xn;
        iters += 1;
        if mv < tol {
            converged = true;
            break;
        }
        if mv < switch {
            break;
        }
    }

    // Riemannian Newton with a Levenberg shift keeping the model concave.
    while !converged && iters < cfg.max_iters {
        let v = f.value_grad(&x, &mut g);
        let xg = dot(&x, &g);
        let rg: Vec<T> = g.iter().zip(&x).map(|(&gi, &xi)| gi - xg * xi).collect();
        let rg_norm = norm2(&rg);
        if rg_norm <= tol * T::lit(1e-2) {
            converged = true;
            break;
        }
        let h = f.hessian(&x);
        let proj = {
            let mut p = Mat::identity(n);
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] = p[(i, j)] - x[i] * x[j];
                }
            }
            p
        };
        let mut ht = proj.matmul(&h).matmul(&proj).add_scaled(&proj, -xg);
        let push = xg.abs() + T::one();
        for i in 0..n {
            for j in 0..n {
                ht[(i, j)] = ht[(i, j)] - push * x[i] * x[j];
            }
        }
        let (evals, evecs) = sym_eigen(&ht);
        let top = evals.iter().fold(T::neg_infinity(), |m, &e| m.max(e));
        let delta = T::lit(1e-10);
        let mu = if top > -delta { top + delta } else { T::zero() };
        let mut step = vec![T::zero(); n];
        for (i, &ev) in evals.iter().enumerate() {
            let vi = evecs.col(i);
            let c = dot(&vi, &rg) / (ev - mu);
            for (s, &vv) in step.iter_mut().zip(&vi) {
                *s = *s - c * vv;
            }
        }
        let sn = norm2(&step);
        if sn > T::one() {
            step.iter_mut().for_each(|s| *s = *s / sn);
        }
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<T> = x.iter().zip(&step).map(|(&a, &s)| a + t * s).collect();
            if let Some(xn) = normalized(&cand) {
                if f.value(&xn) >= v {
                    accepted = Some(xn);
                    break;
                }
            }
            t = t / T::lit(2.0);
        }
        iters += 1;
        let Some(xn) = accepted else {
            converged = rg_norm <= T::lit(1e-6);
            break;
        };
        let mv = x
            .iter()
            .zip(&xn)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt();
        x = xn;
        if mv < tol {
            converged = true;
            break;
        }
    }
    let value = f.value(&x);
    RunResult {
        x,
        value,
        converged,
        iters,
    }
}

/// Index of the best value: highest wins, near-ties go to the lowest index.
fn pick_best<T: Scalar>(values: impl Iterator<Item = T>) -> Option<usize> {
    let tie = T::lit(TIE_TOL);
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b + tie => best = Some((i, v)),
            _ => {}
        }
    }
    best.map(|(i, _)| i)
}

/// Estimates `‖p‖ₒ` and returns the best point found.
pub fn operator_norm<T: Scalar>(p: &HomPoly<T>, cfg: &OptimizerConfig) -> Result<SphereMax<T>> {
    cfg.validate()?;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = p.n();
    let d = p.d();
    let scale = p.bombieri_norm();
    let inv = T::one() / scale;
    let shift = match cfg.shift {
        Some(s) => T::lit(s) * inv,
        None => T::lit((d.max(1) - 1) as f64),
    };

    let mut starts: Vec<Vec<T>> = Vec::with_capacity(cfg.restarts + 2 * n);
    for r in 0..cfg.restarts {
        let mut rng = stream_rng(cfg.seed, 0x5348_4552, r as u64);
        starts.push(random_unit(&mut rng, n));
    }
    for i in 0..n {
        for sign in [T::one(), -T::one()] {
            let mut e = vec![T::zero(); n];
            e[i] = sign;
            starts.push(e);
        }
    }

    let plus = CompiledPoly::new(p, inv);
    let minus = CompiledPoly::new(p, -inv);
    let runs: Vec<RunResult<T>> = (0..2 * starts.len())
        .into_par_iter()
        .map(|r| {
            let f = if r % 2 == 0 { &plus } else { &minus };
            sphere_ascent(f, starts[r / 2].clone(), d, shift, cfg)
        })
        .collect();

    let per_start: Vec<T> = runs
        .chunks(2)
        .map(|pair| pair[0].value.abs().max(pair[1].value.abs()))
        .collect();
    let best = pick_best(runs.iter().map(|r| r.value.abs())).expect("at least one run");
    let run = &runs[best];
    let argmax = normalized(&run.x).unwrap_or_else(|| run.x.clone());
    let value = p.evaluate(&argmax)?.abs();
    Ok(SphereMax {
        value,
        argmax,
        converged: run.converged,
        iterations_used: run.iters,
        spread: RestartSpread::from_values(per_start).scaled(scale),
    })
}

/// Best Waring rank-1 term: `u` maximizes `|p|` on the sphere and `λ = p(u)`,
/// so `p − λ(u·x)^d` is Bombieri-orthogonal to `(u·x)^d`.
pub fn best_rank1<T: Scalar>(p: &HomPoly<T>, cfg: &OptimizerConfig) -> Result<Rank1Term<T>> {
    let m = operator_norm(p, cfg)?;
    rank1_from_max(p, &m)
}

pub(crate) fn rank1_from_max<T: Scalar>(p: &HomPoly<T>, m: &SphereMax<T>) -> Result<Rank1Term<T>> {
    let lambda = p.evaluate(&m.argmax)?;
    Ok(Rank1Term {
        lambda,
        u: m.argmax.clone(),
    })
}

struct FrameRun<T> {
    b: Mat<T>,
    g: T,
    converged: bool,
    iters: usize,
}

/// Backtracking projected-gradient ascent of `‖p_V‖²` from `b0`.
fn frame_ascent<T: Scalar>(a: &DenseSym<T>, b0: Mat<T>, cfg: &OptimizerConfig) -> FrameRun<T> {
    let tol = T::lit(cfg.tol);
    let mut b = b0;
    let (mut g, mut grad) = a.frame_objective(&b, true);
    let mut iters = 0;
    let mut converged = false;
    while iters < cfg.max_iters {
        let gr = grad.take().expect("gradient requested");
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..50 {
            let cand = qr_q(&b.add_scaled(&gr, t));
            let (gc, _) = a.frame_objective(&cand, false);
            if gc > g {
                accepted = Some((cand, gc));
                break;
            }
            t = t / T::lit(2.0);
        }
        iters += 1;
        let Some((bn, gn)) = accepted else {
            converged = true;
            break;
        };
        let gain = gn - g;
        b = bn;
        let (g2, grad2) = a.frame_objective(&b, true);
        g = g2;
        grad = grad2;
        if gain <= tol * g.max(T::min_positive_value()) {
            converged = true;
            break;
        }
    }
    FrameRun {
        b,
        g,
        converged,
        iters,
    }
}

fn random_frame<T: Scalar>(rng: &mut impl Rng, n: usize, k: usize) -> Mat<T> {
    let data = (0..n * k)
        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect();
    qr_q(&Mat::from_row_major(n, k, data))
}

/// Extends the columns of `b` to `k` columns using standard directions.
fn extend_frame<T: Scalar>(b: &Mat<T>, k: usize) -> Mat<T> {
    let n = b.rows();
    let cols: Vec<Vec<T>> = (0..b.cols()).map(|j| b.col(j)).collect();
    let full = complete_basis(&cols, n);
    let ext: Vec<Vec<T>> = (0..k).map(|j| full.col(j)).collect();
    Mat::from_cols(n, &ext)
}

fn best_frame<T: Scalar>(
    p: &HomPoly<T>,
    a: &DenseSym<T>,
    k: usize,
    warm: Vec<Mat<T>>,
    cfg: &OptimizerConfig,
    tag: u64,
) -> Result<FrameMax<T>> {
    let n = p.n();
    let scale = p.bombieri_norm();
    let mut starts = warm;
    for r in 0..cfg.restarts {
        let mut rng = stream_rng(cfg.seed, tag, r as u64);
        starts.push(random_frame(&mut rng, n, k));
    }
    let runs: Vec<FrameRun<T>> = starts
        .into_par_iter()
        .map(|b0| frame_ascent(a, b0, cfg))
        .collect();
    let best = pick_best(runs.iter().map(|r| r.g)).expect("at least one start");
    let run = &runs[best];
    let frame = Frame::new(run.b.clone())?;
    Ok(FrameMax {
        value: run.g.max(T::zero()).sqrt() * scale,
        frame,
        converged: run.converged,
        iterations_used: run.iters,
        spread: RestartSpread::from_values(
            runs.iter().map(|r| r.g.max(T::zero()).sqrt()).collect(),
        )
        .scaled(scale),
    })
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(crate::error::out_of_range("k", k, &format!("1..={n}")));
    }
    Ok(())
}

fn full_frame<T: Scalar>(p: &HomPoly<T>) -> Result<FrameMax<T>> {
    let v = p.bombieri_norm();
    Ok(FrameMax {
        value: v,
        frame: Frame::new(Mat::identity(p.n()))?,
        converged: true,
        iterations_used: 0,
        spread: RestartSpread::from_values(vec![v]),
    })
}

/// Estimates `‖p‖₍ⱼ₎` for every `j = 1..=k`. Level `j` is warm-started from
/// the best level `j − 1` frame, so the returned values are non-decreasing;
/// level 1 is warm-started at the operator-norm maximizer.
pub fn subspace_norm_profile<T: Scalar>(
    p: &HomPoly<T>,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<Vec<FrameMax<T>>> {
    cfg.validate()?;
    let n = p.n();
    check_k(k, n)?;
    if p.is_zero() {
        return (1..=k)
            .map(|j| {
                Ok(FrameMax {
                    value: T::zero(),
                    frame: Frame::new(extend_frame(&Mat::zeros(n, 0), j))?,
                    converged: true,
                    iterations_used: 0,
                    spread: RestartSpread::from_values(vec![T::zero()]),
                })
            })
            .collect();
    }
    let a = DenseSym::from_poly(&p.scale(T::one() / p.bombieri_norm()))?;
    let first = operator_norm(p, cfg)?;
    let mut out: Vec<FrameMax<T>> = Vec::with_capacity(k);
    for j in 1..=k {
        if j == n {
            out.push(full_frame(p)?);
            continue;
        }
        let warm = match out.last() {
            None => vec![Mat::from_cols(n, &[first.argmax.clone()])],
            Some(prev) => vec![extend_frame(prev.frame.basis(), j)],
        };
        out.push(best_frame(p, &a, j, warm, cfg, 0x4652_0000 + j as u64)?);
    }
    Ok(out)
}

/// Estimates `‖p‖₍ₖ₎ = sup_{dim V ≤ k} ‖p_V‖`.
pub fn subspace_norm<T: Scalar>(
    p: &HomPoly<T>,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<FrameMax<T>> {
    Ok(subspace_norm_profile(p, k, cfg)?
        .pop()
        .expect("profile has k ≥ 1 levels"))
}

/// Single-level estimate of `‖p‖₍ₖ₎` that also starts from each frame in
/// `warm`; the result is therefore at least `‖p_W‖` for every warm frame `W`.
pub fn subspace_norm_from<T: Scalar>(
    p: &HomPoly<T>,
    k: usize,
    cfg: &OptimizerConfig,
    warm: &[Frame<T>],
) -> Result<FrameMax<T>> {
    cfg.validate()?;
    let n = p.n();
    check_k(k, n)?;
    if k == n {
        return full_frame(p);
    }
    if p.is_zero() {
        return Ok(FrameMax {
            value: T::zero(),
            frame: Frame::new(extend_frame(&Mat::zeros(n, 0), k))?,
            converged: true,
            iterations_used: 0,
            spread: RestartSpread::from_values(vec![T::zero()]),
        });
    }
    let mut starts = Vec::with_capacity(warm.len());
    for w in warm {
        if w.n() != n || w.k() > k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: w.k(),
            });
        }
        starts.push(extend_frame(w.basis(), k));
    }
    let a = DenseSym::from_poly(&p.scale(T::one() / p.bombieri_norm()))?;
    best_frame(p, &a, k, starts, cfg, 0x5746_0000 + k as u64)
}

/// Result of [`norm_ratio_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioProbe {
    pub d: u32,
    pub k: usize,
    pub n: usize,
    /// Largest observed `‖p‖₍ₖ₎ / ‖p‖ₒ`: an empirical lower bound on the
    /// best constant `c` with `‖p‖₍ₖ₎ ≤ c‖p‖ₒ`, not a certificate.
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Index of the maximizing sample; for `d = 2` index `samples` is `Σxᵢ²`.
    pub argmax_sample: usize,
    pub ratios: Vec<f64>,
}

/// Samples Bombieri-Gaussian polynomials and records `‖p‖₍ₖ₎ / ‖p‖ₒ`.
/// Quadratics use the eigenvalue oracles for both norms; otherwise the
/// denominator comes from the grid oracle (`n ≤ 3`) and the numerator from
/// [`subspace_norm`]. For `d = 2` the sum of squares is probed as well.
pub fn norm_ratio_probe(
    d: u32,
    k: usize,
    n: usize,
    samples: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<RatioProbe> {
    if d != 2 && (n > 3 || d > 6) {
        return Err(Error::OracleRange(format!(
            "ratio probe needs d = 2, or n ≤ 3 and d ≤ 6 (got n = {n}, d = {d})"
        )));
    }
    check_k(k, n)?;
    if samples == 0 {
        return Err(crate::error::out_of_range("samples", 0, "samples ≥ 1"));
    }
    let mut polys = Vec::with_capacity(samples + 1);
    for s in 0..samples {
        let mut rng = stream_rng(seed, 0x5241_5449, s as u64);
        polys.push(crate::gen::bombieri_gaussian::<f64>(n, d, &mut rng)?);
    }
    if d == 2 {
        polys.push(crate::low_rank::hard_family(n)?);
    }
    let mut ratios = Vec::with_capacity(polys.len());
    for (i, p) in polys.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let ratio = if d == 2 {
            crate::oracle::subspace_norm_oracle(p, k)? / crate::oracle::operator_norm_oracle(p)?
        } else {
            let c = cfg.derive(i as u64);
            let num = subspace_norm(p, k, &c)?.value;
            // both are attained values; the larger one is closer to ‖p‖ₒ
            let den = crate::oracle::operator_norm_oracle(p)?.max(operator_norm(p, &c)?.value);
            num / den
        };
        ratios.push(ratio);
    }
    let mut argmax_sample = 0;
    for (i, &r) in ratios.iter().enumerate() {
        if r > ratios[argmax_sample] {
            argmax_sample = i;
        }
    }
    Ok(RatioProbe {
        d,
        k,
        n,
        max_ratio: ratios[argmax_sample],
        mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
        argmax_sample,
        ratios,
    })
}
