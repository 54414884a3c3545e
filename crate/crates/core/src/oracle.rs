//! Ground-truth operator norms for small instances, computed independently of
//! the iterative optimizers: a dense symmetric eigensolver for quadratics and a
//! spherical grid search for `n ≤ 3`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::poly::HomPoly;
use crate::scalar::Scalar;

/// Angular resolution of the grid oracle, in radians.
pub const GRID_STEP: f64 = 0.002;

/// Symmetric matrix `A` with `p(x) = xᵀAx` for a quadratic form.
pub fn quadratic_matrix<T: Scalar>(p: &HomPoly<T>) -> Result<DMatrix<f64>> {
    if p.d() != 2 {
        return Err(Error::OracleRange(format!(
            "quadratic form required, got d = {}",
            p.d()
        )));
    }
    let n = p.n();
    let mut a = DMatrix::zeros(n, n);
    for (e, &c) in p.terms() {
        let idx: Vec<usize> = e
            .as_slice()
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
            .collect();
        let c = c.to_f64_lossy();
        if idx[0] == idx[1] {
            a[(idx[0], idx[0])] += c;
        } else {
            a[(idx[0], idx[1])] += c / 2.0;
            a[(idx[1], idx[0])] += c / 2.0;
        }
    }
    Ok(a)
}

/// Eigenvalues of the quadratic form's matrix, sorted by decreasing magnitude.
pub fn quadratic_eigenvalues<T: Scalar>(p: &HomPoly<T>) -> Result<Vec<f64>> {
    let a = quadratic_matrix(p)?;
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    Ok(ev)
}

/// `√(Σ of the k largest squared eigenvalues)`: the subspace norm of a
/// quadratic form, attained on the top-|λ| invariant subspace.
pub fn subspace_norm_oracle<T: Scalar>(p: &HomPoly<T>, k: usize) -> Result<f64> {
    if k == 0 || k > p.n() {
        return Err(Error::OracleRange(format!("k = {k} outside 1..={}", p.n())));
    }
    let ev = quadratic_eigenvalues(p)?;
    Ok(ev.iter().take(k).map(|l| l * l).sum::<f64>().sqrt())
}

/// `‖p‖ₒ` by eigen-decomposition (`d = 2`) or grid search (`n ≤ 3, d ≤ 6`).
/// The grid path is accurate to roughly `1e−5` relative.
pub fn operator_norm_oracle<T: Scalar>(p: &HomPoly<T>) -> Result<f64> {
    if p.d() == 2 {
        return Ok(quadratic_eigenvalues(p)?.first().map_or(0.0, |l| l.abs()));
    }
    if p.n() > 3 || p.d() > 6 {
        return Err(Error::OracleRange(format!(
            "need d = 2, or n ≤ 3 and d ≤ 6 (got n = {}, d = {})",
            p.n(),
            p.d()
        )));
    }
    let terms: Vec<(f64, Vec<i32>)> = p
        .terms()
        .map(|(e, &c)| {
            (
                c.to_f64_lossy(),
                e.as_slice().iter().map(|&a| a as i32).collect(),
            )
        })
        .collect();
    let eval = |x: &[f64]| -> f64 {
        terms
            .iter()
            .map(|(c, a)| a.iter().zip(x).fold(*c, |acc, (&k, &xi)| acc * xi.powi(k)))
            .sum::<f64>()
            .abs()
    };
    Ok(match p.n() {
        1 => eval(&[1.0]),
        2 => circle_search(&eval),
        _ => sphere_search(&eval),
    })
}

fn circle_search(f: &impl Fn(&[f64]) -> f64) -> f64 {
    let at = |t: f64| f(&[t.cos(), t.sin()]);
    let steps = (std::f64::consts::PI / GRID_STEP).ceil() as usize;
    let mut grid: Vec<(f64, f64)> = (0..steps)
        .map(|i| {
            let t = i as f64 * GRID_STEP;
            (at(t), t)
        })
        .collect();
    grid.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    grid.iter()
        .take(8)
        .map(|&(_, t0)| {
            let mut best = (at(t0), t0);
            let mut h = GRID_STEP;
            while h > 1e-12 {
                let mut moved = false;
                for t in [best.1 - h, best.1 + h] {
                    let v = at(t);
                    if v > best.0 {
                        best = (v, t);
                        moved = true;
                    }
                }
                if !moved {
                    h /= 2.0;
                }
            }
            best.0
        })
        .fold(0.0, f64::max)
}

fn sphere_search(f: &impl Fn(&[f64]) -> f64) -> f64 {
    let at = |th: f64, ph: f64| f(&[th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
    // |p(−x)| = |p(x)|, so the upper hemisphere suffices.
    let mut grid: Vec<(f64, f64, f64)> = Vec::new();
    let n_theta = (std::f64::consts::FRAC_PI_2 / GRID_STEP).ceil() as usize;
    for i in 0..=n_theta {
        let th = (i as f64 * GRID_STEP).min(std::f64::consts::FRAC_PI_2);
        let ring = (2.0 * std::f64::consts::PI * th.sin() / GRID_STEP)
            .ceil()
            .max(1.0) as usize;
        for j in 0..ring {
            let ph = 2.0 * std::f64::consts::PI * j as f64 / ring as f64;
            grid.push((at(th, ph), th, ph));
        }
    }
    grid.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    grid.iter()
        .take(16)
        .map(|&(_, th0, ph0)| {
            let mut best = (at(th0, ph0), th0, ph0);
            let mut h = GRID_STEP;
            while h > 1e-12 {
                let mut moved = false;
                for (dt, dp) in [
                    (h, 0.0),
                    (-h, 0.0),
                    (0.0, h),
                    (0.0, -h),
                    (h, h),
                    (-h, -h),
                    (h, -h),
                    (-h, h),
                ] {
                    let v = at(best.1 + dt, best.2 + dp);
                    if v > best.0 {
                        best = (v, best.1 + dt, best.2 + dp);
                        moved = true;
                    }
                }
                if !moved {
                    h /= 2.0;
                }
            }
            best.0
        })
        .fold(0.0, f64::max)
}
