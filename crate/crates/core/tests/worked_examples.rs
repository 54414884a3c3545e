use approx::assert_relative_eq;
use lowrank_poly::concentration::{concentrate, concentration_defect, verify_chain};
use lowrank_poly::gen::{generate, GenModel};
use lowrank_poly::linalg::qr_q;
use lowrank_poly::low_rank::{greedy_approximate, hard_family};
use lowrank_poly::oracle::operator_norm_oracle;
use lowrank_poly::sphere::{best_rank1, operator_norm, subspace_norm, OptimizerConfig};
use lowrank_poly::{Frame64, HomPoly64, Mat64};
use nalgebra::{DMatrix, SymmetricEigen};

fn poly(n: usize, d: u32, terms: &[(&[u32], f64)]) -> HomPoly64 {
    HomPoly64::from_terms(n, d, terms.iter().map(|(a, c)| (a.to_vec(), *c))).unwrap()
}

fn cfg(seed: u64) -> OptimizerConfig {
    OptimizerConfig::with_seed(seed)
}

/// `xᵀAx` for a symmetric `A`.
fn quadratic(a: &DMatrix<f64>) -> HomPoly64 {
    let n = a.nrows();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut e = vec![0u32; n];
            e[i] += 1;
            e[j] += 1;
            terms.push((e, if i == j { a[(i, i)] } else { 2.0 * a[(i, j)] }));
        }
    }
    HomPoly64::from_terms(n, 2, terms).unwrap()
}

fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()))
}

fn orthogonal(n: usize, seed: u64) -> Mat64 {
    let g: HomPoly64 = generate(GenModel::BombieriGaussian, n * n, 1, seed).unwrap();
    let entries: Vec<f64> = (0..n * n)
        .map(|i| {
            let mut e = vec![0u32; n * n];
            e[i] = 1;
            g.coeff(&e)
        })
        .collect();
    qr_q(&Mat64::from_row_major(n, n, entries))
}

#[test]
fn reproducing_identity_by_hand_expansion() {
    // (u·x)² with u = (1/√2, 1/√2) expands to ½x₁² + x₁x₂ + ½x₂²; only the
    // x₁x₂ coefficient meets p = x₁x₂, with weight 1/binom(2; 1, 1) = 1/2
    let s = 0.5f64.sqrt();
    let g = HomPoly64::pow_linear(&[s, s], 2).unwrap();
    assert_relative_eq!(g.coeff(&[2, 0]), 0.5, epsilon = 1e-15);
    assert_relative_eq!(g.coeff(&[1, 1]), 1.0, epsilon = 1e-15);
    let p = poly(2, 2, &[(&[1, 1], 1.0)]);
    let by_hand = 1.0 * g.coeff(&[1, 1]) / 2.0;
    assert_relative_eq!(p.bombieri_inner(&g).unwrap(), by_hand, epsilon = 1e-15);
    assert_relative_eq!(by_hand, 0.5, epsilon = 1e-15);
}

#[test]
fn rank_one_power_has_unit_norm() {
    let u = [0.48, -0.6, 0.64];
    for d in 1..=6 {
        let p = HomPoly64::pow_linear(&u, d).unwrap();
        // Σ_α binom(d;α)⁻¹ (binom(d;α) u^α)² = Σ_α binom(d;α) u^{2α} = (Σ uᵢ²)^d
        assert_relative_eq!(p.bombieri_norm(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn projection_onto_diagonal_line() {
    // π_V x = ((x₁+x₂)/2)(1, 1), so p(π_V x) = ((x₁+x₂)/2)² = ¼(x₁+x₂)²
    let s = 0.5f64.sqrt();
    let v = Frame64::new(Mat64::from_cols(2, &[vec![s, s]])).unwrap();
    let pv = poly(2, 2, &[(&[1, 1], 1.0)]).project_subspace(&v).unwrap();
    let want = poly(2, 2, &[(&[2, 0], 0.25), (&[1, 1], 0.5), (&[0, 2], 0.25)]);
    assert!(pv.sub(&want).unwrap().max_coeff_norm() < 1e-15);
}

#[test]
fn rotation_by_45_degrees() {
    let c = 0.5f64.sqrt();
    // x₁ ← c·y₁ + c·y₂
    let q = Mat64::from_rows(&[vec![c, c], vec![-c, c]]);
    let p = poly(2, 2, &[(&[2, 0], 1.0)]).apply_orthogonal(&q).unwrap();
    let want = poly(2, 2, &[(&[2, 0], 0.5), (&[1, 1], 1.0), (&[0, 2], 0.5)]);
    assert!(p.sub(&want).unwrap().max_coeff_norm() < 1e-15);
}

#[test]
fn operator_norms_against_calculus() {
    // max over the circle of |cos²θ·sinθ| by a fine scan; the calculus answer
    // is 2/(3√3)
    let scan = (0..200_000)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / 200_000.0;
            (t.cos().powi(2) * t.sin()).abs()
        })
        .fold(0.0f64, f64::max);
    let analytic = 2.0 / (3.0 * 3f64.sqrt());
    assert_relative_eq!(scan, analytic, max_relative = 1e-9);
    let p = poly(2, 3, &[(&[2, 1], 1.0)]);
    assert_relative_eq!(
        operator_norm(&p, &cfg(1)).unwrap().value,
        analytic,
        max_relative = 1e-12
    );
    assert_relative_eq!(
        operator_norm_oracle(&p).unwrap(),
        analytic,
        max_relative = 1e-5
    );

    let cube = poly(2, 3, &[(&[3, 0], 1.0)]);
    assert_relative_eq!(
        operator_norm_oracle(&cube).unwrap(),
        1.0,
        max_relative = 1e-9
    );

    let p = poly(2, 2, &[(&[2, 0], 2.0), (&[0, 2], -1.0)]);
    let m = operator_norm(&p, &cfg(2)).unwrap();
    assert_relative_eq!(m.value, 2.0, max_relative = 1e-12);
    assert!(m.argmax[0].abs() > 1.0 - 1e-9);
}

#[test]
fn best_rank1_examples() {
    let p = hard_family::<f64>(2).unwrap();
    let t = best_rank1(&p, &cfg(3)).unwrap();
    assert_relative_eq!(t.lambda, 1.0, epsilon = 1e-12);
    let res = p
        .sub(&HomPoly64::pow_linear(&t.u, 2).unwrap().scale(t.lambda))
        .unwrap();
    // Pythagoras in the Bombieri inner product: 2 − 1 = 1
    assert_relative_eq!(res.bombieri_norm(), 1.0, epsilon = 1e-10);

    let p = poly(2, 2, &[(&[2, 0], 1.0), (&[0, 2], 0.5)]);
    let t = best_rank1(&p, &cfg(4)).unwrap();
    assert_relative_eq!(t.lambda, 1.0, epsilon = 1e-12);
    assert!(t.u[0].abs() > 1.0 - 1e-9);

    let p = HomPoly64::pow_linear(&[1.0, 0.0, 0.0], 4)
        .unwrap()
        .scale(5.0);
    let t = best_rank1(&p, &cfg(5)).unwrap();
    assert_relative_eq!(t.lambda, 5.0, epsilon = 1e-12);
    let res = p
        .sub(&HomPoly64::pow_linear(&t.u, 4).unwrap().scale(t.lambda))
        .unwrap();
    assert!(res.bombieri_norm() < 1e-10);
}

#[test]
fn subspace_norm_of_diagonal_quadratic() {
    let p = poly(
        3,
        2,
        &[(&[2, 0, 0], 3.0), (&[0, 2, 0], 2.0), (&[0, 0, 2], 1.0)],
    );
    assert_relative_eq!(
        subspace_norm(&p, 2, &cfg(6)).unwrap().value,
        13f64.sqrt(),
        max_relative = 1e-10
    );
    let s = hard_family::<f64>(3).unwrap();
    assert_relative_eq!(s.bombieri_norm(), 3f64.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(
        subspace_norm(&s, 2, &cfg(6)).unwrap().value,
        2f64.sqrt(),
        max_relative = 1e-10
    );
}

#[test]
fn random_cubic_greedy_bound() {
    for seed in 0..5 {
        let p: HomPoly64 = generate(GenModel::BombieriGaussian, 6, 3, seed).unwrap();
        let a = greedy_approximate(&p, 0.5, &cfg(seed)).unwrap();
        assert!(a.terms.len() <= 4);
        assert!(a.final_residual_opnorm() <= 0.5 * p.bombieri_norm());
    }
}

#[test]
fn quadratic_defect_block_formula() {
    // defect = Σ_{i<k} (2‖Bᵢ‖)² + ‖C‖₂² for A = [[A₁₁, B], [Bᵀ, C]]
    for seed in 0..6u64 {
        let n = 5;
        let k = 1 + (seed % 3) as usize;
        let g: HomPoly64 = generate(GenModel::BombieriGaussian, n * n, 1, 100 + seed).unwrap();
        let raw = DMatrix::from_fn(n, n, |i, j| {
            let mut e = vec![0u32; n * n];
            e[i * n + j] = 1;
            g.coeff(&e)
        });
        let a = (&raw + raw.transpose()) * 0.5;
        let p = quadratic(&a);
        let b = a.view((0, k), (k, n - k));
        let c = a.view((k, k), (n - k, n - k)).into_owned();
        let want: f64 = (0..k).map(|i| (2.0 * b.row(i).norm()).powi(2)).sum::<f64>()
            + spectral_norm(&c).powi(2);
        let got = concentration_defect(&p, k, &cfg(seed)).unwrap().defect;
        assert_relative_eq!(got, want, max_relative = 1e-9);
    }
}

#[test]
fn concentrate_recovers_pre_rotated_quadratic() {
    let base = poly(4, 2, &[(&[2, 0, 0, 0], 3.0), (&[0, 2, 0, 0], 0.01)]);
    let q = orthogonal(4, 77);
    let p = base.apply_orthogonal(&q).unwrap();
    let r = concentrate(&p, 0.2, &cfg(7), None).unwrap();
    assert_eq!(r.k, 1);
    // the tail keeps only 0.01·y², whose operator norm is 0.01
    assert_relative_eq!(r.defect, 0.01f64.powi(2), max_relative = 1e-6);
    assert!(r.defect <= 0.04 * p.bombieri_norm_sq());
    assert!(verify_chain(&p, &r, &cfg(7)).unwrap().all_pass);
}

#[test]
fn hard_family_head_size_depends_on_inner_accuracy() {
    let p = hard_family::<f64>(16).unwrap();
    // default inner accuracy 0.3/2 = 0.15 < ‖p‖ₒ/‖p‖ = 1/4: every direction is taken
    let r = concentrate(&p, 0.3, &cfg(8), None).unwrap();
    assert_relative_eq!(r.eps_inner, 0.15);
    assert_eq!(r.k, 16);
    assert_eq!(r.defect, 0.0);
    // at inner accuracy 0.3 nothing is taken and the whole polynomial is tail
    let r = concentrate(&p, 0.3, &cfg(8), Some(0.3)).unwrap();
    assert_eq!(r.k, 0);
    assert_relative_eq!(r.defect, 1.0, epsilon = 1e-12);
    assert!(verify_chain(&p, &r, &cfg(8)).unwrap().all_pass);
}

#[test]
fn chain_collapses_for_head_polynomials() {
    // rank-1 input: q reproduces p, so the residual members vanish
    let p = HomPoly64::pow_linear(&[0.0, 0.8, 0.6], 3).unwrap();
    let r = concentrate(&p, 0.5, &cfg(9), None).unwrap();
    let v = verify_chain(&p, &r, &cfg(9)).unwrap();
    assert!(v.values.mid3 < 1e-20 && v.values.mid4 < 1e-20);
    assert!(v.values.lhs < 1e-20);
    assert!(v.all_pass);
}
