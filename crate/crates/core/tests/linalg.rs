mod common;

use common::*;
use proptest::prelude::*;
use seba_core::linalg::*;
use seba_core::Error;

fn fro(a: &DenseMatrix) -> f64 {
    frobenius_norm(a)
}

#[test]
fn qr_span_matches_projector_of_input() {
    let m = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let q = qr_orthonormalize(&m, QrOptions::default()).unwrap();
    assert!(q.orthonormality_error() < 1e-12);
    // M M⁺ for full column rank M is M (MᵀM)⁻¹ Mᵀ
    let mm = m.matmul(&inverse(&m.t_matmul(&m))).matmul_t(&m);
    assert!(mm.max_abs_diff(&projector(&q)) < 1e-12);
}

#[test]
fn qr_rejects_dependent_columns() {
    let m = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
    assert!(matches!(qr_orthonormalize(&m, QrOptions::default()), Err(Error::RankDeficient { .. })));
}

#[test]
fn polar_agrees_with_newton_iteration() {
    let mut rng = rng(11);
    for _ in 0..50 {
        let a = random_matrix(4, 4, &mut rng);
        let mut x = a.clone();
        for _ in 0..100 {
            x = x.add(&inverse(&x).transpose()).scale(0.5);
        }
        assert!(polar_orthonormal(&a).unwrap().max_abs_diff(&x) < 1e-9);
    }
}

#[test]
fn polar_examples() {
    let d = DenseMatrix::from_diagonal(&[2.0, 3.0]);
    assert!(polar_orthonormal(&d).unwrap().max_abs_diff(&DenseMatrix::identity(2)) < 1e-14);
    let mut rng = rng(12);
    let q = random_orthonormal(5, 5, &mut rng);
    assert!(polar_orthonormal(&q).unwrap().max_abs_diff(&q) < 1e-12);
    // rank-deficient input still gives an orthogonal, reproducible factor
    let z = DenseMatrix::zeros(3, 3);
    let r1 = polar_orthonormal(&z).unwrap();
    assert!(r1.orthonormality_error() < 1e-14);
    assert_eq!(r1, polar_orthonormal(&z).unwrap());
}

#[test]
fn svd_orders_singular_values() {
    let a = DenseMatrix::from_diagonal(&[0.0, 2.0]);
    let s = svd_small(&a, SvdOptions::default()).unwrap();
    assert_eq!(s.singular, vec![2.0, 0.0]);
    assert!(s.reconstruct().max_abs_diff(&a) < 1e-14);
}

#[test]
fn symmetric_eig_random_50() {
    let mut rng = rng(13);
    let b = random_matrix(50, 50, &mut rng);
    let a = b.add(&b.transpose());
    let e = symmetric_eig(&a, EigOptions::default()).unwrap();
    assert!(e.vectors.orthonormality_error() < 1e-12);
    let av = a.matmul(&e.vectors);
    let vl = e.vectors.matmul(&DenseMatrix::from_diagonal(&e.values));
    assert!(av.max_abs_diff(&vl) < 1e-9 * fro(&a));
    assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn leading_eigenpairs_match_dense_solver() {
    let mut rng = rng(14);
    let b = random_matrix(60, 60, &mut rng);
    let a = b.t_matmul(&b);
    let full = symmetric_eig(&a, EigOptions::default()).unwrap();
    let lead = symmetric_eig_leading(60, 4, |x| a.matmul(x), LeadingEigOptions::default()).unwrap();
    for k in 0..4 {
        assert!((lead.values[k] - full.values[k]).abs() < 1e-8 * full.values[0]);
    }
}

fn small_matrix() -> impl Strategy<Value = DenseMatrix> {
    (1usize..7, 1usize..7, any::<u64>()).prop_map(|(r, c, seed)| random_matrix(r, c, &mut rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frobenius_splits_over_columns(a in small_matrix()) {
        let cols: f64 = a.columns().map(|c| c.iter().map(|x| x * x).sum::<f64>()).sum();
        prop_assert!((fro(&a).powi(2) - cols).abs() <= 1e-12 * cols.max(1.0));
    }

    #[test]
    fn weighted_frobenius_is_rotation_invariant(r in 1usize..6, p in 1usize..12, seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_matrix(p, r, &mut g);
        let nu = WeightVector::new((0..p).map(|i| 0.5 + (i % 3) as f64).collect()).unwrap();
        let q = random_orthonormal(r, r, &mut g);
        let lhs = frobenius_norm_w(&a, &nu);
        prop_assert!((lhs - frobenius_norm_w(&a.matmul(&q), &nu)).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn qr_twice_keeps_the_span(r in 1usize..6, extra in 0usize..6, seed in any::<u64>()) {
        let m = random_matrix(r + extra, r, &mut rng(seed));
        let q1 = qr_orthonormalize(&m, QrOptions::default()).unwrap();
        let q2 = qr_orthonormalize(&q1, QrOptions::default()).unwrap();
        prop_assert!(projector(&q1).max_abs_diff(&projector(&q2)) <= 1e-10);
    }

    #[test]
    fn polar_factor_gives_symmetric_psd_product(n in 1usize..7, seed in any::<u64>()) {
        let a = random_matrix(n, n, &mut rng(seed));
        let r = polar_orthonormal(&a).unwrap();
        prop_assert!(r.orthonormality_error() <= 1e-12);
        let h = r.t_matmul(&a);
        prop_assert!(h.max_abs_diff(&h.transpose()) <= 1e-10 * fro(&a).max(1.0));
        let e = symmetric_eig(&h.add(&h.transpose()).scale(0.5), EigOptions::default()).unwrap();
        prop_assert!(e.values[n - 1] >= -1e-10 * fro(&a).max(1.0));
    }

    #[test]
    fn svd_reconstructs(n in 1usize..8, seed in any::<u64>()) {
        let a = random_matrix(n, n, &mut rng(seed));
        let s = svd_small(&a, SvdOptions::default()).unwrap();
        prop_assert!(s.p.orthonormality_error() <= 1e-12);
        prop_assert!(s.q.orthonormality_error() <= 1e-12);
        prop_assert!(s.reconstruct().max_abs_diff(&a) <= 1e-10 * fro(&a));
    }
}
