mod common;

use common as oracle;
use deflact::vecops::{dist, dot, norm};
use deflact::{
    bilinear_xu, gram, qr_against, recycle_from_solutions, ritz_vectors, top_eigenvectors, DenseMatrix, Error, KTuple,
    LinearMap, NormalOperator,
};
use proptest::prelude::*;

fn fixture(seed: u64, rows: usize, cols: usize, k: usize) -> (DenseMatrix, KTuple) {
    let mut rng = oracle::rng(seed);
    let t = DenseMatrix::from_rows(&oracle::random_matrix(&mut rng, rows, cols)).unwrap();
    let u = KTuple::new(cols, (0..k).map(|_| oracle::random_vec(&mut rng, cols)).collect()).unwrap();
    (t, u)
}

#[test]
fn c_is_orthonormal_image_of_u() {
    let (t, u_raw) = fixture(1, 10, 6, 3);
    let rs = qr_against(&t, &u_raw).unwrap();
    let g = gram(rs.c(), rs.c()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g[(i, j)] - want).abs() <= 1e-13);
        }
        assert!(dist(&t.forward(rs.u().get(i)), rs.c().get(i)) <= 1e-12);
    }
    assert!(rs.consistency(&t).unwrap() <= 1e-12);
}

#[test]
fn dependent_vectors_are_rejected() {
    let t = DenseMatrix::identity(4);
    let u = KTuple::new(4, vec![vec![1.0, 2.0, 0.0, 0.0], vec![2.0, 4.0, 0.0, 0.0]]).unwrap();
    assert!(matches!(qr_against(&t, &u), Err(Error::RankDeficient { .. })));
}

#[test]
fn u_norm_bounded_by_gram() {
    let (_, u) = fixture(2, 6, 6, 4);
    let g = gram(&u, &u).unwrap();
    let mut rng = oracle::rng(20);
    for _ in 0..50 {
        let z = oracle::random_vec(&mut rng, 4);
        let uz = u.combine(&z);
        assert!(dot(&uz, &uz) <= g.norm() * dot(&z, &z) * (1.0 + 1e-12));
    }
}

#[test]
fn coefficients_bounded_by_data_norm() {
    let (t, u) = fixture(3, 8, 8, 3);
    let rs = qr_against(&t, &u).unwrap();
    let inv = rs.bounds(1.0, 1.0).unwrap().inv_gram_fro;
    let mut rng = oracle::rng(30);
    for _ in 0..50 {
        let y = oracle::random_vec(&mut rng, 8);
        let coeff = bilinear_xu(&y, rs.c()).unwrap();
        assert!(norm(&coeff) <= norm(&y) * (1.0 + 1e-12));
        assert!(norm(&coeff) <= inv * norm(&y));
    }
}

#[test]
fn ritz_vectors_of_exact_subspace_are_exact() {
    let mut rng = oracle::rng(4);
    let a = oracle::random_symmetric(&mut rng, 7);
    let (vals, vecs) = oracle::jacobi_eigen(&a);
    let op = DenseMatrix::from_rows(&a).unwrap();
    // A rotated basis of the span of the top three eigenvectors.
    let v = KTuple::new(
        7,
        vec![
            vecs[0].iter().zip(&vecs[1]).map(|(a, b)| a + b).collect(),
            vecs[1].iter().zip(&vecs[2]).map(|(a, b)| a - 2.0 * b).collect(),
            vecs[2].clone(),
        ],
    )
    .unwrap();
    let pairs = ritz_vectors(&op, &v, 3).unwrap();
    for i in 0..3 {
        assert!((pairs.values[i] - vals[i]).abs() <= 1e-10 * vals[0].abs().max(1.0));
        let align = dot(pairs.vectors.get(i), &vecs[i]).abs();
        assert!((1.0 - align).abs() <= 1e-10);
    }
}

#[test]
fn top_right_singular_vectors_match_jacobi() {
    let mut rng = oracle::rng(5);
    let a = oracle::matrix_with_singular_values(&mut rng, &[4.0, 2.0, 1.0, 0.5, 0.25]);
    let t = DenseMatrix::from_rows(&a).unwrap();
    let ata = oracle::mat_mul(&oracle::transpose(&a), &a);
    let (vals, vecs) = oracle::jacobi_eigen(&ata);
    let pairs = top_eigenvectors(&NormalOperator(&t), 2, 500, 9).unwrap();
    for i in 0..2 {
        assert!((pairs.values[i] - vals[i]).abs() <= 1e-9 * vals[0]);
        let align = dot(pairs.vectors.get(i), &vecs[i]).abs();
        assert!((1.0 - align * align).max(0.0).sqrt() <= 1e-6);
    }
}

#[test]
fn prior_solutions_orthonormalized_and_dependents_dropped() {
    let a = vec![1.0, 0.0, 1.0];
    let b = vec![0.0, 1.0, 1.0];
    let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - y).collect();
    let out = recycle_from_solutions(&[a, b, c]).unwrap();
    assert_eq!(out.basis.k(), 2);
    assert_eq!(out.dropped, 1);
    let g = gram(&out.basis, &out.basis).unwrap();
    assert!((g - nalgebra::DMatrix::identity(2, 2)).norm() <= 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projector_identities(seed in any::<u64>(), k in 1usize..4) {
        let (t, u) = fixture(seed, 9, 7, k);
        let rs = qr_against(&t, &u).unwrap();
        let mut rng = oracle::rng(seed ^ 0x5a5a);
        let v = oracle::random_vec(&mut rng, 7);
        let pv = rs.apply_p(&t, &v).unwrap();
        let ppv = rs.apply_p(&t, &pv).unwrap();
        let scale = norm(&v) + norm(&pv);
        prop_assert!(dist(&ppv, &pv) <= 1e-10 * scale);
        let tv = t.forward(&v);
        let qtv = rs.apply_q(&tv).unwrap();
        prop_assert!(dist(&rs.apply_q(&qtv).unwrap(), &qtv) <= 1e-10 * norm(&tv));
        prop_assert!(dist(&t.forward(&pv), &qtv) <= 1e-10 * (norm(&tv) + norm(&t.forward(&pv))));
    }

    #[test]
    fn initial_projection_bound_holds(seed in any::<u64>(), delta in 1e-6f64..1.0) {
        let (t, u) = fixture(seed, 6, 6, 2);
        let rs = qr_against(&t, &u).unwrap();
        let a: Vec<Vec<f64>> = (0..6).map(|i| t.row(i).to_vec()).collect();
        let op_norm = oracle::singular_values(&a)[0];
        let mut rng = oracle::rng(seed.wrapping_add(1));
        let mut n = oracle::random_vec(&mut rng, 6);
        let nn = norm(&n);
        n.iter_mut().for_each(|e| *e *= delta / nn);
        let xp = rs.initial_projection(&n).unwrap();
        let b = rs.bounds(op_norm, delta).unwrap();
        prop_assert!(norm(&xp) <= b.init_proj_bound * (1.0 + 1e-12));
        prop_assert!(b.kappa_u >= 1.0);
    }
}
