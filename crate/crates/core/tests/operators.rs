mod common;

use common as oracle;
use deflact::vecops::{dist, dot, norm, sub};
use deflact::{
    deflate, gaussian_blur, gaussian_psf, psf_operator, qr_against, Convolution, DenseMatrix, Diagonal, Identity,
    KTuple, LinearMap, NormalOperator, PsfGrid,
};
use proptest::prelude::*;

fn adjoint_defect(op: &dyn LinearMap, seed: u64) -> f64 {
    let mut rng = oracle::rng(seed);
    let x = oracle::random_vec(&mut rng, op.dim_domain());
    let y = oracle::random_vec(&mut rng, op.dim_range());
    let lhs = dot(&op.forward(&x), &y);
    let rhs = dot(&x, &op.adjoint(&y));
    (lhs - rhs).abs() / (norm(&op.forward(&x)) * norm(&y) + norm(&x) * norm(&op.adjoint(&y)))
}

fn skewed_psf() -> PsfGrid {
    let values: Vec<f64> = (0..15).map(|i| 1.0 + (i * i % 7) as f64).collect();
    PsfGrid::new(3, 5, values, (1, 3)).unwrap()
}

#[test]
fn adjoint_identity_for_every_operator() {
    let mut rng = oracle::rng(1);
    let rect = DenseMatrix::from_rows(&oracle::random_matrix(&mut rng, 7, 4)).unwrap();
    let blur = gaussian_blur(9, 11, 1.5).unwrap();
    let skew = psf_operator(skewed_psf(), 6, 8).unwrap();
    let diag = Diagonal::new(vec![3.0, -1.0, 0.5, 1e-3]).unwrap();
    let rs = qr_against(&rect, &KTuple::new(4, vec![oracle::random_vec(&mut rng, 4)]).unwrap()).unwrap();
    let ops: Vec<Box<dyn LinearMap>> = vec![
        Box::new(rect.clone()),
        Box::new(blur),
        Box::new(skew),
        Box::new(diag),
        Box::new(Identity(5)),
        Box::new(NormalOperator(rect.clone())),
        Box::new(deflate(rect, rs)),
    ];
    for (i, op) in ops.iter().enumerate() {
        for seed in 0..20 {
            let e = adjoint_defect(op.as_ref(), 100 * i as u64 + seed);
            assert!(e <= 1e-10, "operator {i}: defect {e:e}");
        }
    }
}

#[test]
fn convolution_matches_brute_force() {
    let psf = skewed_psf();
    let op = psf_operator(psf.clone(), 6, 8).unwrap();
    let mut rng = oracle::rng(2);
    for _ in 0..10 {
        let x = oracle::random_vec(&mut rng, 48);
        let got = op.forward(&x);
        let want = oracle::periodic_convolution(&x, 6, 8, &psf);
        assert!(dist(&got, &want) <= 1e-12 * norm(&want));
    }
}

#[test]
fn symmetric_psf_gives_normal_operator() {
    let op = gaussian_blur(12, 10, 2.0).unwrap();
    assert!(op.psf().is_point_symmetric(1e-14));
    let mut rng = oracle::rng(3);
    for _ in 0..10 {
        let x = oracle::random_vec(&mut rng, 120);
        let tt = op.forward(&op.adjoint(&x));
        let tst = op.adjoint(&op.forward(&x));
        assert!(dist(&tt, &tst) <= 1e-10 * norm(&x));
    }
}

#[test]
fn deflation_is_idempotent() {
    let mut rng = oracle::rng(4);
    let t = DenseMatrix::from_rows(&oracle::random_matrix(&mut rng, 9, 9)).unwrap();
    let u = KTuple::new(9, (0..3).map(|_| oracle::random_vec(&mut rng, 9)).collect()).unwrap();
    let rs = qr_against(&t, &u).unwrap();
    let once = deflate(&t, &rs);
    let twice = deflate(&once, &rs);
    for _ in 0..20 {
        let x = oracle::random_vec(&mut rng, 9);
        let a = once.forward(&x);
        let b = twice.forward(&x);
        assert!(dist(&a, &b) <= 1e-12 * norm(&t.forward(&x)));
    }
}

// Singular values of a periodic convolution are the moduli of the 2D DFT
// of the wrapped kernel.
fn dft_moduli(op: &Convolution) -> Vec<f64> {
    let (rows, cols) = op.shape();
    let mut e = vec![0.0; rows * cols];
    e[0] = 1.0;
    // The image of a unit impulse at the origin is the wrapped kernel.
    let kernel = op.forward(&e);
    let mut out = Vec::with_capacity(rows * cols);
    for p in 0..rows {
        for q in 0..cols {
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..rows {
                for j in 0..cols {
                    let phase = -2.0
                        * std::f64::consts::PI
                        * ((p * i) as f64 / rows as f64 + (q * j) as f64 / cols as f64);
                    re += kernel[i * cols + j] * phase.cos();
                    im += kernel[i * cols + j] * phase.sin();
                }
            }
            out.push(re.hypot(im));
        }
    }
    out
}

#[test]
fn wide_blur_is_severely_ill_conditioned() {
    let op = gaussian_blur(32, 32, 6.0).unwrap();
    let s = dft_moduli(&op);
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min >= 1e4, "singular value ratio {:e}", max / min);
    // The normalized PSF keeps constants fixed.
    assert!((max - 1.0).abs() <= 1e-12);
}

#[test]
fn gaussian_psf_is_normalized() {
    let psf = gaussian_psf(7, 9, 1.3).unwrap();
    assert!((psf.sum() - 1.0).abs() <= 1e-14);
    assert!(psf.is_point_symmetric(1e-15));
}

#[test]
fn dimension_mismatch_is_reported() {
    let t = Diagonal::new(vec![1.0, 2.0]).unwrap();
    assert!(t.apply(&[1.0, 2.0, 3.0]).is_err());
    assert!(t.apply_adjoint(&[1.0]).is_err());
    assert!(PsfGrid::new(2, 2, vec![1.0; 3], (0, 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_adjoint_identity(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let mut rng = oracle::rng(seed);
        let t = DenseMatrix::from_rows(&oracle::random_matrix(&mut rng, rows, cols)).unwrap();
        prop_assert!(adjoint_defect(&t, seed) <= 1e-10);
    }

    #[test]
    fn deflated_range_is_orthogonal_to_c(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = oracle::rng(seed);
        let t = DenseMatrix::from_rows(&oracle::random_matrix(&mut rng, 7, 7)).unwrap();
        let u = KTuple::new(7, (0..k).map(|_| oracle::random_vec(&mut rng, 7)).collect()).unwrap();
        let rs = qr_against(&t, &u).unwrap();
        let b = deflate(&t, &rs);
        let x = oracle::random_vec(&mut rng, 7);
        let bx = b.forward(&x);
        for c in rs.c().vectors() {
            prop_assert!(dot(&bx, c).abs() <= 1e-12 * (1.0 + norm(&t.forward(&x))));
        }
        prop_assert!(dist(&bx, &sub(&t.forward(&x), &rs.apply_q(&t.forward(&x)).unwrap())) <= 1e-12 * (1.0 + norm(&bx)));
    }
}
