//! Independent reference computations for tests: brute-force convolution,
//! Jacobi eigen/SVD solvers and dense elimination. Nothing here calls into
//! the library's numerical paths.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    (0..rows).map(|_| random_vec(rng, cols)).collect()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let a = random_matrix(rng, n, n);
    (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect())
        .collect()
}

fn ip(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn len(a: &[f64]) -> f64 {
    ip(a, a).sqrt()
}

/// Classical Gram-Schmidt (twice) on random vectors.
pub fn orthonormal_columns(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < k {
        let mut v = random_vec(rng, n);
        for _ in 0..2 {
            for q in &out {
                let h = ip(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= h * qi;
                }
            }
        }
        let nv = len(&v);
        if nv > 1e-8 {
            out.push(v.iter().map(|x| x / nv).collect());
        }
    }
    out
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| ip(row, x)).collect()
}

pub fn mat_t_vec(a: &Mat, y: &[f64]) -> Vec<f64> {
    let cols = a[0].len();
    (0..cols)
        .map(|j| a.iter().zip(y).map(|(row, yi)| row[j] * yi).sum())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let bt = transpose(b);
    a.iter()
        .map(|row| bt.iter().map(|col| ip(row, col)).collect())
        .collect()
}

/// Brute-force periodic convolution: every output pixel visits every input
/// pixel and looks up the PSF at the wrapped offset.
pub fn periodic_convolution(x: &[f64], rows: usize, cols: usize, psf: &deflact::PsfGrid) -> Vec<f64> {
    let (cr, cc) = psf.center();
    let mut y = vec![0.0; rows * cols];
    for tr in 0..rows {
        for tc in 0..cols {
            let mut acc = 0.0;
            for sr in 0..rows {
                for sc in 0..cols {
                    for pr in 0..psf.rows() {
                        for pc in 0..psf.cols() {
                            let dr = (pr as isize - cr as isize).rem_euclid(rows as isize) as usize;
                            let dc = (pc as isize - cc as isize).rem_euclid(cols as isize) as usize;
                            if (sr + dr) % rows == tr && (sc + dc) % cols == tc {
                                acc += psf.get(pr, pc) * x[sr * cols + sc];
                            }
                        }
                    }
                }
            }
            y[tr * cols + tc] = acc;
        }
    }
    y
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
/// eigenvalues in descending order and the matching unit eigenvectors.
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m = a.clone();
    let mut v: Mat = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// One-sided Jacobi SVD; singular values in descending order.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let mut cols = transpose(a);
    let n = cols.len();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = ip(&cols[p], &cols[p]);
                let beta = ip(&cols[q], &cols[q]);
                let gamma = ip(&cols[p], &cols[q]);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (cp, cq) = (cols[p].clone(), cols[q].clone());
                for k in 0..cp.len() {
                    cols[p][k] = c * cp[k] - s * cq[k];
                    cols[q][k] = s * cp[k] + c * cq[k];
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| len(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Mat = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(*bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Minimum of `||b - sum_j z_j a_j||` over coefficients `z`, where `a_j`
/// are the given columns, via the normal equations.
pub fn lstsq_residual(columns: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, f64) {
    let k = columns.len();
    let gram: Mat = (0..k)
        .map(|i| (0..k).map(|j| ip(&columns[i], &columns[j])).collect())
        .collect();
    let rhs: Vec<f64> = columns.iter().map(|c| ip(c, b)).collect();
    let z = solve(&gram, &rhs);
    let mut r = b.to_vec();
    for (zj, col) in z.iter().zip(columns) {
        for (ri, ci) in r.iter_mut().zip(col) {
            *ri -= zj * ci;
        }
    }
    let res = len(&r);
    (z, res)
}

/// Dense matrix `U diag(s) V^T` with random orthogonal factors.
pub fn matrix_with_singular_values(rng: &mut ChaCha8Rng, s: &[f64]) -> Mat {
    let n = s.len();
    let u = orthonormal_columns(rng, n, n);
    let v = orthonormal_columns(rng, n, n);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|l| u[l][i] * s[l] * v[l][j]).sum())
                .collect()
        })
        .collect()
}
