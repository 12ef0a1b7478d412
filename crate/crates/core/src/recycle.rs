//! Recycle (augmentation) spaces.
//!
//! A recycle space is a pair of k-tuples `(U, C)` with `C = T U`
//! orthonormal. It induces the orthogonal projector `Q = C (., C)` on the
//! range and the `T*T`-orthogonal projector `P = U (T ., C)` on the domain,
//! linked by `T P = Q T`.

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::linops::{LinearMap, RangeProjector};
use crate::vecops::{axpy, dot, norm, scale};

/// Relative tolerance below which a Gram-Schmidt diagonal counts as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Relative residual above which an eigenpair is discarded.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-6;

/// Relative norm below which a prior solution is considered dependent.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// An ordered list of `k` vectors of common length `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct KTuple {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl KTuple {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        for v in &vectors {
            check_len("KTuple::new", dim, v.len())?;
        }
        if vectors.len() > dim {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("{} vectors exceed the space dimension {dim}", vectors.len()),
            });
        }
        Ok(Self { dim, vectors })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            vectors: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.vectors
    }

    /// `M z = sum_i z_i m_i`
    pub fn combine(&self, z: &[f64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.k());
        let mut out = vec![0.0; self.dim];
        for (zi, v) in z.iter().zip(&self.vectors) {
            if *zi != 0.0 {
                axpy(*zi, v, &mut out);
            }
        }
        out
    }

    /// Right multiplication by a `k x m` matrix, column by column.
    pub fn right_mul(&self, m: &DMatrix<f64>) -> Result<KTuple> {
        check_len("KTuple::right_mul", self.k(), m.nrows())?;
        let vectors = (0..m.ncols())
            .map(|j| self.combine(m.column(j).as_slice()))
            .collect();
        KTuple::new(self.dim, vectors)
    }

    /// Applies `op` to every vector.
    pub fn map<O: LinearMap + ?Sized>(&self, op: &O) -> Result<KTuple> {
        check_len("KTuple::map", op.dim_domain(), self.dim)?;
        let vectors = self.vectors.iter().map(|v| op.forward(v)).collect();
        Ok(KTuple {
            dim: op.dim_range(),
            vectors,
        })
    }
}

/// `(x, M) = (<x, m_1>, ..., <x, m_k>)`
pub fn bilinear_xu(x: &[f64], m: &KTuple) -> Result<Vec<f64>> {
    check_len("bilinear_xu", m.dim(), x.len())?;
    Ok(m.vectors().iter().map(|v| dot(x, v)).collect())
}

/// `(M, L)` with entries `<m_i, l_j>`.
pub fn gram(m: &KTuple, l: &KTuple) -> Result<DMatrix<f64>> {
    check_len("gram", m.dim(), l.dim())?;
    Ok(DMatrix::from_fn(m.k(), l.k(), |i, j| dot(m.get(i), l.get(j))))
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Returns the
/// orthonormal vectors and the upper-triangular coefficient matrix.
fn mgs_qr(columns: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, DMatrix<f64>)> {
    let k = columns.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = DMatrix::zeros(k, k);
    let first = columns.first().map_or(0.0, |c| norm(c));
    let tolerance = RANK_TOL * first;
    for (j, col) in columns.iter().enumerate() {
        let mut w = col.clone();
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let h = dot(qi, &w);
                axpy(-h, qi, &mut w);
                r[(i, j)] += h;
            }
        }
        let diagonal = norm(&w);
        if !(diagonal > tolerance) {
            return Err(Error::RankDeficient {
                column: j,
                diagonal,
                tolerance,
            });
        }
        scale(1.0 / diagonal, &mut w);
        r[(j, j)] = diagonal;
        q.push(w);
    }
    Ok((q, r))
}

/// A prepared augmentation space: `C` orthonormal, `T U = C`, and the
/// triangular factor `R` from `T U_raw = C R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecycleSpace {
    u: KTuple,
    c: KTuple,
    r: DMatrix<f64>,
}

/// Factors `T U_raw = C R` and rescales `U = U_raw R^{-1}` so that `T U = C`.
pub fn qr_against<O: LinearMap + ?Sized>(op: &O, u_raw: &KTuple) -> Result<RecycleSpace> {
    check_len("qr_against", op.dim_domain(), u_raw.dim())?;
    let images: Vec<Vec<f64>> = u_raw.vectors().iter().map(|u| op.forward(u)).collect();
    let (c, r) = mgs_qr(&images)?;
    // Column-wise back substitution: u_j = (raw_j - sum_{i<j} R_ij u_i) / R_jj.
    let mut u: Vec<Vec<f64>> = Vec::with_capacity(u_raw.k());
    for j in 0..u_raw.k() {
        let mut col = u_raw.get(j).to_vec();
        for (i, ui) in u.iter().enumerate() {
            axpy(-r[(i, j)], ui, &mut col);
        }
        scale(1.0 / r[(j, j)], &mut col);
        u.push(col);
    }
    Ok(RecycleSpace {
        u: KTuple {
            dim: u_raw.dim(),
            vectors: u,
        },
        c: KTuple {
            dim: op.dim_range(),
            vectors: c,
        },
        r,
    })
}

impl RecycleSpace {
    /// A space with `k = 0`; every augmented method then reduces to its
    /// plain counterpart.
    pub fn empty(dim_domain: usize, dim_range: usize) -> Self {
        Self {
            u: KTuple::empty(dim_domain),
            c: KTuple::empty(dim_range),
            r: DMatrix::zeros(0, 0),
        }
    }

    /// Reassembles a stored space, checking shapes and the orthonormality
    /// of `C`.
    pub fn from_parts(u: KTuple, c: KTuple, r: DMatrix<f64>) -> Result<Self> {
        check_len("RecycleSpace::from_parts (C count)", u.k(), c.k())?;
        check_len("RecycleSpace::from_parts (R rows)", u.k(), r.nrows())?;
        check_len("RecycleSpace::from_parts (R cols)", u.k(), r.ncols())?;
        let g = gram(&c, &c)?;
        let dev = (g - DMatrix::identity(c.k(), c.k())).abs().max();
        if c.k() > 0 && dev > 1e-10 {
            return Err(Error::InvalidParameter {
                name: "C",
                reason: format!("stored basis is not orthonormal (deviation {dev:.3e})"),
            });
        }
        Ok(Self { u, c, r })
    }

    pub fn k(&self) -> usize {
        self.u.k()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &KTuple {
        &self.u
    }

    pub fn c(&self) -> &KTuple {
        &self.c
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn dim_domain(&self) -> usize {
        self.u.dim()
    }

    pub fn dim_range(&self) -> usize {
        self.c.dim()
    }

    /// `(w, C)`
    pub fn coefficients(&self, w: &[f64]) -> Vec<f64> {
        self.c.vectors().iter().map(|c| dot(w, c)).collect()
    }

    /// Orthogonal projection onto `span(C)`.
    pub fn apply_q(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_Q", self.dim_range(), w.len())?;
        Ok(self.c.combine(&self.coefficients(w)))
    }

    /// `w - Qw`
    pub fn complement_q(&self, w: &[f64]) -> Vec<f64> {
        let mut out = w.to_vec();
        for c in self.c.vectors() {
            axpy(-dot(w, c), c, &mut out);
        }
        out
    }

    /// `T*T`-orthogonal projection onto `span(U)`, `P v = U (T v, C)`.
    pub fn apply_p<O: LinearMap + ?Sized>(&self, op: &O, v: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_P", self.dim_domain(), v.len())?;
        check_len("apply_P (operator)", self.dim_domain(), op.dim_domain())?;
        Ok(self.u.combine(&self.coefficients(&op.forward(v))))
    }

    /// `x_p = U (y, C)`, the projection of the data onto the space.
    pub fn initial_projection(&self, y_delta: &[f64]) -> Result<Vec<f64>> {
        check_len("initial_projection", self.dim_range(), y_delta.len())?;
        Ok(self.u.combine(&self.coefficients(y_delta)))
    }

    /// Largest columnwise `||T u_i - c_i||`.
    pub fn consistency<O: LinearMap + ?Sized>(&self, op: &O) -> Result<f64> {
        check_len("consistency", self.dim_domain(), op.dim_domain())?;
        check_len("consistency", self.dim_range(), op.dim_range())?;
        Ok(self
            .u
            .vectors()
            .iter()
            .zip(self.c.vectors())
            .map(|(u, c)| {
                let tu = op.forward(u);
                tu.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max))
    }

    /// Error bounds for the data projection and the inflated noise level
    /// passed to the inner solver.
    pub fn bounds(&self, op_norm: f64, delta: f64) -> Result<BoundReport> {
        if !(op_norm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "op_norm",
                reason: format!("must be positive, got {op_norm}"),
            });
        }
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("must be nonnegative, got {delta}"),
            });
        }
        if self.is_empty() {
            return Ok(BoundReport {
                init_proj_bound: 0.0,
                kappa_u: 1.0,
                gram_fro: 0.0,
                sum_u_norms: 0.0,
                inv_gram_fro: 0.0,
            });
        }
        let gram_fro = gram(&self.u, &self.u)?.norm();
        let sum_u_norms: f64 = self.u.vectors().iter().map(|u| dot(u, u)).sum();
        let cc = gram(&self.c, &self.c)?;
        let inv_gram_fro = cc
            .try_inverse()
            .ok_or(Error::InvalidParameter {
                name: "C",
                reason: "Gramian (C, C) is singular".into(),
            })?
            .norm();
        let factor = (gram_fro * sum_u_norms).sqrt() * inv_gram_fro * op_norm;
        Ok(BoundReport {
            init_proj_bound: factor * delta,
            kappa_u: 1.0 + factor,
            gram_fro,
            sum_u_norms,
            inv_gram_fro,
        })
    }
}

impl RangeProjector for RecycleSpace {
    fn project(&self, w: &[f64]) -> Vec<f64> {
        self.c.combine(&self.coefficients(w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Bound on `||x_p^dagger - x_p^delta||`.
    pub init_proj_bound: f64,
    /// Noise amplification constant; the inner solver sees `kappa_u * delta`.
    pub kappa_u: f64,
    /// `||(U, U)||_F`
    pub gram_fro: f64,
    /// `sum_l ||u_l||^2`
    pub sum_u_norms: f64,
    /// `||(C, C)^{-1}||_F`
    pub inv_gram_fro: f64,
}

/// Eigenpair approximations, eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct RitzPairs {
    pub values: Vec<f64>,
    pub vectors: KTuple,
    /// Pairs discarded for an excessive residual.
    pub pruned: usize,
}

// Rayleigh-Ritz on an orthonormal basis: returns (values, vectors) sorted
// descending.
fn rayleigh_ritz<O: LinearMap + ?Sized>(op: &O, basis: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = basis.len();
    let images: Vec<Vec<f64>> = basis.iter().map(|v| op.forward(v)).collect();
    let h = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let dim = basis.first().map_or(0, Vec::len);
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for idx in order {
        values.push(eig.eigenvalues[idx]);
        let mut v = vec![0.0; dim];
        for (i, b) in basis.iter().enumerate() {
            axpy(eig.eigenvectors[(i, idx)], b, &mut v);
        }
        let nv = norm(&v);
        scale(1.0 / nv, &mut v);
        vectors.push(v);
    }
    (values, vectors)
}

/// Galerkin (Ritz) extraction from `span(V)` for a self-adjoint `op`
/// (typically `T*T`): `A v - lambda v` orthogonal to `span(V)`.
pub fn ritz_vectors<O: LinearMap + ?Sized>(op: &O, v: &KTuple, count: usize) -> Result<RitzPairs> {
    check_len("ritz_vectors", op.dim_domain(), v.dim())?;
    check_len("ritz_vectors (square operator)", op.dim_domain(), op.dim_range())?;
    if count > v.k() {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: format!("requested {count} Ritz vectors from a {}-dimensional space", v.k()),
        });
    }
    let (basis, _) = mgs_qr(v.vectors())?;
    let (mut values, mut vectors) = rayleigh_ritz(op, &basis);
    values.truncate(count);
    vectors.truncate(count);
    Ok(RitzPairs {
        values,
        vectors: KTuple {
            dim: v.dim(),
            vectors,
        },
        pruned: 0,
    })
}

fn random_block(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(rng)).collect())
        .collect()
}

// Orthonormalizes in place, replacing numerically dependent columns by
// fresh random directions.
fn orthonormalize_block(block: &mut Vec<Vec<f64>>, rng: &mut ChaCha8Rng) {
    let dim = block.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for col in block.drain(..) {
        let mut w = col;
        let mut attempts = 0;
        loop {
            let before = norm(&w);
            for _pass in 0..2 {
                for q in &out {
                    let h = dot(q, &w);
                    axpy(-h, q, &mut w);
                }
            }
            let after = norm(&w);
            if after > 1e-10 * before && after > 0.0 {
                scale(1.0 / after, &mut w);
                break;
            }
            attempts += 1;
            assert!(attempts < 16, "cannot extend orthonormal block in dimension {dim}");
            w = random_block(rng, dim, 1).pop().unwrap();
        }
        out.push(w);
    }
    *block = out;
}

/// Subspace iteration with Rayleigh-Ritz extraction for the dominant
/// eigenvectors of a self-adjoint operator. Pairs whose residual
/// `||A v - lambda v||` exceeds `1e-6 ||v||` are discarded.
pub fn top_eigenvectors<O: LinearMap + ?Sized>(
    op: &O,
    count: usize,
    iters: usize,
    seed: u64,
) -> Result<RitzPairs> {
    let n = op.dim_domain();
    check_len("top_eigenvectors (square operator)", n, op.dim_range())?;
    if count == 0 || count > n {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: format!("must lie in 1..={n}, got {count}"),
        });
    }
    let block_size = (count + (count / 2).max(4)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block = random_block(&mut rng, n, block_size);
    orthonormalize_block(&mut block, &mut rng);

    let residuals = |values: &[f64], vectors: &[Vec<f64>]| -> Vec<f64> {
        values
            .iter()
            .zip(vectors)
            .map(|(lambda, v)| {
                let mut av = op.forward(v);
                axpy(-lambda, v, &mut av);
                norm(&av) / norm(v)
            })
            .collect::<Vec<_>>()
    };

    let (mut values, mut vectors) = rayleigh_ritz(op, &block);
    for it in 1..=iters {
        block = block.iter().map(|v| op.forward(v)).collect();
        orthonormalize_block(&mut block, &mut rng);
        if it % 10 == 0 || it == iters {
            let (vals, vecs) = rayleigh_ritz(op, &block);
            let converged = residuals(&vals[..count], &vecs[..count])
                .iter()
                .all(|&r| r <= EIGEN_RESIDUAL_TOL);
            // Continue from the Ritz basis; it spans the same space.
            block = vecs.clone();
            values = vals;
            vectors = vecs;
            if converged {
                break;
            }
        }
    }
    if iters == 0 {
        let (vals, vecs) = rayleigh_ritz(op, &block);
        values = vals;
        vectors = vecs;
    }

    values.truncate(count);
    vectors.truncate(count);
    let res = residuals(&values, &vectors);
    let mut kept_values = Vec::new();
    let mut kept_vectors = Vec::new();
    for ((lambda, v), r) in values.into_iter().zip(vectors).zip(res) {
        if r <= EIGEN_RESIDUAL_TOL {
            kept_values.push(lambda);
            kept_vectors.push(v);
        }
    }
    let pruned = count - kept_values.len();
    if pruned > 0 {
        warn!("top_eigenvectors: pruned {pruned} of {count} pairs with residual above {EIGEN_RESIDUAL_TOL:e}");
    }
    Ok(RitzPairs {
        values: kept_values,
        vectors: KTuple {
            dim: n,
            vectors: kept_vectors,
        },
        pruned,
    })
}

/// Orthonormal basis of a span together with the number of input vectors
/// dropped as dependent.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoBasis {
    pub basis: KTuple,
    pub dropped: usize,
}

/// Euclidean orthonormalization of prior solutions. Dependent directions
/// are dropped and counted, not treated as errors.
pub fn recycle_from_solutions(solutions: &[Vec<f64>]) -> Result<OrthoBasis> {
    let dim = solutions.first().map(Vec::len).ok_or(Error::EmptySpan)?;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0;
    for s in solutions {
        check_len("recycle_from_solutions", dim, s.len())?;
        let original = norm(s);
        let mut w = s.clone();
        for _pass in 0..2 {
            for q in &basis {
                let h = dot(q, &w);
                axpy(-h, q, &mut w);
            }
        }
        let remaining = norm(&w);
        if original == 0.0 || remaining <= DEPENDENCE_TOL * original {
            dropped += 1;
            continue;
        }
        scale(1.0 / remaining, &mut w);
        basis.push(w);
    }
    if basis.is_empty() {
        return Err(Error::EmptySpan);
    }
    if dropped > 0 {
        warn!("recycle_from_solutions: dropped {dropped} dependent direction(s)");
    }
    Ok(OrthoBasis {
        basis: KTuple::new(dim, basis)?,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{DenseMatrix, Diagonal, Identity, NormalOperator};
    use crate::oracle;
    use crate::vecops::dist;

    fn diag2() -> Diagonal {
        Diagonal::new(vec![2.0, 1.0]).unwrap()
    }

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn diag2_space() -> RecycleSpace {
        qr_against(&diag2(), &KTuple::new(2, vec![e(2, 0)]).unwrap()).unwrap()
    }

    #[test]
    fn bilinear_forms() {
        let m = KTuple::new(2, vec![e(2, 0)]).unwrap();
        assert_eq!(bilinear_xu(&[2.0, 1.0], &m).unwrap(), vec![2.0]);
        assert_eq!(bilinear_xu(&[0.0, 3.0], &m).unwrap(), vec![0.0]);
        assert!(bilinear_xu(&[1.0, 2.0, 3.0], &m).is_err());

        let mut rng = oracle::rng(1);
        let x = oracle::random_vec(&mut rng, 5);
        let vs: Vec<Vec<f64>> = (0..3).map(|_| oracle::random_vec(&mut rng, 5)).collect();
        let got = bilinear_xu(&x, &KTuple::new(5, vs.clone()).unwrap()).unwrap();
        for (g, v) in got.iter().zip(&vs) {
            let mut acc = 0.0;
            for i in 0..5 {
                acc += x[i] * v[i];
            }
            assert_eq!(*g, acc);
        }
    }

    #[test]
    fn gram_examples() {
        let m = KTuple::new(2, vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let g = gram(&m, &m).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));

        let mut rng = oracle::rng(2);
        let on = KTuple::new(6, oracle::orthonormal_columns(&mut rng, 6, 3)).unwrap();
        let gi = gram(&on, &on).unwrap();
        assert!((gi - DMatrix::identity(3, 3)).abs().max() <= 1e-12);

        let a = KTuple::new(4, (0..3).map(|_| oracle::random_vec(&mut rng, 4)).collect()).unwrap();
        let b = KTuple::new(4, (0..2).map(|_| oracle::random_vec(&mut rng, 4)).collect()).unwrap();
        assert_eq!(gram(&a, &b).unwrap(), gram(&b, &a).unwrap().transpose());
        assert!(gram(&a, &KTuple::empty(5)).is_err());
    }

    #[test]
    fn ktuple_rejects_ragged_or_oversized() {
        assert!(KTuple::new(2, vec![vec![1.0, 0.0], vec![1.0]]).is_err());
        assert!(KTuple::new(1, vec![vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn qr_on_diag2() {
        let rs = diag2_space();
        assert_eq!(rs.c().vectors(), &[vec![1.0, 0.0]]);
        assert_eq!(rs.r()[(0, 0)], 2.0);
        assert_eq!(rs.u().vectors(), &[vec![0.5, 0.0]]);
    }

    #[test]
    fn qr_leaves_prepared_basis_alone() {
        let mut rng = oracle::rng(3);
        let a = oracle::random_matrix(&mut rng, 5, 5);
        let t = DenseMatrix::from_rows(&a).unwrap();
        let raw = KTuple::new(5, (0..3).map(|_| oracle::random_vec(&mut rng, 5)).collect()).unwrap();
        let rs = qr_against(&t, &raw).unwrap();
        let again = qr_against(&t, rs.u()).unwrap();
        assert!((again.r() - DMatrix::<f64>::identity(3, 3)).abs().max() <= 1e-12);
        for (u0, u1) in rs.u().vectors().iter().zip(again.u().vectors()) {
            assert!(dist(u0, u1) <= 1e-12 * norm(u0));
        }
    }

    #[test]
    fn qr_reports_dependent_column() {
        let raw = KTuple::new(2, vec![e(2, 0), vec![2.0, 0.0]]).unwrap();
        match qr_against(&diag2(), &raw) {
            Err(Error::RankDeficient { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn recycle_space_invariants() {
        let mut rng = oracle::rng(4);
        let a = oracle::random_matrix(&mut rng, 7, 6);
        let t = DenseMatrix::from_rows(&a).unwrap();
        let raw = KTuple::new(6, (0..3).map(|_| oracle::random_vec(&mut rng, 6)).collect()).unwrap();
        let rs = qr_against(&t, &raw).unwrap();
        let cc = gram(rs.c(), rs.c()).unwrap();
        assert!((cc - DMatrix::identity(3, 3)).abs().max() <= 1e-10);
        assert!(rs.consistency(&t).unwrap() <= 1e-8);
        for i in 0..3 {
            assert!(rs.r()[(i, i)] > 0.0);
            for j in 0..i {
                assert_eq!(rs.r()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn projectors_on_diag2() {
        let rs = diag2_space();
        assert_eq!(rs.apply_q(&[2.0, 1.0]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(rs.apply_q(&[3.0, 0.0]).unwrap(), vec![3.0, 0.0]);
        assert_eq!(rs.apply_p(&diag2(), &[1.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(rs.initial_projection(&[2.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(rs.initial_projection(&[0.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert!(rs.apply_q(&[1.0]).is_err());
    }

    #[test]
    fn projector_identities_on_random_system() {
        let mut rng = oracle::rng(5);
        let a = oracle::random_matrix(&mut rng, 6, 6);
        let t = DenseMatrix::from_rows(&a).unwrap();
        let raw = KTuple::new(6, (0..2).map(|_| oracle::random_vec(&mut rng, 6)).collect()).unwrap();
        let rs = qr_against(&t, &raw).unwrap();
        for _ in 0..50 {
            let v = oracle::random_vec(&mut rng, 6);
            let w = oracle::random_vec(&mut rng, 6);
            let pv = rs.apply_p(&t, &v).unwrap();
            assert!(dist(&rs.apply_p(&t, &pv).unwrap(), &pv) <= 1e-10 * norm(&v));
            let tpv = t.forward(&pv);
            let qtv = rs.apply_q(&t.forward(&v)).unwrap();
            assert!(dist(&tpv, &qtv) <= 1e-10 * norm(&v));
            let qw = rs.apply_q(&w).unwrap();
            let qv = rs.apply_q(&v).unwrap();
            assert!((dot(&qw, &v) - dot(&w, &qv)).abs() <= 1e-12 * norm(&v) * norm(&w));
            // P v for v already in span(U).
            assert!(dist(&rs.apply_p(&t, &rs.u().combine(&[0.3, -1.2])).unwrap(), &rs.u().combine(&[0.3, -1.2])) <= 1e-12 * 10.0);
        }
    }

    #[test]
    fn initial_projection_reproduces_projected_data() {
        let mut rng = oracle::rng(6);
        for _ in 0..5 {
            let a = oracle::random_matrix(&mut rng, 5, 5);
            let t = DenseMatrix::from_rows(&a).unwrap();
            let raw = KTuple::new(5, (0..2).map(|_| oracle::random_vec(&mut rng, 5)).collect()).unwrap();
            let rs = qr_against(&t, &raw).unwrap();
            let y = t.forward(&oracle::random_vec(&mut rng, 5));
            let xp = rs.initial_projection(&y).unwrap();
            assert!(dist(&t.forward(&xp), &rs.apply_q(&y).unwrap()) <= 1e-10 * norm(&y));
        }
    }

    #[test]
    fn bounds_on_diag2() {
        let rs = diag2_space();
        let b = rs.bounds(2.0, 0.1).unwrap();
        assert!((b.gram_fro - 0.25).abs() < 1e-15);
        assert!((b.sum_u_norms - 0.25).abs() < 1e-15);
        assert!((b.inv_gram_fro - 1.0).abs() < 1e-15);
        assert!((b.kappa_u - 1.5).abs() < 1e-15);
        assert!((b.init_proj_bound - 0.05).abs() < 1e-15);
        assert_eq!(rs.bounds(2.0, 0.0).unwrap().init_proj_bound, 0.0);
        assert!(rs.bounds(0.0, 0.1).is_err());
        assert!(rs.bounds(1.0, -0.1).is_err());
    }

    #[test]
    fn empty_space_is_neutral() {
        let rs = qr_against(&diag2(), &KTuple::empty(2)).unwrap();
        assert!(rs.is_empty());
        assert_eq!(rs.apply_q(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(rs.bounds(2.0, 1.0).unwrap().kappa_u, 1.0);
    }

    #[test]
    fn ritz_recovers_invariant_subspace() {
        let d = Diagonal::new(vec![5.0, 3.0, 2.0, 1.0]).unwrap();
        let v = KTuple::new(4, vec![vec![0.0, 1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]]).unwrap();
        let rp = ritz_vectors(&d, &v, 2).unwrap();
        assert!((rp.values[0] - 5.0).abs() < 1e-14);
        assert!((rp.values[1] - 3.0).abs() < 1e-14);
        assert!((rp.vectors.get(0)[0].abs() - 1.0).abs() < 1e-14);
        assert!((rp.vectors.get(1)[1].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ritz_full_space_matches_jacobi() {
        let mut rng = oracle::rng(7);
        let s = oracle::random_symmetric(&mut rng, 4);
        let a = DenseMatrix::from_rows(&s).unwrap();
        let v = KTuple::new(4, (0..4).map(|i| e(4, i)).collect()).unwrap();
        let rp = ritz_vectors(&a, &v, 4).unwrap();
        let (vals, vecs) = oracle::jacobi_eigen(&s);
        for i in 0..4 {
            assert!((rp.values[i] - vals[i]).abs() <= 1e-8);
            let align = dot(rp.vectors.get(i), &vecs[i]).abs();
            assert!((align - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn ritz_on_diag2_normal_operator() {
        let v = KTuple::new(2, vec![e(2, 0), e(2, 1)]).unwrap();
        let rp = ritz_vectors(&NormalOperator(diag2()), &v, 1).unwrap();
        assert!((rp.values[0] - 4.0).abs() < 1e-14);
        assert!((rp.vectors.get(0)[0].abs() - 1.0).abs() < 1e-14);
        assert!(ritz_vectors(&NormalOperator(diag2()), &v, 3).is_err());
        let dep = KTuple::new(2, vec![e(2, 0), e(2, 0)]).unwrap();
        assert!(ritz_vectors(&Identity(2), &dep, 1).is_err());
    }

    #[test]
    fn subspace_iteration_on_diagonal() {
        let d = Diagonal::new(vec![3.0, 2.0, 1.0]).unwrap();
        let rp = top_eigenvectors(&d, 2, 200, 1).unwrap();
        assert_eq!(rp.vectors.k(), 2);
        for v in rp.vectors.vectors() {
            assert!(v[2].abs() <= 1e-8);
        }
        assert!((rp.values[0] - 3.0).abs() <= 1e-8);
    }

    #[test]
    fn subspace_iteration_matches_jacobi() {
        let mut rng = oracle::rng(8);
        let s = oracle::random_symmetric(&mut rng, 6);
        // Shift to make the spectrum positive and the top pair well separated.
        let (vals, vecs) = oracle::jacobi_eigen(&s);
        let shift = vals[5].abs() + 1.0;
        let shifted = DenseMatrix::from_rows(
            &(0..6)
                .map(|i| (0..6).map(|j| s[i][j] + if i == j { shift } else { 0.0 }).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let rp = top_eigenvectors(&shifted, 2, 2000, 3).unwrap();
        for i in 0..rp.vectors.k() {
            let align = dot(rp.vectors.get(i), &vecs[i]).abs();
            // sin of the angle between the computed and reference vectors
            assert!((1.0 - align * align).max(0.0).sqrt() <= 1e-6);
        }
    }

    #[test]
    fn prior_solutions_are_orthonormalized() {
        let ob = recycle_from_solutions(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(ob.basis.vectors(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(ob.dropped, 0);

        let v = vec![3.0, 4.0];
        let ob = recycle_from_solutions(&[v.clone(), vec![6.0, 8.0]]).unwrap();
        assert_eq!(ob.basis.k(), 1);
        assert_eq!(ob.dropped, 1);
        assert!(dist(ob.basis.get(0), &[0.6, 0.8]) < 1e-15);

        assert!(matches!(recycle_from_solutions(&[vec![0.0, 0.0]]), Err(Error::EmptySpan)));
        assert!(matches!(recycle_from_solutions(&[]), Err(Error::EmptySpan)));
    }
}
