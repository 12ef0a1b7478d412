//! Matrix-free linear operators with adjoints.
//!
//! Every operator maps between real coordinate spaces and exposes both its
//! forward action `x -> Tx` and its adjoint `y -> T*y`. Images are stored
//! row-major and flattened.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::vecops::{dot, norm, scale};

/// Default number of power iterations used for operator-norm estimates.
pub const NORM_ESTIMATE_ITERS: usize = 200;

pub trait LinearMap: Send + Sync {
    fn dim_domain(&self) -> usize;
    fn dim_range(&self) -> usize;

    /// Forward action without a length check. Callers guarantee
    /// `x.len() == dim_domain()`.
    fn forward(&self, x: &[f64]) -> Vec<f64>;

    /// Adjoint action without a length check. Callers guarantee
    /// `y.len() == dim_range()`.
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("apply", self.dim_domain(), x.len())?;
        Ok(self.forward(x))
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_adjoint", self.dim_range(), y.len())?;
        Ok(self.adjoint(y))
    }
}

impl<T: LinearMap + ?Sized> LinearMap for &T {
    fn dim_domain(&self) -> usize {
        (**self).dim_domain()
    }
    fn dim_range(&self) -> usize {
        (**self).dim_range()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (**self).forward(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        (**self).adjoint(y)
    }
}

impl<T: LinearMap + ?Sized> LinearMap for Box<T> {
    fn dim_domain(&self) -> usize {
        (**self).dim_domain()
    }
    fn dim_range(&self) -> usize {
        (**self).dim_range()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (**self).forward(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        (**self).adjoint(y)
    }
}

/// Row-major dense matrix operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter {
                name: "shape",
                reason: format!("matrix shape must be positive, got {rows}x{cols}"),
            });
        }
        check_len("DenseMatrix::new", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len("DenseMatrix::from_rows", cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl LinearMap for DenseMatrix {
    fn dim_domain(&self) -> usize {
        self.cols
    }
    fn dim_range(&self) -> usize {
        self.rows
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += a * yi;
                }
            }
        }
        out
    }
}

/// Square diagonal operator `diag(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonal {
    diag: Vec<f64>,
}

impl Diagonal {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter {
                name: "diag",
                reason: "diagonal must be nonempty".into(),
            });
        }
        Ok(Self { diag })
    }

    pub fn values(&self) -> &[f64] {
        &self.diag
    }
}

impl LinearMap for Diagonal {
    fn dim_domain(&self) -> usize {
        self.diag.len()
    }
    fn dim_range(&self) -> usize {
        self.diag.len()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(x).map(|(d, v)| d * v).collect()
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.forward(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity(pub usize);

impl LinearMap for Identity {
    fn dim_domain(&self) -> usize {
        self.0
    }
    fn dim_range(&self) -> usize {
        self.0
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
}

/// The self-adjoint operator `T*T` on the domain of `T`.
#[derive(Debug, Clone)]
pub struct NormalOperator<O>(pub O);

impl<O: LinearMap> LinearMap for NormalOperator<O> {
    fn dim_domain(&self) -> usize {
        self.0.dim_domain()
    }
    fn dim_range(&self) -> usize {
        self.0.dim_domain()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.0.adjoint(&self.0.forward(x))
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.forward(y)
    }
}

/// A linear projector acting on range-space vectors.
pub trait RangeProjector: Send + Sync {
    fn project(&self, w: &[f64]) -> Vec<f64>;
}

impl<P: RangeProjector + ?Sized> RangeProjector for &P {
    fn project(&self, w: &[f64]) -> Vec<f64> {
        (**self).project(w)
    }
}

/// Adapts a closure into a [`RangeProjector`].
#[derive(Debug, Clone, Copy)]
pub struct ProjectorFn<F>(pub F);

impl<F> RangeProjector for ProjectorFn<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn project(&self, w: &[f64]) -> Vec<f64> {
        (self.0)(w)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroProjector;

impl RangeProjector for ZeroProjector {
    fn project(&self, w: &[f64]) -> Vec<f64> {
        vec![0.0; w.len()]
    }
}

/// `(I - Q)T`, with adjoint `T*(I - Q)` for an orthogonal projector `Q`.
#[derive(Debug, Clone)]
pub struct Deflated<O, Q> {
    op: O,
    projector: Q,
}

/// Wraps `op` so that its range is deflated by `projector`.
pub fn deflate<O: LinearMap, Q: RangeProjector>(op: O, projector: Q) -> Deflated<O, Q> {
    Deflated { op, projector }
}

impl<O, Q: RangeProjector> Deflated<O, Q> {
    /// `w - Qw`
    pub fn complement(&self, w: &[f64]) -> Vec<f64> {
        let q = self.projector.project(w);
        w.iter().zip(&q).map(|(a, b)| a - b).collect()
    }

    pub fn inner(&self) -> &O {
        &self.op
    }
}

impl<O: LinearMap, Q: RangeProjector> LinearMap for Deflated<O, Q> {
    fn dim_domain(&self) -> usize {
        self.op.dim_domain()
    }
    fn dim_range(&self) -> usize {
        self.op.dim_range()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.complement(&self.op.forward(x))
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.op.adjoint(&self.complement(y))
    }
}

/// Point-spread function sampled on a grid. `center` holds the index of
/// the PSF origin, i.e. the entry whose value is `PSF(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsfGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    center: (usize, usize),
}

impl PsfGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, center: (usize, usize)) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter {
                name: "psf",
                reason: format!("PSF shape must be positive, got {rows}x{cols}"),
            });
        }
        check_len("PsfGrid::new", rows * cols, values.len())?;
        if center.0 >= rows || center.1 >= cols {
            return Err(Error::InvalidParameter {
                name: "center",
                reason: format!("center {center:?} outside {rows}x{cols} grid"),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "psf",
                reason: "PSF values must be finite".into(),
            });
        }
        if values.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "psf",
                reason: "PSF values must have positive sum".into(),
            });
        }
        Ok(Self {
            rows,
            cols,
            values,
            center,
        })
    }

    /// PSF with the conventional center `(rows / 2, cols / 2)`.
    pub fn centered(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(rows, cols, values, (rows / 2, cols / 2))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn center(&self) -> (usize, usize) {
        self.center
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// The PSF inducing the adjoint operator: `PSFadj(x, y) = PSF(-x, -y)`.
    pub fn point_reflection(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                values[(self.rows - 1 - i) * self.cols + (self.cols - 1 - j)] = self.get(i, j);
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            values,
            center: (self.rows - 1 - self.center.0, self.cols - 1 - self.center.1),
        }
    }

    /// True when `PSF(x, y) == PSF(-x, -y)` for every stored offset.
    pub fn is_point_symmetric(&self, tol: f64) -> bool {
        let (cr, cc) = (self.center.0 as isize, self.center.1 as isize);
        for i in 0..self.rows as isize {
            for j in 0..self.cols as isize {
                let (ri, rj) = (2 * cr - i, 2 * cc - j);
                let mirrored = if ri >= 0 && rj >= 0 && (ri as usize) < self.rows && (rj as usize) < self.cols {
                    self.get(ri as usize, rj as usize)
                } else {
                    0.0
                };
                if (self.get(i as usize, j as usize) - mirrored).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Samples `exp(-(x^2 + y^2) / (2 sigma^2))` around the grid center and
/// normalizes to unit sum.
pub fn gaussian_psf(rows: usize, cols: usize, sigma: f64) -> Result<PsfGrid> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be positive and finite, got {sigma}"),
        });
    }
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter {
            name: "psf",
            reason: format!("PSF shape must be positive, got {rows}x{cols}"),
        });
    }
    let (cr, cc) = (rows / 2, cols / 2);
    let denom = 2.0 * sigma * sigma;
    let mut values = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let dx = i as f64 - cr as f64;
            let dy = j as f64 - cc as f64;
            values.push((-(dx * dx + dy * dy) / denom).exp());
        }
    }
    let total: f64 = values.iter().sum();
    scale(1.0 / total, &mut values);
    PsfGrid::new(rows, cols, values, (cr, cc))
}

/// Periodic (circular) convolution of a row-major image with a PSF,
/// evaluated by direct summation.
#[derive(Debug, Clone)]
pub struct Convolution {
    rows: usize,
    cols: usize,
    psf: PsfGrid,
    // Nonzero PSF taps as (row offset, col offset, weight), offsets reduced
    // modulo the image shape.
    taps: Vec<(usize, usize, f64)>,
}

pub fn psf_operator(psf: PsfGrid, rows: usize, cols: usize) -> Result<Convolution> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter {
            name: "image",
            reason: format!("image shape must be positive, got {rows}x{cols}"),
        });
    }
    if psf.rows() > rows || psf.cols() > cols {
        return Err(Error::DimensionMismatch {
            context: "psf_operator (PSF larger than image)",
            expected: rows * cols,
            got: psf.rows() * psf.cols(),
        });
    }
    let (cr, cc) = psf.center();
    let mut taps = Vec::new();
    for i in 0..psf.rows() {
        for j in 0..psf.cols() {
            let w = psf.get(i, j);
            if w != 0.0 {
                let di = (i as isize - cr as isize).rem_euclid(rows as isize) as usize;
                let dj = (j as isize - cc as isize).rem_euclid(cols as isize) as usize;
                taps.push((di, dj, w));
            }
        }
    }
    Ok(Convolution {
        rows,
        cols,
        psf,
        taps,
    })
}

impl Convolution {
    pub fn psf(&self) -> &PsfGrid {
        &self.psf
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    // Forward: out[p] += w * src[p - d]; adjoint: out[p] += w * src[p + d].
    fn accumulate(&self, src: &[f64], adjoint: bool) -> Vec<f64> {
        let (rows, cols) = (self.rows, self.cols);
        let mut out = vec![0.0; rows * cols];
        for &(di, dj, w) in &self.taps {
            // Column offset to read from for each output column.
            let dj = if adjoint { dj } else { (cols - dj) % cols };
            for r in 0..rows {
                let sr = if adjoint {
                    (r + di) % rows
                } else {
                    (r + rows - di) % rows
                };
                let src_row = &src[sr * cols..(sr + 1) * cols];
                let out_row = &mut out[r * cols..(r + 1) * cols];
                // out_row[c] += w * src_row[(c + dj) % cols], split to avoid modulo.
                let split = cols - dj;
                for (o, s) in out_row[..split].iter_mut().zip(&src_row[dj..]) {
                    *o += w * s;
                }
                for (o, s) in out_row[split..].iter_mut().zip(&src_row[..dj]) {
                    *o += w * s;
                }
            }
        }
        out
    }
}

impl LinearMap for Convolution {
    fn dim_domain(&self) -> usize {
        self.rows * self.cols
    }
    fn dim_range(&self) -> usize {
        self.rows * self.cols
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.accumulate(x, false)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.accumulate(y, true)
    }
}

/// Power iteration on `T*T` from a seeded random start; returns the
/// estimate of `||T|| = sqrt(lambda_max(T*T))`.
pub fn norm_estimate<O: LinearMap + ?Sized>(op: &O, iters: usize, seed: u64) -> Result<f64> {
    if iters == 0 {
        return Err(Error::InvalidParameter {
            name: "iters",
            reason: "at least one iteration is required".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..op.dim_domain())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let nv = norm(&v);
    scale(1.0 / nv, &mut v);
    let mut estimate = 0.0;
    for _ in 0..iters {
        let tv = op.forward(&v);
        estimate = norm(&tv);
        let mut w = op.adjoint(&tv);
        let nw = norm(&w);
        if nw == 0.0 {
            // v lies in the null space of T; T = 0 or an unlucky start.
            return Ok(estimate);
        }
        scale(1.0 / nw, &mut w);
        v = w;
    }
    Ok(estimate.max(norm(&op.forward(&v))))
}
