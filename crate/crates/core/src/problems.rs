//! Seeded test problems: periodic Gaussian blur of synthetic images,
//! diagonal and dense academic systems, and a mildly nonlinear toy.
//!
//! Every generator is bit-deterministic in its parameters and seed. Image
//! content and noise draw from separate ChaCha8 streams of the same seed,
//! so changing the noise level never moves the stars.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::grid;
use crate::linops::{gaussian_psf, psf_operator, Convolution, DenseMatrix, Diagonal, LinearMap};
use crate::nonlinear::{NonlinearMap, NonlinearToy};
use crate::solvers::{steepest_descent, SolveConfig};
use crate::vecops::{add, norm, scale};

const IMAGE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const OPERATOR_STREAM: u64 = 3;

/// The forward map of a test problem.
#[derive(Debug, Clone)]
pub enum ProblemOperator {
    Convolution(Convolution),
    Dense(DenseMatrix),
    Diagonal(Diagonal),
    Nonlinear(NonlinearToy),
}

impl ProblemOperator {
    /// The operator as a linear map, or `None` for nonlinear problems.
    pub fn as_linear(&self) -> Option<&dyn LinearMap> {
        match self {
            ProblemOperator::Convolution(op) => Some(op),
            ProblemOperator::Dense(op) => Some(op),
            ProblemOperator::Diagonal(op) => Some(op),
            ProblemOperator::Nonlinear(_) => None,
        }
    }

    /// The operator as a nonlinear map; linear operators are wrapped.
    pub fn as_nonlinear(&self) -> Box<dyn NonlinearMap + '_> {
        match self {
            ProblemOperator::Nonlinear(f) => Box::new(f),
            _ => Box::new(crate::nonlinear::LinearAsNonlinear(self.as_linear().unwrap())),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProblemOperator::Convolution(_) => "blur",
            ProblemOperator::Dense(_) => "dense",
            ProblemOperator::Diagonal(_) => "diagonal",
            ProblemOperator::Nonlinear(_) => "nonlinear",
        }
    }

    pub fn dim_domain(&self) -> usize {
        match self {
            ProblemOperator::Nonlinear(f) => f.dim_domain(),
            _ => self.as_linear().unwrap().dim_domain(),
        }
    }

    pub fn dim_range(&self) -> usize {
        match self {
            ProblemOperator::Nonlinear(f) => f.dim_range(),
            _ => self.as_linear().unwrap().dim_range(),
        }
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ProblemOperator::Nonlinear(f) => f.eval(x),
            _ => self.as_linear().unwrap().forward(x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestProblem {
    pub op: ProblemOperator,
    pub x_true: Option<Vec<f64>>,
    pub y_exact: Option<Vec<f64>>,
    pub y_delta: Vec<f64>,
    /// Absolute noise level `||y_delta - y_exact||`.
    pub delta: f64,
    pub label: String,
    /// Image shape for blur problems; `(n, 1)` otherwise.
    pub shape: (usize, usize),
    /// Generation parameters, recorded in the serialized manifest.
    pub meta: BTreeMap<String, String>,
}

impl TestProblem {
    /// Relative noise level `delta / ||y_exact||`, when the exact data is known.
    pub fn delta_rel(&self) -> Option<f64> {
        let y = self.y_exact.as_ref()?;
        let ny = norm(y);
        (ny > 0.0).then(|| self.delta / ny)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImageKind {
    Geometric,
    Starfield { count: usize },
    File(PathBuf),
}

impl ImageKind {
    pub fn name(&self) -> String {
        match self {
            ImageKind::Geometric => "geometric".into(),
            ImageKind::Starfield { count } => format!("starfield:{count}"),
            ImageKind::File(p) => format!("file:{}", p.display()),
        }
    }
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Concentric squares: pixel `(i, j)` lies in band
/// `min(i, j, rows-1-i, cols-1-j) / w` with `w = max(1, min(rows, cols) / 8)`;
/// even bands are 0 and odd bands are 1, so the outer frame is dark.
pub fn geometric_image(rows: usize, cols: usize) -> Vec<f64> {
    let w = (rows.min(cols) / 8).max(1);
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let m = i.min(j).min(rows - 1 - i).min(cols - 1 - j);
            out.push(if (m / w) % 2 == 1 { 1.0 } else { 0.0 });
        }
    }
    out
}

/// `count` single-pixel stars at seeded positions with brightness
/// `10^(3u)`, `u` uniform on `[0, 1)`. Coinciding stars add up.
pub fn starfield_image(rows: usize, cols: usize, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed, IMAGE_STREAM);
    let mut out = vec![0.0; rows * cols];
    for _ in 0..count {
        let i = rng.random_range(0..rows);
        let j = rng.random_range(0..cols);
        let u: f64 = rng.random();
        out[i * cols + j] += 10f64.powf(3.0 * u);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Uniform on `[-1, 1]`, mean-centered before scaling.
    Uniform,
    /// Standard normal direction.
    Gaussian,
}

/// A noise vector of exactly the requested norm.
pub fn scaled_noise(n: usize, target: f64, kind: NoiseKind, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed, NOISE_STREAM);
    let mut v: Vec<f64> = match kind {
        NoiseKind::Uniform => (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        NoiseKind::Gaussian => (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
    };
    if kind == NoiseKind::Uniform && n > 1 {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|e| *e -= mean);
    }
    let nv = norm(&v);
    if target == 0.0 || nv == 0.0 {
        return vec![0.0; n];
    }
    scale(target / nv, &mut v);
    v
}

fn add_noise(y_exact: &[f64], target: f64, kind: NoiseKind, seed: u64) -> (Vec<f64>, f64) {
    if target == 0.0 {
        return (y_exact.to_vec(), 0.0);
    }
    let n = scaled_noise(y_exact.len(), target, kind, seed);
    (add(y_exact, &n), norm(&n))
}

fn check_noise_level(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0 && value.is_finite()) {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and nonnegative, got {value}"),
        });
    }
    Ok(())
}

/// Side length of the sampled Gaussian PSF: `2 ceil(4 sigma) + 1`, capped
/// at the largest odd size that fits the image so the kernel stays
/// point-symmetric about its center.
pub fn blur_psf_size(extent: usize, sigma: f64) -> usize {
    let support = 2 * (4.0 * sigma).ceil() as usize + 1;
    let cap = if extent % 2 == 0 { extent.saturating_sub(1) } else { extent };
    support.min(cap).max(1)
}

/// Periodic Gaussian blur operator of width `sigma` on a `rows x cols` grid.
pub fn gaussian_blur(rows: usize, cols: usize, sigma: f64) -> Result<Convolution> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be positive and finite, got {sigma}"),
        });
    }
    let psf = gaussian_psf(blur_psf_size(rows, sigma), blur_psf_size(cols, sigma), sigma)?;
    psf_operator(psf, rows, cols)
}

/// Gaussian blur of a synthetic or file image with uniform noise of norm
/// `delta_rel * ||y_exact||`.
pub fn make_blur_problem(
    rows: usize,
    cols: usize,
    sigma: f64,
    image: &ImageKind,
    delta_rel: f64,
    seed: u64,
) -> Result<TestProblem> {
    check_noise_level("delta_rel", delta_rel)?;
    let op = gaussian_blur(rows, cols, sigma)?;
    let x_true = match image {
        ImageKind::Geometric => geometric_image(rows, cols),
        ImageKind::Starfield { count } => starfield_image(rows, cols, *count, seed),
        ImageKind::File(path) => {
            let g = grid::read_grid(path)?;
            if (g.rows, g.cols) != (rows, cols) {
                return Err(Error::Format {
                    path: path.clone(),
                    reason: format!("image is {}x{}, expected {rows}x{cols}", g.rows, g.cols),
                });
            }
            g.values
        }
    };
    let y_exact = op.forward(&x_true);
    let (y_delta, delta) = add_noise(&y_exact, delta_rel * norm(&y_exact), NoiseKind::Uniform, seed);
    let mut meta = BTreeMap::new();
    meta.insert("sigma".into(), sigma.to_string());
    meta.insert("image".into(), image.name());
    meta.insert("noise".into(), "uniform".into());
    meta.insert("delta_rel".into(), delta_rel.to_string());
    meta.insert("seed".into(), seed.to_string());
    Ok(TestProblem {
        op: ProblemOperator::Convolution(op),
        x_true: Some(x_true),
        y_exact: Some(y_exact),
        y_delta,
        delta,
        label: format!("blur {rows}x{cols} sigma={sigma} {}", image.name()),
        shape: (rows, cols),
        meta,
    })
}

/// Diagonal system with Gaussian-direction noise of norm `delta`.
pub fn make_diagonal_problem(singular_values: &[f64], x_true: &[f64], delta: f64, seed: u64) -> Result<TestProblem> {
    check_len("make_diagonal_problem", singular_values.len(), x_true.len())?;
    check_noise_level("delta", delta)?;
    if singular_values.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "singular_values",
            reason: "must be finite and nonnegative".into(),
        });
    }
    let op = Diagonal::new(singular_values.to_vec())?;
    let y_exact = op.forward(x_true);
    let (y_delta, delta) = add_noise(&y_exact, delta, NoiseKind::Gaussian, seed);
    let mut meta = BTreeMap::new();
    meta.insert("noise".into(), "gaussian".into());
    meta.insert("seed".into(), seed.to_string());
    Ok(TestProblem {
        op: ProblemOperator::Diagonal(op),
        x_true: Some(x_true.to_vec()),
        y_exact: Some(y_exact),
        y_delta,
        delta,
        label: format!("diagonal n={}", singular_values.len()),
        shape: (x_true.len(), 1),
        meta,
    })
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut *rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // Fix column signs so the factor is unique.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Dense `n x n` system `T = U diag(s) V^T` with `s_i = decay^i` and seeded
/// orthogonal factors; `x_true` has uniform entries in `[-1, 1]` and the
/// noise is a Gaussian direction of norm `delta`.
pub fn make_dense_problem(n: usize, decay: f64, delta: f64, seed: u64) -> Result<TestProblem> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be positive".into(),
        });
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "decay",
            reason: format!("must lie in (0, 1], got {decay}"),
        });
    }
    check_noise_level("delta", delta)?;
    let mut rng = seeded(seed, OPERATOR_STREAM);
    let u = random_orthogonal(&mut rng, n);
    let v = random_orthogonal(&mut rng, n);
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| decay.powi(i as i32)));
    let t = &u * s * v.transpose();
    let data: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| t[(i, j)]).collect();
    let op = DenseMatrix::new(n, n, data)?;
    let mut xrng = seeded(seed, IMAGE_STREAM);
    let x_true: Vec<f64> = (0..n).map(|_| xrng.random_range(-1.0..=1.0)).collect();
    let y_exact = op.forward(&x_true);
    let (y_delta, delta) = add_noise(&y_exact, delta, NoiseKind::Gaussian, seed);
    let mut meta = BTreeMap::new();
    meta.insert("decay".into(), decay.to_string());
    meta.insert("noise".into(), "gaussian".into());
    meta.insert("seed".into(), seed.to_string());
    Ok(TestProblem {
        op: ProblemOperator::Dense(op),
        x_true: Some(x_true),
        y_exact: Some(y_exact),
        y_delta,
        delta,
        label: format!("dense n={n} decay={decay}"),
        shape: (n, 1),
        meta,
    })
}

/// `F(x) = T x + epsilon (x ⊙ x)` with `T = I + G / (4 sqrt(n))`, `G`
/// uniform on `[-1, 1]`, which keeps `T` well conditioned.
pub fn make_nonlinear_toy(n: usize, epsilon: f64, delta: f64, seed: u64) -> Result<TestProblem> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be positive".into(),
        });
    }
    check_noise_level("delta", delta)?;
    let mut rng = seeded(seed, OPERATOR_STREAM);
    let w = 0.25 / (n as f64).sqrt();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let g: f64 = rng.random_range(-1.0..=1.0);
            data.push(if i == j { 1.0 } else { 0.0 } + w * g);
        }
    }
    let f = NonlinearToy::new(DenseMatrix::new(n, n, data)?, epsilon)?;
    let mut xrng = seeded(seed, IMAGE_STREAM);
    let x_true: Vec<f64> = (0..n).map(|_| xrng.random_range(-1.0..=1.0)).collect();
    let y_exact = f.eval(&x_true);
    let (y_delta, delta) = add_noise(&y_exact, delta, NoiseKind::Gaussian, seed);
    let mut meta = BTreeMap::new();
    meta.insert("epsilon".into(), epsilon.to_string());
    meta.insert("noise".into(), "gaussian".into());
    meta.insert("seed".into(), seed.to_string());
    Ok(TestProblem {
        op: ProblemOperator::Nonlinear(f),
        x_true: Some(x_true),
        y_exact: Some(y_exact),
        y_delta,
        delta,
        label: format!("nonlinear n={n} epsilon={epsilon}"),
        shape: (n, 1),
        meta,
    })
}

/// Recycle vectors from cheap related solves: for every `sigma`, run
/// `iters` steepest-descent steps on `data` with a Gaussian blur of that
/// width on the problem's grid and keep each iterate.
pub fn prior_solve_vectors(problem: &TestProblem, data: &[f64], sigmas: &[f64], iters: usize) -> Result<Vec<Vec<f64>>> {
    let ProblemOperator::Convolution(conv) = &problem.op else {
        return Err(Error::InvalidParameter {
            name: "problem",
            reason: "prior-solve recycling needs a blur problem".into(),
        });
    };
    let (rows, cols) = conv.shape();
    let x0 = vec![0.0; rows * cols];
    let mut out = Vec::with_capacity(sigmas.len() * iters);
    for &sigma in sigmas {
        let op = gaussian_blur(rows, cols, sigma)?;
        let mut x = x0.clone();
        for _ in 0..iters {
            let res = steepest_descent(&op, data, &x, &SolveConfig::new(1.5, 0.0, 1))?;
            x = res.x;
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// Noise-free data consistency: `||F(x_true) - y_exact|| / ||y_exact||`.
pub fn exactness_error(problem: &TestProblem) -> Option<f64> {
    let x = problem.x_true.as_ref()?;
    let y = problem.y_exact.as_ref()?;
    let fx = problem.op.eval(x);
    Some(crate::vecops::dist(&fx, y) / norm(y).max(f64::MIN_POSITIVE))
}
