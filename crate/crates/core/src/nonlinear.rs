//! Experimental nonlinear extension: gradient descent for `F(x) = y` and
//! an augmented nonlinear Landweber iteration that re-factors `F'(x) U`
//! at every step.
//!
//! Frechet differentiability of `F` is assumed, not checked; use
//! [`derivative_fd_error`] to probe it. No convergence or regularization
//! guarantee is claimed for these iterations.

use crate::error::{check_len, Error, Result};
use crate::harness::StopReason;
use crate::linops::{DenseMatrix, LinearMap, RangeProjector};
use crate::recycle::{qr_against, KTuple, RecycleSpace};
use crate::solvers::{diverged, ErrorFn, Monitor, SolveConfig, SolveResult};
use crate::vecops::{add, all_finite, axpy, dist, dot, norm, sub};

pub trait NonlinearMap: Send + Sync {
    fn dim_domain(&self) -> usize;
    fn dim_range(&self) -> usize;
    /// `F(x)`
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    /// `F'(x) v`
    fn derivative(&self, x: &[f64], v: &[f64]) -> Vec<f64>;
    /// `F'(x)* w`
    fn derivative_adjoint(&self, x: &[f64], w: &[f64]) -> Vec<f64>;
}

impl<T: NonlinearMap + ?Sized> NonlinearMap for &T {
    fn dim_domain(&self) -> usize {
        (**self).dim_domain()
    }
    fn dim_range(&self) -> usize {
        (**self).dim_range()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (**self).eval(x)
    }
    fn derivative(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        (**self).derivative(x, v)
    }
    fn derivative_adjoint(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        (**self).derivative_adjoint(x, w)
    }
}

impl<T: NonlinearMap + ?Sized> NonlinearMap for Box<T> {
    fn dim_domain(&self) -> usize {
        (**self).dim_domain()
    }
    fn dim_range(&self) -> usize {
        (**self).dim_range()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (**self).eval(x)
    }
    fn derivative(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        (**self).derivative(x, v)
    }
    fn derivative_adjoint(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        (**self).derivative_adjoint(x, w)
    }
}

/// A linear map viewed as `F(x) = T x` with constant derivative `T`.
#[derive(Debug, Clone)]
pub struct LinearAsNonlinear<O>(pub O);

impl<O: LinearMap> NonlinearMap for LinearAsNonlinear<O> {
    fn dim_domain(&self) -> usize {
        self.0.dim_domain()
    }
    fn dim_range(&self) -> usize {
        self.0.dim_range()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.0.forward(x)
    }
    fn derivative(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
        self.0.forward(v)
    }
    fn derivative_adjoint(&self, _x: &[f64], w: &[f64]) -> Vec<f64> {
        self.0.adjoint(w)
    }
}

/// `F'(x)` frozen at a point, as a linear map.
pub struct Linearization<'a, F: ?Sized> {
    map: &'a F,
    at: Vec<f64>,
}

impl<'a, F: NonlinearMap + ?Sized> Linearization<'a, F> {
    pub fn new(map: &'a F, at: &[f64]) -> Result<Self> {
        check_len("linearization point", map.dim_domain(), at.len())?;
        Ok(Self { map, at: at.to_vec() })
    }
}

impl<F: NonlinearMap + ?Sized> LinearMap for Linearization<'_, F> {
    fn dim_domain(&self) -> usize {
        self.map.dim_domain()
    }
    fn dim_range(&self) -> usize {
        self.map.dim_range()
    }
    fn forward(&self, v: &[f64]) -> Vec<f64> {
        self.map.derivative(&self.at, v)
    }
    fn adjoint(&self, w: &[f64]) -> Vec<f64> {
        self.map.derivative_adjoint(&self.at, w)
    }
}

/// `F(x) = T x + epsilon (x ⊙ x)`, a mildly nonlinear perturbation of a
/// square linear map.
#[derive(Debug, Clone)]
pub struct NonlinearToy {
    t: DenseMatrix,
    epsilon: f64,
}

impl NonlinearToy {
    pub fn new(t: DenseMatrix, epsilon: f64) -> Result<Self> {
        if t.rows() != t.cols() {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("must be square, got {}x{}", t.rows(), t.cols()),
            });
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must be finite and nonnegative, got {epsilon}"),
            });
        }
        Ok(Self { t, epsilon })
    }

    pub fn linear_part(&self) -> &DenseMatrix {
        &self.t
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl NonlinearMap for NonlinearToy {
    fn dim_domain(&self) -> usize {
        self.t.cols()
    }
    fn dim_range(&self) -> usize {
        self.t.rows()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.t.forward(x);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += self.epsilon * xi * xi;
        }
        y
    }
    fn derivative(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut y = self.t.forward(v);
        for ((yi, xi), vi) in y.iter_mut().zip(x).zip(v) {
            *yi += 2.0 * self.epsilon * xi * vi;
        }
        y
    }
    fn derivative_adjoint(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        let mut z = self.t.adjoint(w);
        for ((zi, xi), wi) in z.iter_mut().zip(x).zip(w) {
            *zi += 2.0 * self.epsilon * xi * wi;
        }
        z
    }
}

/// `(I - Q) F`, with derivative `(I - Q) F'(x)` by the chain rule.
pub struct ProjectedNonlinear<F, Q> {
    map: F,
    projector: Q,
}

pub fn projected_nl_operator<F: NonlinearMap, Q: RangeProjector>(map: F, projector: Q) -> ProjectedNonlinear<F, Q> {
    ProjectedNonlinear { map, projector }
}

impl<F: NonlinearMap, Q: RangeProjector> ProjectedNonlinear<F, Q> {
    fn complement(&self, w: &[f64]) -> Vec<f64> {
        sub(w, &self.projector.project(w))
    }
}

impl<F: NonlinearMap, Q: RangeProjector> NonlinearMap for ProjectedNonlinear<F, Q> {
    fn dim_domain(&self) -> usize {
        self.map.dim_domain()
    }
    fn dim_range(&self) -> usize {
        self.map.dim_range()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.complement(&self.map.eval(x))
    }
    fn derivative(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.complement(&self.map.derivative(x, v))
    }
    fn derivative_adjoint(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        self.map.derivative_adjoint(x, &self.complement(w))
    }
}

/// `||(F(x + h v) - F(x)) / h - F'(x) v||`, which is `O(h)` for a
/// differentiable map.
pub fn derivative_fd_error<F: NonlinearMap + ?Sized>(map: &F, x: &[f64], v: &[f64], h: f64) -> f64 {
    let mut xh = x.to_vec();
    axpy(h, v, &mut xh);
    let mut fd = sub(&map.eval(&xh), &map.eval(x));
    for e in fd.iter_mut() {
        *e /= h;
    }
    dist(&fd, &map.derivative(x, v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// Steepest descent on the local linearization.
    Steepest,
}

/// Which residual enters `w = (F'(x) F'(x)* (.), C)` in the augmented
/// nonlinear iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WHatInput {
    /// `(I - Q) r`, as in the algorithm box.
    #[default]
    Projected,
    /// The unprojected residual `r`.
    Raw,
}

fn check_nl<F: NonlinearMap + ?Sized>(map: &F, y: &[f64], x0: &[f64], cfg: &SolveConfig) -> Result<()> {
    cfg.validate()?;
    check_len("right-hand side", map.dim_range(), y.len())?;
    check_len("initial guess", map.dim_domain(), x0.len())?;
    if let Some(xt) = &cfg.x_true {
        check_len("x_true", map.dim_domain(), xt.len())?;
    }
    Ok(())
}

// Nonlinear runs always track the Euclidean error.
fn euclidean_error(cfg: &SolveConfig) -> Option<ErrorFn<'_>> {
    let x_true = cfg.x_true.as_ref()?;
    Some(Box::new(move |x: &[f64]| dist(x, x_true)))
}

fn residual_of<F: NonlinearMap + ?Sized>(map: &F, y: &[f64], x: &[f64], iteration: usize, prev: &[f64]) -> Result<Vec<f64>> {
    let fx = map.eval(x);
    if !all_finite(x) || !all_finite(&fx) {
        return Err(diverged(iteration, prev.to_vec()));
    }
    Ok(sub(y, &fx))
}

/// Nonlinear gradient descent `x_{i+1} = x_i + alpha_i F'(x_i)* r_i` with
/// `r_i = y - F(x_i)`.
pub fn nl_gradient_descent<F: NonlinearMap + ?Sized>(
    map: &F,
    y_delta: &[f64],
    x0: &[f64],
    step: StepRule,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_nl(map, y_delta, x0, cfg)?;
    if let StepRule::Fixed(alpha) = step {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("fixed step must be positive, got {alpha}"),
            });
        }
    }
    let mut mon = Monitor::new(cfg, euclidean_error(cfg));
    let mut x = x0.to_vec();
    let mut r = residual_of(map, y_delta, &x, 0, x0)?;
    let mut stop = mon.record(0, &x, norm(&r), 0.0, None);
    let mut k = 0;
    while stop.is_none() {
        let s = map.derivative_adjoint(&x, &r);
        let alpha = match step {
            StepRule::Fixed(a) => a,
            StepRule::Steepest => {
                let q = map.derivative(&x, &s);
                let ss = dot(&s, &s);
                let qq = dot(&q, &q);
                if ss == 0.0 || qq == 0.0 {
                    stop = Some(StopReason::Stagnation);
                    break;
                }
                ss / qq
            }
        };
        k += 1;
        let prev = x.clone();
        axpy(alpha, &s, &mut x);
        r = residual_of(map, y_delta, &x, k, &prev)?;
        stop = mon.record(k, &x, norm(&r), alpha, None);
    }
    let final_residual = norm(&r);
    Ok(mon.finish(x, stop.unwrap(), final_residual, Vec::new()))
}

fn factor_at<F: NonlinearMap + ?Sized>(map: &F, x: &[f64], u_raw: &KTuple, iteration: usize) -> Result<RecycleSpace> {
    qr_against(&Linearization::new(map, x)?, u_raw).map_err(|e| match e {
        Error::RankDeficient { .. } => Error::RankLoss {
            iteration,
            source: Box::new(e),
        },
        other => other,
    })
}

/// Augmented nonlinear Landweber with fixed step `alpha`.
///
/// At every iterate `F'(x) U_raw` is factored afresh as `C R` and
/// `U = U_raw R^{-1}`, so that `F'(x) U = C`. The loop updates
/// `x += alpha F'(x)* (I - Q) r - alpha U w` with
/// `w = (F'(x) F'(x)* (I - Q) r, C)` and recomputes `r = y - F(x)`.
/// A final correction `x += U (r, C)` is applied after the loop.
///
/// The trace gains a `qr_rank` column with the rank of each factorization.
pub fn nl_augmented_landweber<F: NonlinearMap + ?Sized>(
    map: &F,
    u_raw: &KTuple,
    y_delta: &[f64],
    x0: &[f64],
    alpha: f64,
    what: WHatInput,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_nl(map, y_delta, x0, cfg)?;
    check_len("recycle vectors", map.dim_domain(), u_raw.dim())?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("step must be positive, got {alpha}"),
        });
    }
    if u_raw.is_empty() {
        return nl_gradient_descent(map, y_delta, x0, StepRule::Fixed(alpha), cfg);
    }
    let mut mon = Monitor::new(cfg, euclidean_error(cfg));

    let rs = factor_at(map, x0, u_raw, 0)?;
    let r0 = residual_of(map, y_delta, x0, 0, x0)?;
    let mut x = add(x0, &rs.u().combine(&rs.coefficients(&r0)));
    let mut r = residual_of(map, y_delta, &x, 0, x0)?;
    let mut stop = mon.record(0, &x, norm(&r), 0.0, Some(rs.k()));
    let mut k = 0;
    while stop.is_none() {
        let rs = factor_at(map, &x, u_raw, k)?;
        let pr = rs.complement_q(&r);
        let s = map.derivative_adjoint(&x, &pr);
        let w = match what {
            WHatInput::Projected => rs.coefficients(&map.derivative(&x, &s)),
            WHatInput::Raw => {
                let s_raw = map.derivative_adjoint(&x, &r);
                rs.coefficients(&map.derivative(&x, &s_raw))
            }
        };
        k += 1;
        let prev = x.clone();
        axpy(alpha, &s, &mut x);
        axpy(-alpha, &rs.u().combine(&w), &mut x);
        r = residual_of(map, y_delta, &x, k, &prev)?;
        stop = mon.record(k, &x, norm(&r), alpha, Some(rs.k()));
    }
    let rs = factor_at(map, &x, u_raw, k)?;
    let prev = x.clone();
    axpy(1.0, &rs.u().combine(&rs.coefficients(&r)), &mut x);
    let final_residual = norm(&residual_of(map, y_delta, &x, k, &prev)?);
    Ok(mon.finish(x, stop.unwrap(), final_residual, Vec::new()))
}
