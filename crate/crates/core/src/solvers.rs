//! Plain and augmented gradient iterations for `T x = y`.
//!
//! All iterations carry a recurred residual and check it against the true
//! residual `y - T x` every `recompute_every` steps. The augmented variants
//! work on the deflated problem `(I - Q) T t = (I - Q) y` while updating
//! the full iterate directly, so their residual is always orthogonal to
//! `span(C)`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::harness::{validate_discrepancy, IterationTrace, StopReason, TraceRow};
use crate::linops::{deflate, norm_estimate, LinearMap, NORM_ESTIMATE_ITERS};
use crate::recycle::{BoundReport, RecycleSpace};
use crate::vecops::{add, all_finite, axpy, dist, dot, norm, sub};

/// Consecutive near-constant residuals that count as stagnation.
pub const STAGNATION_WINDOW: usize = 10;
/// Relative residual change below which an iteration counts as stagnant.
pub const STAGNATION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMetric {
    #[default]
    Euclidean,
    /// `||T (x - x_true)||`, the norm induced by `T*T`.
    Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Discrepancy factor, must exceed 1.
    pub tau: f64,
    /// Noise level used by the discrepancy rule.
    pub delta: f64,
    pub max_iters: usize,
    /// Fixed step for Landweber-type methods.
    pub beta: Option<f64>,
    /// Known operator norm; estimated by power iteration when absent.
    pub op_norm: Option<f64>,
    /// Exact solution for error tracking.
    pub x_true: Option<Vec<f64>>,
    pub error_metric: ErrorMetric,
    pub recompute_every: usize,
    pub drift_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tau: 1.5,
            delta: 0.0,
            max_iters: 1000,
            beta: None,
            op_norm: None,
            x_true: None,
            error_metric: ErrorMetric::Euclidean,
            recompute_every: 50,
            drift_tol: 1e-8,
        }
    }
}

impl SolveConfig {
    pub fn new(tau: f64, delta: f64, max_iters: usize) -> Self {
        Self {
            tau,
            delta,
            max_iters,
            ..Self::default()
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_x_true(mut self, x_true: Vec<f64>) -> Self {
        self.x_true = Some(x_true);
        self
    }

    pub fn with_op_norm(mut self, op_norm: f64) -> Self {
        self.op_norm = Some(op_norm);
        self
    }

    pub fn with_error_metric(mut self, metric: ErrorMetric) -> Self {
        self.error_metric = metric;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        validate_discrepancy(self.tau, self.delta)?;
        if self.recompute_every == 0 {
            return Err(Error::InvalidParameter {
                name: "recompute_every",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Comparison of the recurred residual with `y - T x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftCheck {
    pub iter: usize,
    pub recurred_norm: f64,
    pub true_norm: f64,
    /// `||r_recurred - r_true|| / ||y||`
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub trace: IterationTrace,
    pub stop_reason: StopReason,
    /// `||y - T x||` for the returned iterate.
    pub final_residual: f64,
    pub drift: Vec<DriftCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Landweber,
    SteepestDescent,
    Cgne,
    AugLandweber,
    AugSteepestDescent,
}

impl Method {
    pub fn is_augmented(self) -> bool {
        matches!(self, Method::AugLandweber | Method::AugSteepestDescent)
    }

    pub fn needs_beta(self) -> bool {
        matches!(self, Method::Landweber | Method::AugLandweber)
    }

    /// The plain counterpart of an augmented method.
    pub fn plain(self) -> Method {
        match self {
            Method::AugLandweber => Method::Landweber,
            Method::AugSteepestDescent => Method::SteepestDescent,
            m => m,
        }
    }

    /// The augmented counterpart, if one exists.
    pub fn augmented(self) -> Option<Method> {
        match self {
            Method::Landweber | Method::AugLandweber => Some(Method::AugLandweber),
            Method::SteepestDescent | Method::AugSteepestDescent => Some(Method::AugSteepestDescent),
            Method::Cgne => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Landweber => "landweber",
            Method::SteepestDescent => "steepest-descent",
            Method::Cgne => "cgne",
            Method::AugLandweber => "aug-landweber",
            Method::AugSteepestDescent => "aug-steepest-descent",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "landweber" => Method::Landweber,
            "steepest-descent" | "sd" => Method::SteepestDescent,
            "cgne" => Method::Cgne,
            "aug-landweber" => Method::AugLandweber,
            "aug-steepest-descent" | "aug-sd" => Method::AugSteepestDescent,
            other => {
                return Err(Error::InvalidParameter {
                    name: "method",
                    reason: format!("unknown method `{other}`"),
                })
            }
        })
    }
}

/// Dispatches to the solver for `method`. Augmented methods without a
/// recycle space fall back to the plain iteration.
pub fn solve<O: LinearMap + ?Sized>(
    method: Method,
    op: &O,
    rs: Option<&RecycleSpace>,
    y_delta: &[f64],
    x0: &[f64],
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    match (method, rs) {
        (Method::Landweber, _) | (Method::AugLandweber, None) => landweber(op, y_delta, x0, cfg),
        (Method::SteepestDescent, _) | (Method::AugSteepestDescent, None) => {
            steepest_descent(op, y_delta, x0, cfg)
        }
        (Method::Cgne, _) => {
            if x0.iter().any(|v| *v != 0.0) {
                return Err(Error::InvalidParameter {
                    name: "x0",
                    reason: "CGNE starts from the zero vector".into(),
                });
            }
            cgne(op, y_delta, cfg)
        }
        (Method::AugLandweber, Some(rs)) => augmented_landweber(op, rs, y_delta, x0, cfg),
        (Method::AugSteepestDescent, Some(rs)) => augmented_steepest_descent(op, rs, y_delta, x0, cfg),
    }
}

pub(crate) type ErrorFn<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

pub(crate) struct Monitor<'a> {
    threshold: f64,
    max_iters: usize,
    error: Option<ErrorFn<'a>>,
    trace: IterationTrace,
    start: Instant,
    last_residual: f64,
    stagnant: usize,
}

impl<'a> Monitor<'a> {
    pub(crate) fn new(cfg: &SolveConfig, error: Option<ErrorFn<'a>>) -> Self {
        Self {
            threshold: cfg.tau * cfg.delta,
            max_iters: cfg.max_iters,
            error,
            trace: IterationTrace::new(),
            start: Instant::now(),
            last_residual: f64::NAN,
            stagnant: 0,
        }
    }

    /// Error tracking of the iterate itself against `cfg.x_true`.
    fn direct<O: LinearMap + ?Sized>(cfg: &'a SolveConfig, op: &'a O) -> Self {
        Self::new(cfg, error_fn(cfg, op, |x| x.to_vec()))
    }

    pub(crate) fn record(&mut self, iter: usize, x: &[f64], residual: f64, alpha: f64, qr_rank: Option<usize>) -> Option<StopReason> {
        let error_norm = self.error.as_ref().map(|f| f(x));
        self.trace.push(TraceRow {
            iter,
            residual_norm: residual,
            error_norm,
            alpha,
            wallclock_ms: self.start.elapsed().as_secs_f64() * 1e3,
            qr_rank,
        });
        if residual <= self.threshold {
            return Some(StopReason::Discrepancy);
        }
        if iter > 0 {
            let change = (self.last_residual - residual).abs() / self.last_residual;
            if change < STAGNATION_TOL {
                self.stagnant += 1;
            } else {
                self.stagnant = 0;
            }
        }
        self.last_residual = residual;
        if self.stagnant >= STAGNATION_WINDOW {
            return Some(StopReason::Stagnation);
        }
        if iter >= self.max_iters {
            return Some(StopReason::MaxIters);
        }
        None
    }

    pub(crate) fn finish(self, x: Vec<f64>, stop_reason: StopReason, final_residual: f64, drift: Vec<DriftCheck>) -> SolveResult {
        SolveResult {
            x,
            trace: self.trace,
            stop_reason,
            final_residual,
            drift,
        }
    }
}

/// Builds the error functional for iterates mapped through `recombine`.
fn error_fn<'a, O, F>(cfg: &'a SolveConfig, op: &'a O, recombine: F) -> Option<ErrorFn<'a>>
where
    O: LinearMap + ?Sized,
    F: Fn(&[f64]) -> Vec<f64> + 'a,
{
    let x_true = cfg.x_true.as_ref()?;
    Some(match cfg.error_metric {
        ErrorMetric::Euclidean => Box::new(move |x: &[f64]| dist(&recombine(x), x_true)),
        ErrorMetric::Energy => Box::new(move |x: &[f64]| norm(&op.forward(&sub(&recombine(x), x_true)))),
    })
}

fn check_problem<O: LinearMap + ?Sized>(op: &O, y: &[f64], x0: &[f64], cfg: &SolveConfig) -> Result<()> {
    cfg.validate()?;
    check_len("right-hand side", op.dim_range(), y.len())?;
    check_len("initial guess", op.dim_domain(), x0.len())?;
    if let Some(xt) = &cfg.x_true {
        check_len("x_true", op.dim_domain(), xt.len())?;
    }
    Ok(())
}

fn admissible_beta(beta: Option<f64>, op_norm: f64) -> Result<f64> {
    let beta = beta.ok_or(Error::InvalidParameter {
        name: "beta",
        reason: "Landweber iterations need a step length".into(),
    })?;
    let limit = 2.0 / (op_norm * op_norm);
    if !(beta > 0.0 && beta < limit) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("step {beta} outside the admissible interval (0, {limit}) = (0, 2/||T||^2)"),
        });
    }
    Ok(beta)
}

// Compares the recurred residual with y - T x and resynchronizes it.
// Returns false when the two disagree beyond tolerance.
fn resync<O: LinearMap + ?Sized>(
    op: &O,
    y: &[f64],
    x: &[f64],
    r: &mut Vec<f64>,
    iter: usize,
    cfg: &SolveConfig,
    rs: Option<&RecycleSpace>,
    log: &mut Vec<DriftCheck>,
) -> bool {
    let mut r_true = sub(y, &op.forward(x));
    if let Some(rs) = rs {
        r_true = rs.complement_q(&r_true);
    }
    let scale = norm(y).max(f64::MIN_POSITIVE);
    let drift = dist(r, &r_true) / scale;
    log.push(DriftCheck {
        iter,
        recurred_norm: norm(r),
        true_norm: norm(&r_true),
        drift,
    });
    if drift > cfg.drift_tol {
        log::warn!("recurred residual drifted by {drift:.3e} at iteration {iter}");
        return false;
    }
    *r = r_true;
    true
}

pub(crate) fn diverged(iteration: usize, last_finite: Vec<f64>) -> Error {
    Error::Divergence {
        iteration,
        last_finite,
    }
}

/// Landweber iteration `x_{k+1} = x_k + beta T*(y - T x_k)` with
/// `0 < beta < 2 / ||T||^2`.
pub fn landweber<O: LinearMap + ?Sized>(op: &O, y_delta: &[f64], x0: &[f64], cfg: &SolveConfig) -> Result<SolveResult> {
    check_problem(op, y_delta, x0, cfg)?;
    let op_norm = match cfg.op_norm {
        Some(n) => n,
        None => norm_estimate(op, NORM_ESTIMATE_ITERS, 0)?,
    };
    let beta = admissible_beta(cfg.beta, op_norm)?;
    let mon = Monitor::direct(cfg, op);
    landweber_core(op, y_delta, x0.to_vec(), beta, cfg, mon)
}

fn landweber_core<O: LinearMap + ?Sized>(
    op: &O,
    y: &[f64],
    mut x: Vec<f64>,
    beta: f64,
    cfg: &SolveConfig,
    mut mon: Monitor<'_>,
) -> Result<SolveResult> {
    let mut r = sub(y, &op.forward(&x));
    let mut drift = Vec::new();
    let mut stop = mon.record(0, &x, norm(&r), 0.0, None);
    let mut k = 0;
    while stop.is_none() {
        k += 1;
        let s = op.adjoint(&r);
        let q = op.forward(&s);
        let prev = x.clone();
        axpy(beta, &s, &mut x);
        axpy(-beta, &q, &mut r);
        if k % cfg.recompute_every == 0 && !resync(op, y, &x, &mut r, k, cfg, None, &mut drift) {
            stop = Some(StopReason::Stagnation);
        }
        let rn = norm(&r);
        if !rn.is_finite() || !all_finite(&x) {
            return Err(diverged(k, prev));
        }
        let fired = mon.record(k, &x, rn, beta, None);
        stop = stop.or(fired);
    }
    let final_residual = norm(&sub(y, &op.forward(&x)));
    Ok(mon.finish(x, stop.unwrap(), final_residual, drift))
}

/// Steepest descent for the normal equations: the Landweber direction with
/// the residual-minimizing step `alpha = ||T* r||^2 / ||T T* r||^2`.
pub fn steepest_descent<O: LinearMap + ?Sized>(
    op: &O,
    y_delta: &[f64],
    x0: &[f64],
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_problem(op, y_delta, x0, cfg)?;
    let mon = Monitor::direct(cfg, op);
    steepest_descent_core(op, y_delta, x0.to_vec(), cfg, mon)
}

fn steepest_descent_core<O: LinearMap + ?Sized>(
    op: &O,
    y: &[f64],
    mut x: Vec<f64>,
    cfg: &SolveConfig,
    mut mon: Monitor<'_>,
) -> Result<SolveResult> {
    let mut r = sub(y, &op.forward(&x));
    let mut drift = Vec::new();
    let mut stop = mon.record(0, &x, norm(&r), 0.0, None);
    let mut k = 0;
    while stop.is_none() {
        let s = op.adjoint(&r);
        let ss = dot(&s, &s);
        let q = op.forward(&s);
        let qq = dot(&q, &q);
        if ss == 0.0 || qq == 0.0 {
            // r lies in the null space of T*.
            stop = Some(StopReason::Stagnation);
            break;
        }
        k += 1;
        let alpha = ss / qq;
        let prev = x.clone();
        axpy(alpha, &s, &mut x);
        axpy(-alpha, &q, &mut r);
        if k % cfg.recompute_every == 0 && !resync(op, y, &x, &mut r, k, cfg, None, &mut drift) {
            stop = Some(StopReason::Stagnation);
        }
        let rn = norm(&r);
        if !rn.is_finite() || !all_finite(&x) {
            return Err(diverged(k, prev));
        }
        let fired = mon.record(k, &x, rn, alpha, None);
        stop = stop.or(fired);
    }
    let final_residual = norm(&sub(y, &op.forward(&x)));
    Ok(mon.finish(x, stop.unwrap(), final_residual, drift))
}

/// Conjugate gradients on `T*T x = T* y` (CGLS form), started at zero so
/// the j-th iterate lies in `K_j(T*T, T* y)`.
pub fn cgne<O: LinearMap + ?Sized>(op: &O, y_delta: &[f64], cfg: &SolveConfig) -> Result<SolveResult> {
    let x0 = vec![0.0; op.dim_domain()];
    check_problem(op, y_delta, &x0, cfg)?;
    let mon = Monitor::direct(cfg, op);
    cgne_core(op, y_delta, cfg, mon)
}

fn cgne_core<O: LinearMap + ?Sized>(op: &O, y: &[f64], cfg: &SolveConfig, mut mon: Monitor<'_>) -> Result<SolveResult> {
    let mut x = vec![0.0; op.dim_domain()];
    let mut r = y.to_vec();
    let mut s = op.adjoint(&r);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let mut drift = Vec::new();
    let mut stop = mon.record(0, &x, norm(&r), 0.0, None);
    let mut k = 0;
    while stop.is_none() {
        let q = op.forward(&p);
        let qq = dot(&q, &q);
        if gamma == 0.0 || qq == 0.0 {
            stop = Some(StopReason::Stagnation);
            break;
        }
        k += 1;
        let alpha = gamma / qq;
        let prev = x.clone();
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        if k % cfg.recompute_every == 0 && !resync(op, y, &x, &mut r, k, cfg, None, &mut drift) {
            stop = Some(StopReason::Stagnation);
        }
        s = op.adjoint(&r);
        let gamma_next = dot(&s, &s);
        let b = gamma_next / gamma;
        gamma = gamma_next;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + b * *pi;
        }
        let rn = norm(&r);
        if !rn.is_finite() || !all_finite(&x) {
            return Err(diverged(k, prev));
        }
        let fired = mon.record(k, &x, rn, alpha, None);
        stop = stop.or(fired);
    }
    let final_residual = norm(&sub(y, &op.forward(&x)));
    Ok(mon.finish(x, stop.unwrap(), final_residual, drift))
}

fn check_space<O: LinearMap + ?Sized>(op: &O, rs: &RecycleSpace) -> Result<()> {
    check_len("recycle space domain", op.dim_domain(), rs.dim_domain())?;
    check_len("recycle space range", op.dim_range(), rs.dim_range())
}

#[derive(Clone, Copy)]
enum StepRule {
    Fixed(f64),
    Optimal,
}

// Shared loop of the augmented steepest descent and augmented Landweber
// iterations.
fn augmented_core<O: LinearMap + ?Sized>(
    op: &O,
    rs: &RecycleSpace,
    y: &[f64],
    x0: &[f64],
    step: StepRule,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    let mut mon = Monitor::direct(cfg, op);
    let r0 = sub(y, &op.forward(x0));
    let u1 = rs.coefficients(&r0);
    let mut x = add(x0, &rs.u().combine(&u1));
    let mut r = sub(&r0, &rs.c().combine(&u1));
    let mut drift = Vec::new();
    let mut stop = mon.record(0, &x, norm(&r), 0.0, None);
    let mut k = 0;
    while stop.is_none() {
        let s = op.adjoint(&r);
        let q = op.forward(&s);
        let w = rs.coefficients(&q);
        let q_perp = sub(&q, &rs.c().combine(&w));
        let alpha = match step {
            StepRule::Fixed(beta) => beta,
            StepRule::Optimal => {
                let ss = dot(&s, &s);
                let denom = dot(&q_perp, &q_perp);
                if ss == 0.0 || denom == 0.0 {
                    stop = Some(StopReason::Stagnation);
                    break;
                }
                ss / denom
            }
        };
        k += 1;
        let prev = x.clone();
        axpy(alpha, &s, &mut x);
        axpy(-alpha, &rs.u().combine(&w), &mut x);
        axpy(-alpha, &q_perp, &mut r);
        if k % cfg.recompute_every == 0 && !resync(op, y, &x, &mut r, k, cfg, Some(rs), &mut drift) {
            stop = Some(StopReason::Stagnation);
        }
        let rn = norm(&r);
        if !rn.is_finite() || !all_finite(&x) {
            return Err(diverged(k, prev));
        }
        let fired = mon.record(k, &x, rn, alpha, None);
        stop = stop.or(fired);
    }
    let final_residual = norm(&sub(y, &op.forward(&x)));
    Ok(mon.finish(x, stop.unwrap(), final_residual, drift))
}

/// Augmented steepest descent: projection onto `U` followed by steepest
/// descent on the deflated problem, with step
/// `alpha = ||T* r||^2 / ||(I - Q) T T* r||^2`.
pub fn augmented_steepest_descent<O: LinearMap + ?Sized>(
    op: &O,
    rs: &RecycleSpace,
    y_delta: &[f64],
    x0: &[f64],
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_problem(op, y_delta, x0, cfg)?;
    check_space(op, rs)?;
    if rs.is_empty() {
        return steepest_descent(op, y_delta, x0, cfg);
    }
    augmented_core(op, rs, y_delta, x0, StepRule::Optimal, cfg)
}

/// Augmented Landweber: the same loop as augmented steepest descent with a
/// fixed step, admissible for the deflated operator `(I - Q) T`.
pub fn augmented_landweber<O: LinearMap + ?Sized>(
    op: &O,
    rs: &RecycleSpace,
    y_delta: &[f64],
    x0: &[f64],
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    check_problem(op, y_delta, x0, cfg)?;
    check_space(op, rs)?;
    if rs.is_empty() {
        return landweber(op, y_delta, x0, cfg);
    }
    let op_norm = match cfg.op_norm {
        Some(n) => n,
        None => norm_estimate(&deflate(op, rs), NORM_ESTIMATE_ITERS, 0)?,
    };
    let beta = admissible_beta(cfg.beta, op_norm)?;
    augmented_core(op, rs, y_delta, x0, StepRule::Fixed(beta), cfg)
}

/// Result of the generic augmented regularization wrapper.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedOutcome {
    pub result: SolveResult,
    /// `x_p = U (y^delta, C)`
    pub x_p: Vec<f64>,
    pub bounds: BoundReport,
    /// Noise level handed to the inner solver, `kappa_U * delta`.
    pub inner_delta: f64,
}

/// Generic augmented regularization: project the data onto the recycle
/// space, regularize the deflated problem `(I - Q) T t = y - T x_p` with
/// `inner` at noise level `kappa_U * delta`, and recombine
/// `x = x_p + (I - P) t`.
///
/// `cfg.delta` is ignored in favour of `delta`.
pub fn augmented_regularize<O: LinearMap + ?Sized>(
    inner: Method,
    rs: &RecycleSpace,
    op: &O,
    y_delta: &[f64],
    delta: f64,
    cfg: &SolveConfig,
) -> Result<AugmentedOutcome> {
    if inner.is_augmented() {
        return Err(Error::InvalidParameter {
            name: "inner",
            reason: format!("inner regularizer must be a plain method, got {inner}"),
        });
    }
    let zero = vec![0.0; op.dim_domain()];
    check_problem(op, y_delta, &zero, &SolveConfig { delta, ..cfg.clone() })?;
    check_space(op, rs)?;
    let op_norm = match cfg.op_norm {
        Some(n) => n,
        None => norm_estimate(op, NORM_ESTIMATE_ITERS, 0)?,
    };
    let bounds = rs.bounds(op_norm, delta)?;
    let inner_delta = bounds.kappa_u * delta;

    let x_p = rs.initial_projection(y_delta)?;
    let y_p = op.forward(&x_p);
    let data = sub(y_delta, &y_p);
    let deflated = deflate(op, rs);
    let recombine = |t: &[f64]| {
        let pt = rs.u().combine(&rs.coefficients(&op.forward(t)));
        let mut x = add(&x_p, t);
        axpy(-1.0, &pt, &mut x);
        x
    };

    let inner_cfg = SolveConfig {
        delta: inner_delta,
        // ||(I - Q) T|| <= ||T||, so a known bound for T stays valid.
        op_norm: cfg.op_norm,
        ..cfg.clone()
    };
    let mon = Monitor::new(&inner_cfg, error_fn(&inner_cfg, op, recombine));
    let inner_result = match inner {
        Method::Landweber => {
            let norm_b = match cfg.op_norm {
                Some(n) => n,
                None => norm_estimate(&deflated, NORM_ESTIMATE_ITERS, 0)?,
            };
            let beta = admissible_beta(cfg.beta, norm_b)?;
            landweber_core(&deflated, &data, zero, beta, &inner_cfg, mon)?
        }
        Method::SteepestDescent => steepest_descent_core(&deflated, &data, zero, &inner_cfg, mon)?,
        Method::Cgne => cgne_core(&deflated, &data, &inner_cfg, mon)?,
        Method::AugLandweber | Method::AugSteepestDescent => unreachable!(),
    };
    let x = recombine(&inner_result.x);
    let final_residual = norm(&sub(y_delta, &op.forward(&x)));
    Ok(AugmentedOutcome {
        result: SolveResult {
            x,
            final_residual,
            ..inner_result
        },
        x_p,
        bounds,
        inner_delta,
    })
}
