//! Stopping rules, trace bookkeeping and regularization sweeps.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::TestProblem;
use crate::solvers::SolveResult;
use crate::vecops::dist;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub residual_norm: f64,
    pub error_norm: Option<f64>,
    pub alpha: f64,
    pub wallclock_ms: f64,
    /// Rank of the per-iteration recycle factorization (nonlinear methods).
    pub qr_rank: Option<usize>,
}

/// Per-iteration record of a solve. Row 0 is the starting point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    rows: Vec<TraceRow>,
}

impl IterationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: TraceRow) {
        debug_assert!(self.rows.last().map_or(true, |last| last.iter < row.iter));
        debug_assert!(row.residual_norm >= 0.0);
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual_norm).collect()
    }

    pub fn error_norms(&self) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.error_norm).collect()
    }

    /// CSV with header `iter,residual_norm,error_norm,alpha,stop`, plus a
    /// trailing `qr_rank` column when any row carries a rank. The stop
    /// column is filled on the final row only. Wallclock is not written so
    /// that reruns are byte-identical.
    pub fn to_csv(&self, stop: Option<StopReason>) -> String {
        let with_rank = self.rows.iter().any(|r| r.qr_rank.is_some());
        let mut out = String::from("iter,residual_norm,error_norm,alpha,stop");
        if with_rank {
            out.push_str(",qr_rank");
        }
        out.push('\n');
        let last = self.rows.len().saturating_sub(1);
        for (i, row) in self.rows.iter().enumerate() {
            let err = row.error_norm.map(|e| e.to_string()).unwrap_or_default();
            let stop = match stop {
                Some(s) if i == last => s.to_string(),
                _ => String::new(),
            };
            let _ = write!(out, "{},{},{},{},{}", row.iter, row.residual_norm, err, row.alpha, stop);
            if with_rank {
                let rank = row.qr_rank.map(|k| k.to_string()).unwrap_or_default();
                let _ = write!(out, ",{rank}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    Discrepancy,
    MaxIters,
    Stagnation,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Discrepancy => "discrepancy",
            StopReason::MaxIters => "max_iters",
            StopReason::Stagnation => "stagnation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopRule {
    Discrepancy { tau: f64, delta: f64 },
    MaxIters(usize),
    /// Fires when any member fires.
    Composite(Vec<StopRule>),
}

impl StopRule {
    pub fn discrepancy(tau: f64, delta: f64) -> Result<Self> {
        validate_discrepancy(tau, delta)?;
        Ok(StopRule::Discrepancy { tau, delta })
    }

    /// First reason that fires for the given row, if any.
    pub fn check(&self, row: &TraceRow) -> Result<Option<StopReason>> {
        Ok(match self {
            StopRule::Discrepancy { tau, delta } => {
                discrepancy_stop(row, *tau, *delta)?.then_some(StopReason::Discrepancy)
            }
            StopRule::MaxIters(n) => (row.iter >= *n).then_some(StopReason::MaxIters),
            StopRule::Composite(rules) => {
                for rule in rules {
                    if let Some(reason) = rule.check(row)? {
                        return Ok(Some(reason));
                    }
                }
                None
            }
        })
    }
}

pub(crate) fn validate_discrepancy(tau: f64, delta: f64) -> Result<()> {
    if !(tau > 1.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("discrepancy factor must exceed 1, got {tau}"),
        });
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("noise level must be nonnegative, got {delta}"),
        });
    }
    Ok(())
}

/// `||y^delta - T x_k|| <= tau * delta`
pub fn discrepancy_stop(row: &TraceRow, tau: f64, delta: f64) -> Result<bool> {
    validate_discrepancy(tau, delta)?;
    Ok(row.residual_norm <= tau * delta)
}

/// First row index satisfying the discrepancy principle, by full scan.
pub fn first_discrepancy_index(trace: &IterationTrace, tau: f64, delta: f64) -> Result<Option<usize>> {
    for row in trace.rows() {
        if discrepancy_stop(row, tau, delta)? {
            return Ok(Some(row.iter));
        }
    }
    Ok(None)
}

/// Iteration of the smallest error; the earliest one on ties.
pub fn semiconvergence_index(trace: &IterationTrace) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for row in trace.rows() {
        let e = row.error_norm?;
        if best.map_or(true, |(_, b)| e < b) {
            best = Some((row.iter, e));
        }
    }
    best.map(|(i, _)| i)
}

/// One row of a noise-level sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    /// Noise level fed to the discrepancy rule (`kappa_U * delta` for
    /// augmented runs).
    pub kappa_delta: f64,
    pub stop_iter: usize,
    pub final_error: f64,
    pub stop_reason: StopReason,
}

/// What a sweep solver hands back for one noise level.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub result: SolveResult,
    pub effective_delta: f64,
}

/// Runs `solve` on `generate(delta)` for every noise level and reports the
/// final error against the generated exact solution. Points run in
/// parallel on the current rayon pool; rows come back in input order.
pub fn delta_sweep<G, S>(generate: G, solve: S, deltas: &[f64]) -> Result<Vec<SweepRow>>
where
    G: Fn(f64) -> Result<TestProblem> + Sync,
    S: Fn(&TestProblem) -> Result<SweepPoint> + Sync,
{
    if deltas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "deltas",
            reason: "at least one noise level is required".into(),
        });
    }
    for w in deltas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidParameter {
                name: "deltas",
                reason: format!("noise levels must be strictly decreasing ({} then {})", w[0], w[1]),
            });
        }
    }
    if deltas.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "deltas",
            reason: "noise levels must be nonnegative".into(),
        });
    }
    deltas
        .par_iter()
        .map(|&delta| {
            let problem = generate(delta)?;
            let x_true = problem.x_true.as_ref().ok_or(Error::InvalidParameter {
                name: "x_true",
                reason: "sweeps need problems with a known exact solution".into(),
            })?;
            let point = solve(&problem)?;
            let stop_iter = point.result.trace.last().map_or(0, |r| r.iter);
            Ok(SweepRow {
                delta,
                kappa_delta: point.effective_delta,
                stop_iter,
                final_error: dist(&point.result.x, x_true),
                stop_reason: point.result.stop_reason,
            })
        })
        .collect()
}

/// CSV with header `delta,kappa_delta,stop_iter,final_error,stop_reason`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("delta,kappa_delta,stop_iter,final_error,stop_reason\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.delta, r.kappa_delta, r.stop_iter, r.final_error, r.stop_reason
        );
    }
    out
}
