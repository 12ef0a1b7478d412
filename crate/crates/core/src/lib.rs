//! Matrix-free iterative regularization with subspace recycling.
//!
//! The crate solves ill-posed linear problems `T x = y^delta` with
//! Landweber, steepest descent and CGNE, and their augmented variants that
//! split off a recycled subspace `U` by projection and iterate only on the
//! deflated problem `(I - Q) T t = (I - Q) y^delta`. An experimental
//! nonlinear extension re-factors `F'(x) U` at every step.
//!
//! ```
//! use deflact::{make_diagonal_problem, qr_against, augmented_steepest_descent, KTuple, SolveConfig};
//!
//! let p = make_diagonal_problem(&[2.0, 1.0], &[1.0, 1.0], 0.0, 0).unwrap();
//! let op = p.op.as_linear().unwrap();
//! let rs = qr_against(op, &KTuple::new(2, vec![vec![1.0, 0.0]]).unwrap()).unwrap();
//! let res = augmented_steepest_descent(op, &rs, &p.y_delta, &[0.0, 0.0], &SolveConfig::new(1.5, 0.0, 10)).unwrap();
//! assert_eq!(res.x, vec![1.0, 1.0]);
//! ```

extern crate self as deflact;

pub mod error;
pub mod grid;
pub mod harness;
pub mod linops;
pub mod nonlinear;
pub mod problems;
pub mod recycle;
pub mod solvers;
pub mod vecops;

#[cfg(test)]
#[path = "../tests/common/mod.rs"]
mod oracle;

pub use error::{Error, Result};
pub use harness::{
    delta_sweep, discrepancy_stop, first_discrepancy_index, semiconvergence_index, sweep_csv, IterationTrace,
    StopReason, StopRule, SweepPoint, SweepRow, TraceRow,
};
pub use linops::{
    deflate, gaussian_psf, norm_estimate, psf_operator, Convolution, Deflated, DenseMatrix, Diagonal, Identity,
    LinearMap, NormalOperator, ProjectorFn, PsfGrid, RangeProjector, ZeroProjector,
};
pub use nonlinear::{
    derivative_fd_error, nl_augmented_landweber, nl_gradient_descent, projected_nl_operator, LinearAsNonlinear,
    Linearization, NonlinearMap, NonlinearToy, WHatInput,
};
pub use problems::{
    gaussian_blur, make_blur_problem, make_dense_problem, make_diagonal_problem, make_nonlinear_toy,
    prior_solve_vectors, ImageKind, ProblemOperator, TestProblem,
};
pub use recycle::{
    bilinear_xu, gram, qr_against, recycle_from_solutions, ritz_vectors, top_eigenvectors, BoundReport, KTuple,
    OrthoBasis, RecycleSpace, RitzPairs,
};
pub use solvers::{
    augmented_landweber, augmented_regularize, augmented_steepest_descent, cgne, landweber, solve,
    steepest_descent, AugmentedOutcome, DriftCheck, ErrorMetric, Method, SolveConfig, SolveResult,
};
