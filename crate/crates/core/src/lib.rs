//! Solver for fourth-order nonlinear functional integro-differential
//! boundary value problems with Navier (hinged) boundary conditions:
//!
//! ```text
//! u''''(x) = f(x, u(x), u(φ(x)), ∫ k0(x,t) u(t) dt, ∫ k1(x,t) u(φ(t)) dt),
//! u(0) = c1, u(1) = c2, u''(0) = c3, u''(1) = c4.
//! ```
//!
//! The problem is recast as a fixed point `ψ = Aψ` for `ψ = u''''`, where
//! `u` is recovered from `ψ` through the Green's function of `u'''' = 0`.
//! The discrete iteration applies the composite trapezium rule to every
//! integral on a uniform grid and is second-order accurate in `h`.
//!
//! ```
//! use fide_core::{builtin, solve, Grid, StoppingRule};
//!
//! let spec = builtin("example1").unwrap();
//! let grid = Grid::new(100).unwrap();
//! let report = solve(&spec, &grid, &StoppingRule::successive(1e-9)).unwrap();
//! assert_eq!(report.iterations, 6);
//! assert!(report.error_vs_exact.unwrap() < 1e-6);
//! ```

pub mod analysis;
pub mod error;
pub mod expr;
pub mod green;
pub mod grid;
pub mod problem;
pub mod solver;

pub use analysis::{
    a_priori_bound, convergence_study, estimate_kernel_norms, estimate_lipschitz_sampled,
    fit_order, make_certificate, ContractionCertificate, ConvergenceStudy, OrderFit, StudyRow,
};
pub use error::{Error, Quantity, Result};
pub use expr::{Expr, ExprError};
pub use green::{apply_green, green_value, m0_constant, BoundaryCubic, BoundaryValues, M0};
pub use grid::{Grid, GridFunction};
pub use problem::{
    builtin, builtin_config, builtin_names, ProblemConfig, ProblemSpec, ValidationIssue,
    ValidationReport,
};
pub use solver::{
    init_psi, solve, step, Criterion, Discretization, IterationState, SolveReport, StopReason,
    StoppingRule, DIVERGENCE_THRESHOLD,
};
