//! Finite difference solver for two-point boundary value problems whose
//! highest-order term is a Caputo fractional derivative of order
//! `delta` in (1, 2):
//!
//! ```text
//! -D_*^delta u(x) + b(x) u'(x) + c(x) u(x) = f(x)   on (0, 1),
//!  u(0) - alpha0 u'(0) = gamma0,   u(1) + alpha1 u'(1) = gamma1.
//! ```
//!
//! The scheme lives on a uniform mesh of width `h = 1/N`. The fractional
//! derivative is discretized with the standard second-difference weighted
//! history sum, the convective term with simple upwinding, and the Robin
//! boundary conditions with one-sided differences. The resulting matrix is
//! lower Hessenberg; under the admissibility condition
//! `alpha0 >= 1/(delta - 1)` it can be reduced to an M-matrix by one column
//! elimination, which this crate verifies numerically.
//!
//! Modules:
//! - [`specfun`]: real gamma and beta functions.
//! - [`fracpoly`]: fractional polynomials with exact Caputo derivatives and
//!   an independent quadrature oracle.
//! - [`model`]: problem definition, admissibility validation, built-in test
//!   problems.
//! - [`discretize`]: weights, upwinding and assembly of the linear system.
//! - [`linsolve`]: pivoted LU and forward-recurrence solvers.
//! - [`monotone`]: column elimination, M-matrix certification, rescaled
//!   inverse-norm diagnostic.
//! - [`harness`]: convergence studies (exact errors and two-mesh
//!   differences), truncation-error diagnostics.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod discretize;
pub mod fracpoly;
pub mod harness;
pub mod linsolve;
pub mod model;
pub mod monotone;
pub mod specfun;

pub use discretize::{assemble, AssembledSystem, LowerHessenbergMatrix, UniformMesh};
pub use fracpoly::{FracExpr, FracPoly};
pub use harness::ConvergenceTable;
pub use linsolve::{solve_forward, solve_lu, DiscreteSolution, Solver};
pub use model::{test_problem_1, test_problem_2, FractionalBvp};
pub use monotone::MonotonicityReport;

/// Scientific notation with 6 significant digits and a 3-digit exponent,
/// e.g. `1.46437E-001`; the format used by all CSV output.
pub fn format_sci(x: f64) -> String {
    if x == 0.0 {
        return "0.00000E+000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.5E}", x);
    let (mantissa, exp) = s.split_once('E').expect("E-notation");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{}E{}{:03}", mantissa, if e < 0 { '-' } else { '+' }, e.abs())
}
