//! Solver library for generalized absolute value equations
//! `A x + B |x| - b = 0`.
//!
//! The main entry point is [`nsna::solve`], a non-monotone smoothing Newton
//! method. Around it sit a small dense linear-algebra kernel ([`linalg`]),
//! the smoothing function and its derivatives ([`smoothing`]), problem data
//! and conversions from horizontal LCPs ([`model`]), solvability checks and
//! a brute-force sign-enumeration solver ([`verify`]), benchmark instance
//! generators ([`problems`]) and the text file format ([`format`]).
//!
//! ```
//! use gave_core::{DenseMatrix, GaveProblem, RealVector, SolverConfig};
//!
//! // 2 x - |x| = 1 and 2 x - |x| = -1, solved by x = (1, -1/3)
//! let p = GaveProblem::new(
//!     DenseMatrix::identity(2).scaled(2.0),
//!     DenseMatrix::identity(2).scaled(-1.0),
//!     RealVector::from_slice(&[1.0, -1.0]).unwrap(),
//! )
//! .unwrap();
//! let report = gave_core::nsna::solve(&p, &SolverConfig::default(), &RealVector::filled(2, 2.0)).unwrap();
//! assert!(report.status.is_converged());
//! assert!((report.iterate.x[1] + 1.0 / 3.0).abs() < 1e-7);
//! ```

pub mod format;
pub mod linalg;
pub mod model;
pub mod nsna;
pub mod problems;
pub mod smoothing;
pub mod verify;

pub use linalg::{DenseMatrix, LinalgError, RealVector};
pub use model::{GaveProblem, HlcpProblem, HlcpSolution, Iterate, ModelError};
pub use nsna::{GammaRule, IterationRecord, NsnaError, SolveReport, SolveStatus, SolverConfig};
pub use problems::{ExampleSpec, Family};
