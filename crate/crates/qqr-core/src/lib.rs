//! Solvers for quartically-regularized cubic polynomials
//!
//! The central object is the polynomial
//!
//! ```text
//! m3(s) = f0 + g's + 1/2 s'Hs + 1/6 T[s]^3 + sigma/4 ||s||^4
//! ```
//!
//! with a symmetric third-order tensor `T` and `sigma > 0`. This crate
//! provides:
//!
//! * exact evaluation, differentiation and recentering of `m3`
//!   ([`polynomial`]), plus radius and Lipschitz-constant estimates
//!   ([`analysis`]);
//! * a secular-equation solver for the global minimizer of
//!   `g's + 1/2 s'Bs + (gamma/r) ||s||^r`, `r` in {3, 4} ([`subsolver`]);
//! * the QQR family of second-order minimizers for `m3` ([`qqr`]), with a
//!   fixed-parameter method for convex problems ([`nesterov`]) and an
//!   adaptive cubic-regularization baseline ([`arc`]);
//! * an adaptive third-order outer loop for general smooth objectives
//!   ([`ar3`]) together with a few built-in test problems ([`problems`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); the `std` feature
//! (default) only toggles dependency features. Enable `serde` to serialize
//! solver traces.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod ar3;
pub mod arc;
pub mod error;
pub mod nesterov;
pub mod oracle;
pub mod polynomial;
pub mod problems;
pub mod qqr;
pub mod subsolver;
pub mod tensor;

pub use ar3::{ar3_minimize, Ar3Options, Ar3Subsolver, OuterReport};
pub use arc::{solve_arc, ArcOptions};
pub use error::CoreError;
pub use nesterov::{solve_nesterov, NesterovParams};
pub use oracle::{SecondOrderOracle, ThirdOrderOracle};
pub use polynomial::{ModelEval, QuarticPolynomial};
pub use problems::builtin_problem;
pub use qqr::{solve_v1, solve_v2, IterationRecord, SolveReport, SolveStatus, SolverOptions};
pub use tensor::SymmetricTensor3;
