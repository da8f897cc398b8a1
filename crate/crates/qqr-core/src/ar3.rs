//! Third-order adaptive-regularization outer loop.
//!
//! Minimizes a [`ThirdOrderOracle`] by repeatedly building the quartically
//! regularized third-order Taylor model at the current iterate,
//!
//! ```text
//! m(s) = f(x) + g(x)'s + (1/2) s'H(x)s + (1/6) T(x)[s]^3 + (sigma_k/4)||s||^4,
//! ```
//!
//! minimizing it with a pluggable inner solver, and steering `sigma_k` with
//! a ratio test against the *Taylor* decrease `f(x) - T3(x, s)`.

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::arc::{solve_arc, ArcOptions};
use crate::error::CoreError;
use crate::oracle::ThirdOrderOracle;
use crate::polynomial::QuarticPolynomial;
use crate::qqr::{ratio, solve_v1, solve_v2, Ratio, SolveStatus, SolverOptions};

#[allow(unused_imports)]
use num_traits::Float;

/// Guards on the outer regularization weight.
pub const AR3_SIGMA_MIN: f64 = 1e-12;
pub const AR3_SIGMA_MAX: f64 = 1e20;

/// Inner solver used on each subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ar3Subsolver {
    QqrV2,
    QqrV1,
    Arc,
}

/// Options of the outer loop.
#[derive(Clone, Copy, Debug)]
pub struct Ar3Options {
    /// Acceptance threshold.
    pub rho1: f64,
    /// Very-successful threshold.
    pub rho2: f64,
    /// `sigma` decrease factor in `(0, 1)`.
    pub eta0: f64,
    /// `sigma` increase factor `> 1`.
    pub eta1: f64,
    /// Gradient tolerance handed to the inner solver.
    pub inner_tol: f64,
    /// Outer gradient-norm stopping tolerance.
    pub outer_tol: f64,
    /// Iteration cap per subproblem solve.
    pub inner_max_iter: usize,
    /// Cap on outer model minimizations.
    pub outer_max_iter: usize,
    /// Initial regularization weight.
    pub sigma0: f64,
}

impl Default for Ar3Options {
    fn default() -> Self {
        Ar3Options {
            rho1: 0.1,
            rho2: 0.9,
            eta0: 0.5,
            eta1: 2.0,
            inner_tol: 1e-6,
            outer_tol: 1e-3,
            inner_max_iter: 1000,
            outer_max_iter: 3000,
            sigma0: 1.0,
        }
    }
}

impl Ar3Options {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.rho1 > 0.0 && self.rho1 <= self.rho2) {
            return Err(CoreError::InvalidParameter(
                "thresholds must satisfy 0 < rho1 <= rho2",
            ));
        }
        if !(self.eta0 > 0.0 && self.eta0 < 1.0 && self.eta1 > 1.0) {
            return Err(CoreError::InvalidParameter(
                "sigma factors must satisfy 0 < eta0 < 1 < eta1",
            ));
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return Err(CoreError::InvalidParameter("tolerances must be positive"));
        }
        if self.inner_max_iter == 0 || self.outer_max_iter == 0 {
            return Err(CoreError::InvalidParameter("iteration caps must be positive"));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(CoreError::InvalidParameter("sigma0 must be positive"));
        }
        Ok(())
    }
}

/// Result of an outer solve.
#[derive(Clone, Debug)]
pub struct OuterReport {
    /// Final iterate and value.
    pub x_star: DVector<f64>,
    pub f_star: f64,
    /// Gradient norm at the final iterate.
    pub final_grad_norm: f64,
    /// Outer model minimizations (successful and unsuccessful).
    pub outer_iterations: usize,
    /// Accepted outer steps.
    pub outer_evaluations: usize,
    /// Mean inner model minimizations per outer iteration.
    pub inner_iterations_mean: f64,
    /// Mean accepted inner steps per outer iteration.
    pub inner_evaluations_mean: f64,
    /// `sigma_k` used at each outer iteration.
    pub sigma_trace: Vec<f64>,
    pub status: SolveStatus,
}

/// Minimize `obj` from `x0`.
pub fn ar3_minimize(
    obj: &dyn ThirdOrderOracle,
    x0: &DVector<f64>,
    subsolver: Ar3Subsolver,
    opts: &Ar3Options,
) -> Result<OuterReport, CoreError> {
    opts.validate()?;
    let n = obj.dim();
    if x0.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: x0.len() });
    }

    let mut x = x0.clone();
    let mut f = obj.value(&x);
    let mut g = obj.gradient(&x);
    if !f.is_finite() {
        return Err(CoreError::NonFinite("objective value at x0"));
    }
    let mut sigma = opts.sigma0;
    let mut outer_iterations = 0usize;
    let mut outer_evaluations = 0usize;
    let mut inner_iterations_total = 0usize;
    let mut inner_evaluations_total = 0usize;
    let mut sigma_trace: Vec<f64> = Vec::new();
    let mut status = SolveStatus::MaxIter;

    loop {
        if g.norm() <= opts.outer_tol {
            status = SolveStatus::Converged;
            break;
        }
        if outer_iterations >= opts.outer_max_iter {
            break;
        }
        outer_iterations += 1;
        sigma_trace.push(sigma);

        let hess = obj.hessian(&x);
        let tensor = obj.third_tensor(&x);
        let model = QuarticPolynomial::new(f, g.clone(), hess, tensor, sigma)?;

        let (step, inner_iters, inner_evals) = match subsolver {
            Ar3Subsolver::QqrV2 | Ar3Subsolver::QqrV1 => {
                let inner_opts = SolverOptions {
                    epsilon: opts.inner_tol,
                    max_iter: opts.inner_max_iter,
                    ..SolverOptions::default()
                };
                let report = if subsolver == Ar3Subsolver::QqrV2 {
                    solve_v2(&model, &inner_opts)?
                } else {
                    solve_v1(&model, &inner_opts)?
                };
                (report.minimizer, report.iterations, report.evaluations)
            }
            Ar3Subsolver::Arc => {
                let inner_opts = ArcOptions {
                    epsilon: opts.inner_tol,
                    max_iter: opts.inner_max_iter,
                    ..ArcOptions::default()
                };
                let report = solve_arc(&model, &DVector::zeros(n), &inner_opts)?;
                (report.minimizer, report.iterations, report.evaluations)
            }
        };
        inner_iterations_total += inner_iters;
        inner_evaluations_total += inner_evals;

        // Taylor value (without the regularization term) at the step.
        let taylor = f
            + g.dot(&step)
            + 0.5 * (obj.hessian(&x) * &step).dot(&step)
            + model.t().contract_thrice(&step)? / 6.0;
        let trial = &x + &step;
        let f_trial = obj.value(&trial);
        let rho = ratio(f, f_trial, taylor);
        match rho {
            Ratio::Value(v) if v >= opts.rho1 => {
                outer_evaluations += 1;
                x = trial;
                f = f_trial;
                g = obj.gradient(&x);
                if v >= opts.rho2 {
                    sigma = (opts.eta0 * sigma).max(AR3_SIGMA_MIN);
                }
            }
            _ => {
                sigma = (opts.eta1 * sigma).min(AR3_SIGMA_MAX);
            }
        }
    }

    let denom = outer_iterations.max(1) as f64;
    Ok(OuterReport {
        x_star: x,
        f_star: f,
        final_grad_norm: g.norm(),
        outer_iterations,
        outer_evaluations,
        inner_iterations_mean: inner_iterations_total as f64 / denom,
        inner_evaluations_mean: inner_evaluations_total as f64 / denom,
        sigma_trace,
        status,
    })
}
