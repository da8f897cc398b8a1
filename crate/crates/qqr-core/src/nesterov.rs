//! Second-order baseline for convex quartic polynomials.
//!
//! Each iteration minimizes the fixed upper model
//!
//! ```text
//! M(s) = f + g's + (1/2)(1 + 1/(3 tau)) s'Hs + (sigma/4)(1 + 2 tau) ||s||^4
//! ```
//!
//! at `tau = tau_N` and takes the step unconditionally: on convex problems
//! the upper model guarantees descent, so no ratio test is needed. The
//! matching lower model (with `1 - 1/(3 tau)` and `1 - 2 tau`) yields a
//! per-iteration linear contraction of the optimality gap with factor about
//! `1 - mu_N`.

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::CoreError;
use crate::polynomial::QuarticPolynomial;
use crate::qqr::{
    station, IterationRecord, RecordParams, SolveReport, SolveStatus, SolverOptions,
};
use crate::subsolver;

#[allow(unused_imports)]
use num_traits::Float;

/// The shape parameter balancing the upper model's quadratic and quartic
/// inflation: the unique positive root of
/// `(3t - 1)/(3t + 1) = ((1 - 2t)/(1 + 2t))^(1/3)`, in closed form
/// `sqrt(3 + sqrt(33)) / 6`.
pub fn nesterov_tau() -> f64 {
    (3.0 + 33f64.sqrt()).sqrt() / 6.0
}

/// Residual of the defining equation of [`nesterov_tau`]; zero (to rounding)
/// exactly at the root.
pub fn nesterov_tau_equation(tau: f64) -> f64 {
    (3.0 * tau - 1.0) / (3.0 * tau + 1.0) - ((1.0 - 2.0 * tau) / (1.0 + 2.0 * tau)).cbrt()
}

/// Reporting constants of the baseline.
#[derive(Clone, Copy, Debug)]
pub struct NesterovParams {
    /// Shape parameter; lies in `(1/3, 1/2)`.
    pub tau_n: f64,
    /// Nominal per-iteration gap contraction exponent (reporting only).
    pub mu_n: f64,
}

impl Default for NesterovParams {
    fn default() -> Self {
        NesterovParams { tau_n: nesterov_tau(), mu_n: 0.193 }
    }
}

/// Minimize a (convex) quartic polynomial by fixed upper-model steps.
///
/// Only `epsilon` and `max_iter` are read from `opts`. Intended for convex
/// inputs; if an iterate with a negative Hessian eigenvalue is met, the
/// `nonconvex_encountered` flag is set and iteration continues, but the
/// descent guarantee is void.
pub fn solve_nesterov(
    p: &QuarticPolynomial,
    opts: &SolverOptions,
) -> Result<SolveReport, CoreError> {
    opts.validate()?;
    let params = NesterovParams::default();
    let alpha1 = 1.0 + 1.0 / (3.0 * params.tau_n);
    let alpha2 = 1.0 + 2.0 * params.tau_n;
    let epsilon = opts.epsilon;
    let sigma = p.sigma();
    let n = p.dim();

    let mut x = DVector::zeros(n);
    let mut st = station(p, &x)?;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut iterations = 0usize;
    let mut nonconvex_encountered = false;
    let mut status = SolveStatus::MaxIter;

    loop {
        if st.grad_norm <= epsilon {
            status = SolveStatus::Converged;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;
        if st.lambda_min < 0.0 {
            nonconvex_encountered = true;
        }
        let model_evals = st.evals.map(|l| alpha1 * l);
        let sol = subsolver::minimize_with_spectrum(
            &model_evals,
            &st.q,
            &st.eval.gradient,
            sigma * alpha2,
            4,
            subsolver::DEFAULT_TOL,
            None,
        )?;
        trace.push(IterationRecord {
            iteration: iterations,
            f: st.eval.value,
            grad_norm: st.grad_norm,
            lambda_min: st.lambda_min,
            lambda_max: st.lambda_max,
            case: None,
            rho: None,
            accepted: true,
            params: RecordParams::Nesterov { alpha1, alpha2 },
            point: x.iter().cloned().collect(),
            step: sol.s_star.iter().cloned().collect(),
            model_decrease: sol.model_decrease,
        });
        x += &sol.s_star;
        st = station(p, &x)?;
    }

    Ok(SolveReport {
        min_value: st.eval.value,
        final_grad_norm: st.grad_norm,
        second_order_flag: st.lambda_min > -epsilon.sqrt(),
        minimizer: x,
        iterations,
        evaluations: iterations,
        trace,
        status,
        nonconvex_encountered,
        theorem_data: None,
    })
}
