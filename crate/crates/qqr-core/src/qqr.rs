//! Quadratic-quartic regularization drivers.
//!
//! Both drivers minimize a [`QuarticPolynomial`] by repeatedly minimizing a
//! *quadratic-quartic model* of it around the current iterate `x`:
//!
//! ```text
//! M(s) = f(x) + g(x)'s + (alpha1/2) s'(H(x) + p I)s + (sigma alpha2/4) ||s||^4
//! ```
//!
//! The coefficients `alpha1`, `alpha2` and the perturbation `p >= 0` are
//! chosen per iteration from the local convexity of `H(x)` and adapted by a
//! trust-region-style ratio test. The two variants differ only in the
//! adaptation rule: v1 drives a single contraction parameter `mu`, v2 steers
//! `alpha1` and `alpha2` independently.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::analysis::{self, LipschitzBounds, TensorNormMode};
use crate::error::CoreError;
use crate::polynomial::{ModelEval, QuarticPolynomial};
use crate::subsolver;

// Supplies float math (abs, sqrt, powf, ...) in no_std builds; shadowed by
// the inherent std methods otherwise.
#[allow(unused_imports)]
use num_traits::Float;

/// Convexity classification of the Hessian at the current iterate, relative
/// to the threshold `lambda_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConvexityCase {
    /// `lambda_min >= lambda_c`.
    StrictlyConvex,
    /// `|lambda_min| < lambda_c`.
    NearlyConvex,
    /// `lambda_min <= -lambda_c`.
    Nonconvex,
}

/// Classify an iterate by the smallest Hessian eigenvalue. Ties at exactly
/// `+-lambda_c` fall into the strictly convex / nonconvex cases (the
/// comparisons are non-strict).
///
/// Requires `lambda_c > 0`.
pub fn classify(lambda_min: f64, lambda_c: f64) -> ConvexityCase {
    debug_assert!(lambda_c > 0.0, "lambda_c must be positive");
    if lambda_min >= lambda_c {
        ConvexityCase::StrictlyConvex
    } else if lambda_min <= -lambda_c {
        ConvexityCase::Nonconvex
    } else {
        ConvexityCase::NearlyConvex
    }
}

/// A concrete quadratic-quartic model instance, kept alongside the
/// generating parameters.
#[derive(Clone, Debug)]
pub struct QQModel {
    /// Value of the polynomial at the iterate the model is centered on.
    pub f_i: f64,
    /// Gradient at that iterate.
    pub g_i: DVector<f64>,
    /// `alpha1 * (H + p_tilde I)`.
    pub quad: DMatrix<f64>,
    /// Coefficient of `||s||^4 / 4`; always positive.
    pub quartic_weight: f64,
    /// Quadratic scaling used to build `quad`.
    pub alpha1: f64,
    /// Quartic scaling (before any refinement override).
    pub alpha2: f64,
    /// Diagonal perturbation; nonzero only in the nearly convex case.
    pub p_tilde: f64,
}

impl QQModel {
    /// Assemble the model from an evaluated iterate.
    pub fn from_eval(
        eval: &ModelEval,
        sigma: f64,
        alpha1: f64,
        alpha2: f64,
        p_tilde: f64,
    ) -> Self {
        let n = eval.gradient.len();
        let mut quad = eval.hessian.clone();
        for i in 0..n {
            quad[(i, i)] += p_tilde;
        }
        quad *= alpha1;
        QQModel {
            f_i: eval.value,
            g_i: eval.gradient.clone(),
            quad,
            quartic_weight: sigma * alpha2,
            alpha1,
            alpha2,
            p_tilde,
        }
    }

    /// Model value at a candidate step `s`.
    pub fn value(&self, s: &DVector<f64>) -> f64 {
        let ns2 = s.norm_squared();
        self.f_i
            + self.g_i.dot(s)
            + 0.5 * (self.quad.clone() * s).dot(s)
            + 0.25 * self.quartic_weight * ns2 * ns2
    }
}

/// Parameters of the v1 coefficient family.
#[derive(Clone, Copy, Debug)]
pub struct V1Params {
    /// Contraction parameter in `(0, 1]`; the only adapted quantity.
    pub mu: f64,
    /// Shape parameter; valid range `(1/3, min{1/(2(1 - q/3)), 1})`.
    pub tau: f64,
    /// Quartic shape exponent parameter (default 2).
    pub q: f64,
    /// Exponent of `mu` in the quadratic coefficient.
    pub iota: f64,
    /// Exponent of `mu` in the quartic coefficient.
    pub kappa: f64,
}

impl Default for V1Params {
    fn default() -> Self {
        V1Params {
            mu: 0.5,
            tau: core::f64::consts::FRAC_1_SQRT_2,
            q: 2.0,
            iota: 1.0,
            kappa: 1.0,
        }
    }
}

/// Upper end of the valid `tau` range for a given `q < 3`.
pub fn tau_upper(q: f64) -> f64 {
    (1.0 / (2.0 * (1.0 - q / 3.0))).min(1.0)
}

impl V1Params {
    /// Check the parameter ranges required for the coefficient formulas to
    /// produce positive model weights.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.mu > 0.0 && self.mu <= 1.0 && self.mu.is_finite()) {
            return Err(CoreError::InvalidParameter("mu must lie in (0, 1]"));
        }
        if !(self.q > 0.0 && self.q < 3.0) {
            return Err(CoreError::InvalidParameter("q must lie in (0, 3)"));
        }
        if !(self.tau > 1.0 / 3.0 && self.tau < tau_upper(self.q)) {
            return Err(CoreError::InvalidParameter(
                "tau must lie in (1/3, min{1/(2(1 - q/3)), 1})",
            ));
        }
        if !(self.iota.is_finite() && self.kappa.is_finite()) {
            return Err(CoreError::InvalidParameter("iota/kappa must be finite"));
        }
        Ok(())
    }
}

/// Rule used to pick and grow the diagonal perturbation after rejected
/// nearly convex iterations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PTildeRule {
    /// First rejection: `clamp(lambda_c, sqrt(eps), sqrt(||g||))`; repeated
    /// rejections double the current value.
    #[default]
    ClampAndDouble,
}

/// Next perturbation after a rejected nearly convex iteration.
pub fn next_p_tilde(
    rule: PTildeRule,
    current: f64,
    lambda_c: f64,
    epsilon: f64,
    grad_norm: f64,
) -> f64 {
    match rule {
        PTildeRule::ClampAndDouble => {
            if current > 0.0 {
                2.0 * current
            } else {
                let lo = epsilon.sqrt();
                let hi = grad_norm.sqrt().max(lo);
                lambda_c.clamp(lo, hi)
            }
        }
    }
}

/// Options shared by the v1 and v2 drivers.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Gradient-norm stopping tolerance.
    pub epsilon: f64,
    /// Convexity threshold; `None` means `epsilon^(1/3)`.
    pub lambda_c: Option<f64>,
    /// Acceptance threshold (the ratio-test `rho_1`); must lie in `(0, 1/3)`.
    pub eta: f64,
    /// Very-successful threshold; must exceed `1/3`.
    pub rho2: f64,
    /// v1 `mu` decrease factor in `(0, 1)`.
    pub gamma0: f64,
    /// v1 `mu` increase factor `> 1` (the increase is capped at `mu = 1`).
    pub gamma1: f64,
    /// v2 `alpha2` decrease factor in `(0, 1)`.
    pub eta0: f64,
    /// v2 `alpha2` increase factor `> 1`.
    pub eta1: f64,
    /// v2 `alpha1` increase factor `> 1` (strictly convex rejections).
    pub gamma2: f64,
    /// Perturbation growth rule.
    pub p_tilde_rule: PTildeRule,
    /// Maximum number of model minimizations.
    pub max_iter: usize,
    /// Small-gradient refinement; `None` means the variant default
    /// (off for v1, on for v2).
    pub refinement: Option<bool>,
    /// Use the per-case theoretical coefficient schedule (v2 only) and
    /// attach the Lipschitz analysis to the report.
    pub theorem_mode: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            epsilon: 1e-5,
            lambda_c: None,
            eta: 0.3,
            rho2: 3.0,
            gamma0: 0.8,
            gamma1: 1.2,
            eta0: 0.5,
            eta1: 2.0,
            gamma2: 1.1,
            p_tilde_rule: PTildeRule::default(),
            max_iter: 1000,
            refinement: None,
            theorem_mode: false,
        }
    }
}

impl SolverOptions {
    /// Check the threshold orderings the adaptation rules rely on.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(CoreError::InvalidParameter("epsilon must be positive"));
        }
        if let Some(lc) = self.lambda_c {
            if !(lc > 0.0 && lc.is_finite()) {
                return Err(CoreError::InvalidParameter("lambda_c must be positive"));
            }
        }
        if !(self.eta > 0.0 && self.eta < 1.0 / 3.0 && 1.0 / 3.0 < self.rho2) {
            return Err(CoreError::InvalidParameter(
                "thresholds must satisfy 0 < eta < 1/3 < rho2",
            ));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 1.0 && self.gamma1 > 1.0) {
            return Err(CoreError::InvalidParameter(
                "mu factors must satisfy 0 < gamma0 < 1 < gamma1",
            ));
        }
        if !(self.eta0 > 0.0 && self.eta0 < 1.0 && self.eta1 > 1.0) {
            return Err(CoreError::InvalidParameter(
                "alpha2 factors must satisfy 0 < eta0 < 1 < eta1",
            ));
        }
        if !(self.gamma2 > 1.0) {
            return Err(CoreError::InvalidParameter("gamma2 must exceed 1"));
        }
        if self.max_iter == 0 {
            return Err(CoreError::InvalidParameter("max_iter must be positive"));
        }
        Ok(())
    }

    /// Convexity threshold actually used.
    pub fn lambda_c(&self) -> f64 {
        self.lambda_c.unwrap_or_else(|| self.epsilon.cbrt())
    }
}

/// Outcome of the ratio test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    /// `(f_i - f_trial) / (f_i - model_value)`.
    Value(f64),
    /// The model predicted (numerically) no decrease; treated as an
    /// unsuccessful iteration.
    Degenerate,
}

/// Objective changes at or below this scale are indistinguishable from
/// evaluation rounding error and are treated as ties.
pub(crate) fn noise_floor(f: f64) -> f64 {
    1e-14 * (1.0 + f.abs())
}

/// Ratio of achieved to model-predicted decrease. Returns
/// [`Ratio::Degenerate`] when the predicted decrease is at most
/// `1e-14 * (1 + |f_i|)`.
pub fn ratio(f_i: f64, f_trial: f64, model_value: f64) -> Ratio {
    let denom = f_i - model_value;
    if !(denom > noise_floor(f_i)) {
        Ratio::Degenerate
    } else {
        Ratio::Value((f_i - f_trial) / denom)
    }
}

/// v1 model coefficients for one iteration.
///
/// Returns `(alpha1, alpha2, p_tilde)`. The perturbation passes through
/// unchanged in the nearly convex case and is zeroed otherwise.
pub fn coefficients_v1(
    case: ConvexityCase,
    params: &V1Params,
    p_tilde: f64,
) -> Result<(f64, f64, f64), CoreError> {
    params.validate()?;
    let alpha2 = params.mu.powf(-params.kappa) * (1.0 - 2.0 * (1.0 - params.q / 3.0) * params.tau);
    let convex_alpha1 = params.mu.powf(-params.iota) * (1.0 - 1.0 / (3.0 * params.tau));
    Ok(match case {
        ConvexityCase::StrictlyConvex => (convex_alpha1, alpha2, 0.0),
        ConvexityCase::NearlyConvex => (convex_alpha1, alpha2, p_tilde),
        ConvexityCase::Nonconvex => (1.0, alpha2, 0.0),
    })
}

/// How an iteration fared under the ratio test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    /// `eta <= rho < rho2`.
    Successful,
    /// `rho >= rho2`.
    VerySuccessful,
    /// `rho < eta` or degenerate.
    Unsuccessful,
}

/// Quadratic scaling used on rejected nonconvex iterations.
fn nonconvex_alpha1(lambda_min: f64, lambda_max: f64, eta: f64) -> f64 {
    let first = (2.0 / 3.0) / (1.0 - eta);
    let second = if lambda_max.abs() > 0.0 {
        1.0 - lambda_min.abs() / (2.0 * lambda_max.abs())
    } else {
        f64::NEG_INFINITY
    };
    first.max(second)
}

/// v2 parameter update. Returns the next `(alpha1, alpha2, p_tilde)`.
///
/// `grad_norm` is the gradient norm at the current iterate; it sizes the
/// perturbation window on rejected nearly convex iterations.
#[allow(clippy::too_many_arguments)]
pub fn update_v2(
    alpha1: f64,
    alpha2: f64,
    p_tilde: f64,
    outcome: StepOutcome,
    case: ConvexityCase,
    lambda_min: f64,
    lambda_max: f64,
    grad_norm: f64,
    opts: &SolverOptions,
) -> (f64, f64, f64) {
    match outcome {
        StepOutcome::Successful => (alpha1, alpha2, 0.0),
        StepOutcome::VerySuccessful => (alpha1, opts.eta0 * alpha2, 0.0),
        StepOutcome::Unsuccessful => match case {
            ConvexityCase::NearlyConvex => {
                let next = next_p_tilde(
                    opts.p_tilde_rule,
                    p_tilde,
                    opts.lambda_c(),
                    opts.epsilon,
                    grad_norm,
                );
                (alpha1, alpha2, next)
            }
            ConvexityCase::Nonconvex => (
                nonconvex_alpha1(lambda_min, lambda_max, opts.eta),
                opts.eta1 * alpha2,
                p_tilde,
            ),
            ConvexityCase::StrictlyConvex => (opts.gamma2 * alpha1, opts.eta1 * alpha2, p_tilde),
        },
    }
}

/// Per-iteration coefficient snapshot carried in the trace.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum RecordParams {
    V1 { mu: f64, alpha1: f64, alpha2: f64, p_tilde: f64, quartic_weight: f64 },
    V2 { alpha1: f64, alpha2: f64, p_tilde: f64, quartic_weight: f64 },
    Nesterov { alpha1: f64, alpha2: f64 },
    Arc { sigma: f64 },
}

/// One model minimization.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    /// 1-based count of model minimizations so far.
    pub iteration: usize,
    /// Objective value at the iterate the model was centered on.
    pub f: f64,
    /// Gradient norm there.
    pub grad_norm: f64,
    /// Extreme Hessian eigenvalues there.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Convexity classification (drivers that classify only).
    pub case: Option<ConvexityCase>,
    /// Ratio-test value; `None` when degenerate or when the driver accepts
    /// unconditionally.
    pub rho: Option<f64>,
    /// Whether the step was taken.
    pub accepted: bool,
    /// Coefficients used for this model.
    pub params: RecordParams,
    /// Iterate the model was centered on.
    pub point: Vec<f64>,
    /// Minimizer of the model (the trial step).
    pub step: Vec<f64>,
    /// Model value at the step minus `f` (non-positive).
    pub model_decrease: f64,
}

/// Terminal state of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolveStatus {
    Converged,
    MaxIter,
}

impl core::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveStatus::Converged => f.write_str("converged"),
            SolveStatus::MaxIter => f.write_str("max_iter"),
        }
    }
}

/// Result of a driver run.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Final iterate.
    pub minimizer: DVector<f64>,
    /// Objective value there.
    pub min_value: f64,
    /// Gradient norm there.
    pub final_grad_norm: f64,
    /// Model minimizations performed (successful and unsuccessful).
    pub iterations: usize,
    /// Accepted steps.
    pub evaluations: usize,
    /// One record per model minimization.
    pub trace: Vec<IterationRecord>,
    pub status: SolveStatus,
    /// Whether `lambda_min` at the final iterate exceeds `-sqrt(epsilon)`.
    pub second_order_flag: bool,
    /// Whether any visited iterate had a negative Hessian eigenvalue.
    pub nonconvex_encountered: bool,
    /// Lipschitz analysis of the input polynomial (theorem mode only).
    pub theorem_data: Option<LipschitzBounds>,
}

/// Evaluated state at an iterate: derivatives plus the Hessian eigensystem
/// (reused by the subsolver, which needs the same factorization).
pub(crate) struct Station {
    pub eval: ModelEval,
    pub evals: DVector<f64>,
    pub q: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grad_norm: f64,
}

pub(crate) fn station(p: &QuarticPolynomial, x: &DVector<f64>) -> Result<Station, CoreError> {
    let eval = p.evaluate(x)?;
    let eig = SymmetricEigen::new(eval.hessian.clone());
    let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let grad_norm = eval.gradient.norm();
    Ok(Station {
        eval,
        evals: eig.eigenvalues,
        q: eig.eigenvectors,
        lambda_min,
        lambda_max,
        grad_norm,
    })
}

/// Whether the small-gradient refinement window `eps <= ||g|| <= eps^(4/5)`
/// applies, and if so the quartic weight to use instead of `sigma * alpha2`.
fn refinement_weight(enabled: bool, grad_norm: f64, epsilon: f64, sigma: f64) -> Option<f64> {
    if enabled && grad_norm >= epsilon && grad_norm <= epsilon.powf(0.8) {
        Some((sigma / 4.0).min(grad_norm))
    } else {
        None
    }
}

fn finish_report(
    p: &QuarticPolynomial,
    x: DVector<f64>,
    st: &Station,
    iterations: usize,
    evaluations: usize,
    trace: Vec<IterationRecord>,
    status: SolveStatus,
    nonconvex_encountered: bool,
    theorem_data: Option<LipschitzBounds>,
    epsilon: f64,
) -> SolveReport {
    let _ = p;
    SolveReport {
        min_value: st.eval.value,
        final_grad_norm: st.grad_norm,
        second_order_flag: st.lambda_min > -epsilon.sqrt(),
        minimizer: x,
        iterations,
        evaluations,
        trace,
        status,
        nonconvex_encountered,
        theorem_data,
    }
}

/// Endgame check for a rejected step with a degenerate ratio.
///
/// A degenerate ratio means the predicted decrease is below rounding noise
/// relative to `|f|`, so the ratio test can no longer certify any step —
/// even one that solves the problem. In that situation candidate points are
/// examined directly: a candidate finishes the solve when it does not
/// increase the objective beyond the same rounding-noise floor and its
/// gradient meets the first-order tolerance.
///
/// Two candidates are tried: the rejected trial itself, and (once per
/// center) the minimizer of the unscaled local model — quadratic `H` plus
/// quartic weight `sigma`, no tempering. The tempered step deliberately
/// trades accuracy for a descent guarantee; in a sub-noise basin that
/// guarantee has nothing left to certify, while the untempered step is
/// second-order exact and can still close the final gap to the tolerance.
/// Returns the finishing point and its station, or `None` to leave the
/// iteration unsuccessful.
pub(crate) fn degenerate_finish(
    p: &QuarticPolynomial,
    x: &DVector<f64>,
    st: &Station,
    trial: &DVector<f64>,
    f_trial: f64,
    epsilon: f64,
    plain_probe_done: &mut bool,
) -> Result<Option<(DVector<f64>, Station)>, CoreError> {
    let f_center = st.eval.value;
    // Comparing two evaluations whose terms cancel (large quartic against
    // large negative cubic, contractions over n^2..n^3 products) carries
    // noise that can exceed the single-value floor; the guard only has to
    // reject genuine ascents, so give it an order of magnitude of slack.
    let noise = 10.0 * noise_floor(f_center);
    if f_trial <= f_center + noise {
        let cand = station(p, trial)?;
        if cand.grad_norm <= epsilon {
            return Ok(Some((trial.clone_owned(), cand)));
        }
    }
    if !*plain_probe_done {
        *plain_probe_done = true;
        let sol = subsolver::minimize_with_spectrum(
            &st.evals,
            &st.q,
            &st.eval.gradient,
            p.sigma(),
            4,
            subsolver::DEFAULT_TOL,
            None,
        )?;
        let probe = x + &sol.s_star;
        if p.value(&probe)? <= f_center + noise {
            let cand = station(p, &probe)?;
            if cand.grad_norm <= epsilon {
                return Ok(Some((probe, cand)));
            }
        }
    }
    Ok(None)
}

/// Minimize `p` with the v1 adaptation (single contraction parameter `mu`).
pub fn solve_v1(p: &QuarticPolynomial, opts: &SolverOptions) -> Result<SolveReport, CoreError> {
    opts.validate()?;
    if opts.theorem_mode {
        return Err(CoreError::InvalidParameter(
            "theorem_mode is only supported by solve_v2",
        ));
    }
    let base = V1Params::default();
    base.validate()?;
    let epsilon = opts.epsilon;
    let lambda_c = opts.lambda_c();
    let refinement = opts.refinement.unwrap_or(false);
    let sigma = p.sigma();
    let n = p.dim();

    let mut x = DVector::zeros(n);
    let mut st = station(p, &x)?;
    let mut mu = base.mu;
    let mut p_tilde = 0.0f64;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut iterations = 0usize;
    let mut evaluations = 0usize;
    let mut nonconvex_encountered = false;
    let mut status = SolveStatus::MaxIter;
    let mut plain_probe_done = false;

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
        let case = classify(st.lambda_min, lambda_c);
        let params = V1Params { mu, ..base };
        let (alpha1, alpha2, pt) = coefficients_v1(case, &params, p_tilde)?;
        let weight = refinement_weight(refinement, st.grad_norm, epsilon, sigma)
            .unwrap_or(sigma * alpha2);
        let model_evals = st.evals.map(|l| alpha1 * (l + pt));
        let sol = subsolver::minimize_with_spectrum(
            &model_evals,
            &st.q,
            &st.eval.gradient,
            weight,
            4,
            subsolver::DEFAULT_TOL,
            None,
        )?;
        let model_value = st.eval.value + sol.model_decrease;
        let trial = &x + &sol.s_star;
        let f_trial = p.value(&trial)?;
        let rho = ratio(st.eval.value, f_trial, model_value);
        let rho_val = match rho {
            Ratio::Value(v) => Some(v),
            Ratio::Degenerate => None,
        };
        let accepted = matches!(rho, Ratio::Value(v) if v >= opts.eta);
        trace.push(IterationRecord {
            iteration: iterations,
            f: st.eval.value,
            grad_norm: st.grad_norm,
            lambda_min: st.lambda_min,
            lambda_max: st.lambda_max,
            case: Some(case),
            rho: rho_val,
            accepted,
            params: RecordParams::V1 {
                mu,
                alpha1,
                alpha2,
                p_tilde: pt,
                quartic_weight: weight,
            },
            point: x.iter().cloned().collect(),
            step: sol.s_star.iter().cloned().collect(),
            model_decrease: sol.model_decrease,
        });
        if !accepted && rho_val.is_none() {
            if let Some((x_fin, st_fin)) =
                degenerate_finish(p, &x, &st, &trial, f_trial, epsilon, &mut plain_probe_done)?
            {
                evaluations += 1;
                x = x_fin;
                st = st_fin;
                status = SolveStatus::Converged;
                break;
            }
            // Rejections never relax the model at a fixed center, so the
            // predicted decrease cannot recover above the noise floor:
            // every later ratio here would be degenerate too. Stop instead
            // of spinning out the iteration budget.
            break;
        }
        if accepted {
            evaluations += 1;
            x = trial;
            st = station(p, &x)?;
            p_tilde = 0.0;
            plain_probe_done = false;
            if matches!(rho, Ratio::Value(v) if v >= opts.rho2) {
                mu = (opts.gamma1 * mu).min(1.0);
            }
        } else if case == ConvexityCase::NearlyConvex {
            p_tilde = next_p_tilde(opts.p_tilde_rule, p_tilde, lambda_c, epsilon, st.grad_norm);
        } else {
            // A rejected nonconvex iteration keeps alpha1 = 1 automatically
            // through the coefficient formula; only mu shrinks.
            mu = opts.gamma0 * mu;
        }
    }

    Ok(finish_report(
        p,
        x,
        &st,
        iterations,
        evaluations,
        trace,
        status,
        nonconvex_encountered,
        None,
        epsilon,
    ))
}

/// Per-iteration coefficients in theorem mode.
fn theorem_coefficients(
    case: ConvexityCase,
    alpha1_state: f64,
    st: &Station,
    lambda_c: f64,
    epsilon: f64,
    sigma: f64,
    eta: f64,
    l_h: f64,
) -> (f64, f64, f64) {
    let sqrt_eps = epsilon.sqrt();
    let sqrt_g = st.grad_norm.sqrt();
    match case {
        ConvexityCase::StrictlyConvex => {
            let lo = sqrt_eps / lambda_c;
            let hi = (sqrt_g / lambda_c).max(lo);
            let a = (alpha1_state - 1.0).clamp(lo, hi);
            let d = 1.01 * l_h * l_h / (18.0 * a * lambda_c * sigma);
            (1.0 + a, 1.0 + d, 0.0)
        }
        ConvexityCase::NearlyConvex => {
            let hi = sqrt_g.max(sqrt_eps);
            let pt = lambda_c.clamp(sqrt_eps, hi);
            let d = 1.01 * l_h * l_h / (18.0 * pt * sigma);
            (1.0, 1.0 + d, pt)
        }
        ConvexityCase::Nonconvex => {
            let alpha1 = nonconvex_alpha1(st.lambda_min, st.lambda_max, eta);
            let d = 1.01 * l_h * l_h / (3.0 * sigma * lambda_c);
            (alpha1, (1.0 + d) / eta, 0.0)
        }
    }
}

/// Minimize `p` with the v2 adaptation (independent `alpha1`/`alpha2`
/// steering), optionally in theorem mode.
pub fn solve_v2(p: &QuarticPolynomial, opts: &SolverOptions) -> Result<SolveReport, CoreError> {
    opts.validate()?;
    let epsilon = opts.epsilon;
    let lambda_c = opts.lambda_c();
    let theorem = opts.theorem_mode;
    let refinement = if theorem {
        false
    } else {
        opts.refinement.unwrap_or(true)
    };
    let sigma = p.sigma();
    let n = p.dim();

    let (l_h, theorem_data) = if theorem {
        let mode = if n <= 2 {
            TensorNormMode::Grid { resolution: analysis::DEFAULT_GRID_RESOLUTION }
        } else {
            TensorNormMode::Sampled { budget: analysis::DEFAULT_SAMPLE_BUDGET, seed: 0 }
        };
        let bounds = analysis::analyze(p, mode)?;
        (bounds.l_h, Some(bounds))
    } else {
        (0.0, None)
    };

    let mut x = DVector::zeros(n);
    let mut st = station(p, &x)?;
    let mut alpha1_state = 1.0f64;
    let mut alpha2_state = 1.0f64;
    let mut p_tilde = 0.0f64;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut iterations = 0usize;
    let mut evaluations = 0usize;
    let mut nonconvex_encountered = false;
    let mut status = SolveStatus::MaxIter;
    let mut plain_probe_done = false;

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
        let case = classify(st.lambda_min, lambda_c);
        let (alpha1, alpha2, pt) = if theorem {
            theorem_coefficients(
                case,
                alpha1_state,
                &st,
                lambda_c,
                epsilon,
                sigma,
                opts.eta,
                l_h,
            )
        } else {
            let pt = if case == ConvexityCase::NearlyConvex { p_tilde } else { 0.0 };
            (alpha1_state, alpha2_state, pt)
        };
        let weight = refinement_weight(refinement, st.grad_norm, epsilon, sigma)
            .unwrap_or(sigma * alpha2);
        let model_evals = st.evals.map(|l| alpha1 * (l + pt));
        let sol = subsolver::minimize_with_spectrum(
            &model_evals,
            &st.q,
            &st.eval.gradient,
            weight,
            4,
            subsolver::DEFAULT_TOL,
            None,
        )?;
        let model_value = st.eval.value + sol.model_decrease;
        let trial = &x + &sol.s_star;
        let f_trial = p.value(&trial)?;
        let rho = ratio(st.eval.value, f_trial, model_value);
        let rho_val = match rho {
            Ratio::Value(v) => Some(v),
            Ratio::Degenerate => None,
        };
        let outcome = match rho {
            Ratio::Value(v) if v >= opts.rho2 => StepOutcome::VerySuccessful,
            Ratio::Value(v) if v >= opts.eta => StepOutcome::Successful,
            _ => StepOutcome::Unsuccessful,
        };
        let accepted = outcome != StepOutcome::Unsuccessful;
        trace.push(IterationRecord {
            iteration: iterations,
            f: st.eval.value,
            grad_norm: st.grad_norm,
            lambda_min: st.lambda_min,
            lambda_max: st.lambda_max,
            case: Some(case),
            rho: rho_val,
            accepted,
            params: RecordParams::V2 {
                alpha1,
                alpha2,
                p_tilde: pt,
                quartic_weight: weight,
            },
            point: x.iter().cloned().collect(),
            step: sol.s_star.iter().cloned().collect(),
            model_decrease: sol.model_decrease,
        });
        if !accepted && rho_val.is_none() {
            if let Some((x_fin, st_fin)) =
                degenerate_finish(p, &x, &st, &trial, f_trial, epsilon, &mut plain_probe_done)?
            {
                evaluations += 1;
                x = x_fin;
                st = st_fin;
                status = SolveStatus::Converged;
                break;
            }
            // Rejections never relax the model at a fixed center, so the
            // predicted decrease cannot recover above the noise floor:
            // every later ratio here would be degenerate too. Stop instead
            // of spinning out the iteration budget.
            break;
        }
        let grad_norm = st.grad_norm;
        let (lmin, lmax) = (st.lambda_min, st.lambda_max);
        if accepted {
            evaluations += 1;
            x = trial;
            st = station(p, &x)?;
            plain_probe_done = false;
        }
        let (a1, a2, ptn) = update_v2(
            alpha1_state,
            alpha2_state,
            p_tilde,
            outcome,
            case,
            lmin,
            lmax,
            grad_norm,
            opts,
        );
        alpha1_state = a1;
        alpha2_state = a2;
        p_tilde = ptn;
    }

    Ok(finish_report(
        p,
        x,
        &st,
        iterations,
        evaluations,
        trace,
        status,
        nonconvex_encountered,
        theorem_data,
        epsilon,
    ))
}

/// Local linear-rate factor of the v1 scheme (at `q = 2`) as a function of
/// `tau`: the smaller of the two one-sided contraction factors.
pub fn v1_linear_rate(tau: f64) -> f64 {
    let r1 = (3.0 * tau - 1.0) / (3.0 * tau + 1.0);
    let r2 = (1.0 - (2.0 / 3.0) * tau) / (1.0 + (2.0 / 3.0) * tau);
    r1.min(r2)
}

/// Maximize [`v1_linear_rate`] over `tau` in `(1/3, 1)` by ternary search
/// (the rate is the minimum of an increasing and a decreasing function of
/// `tau`, hence unimodal). Returns `(rate, tau)`.
pub fn v1_optimal_linear_rate() -> (f64, f64) {
    let mut lo = 1.0 / 3.0 + 1e-12;
    let mut hi = 1.0 - 1e-12;
    for _ in 0..300 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if v1_linear_rate(m1) < v1_linear_rate(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let tau = 0.5 * (lo + hi);
    (v1_linear_rate(tau), tau)
}
