//! Radius and Lipschitz-constant estimates for the quartic polynomial.
//!
//! These quantities feed the verification ("theorem") mode of the QQR
//! drivers and the iterate-boundedness checks; the practical solvers never
//! depend on them.

use nalgebra::DVector;
use nalgebra::SymmetricEigen;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::CoreError;
use crate::polynomial::QuarticPolynomial;
use crate::tensor::SymmetricTensor3;

/// How to estimate the extremal values of the cubic form on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TensorNormMode {
    /// `budget` random unit starts, each refined by projected-gradient
    /// ascent. Produces lower bounds; deterministic in `seed`.
    Sampled { budget: usize, seed: u64 },
    /// Exhaustive sweep of the unit sphere at the given parameter
    /// resolution plus a local polish. Only for `n <= 2`, where the sphere
    /// is two points or a circle; exact up to the resolution.
    Grid { resolution: f64 },
}

/// Estimates of the tensor's extremal unit-sphere values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorNorms {
    /// Largest value of `T[u]^3` over unit `u` (always >= 0: the form is
    /// odd, so flipping `u` flips the sign).
    pub big_lambda0: f64,
    /// Largest absolute value of `T[u][v][w]` over unit `u, v, w`. For a
    /// symmetric form this maximum is attained with all three arguments
    /// equal (Banach's theorem), so it coincides with `big_lambda0`.
    pub big_lambda_hat0: f64,
    /// True when the values come from the exhaustive grid.
    pub exact: bool,
}

/// Radius and Lipschitz bounds for one polynomial.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LipschitzBounds {
    /// Every point with `m3(s) <= m3(0)` satisfies `||s|| <= r_c`.
    pub r_c: f64,
    /// `max(-lambda_min(H), 0)`.
    pub lambda0: f64,
    /// See [`TensorNorms::big_lambda0`].
    pub big_lambda0: f64,
    /// See [`TensorNorms::big_lambda_hat0`].
    pub big_lambda_hat0: f64,
    /// Gradient Lipschitz constant on the ball of radius `r_c`.
    pub l_g: f64,
    /// Hessian Lipschitz constant on the ball of radius `r_c`.
    pub l_h: f64,
    /// Whether the tensor norms came from the exact grid oracle.
    pub exact: bool,
}

/// Default budget for [`TensorNormMode::Sampled`].
pub const DEFAULT_SAMPLE_BUDGET: usize = 200;
/// Ascent steps per sampled start.
const ASCENT_STEPS: usize = 100;
/// Default resolution for [`TensorNormMode::Grid`].
pub const DEFAULT_GRID_RESOLUTION: f64 = 1e-4;

/// Cubic form `T[u]^3` for `n = 2` written in the circle parameterization.
fn circle_form(t: &SymmetricTensor3, theta: f64) -> f64 {
    let (x, y) = (theta.cos(), theta.sin());
    let t000 = t.get(0, 0, 0);
    let t001 = t.get(0, 0, 1);
    let t011 = t.get(0, 1, 1);
    let t111 = t.get(1, 1, 1);
    t000 * x * x * x + 3.0 * t001 * x * x * y + 3.0 * t011 * x * y * y + t111 * y * y * y
}

fn grid_norms(t: &SymmetricTensor3, resolution: f64) -> Result<f64, CoreError> {
    match t.dim() {
        0 => Ok(0.0),
        1 => Ok(t.get(0, 0, 0).abs()),
        2 => {
            // |T[u]^3| is pi-periodic in the circle angle.
            let steps = (core::f64::consts::PI / resolution) as usize + 1;
            let mut best = 0.0f64;
            let mut best_theta = 0.0f64;
            for s in 0..steps {
                let theta = s as f64 * resolution;
                let v = circle_form(t, theta).abs();
                if v > best {
                    best = v;
                    best_theta = theta;
                }
            }
            // Ternary-search polish on the bracketing interval.
            let mut lo = best_theta - resolution;
            let mut hi = best_theta + resolution;
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if circle_form(t, m1).abs() < circle_form(t, m2).abs() {
                    lo = m1;
                } else {
                    hi = m2;
                }
            }
            Ok(best.max(circle_form(t, 0.5 * (lo + hi)).abs()))
        }
        n => Err(CoreError::GridDimension(n)),
    }
}

fn sampled_norms(t: &SymmetricTensor3, budget: usize, seed: u64) -> f64 {
    let n = t.dim();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..budget {
        let mut u = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = u.norm();
        if norm == 0.0 {
            continue;
        }
        u /= norm;
        // Work with the sign that makes the form nonnegative.
        let mut val = t.contract_thrice(&u).expect("dimension checked");
        if val < 0.0 {
            u = -u;
            val = -val;
        }
        let mut step = 1.0;
        for _ in 0..ASCENT_STEPS {
            let grad = 3.0 * t.contract_twice(&u).expect("dimension checked");
            let mut cand = &u + step * grad;
            let cn = cand.norm();
            if cn == 0.0 {
                step *= 0.5;
                continue;
            }
            cand /= cn;
            let cv = t.contract_thrice(&cand).expect("dimension checked");
            if cv > val {
                u = cand;
                val = cv;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        best = best.max(val);
    }
    best
}

/// Estimates the extremal unit-sphere values of the cubic form.
pub fn tensor_norm_bounds(
    t: &SymmetricTensor3,
    mode: TensorNormMode,
) -> Result<TensorNorms, CoreError> {
    let (value, exact) = match mode {
        TensorNormMode::Grid { resolution } => {
            if !(resolution > 0.0) {
                return Err(CoreError::InvalidParameter("grid resolution must be positive"));
            }
            (grid_norms(t, resolution)?, true)
        }
        TensorNormMode::Sampled { budget, seed } => (sampled_norms(t, budget, seed), false),
    };
    Ok(TensorNorms {
        big_lambda0: value,
        big_lambda_hat0: value,
        exact,
    })
}

/// The decreasing map `K(r) = ||g||/r^3 + lambda0/(2r^2) + Lambda0/(6r)`
/// whose crossing with `sigma/4` defines the radius bound.
fn secular_map(gnorm: f64, lambda0: f64, big_lambda0: f64, r: f64) -> f64 {
    gnorm / (r * r * r) + 0.5 * lambda0 / (r * r) + big_lambda0 / (6.0 * r)
}

pub(crate) fn radius_from_parts(gnorm: f64, lambda0: f64, big_lambda0: f64, sigma: f64) -> f64 {
    let target = 0.25 * sigma;
    if gnorm + lambda0 + big_lambda0 == 0.0 {
        // K vanishes identically: the origin is the only sublevel point.
        return 0.0;
    }
    let k = |r: f64| secular_map(gnorm, lambda0, big_lambda0, r);
    let (mut lo, mut hi);
    if k(1.0) > target {
        lo = 1.0;
        hi = 2.0;
        while k(hi) > target {
            hi *= 2.0;
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while k(lo) <= target {
            lo *= 0.5;
        }
    }
    // Bisection: K is strictly decreasing, so the bracket is safe.
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if k(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The unique `r_c > 0` with `sigma/4 = ||g||/r^3 + lambda0/(2r^2) + Lambda0/(6r)`,
/// where `lambda0 = max(-lambda_min(H), 0)`. Any `s` with `m3(s) <= m3(0)`
/// satisfies `||s|| <= r_c`. Returns 0 in the degenerate case where the
/// left-hand side vanishes identically (`g = 0`, `H` positive semidefinite,
/// zero tensor bound).
pub fn radius_bound(p: &QuarticPolynomial, norms: &TensorNorms) -> f64 {
    let eig = SymmetricEigen::new(p.h().clone());
    let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda0 = (-lambda_min).max(0.0);
    radius_from_parts(p.g().norm(), lambda0, norms.big_lambda0, p.sigma())
}

/// Lipschitz constants of the gradient and Hessian of `m3` on the ball of
/// radius `r`: `L_g = |lambda_max(H)| + Lambda_hat0 r / 2 + 3 sigma r^2` and
/// `L_H = Lambda0 + 6 sigma r`.
pub fn lipschitz_bounds(p: &QuarticPolynomial, r: f64, norms: &TensorNorms) -> (f64, f64) {
    let eig = SymmetricEigen::new(p.h().clone());
    let lambda_max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let l_g = lambda_max.abs() + 0.5 * norms.big_lambda_hat0 * r + 3.0 * p.sigma() * r * r;
    let l_h = norms.big_lambda0 + 6.0 * p.sigma() * r;
    (l_g, l_h)
}

/// Computes tensor norms, the radius bound, and both Lipschitz constants in
/// one pass.
pub fn analyze(p: &QuarticPolynomial, mode: TensorNormMode) -> Result<LipschitzBounds, CoreError> {
    let norms = tensor_norm_bounds(p.t(), mode)?;
    let eig = SymmetricEigen::new(p.h().clone());
    let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda0 = (-lambda_min).max(0.0);
    let r_c = radius_from_parts(p.g().norm(), lambda0, norms.big_lambda0, p.sigma());
    let (l_g, l_h) = lipschitz_bounds(p, r_c, &norms);
    Ok(LipschitzBounds {
        r_c,
        lambda0,
        big_lambda0: norms.big_lambda0,
        big_lambda_hat0: norms.big_lambda_hat0,
        l_g,
        l_h,
        exact: norms.exact,
    })
}
