//! The quartically-regularized cubic polynomial and its exact calculus.

use nalgebra::{DMatrix, DVector};
// Supplies float math (abs, sqrt, ...) in no_std builds; shadowed by the
// inherent std methods otherwise.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::CoreError;
use crate::tensor::SymmetricTensor3;

/// The polynomial
///
/// ```text
/// m3(s) = f0 + g's + 1/2 s'Hs + 1/6 T[s]^3 + sigma/4 ||s||^4
/// ```
///
/// `H` must be symmetric and `sigma` strictly positive; both are validated
/// on construction. Since `m3` is itself a quartic polynomial, its
/// fourth-order Taylor expansion about any point is exact, which is what
/// makes [`recenter`](Self::recenter) lossless.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarticPolynomial {
    f0: f64,
    g: DVector<f64>,
    h: DMatrix<f64>,
    t: SymmetricTensor3,
    sigma: f64,
}

/// Value, gradient, and Hessian of `m3` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelEval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Symmetry tolerance accepted for `H` (absolute, relative to entry size).
const SYMMETRY_TOL: f64 = 1e-12;

impl QuarticPolynomial {
    pub fn new(
        f0: f64,
        g: DVector<f64>,
        h: DMatrix<f64>,
        t: SymmetricTensor3,
        sigma: f64,
    ) -> Result<Self, CoreError> {
        let n = g.len();
        if h.nrows() != n || h.ncols() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: h.nrows().max(h.ncols()),
            });
        }
        if t.dim() != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: t.dim(),
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(CoreError::InvalidParameter("sigma must be positive and finite"));
        }
        if !f0.is_finite()
            || g.iter().any(|v| !v.is_finite())
            || h.iter().any(|v| !v.is_finite())
            || t.iter().any(|(_, _, _, v)| !v.is_finite())
        {
            return Err(CoreError::NonFinite("polynomial coefficients"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let scale = 1.0 + h[(i, j)].abs().max(h[(j, i)].abs());
                if (h[(i, j)] - h[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(CoreError::InvalidParameter("H must be symmetric"));
                }
            }
        }
        Ok(Self { f0, g, h, t, sigma })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn g(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn t(&self) -> &SymmetricTensor3 {
        &self.t
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn check_point(&self, s: &DVector<f64>) -> Result<(), CoreError> {
        if s.len() != self.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                got: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite("evaluation point"));
        }
        Ok(())
    }

    /// Value of `m3` at `s`.
    pub fn value(&self, s: &DVector<f64>) -> Result<f64, CoreError> {
        self.check_point(s)?;
        let cubic = self.t.contract_thrice(s)?;
        let ns2 = s.norm_squared();
        Ok(self.f0
            + self.g.dot(s)
            + 0.5 * (s.transpose() * &self.h * s)[(0, 0)]
            + cubic / 6.0
            + 0.25 * self.sigma * ns2 * ns2)
    }

    /// Value, gradient `g + Hs + 1/2 T[s]^2 + sigma ||s||^2 s`, and Hessian
    /// `H + T[s] + sigma (||s||^2 I + 2 s s')` at `s`.
    pub fn evaluate(&self, s: &DVector<f64>) -> Result<ModelEval, CoreError> {
        self.check_point(s)?;
        let n = self.dim();
        let t_s = self.t.contract_once(s)?;
        let t_ss = &t_s * s;
        let hs = &self.h * s;
        let ns2 = s.norm_squared();

        let value = self.f0
            + self.g.dot(s)
            + 0.5 * s.dot(&hs)
            + s.dot(&t_ss) / 6.0
            + 0.25 * self.sigma * ns2 * ns2;

        let gradient = &self.g + hs + 0.5 * &t_ss + self.sigma * ns2 * s;

        let mut hessian = &self.h + t_s;
        for i in 0..n {
            hessian[(i, i)] += self.sigma * ns2;
        }
        hessian += 2.0 * self.sigma * s * s.transpose();

        Ok(ModelEval {
            value,
            gradient,
            hessian,
        })
    }

    /// Shifts the expansion point: returns `q` with `q(s) = m3(s0 + s)`
    /// exactly. The shifted tensor is `T` plus the third derivative of the
    /// regularization term, `2 sigma (s0_i d_jk + s0_j d_ik + s0_k d_ij)`.
    pub fn recenter(&self, s0: &DVector<f64>) -> Result<Self, CoreError> {
        let eval = self.evaluate(s0)?;
        let n = self.dim();
        let mut t = self.t.clone();
        let c = 2.0 * self.sigma;
        for a in 0..n {
            t.add(a, a, a, 3.0 * c * s0[a]);
            for b in (a + 1)..n {
                t.add(a, a, b, c * s0[b]);
                t.add(a, b, b, c * s0[a]);
            }
        }
        Ok(Self {
            f0: eval.value,
            g: eval.gradient,
            h: eval.hessian,
            t,
            sigma: self.sigma,
        })
    }

    /// Compares analytic derivatives against central finite differences with
    /// step `h`, returning the largest entrywise deviation of the gradient
    /// and of the Hessian, each scaled by `1 + |analytic entry|`.
    pub fn finite_difference_check(
        &self,
        s: &DVector<f64>,
        h: f64,
    ) -> Result<(f64, f64), CoreError> {
        if !(h > 0.0) {
            return Err(CoreError::InvalidParameter("finite-difference step must be positive"));
        }
        self.check_point(s)?;
        let n = self.dim();
        let exact = self.evaluate(s)?;

        let mut grad_residual = 0.0f64;
        let mut hess_residual = 0.0f64;
        for j in 0..n {
            let mut sp = s.clone();
            let mut sm = s.clone();
            sp[j] += h;
            sm[j] -= h;
            let fd_g = (self.value(&sp)? - self.value(&sm)?) / (2.0 * h);
            let dev = (fd_g - exact.gradient[j]).abs() / (1.0 + exact.gradient[j].abs());
            grad_residual = grad_residual.max(dev);

            let gp = self.evaluate(&sp)?.gradient;
            let gm = self.evaluate(&sm)?.gradient;
            for i in 0..n {
                let fd_h = (gp[i] - gm[i]) / (2.0 * h);
                let dev = (fd_h - exact.hessian[(i, j)]).abs()
                    / (1.0 + exact.hessian[(i, j)].abs());
                hess_residual = hess_residual.max(dev);
            }
        }
        Ok((grad_residual, hess_residual))
    }
}
