//! Derivative oracles for the outer optimization loops.
//!
//! [`SecondOrderOracle`] feeds the cubic-regularization baseline;
//! [`ThirdOrderOracle`] adds the third-derivative tensor needed to build the
//! quartically regularized subproblem. [`QuarticPolynomial`] implements both,
//! so every solver in this crate can also be run on the model problem itself.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::polynomial::QuarticPolynomial;
use crate::tensor::SymmetricTensor3;

#[allow(unused_imports)]
use num_traits::Float;

/// Value, gradient and Hessian of a smooth objective.
///
/// Implementations may assume `x.len() == self.dim()`; passing a vector of
/// any other length is a caller bug.
pub trait SecondOrderOracle {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// A [`SecondOrderOracle`] that also exposes the (symmetric) third
/// derivative.
pub trait ThirdOrderOracle: SecondOrderOracle {
    fn third_tensor(&self, x: &DVector<f64>) -> SymmetricTensor3;
}

impl SecondOrderOracle for QuarticPolynomial {
    fn dim(&self) -> usize {
        QuarticPolynomial::dim(self)
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        QuarticPolynomial::value(self, x).expect("oracle dimension mismatch")
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.evaluate(x).expect("oracle dimension mismatch").gradient
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.evaluate(x).expect("oracle dimension mismatch").hessian
    }
}

impl ThirdOrderOracle for QuarticPolynomial {
    fn third_tensor(&self, x: &DVector<f64>) -> SymmetricTensor3 {
        // The third derivative of the quartic regularization term shifts the
        // tensor exactly the way recentering does.
        let recentered = self.recenter(x).expect("oracle dimension mismatch");
        recentered.t().clone()
    }
}

/// Worst relative finite-difference errors of an oracle's derivatives at
/// `x`: `(gradient, hessian, tensor)`.
///
/// The gradient is checked against central differences of the value, the
/// Hessian against central differences of the gradient, and the tensor
/// against central differences of the Hessian. Errors are measured as
/// `|fd - exact| / (1 + |exact|)`, maximized over entries.
pub fn finite_difference_errors(
    obj: &dyn ThirdOrderOracle,
    x: &DVector<f64>,
    h: f64,
) -> (f64, f64, f64) {
    let n = obj.dim();
    let grad = obj.gradient(x);
    let hess = obj.hessian(x);
    let tens = obj.third_tensor(x);

    let mut grad_err = 0.0f64;
    let mut hess_err = 0.0f64;
    let mut tens_err = 0.0f64;
    let mut grads_p: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut grads_m: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut hess_p: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    let mut hess_m: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut xp = x.clone();
        xp[k] += h;
        let mut xm = x.clone();
        xm[k] -= h;
        let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
        grad_err = grad_err.max((fd - grad[k]).abs() / (1.0 + grad[k].abs()));
        grads_p.push(obj.gradient(&xp));
        grads_m.push(obj.gradient(&xm));
        hess_p.push(obj.hessian(&xp));
        hess_m.push(obj.hessian(&xm));
    }
    for k in 0..n {
        for i in 0..n {
            let fd = (grads_p[k][i] - grads_m[k][i]) / (2.0 * h);
            let exact = hess[(i, k)];
            hess_err = hess_err.max((fd - exact).abs() / (1.0 + exact.abs()));
            for j in 0..=i {
                let fd = (hess_p[k][(i, j)] - hess_m[k][(i, j)]) / (2.0 * h);
                let exact = tens.get(i, j, k);
                tens_err = tens_err.max((fd - exact).abs() / (1.0 + exact.abs()));
            }
        }
    }
    (grad_err, hess_err, tens_err)
}
