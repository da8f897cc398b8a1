//! Built-in test objectives with closed-form third derivatives.

use alloc::boxed::Box;
use alloc::string::ToString;

use nalgebra::{DMatrix, DVector};

use crate::error::CoreError;
use crate::oracle::{SecondOrderOracle, ThirdOrderOracle};
use crate::tensor::SymmetricTensor3;

#[allow(unused_imports)]
use num_traits::Float;

/// Chained Rosenbrock function
/// `sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`, minimum 0 at all-ones.
pub struct Rosenbrock {
    n: usize,
}

impl Rosenbrock {
    /// Requires `n >= 2`.
    pub fn new(n: usize) -> Result<Self, CoreError> {
        if n < 2 {
            return Err(CoreError::InvalidParameter("rosenbrock needs n >= 2"));
        }
        Ok(Rosenbrock { n })
    }
}

impl SecondOrderOracle for Rosenbrock {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let mut f = 0.0;
        for i in 0..self.n - 1 {
            let a = x[i + 1] - x[i] * x[i];
            let b = 1.0 - x[i];
            f += 100.0 * a * a + b * b;
        }
        f
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.n);
        for i in 0..self.n - 1 {
            let a = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * a;
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n - 1 {
            h[(i, i)] += -400.0 * x[i + 1] + 1200.0 * x[i] * x[i] + 2.0;
            h[(i + 1, i + 1)] += 200.0;
            h[(i, i + 1)] += -400.0 * x[i];
            h[(i + 1, i)] += -400.0 * x[i];
        }
        h
    }
}

impl ThirdOrderOracle for Rosenbrock {
    fn third_tensor(&self, x: &DVector<f64>) -> SymmetricTensor3 {
        let mut t = SymmetricTensor3::zeros(self.n);
        for i in 0..self.n - 1 {
            t.add(i, i, i, 2400.0 * x[i]);
            t.add(i, i, i + 1, -400.0);
        }
        t
    }
}

/// Separable quartic well `1/4 sum x_j^4 + 1/2 ||x||^2`, minimum 0 at the
/// origin.
pub struct QuarticWell {
    n: usize,
}

impl QuarticWell {
    pub fn new(n: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::InvalidParameter("quartic_well needs n >= 1"));
        }
        Ok(QuarticWell { n })
    }
}

impl SecondOrderOracle for QuarticWell {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        x.iter().map(|&v| 0.25 * v.powi(4) + 0.5 * v * v).sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(|v| v * v * v + v)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&x.map(|v| 3.0 * v * v + 1.0))
    }
}

impl ThirdOrderOracle for QuarticWell {
    fn third_tensor(&self, x: &DVector<f64>) -> SymmetricTensor3 {
        let mut t = SymmetricTensor3::zeros(self.n);
        for j in 0..self.n {
            t.set(j, j, j, 6.0 * x[j]);
        }
        t
    }
}

/// `exp(p'x) + 1/2 ||Dx||^2` with a fixed direction `p` of alternating
/// signs and a diagonal scaling `D` spreading two orders of magnitude:
/// strictly convex, non-polynomial, with a rank-one third derivative
/// `exp(p'x) p (x) p (x) p`.
pub struct ScaledExponentialLike {
    p: DVector<f64>,
    d2: DVector<f64>,
}

impl ScaledExponentialLike {
    pub fn new(n: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::InvalidParameter(
                "scaled_exponential_like needs n >= 1",
            ));
        }
        let p = DVector::from_fn(n, |j, _| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign / (j as f64 + 1.0)
        });
        let denom = (n - 1).max(1) as f64;
        let d2 = DVector::from_fn(n, |j, _| {
            let d = 1.0 + 9.0 * j as f64 / denom;
            d * d
        });
        Ok(ScaledExponentialLike { p, d2 })
    }

    fn exp_term(&self, x: &DVector<f64>) -> f64 {
        self.p.dot(x).exp()
    }
}

impl SecondOrderOracle for ScaledExponentialLike {
    fn dim(&self) -> usize {
        self.p.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let quad: f64 = x
            .iter()
            .zip(self.d2.iter())
            .map(|(&v, &d2)| 0.5 * d2 * v * v)
            .sum();
        self.exp_term(x) + quad
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let e = self.exp_term(x);
        DVector::from_fn(self.p.len(), |j, _| e * self.p[j] + self.d2[j] * x[j])
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let e = self.exp_term(x);
        let n = self.p.len();
        let mut h = DMatrix::from_fn(n, n, |i, j| e * self.p[i] * self.p[j]);
        for j in 0..n {
            h[(j, j)] += self.d2[j];
        }
        h
    }
}

impl ThirdOrderOracle for ScaledExponentialLike {
    fn third_tensor(&self, x: &DVector<f64>) -> SymmetricTensor3 {
        let e = self.exp_term(x);
        let n = self.p.len();
        SymmetricTensor3::from_fn(n, |i, j, k| e * self.p[i] * self.p[j] * self.p[k])
    }
}

/// Look up a built-in problem by name.
pub fn builtin_problem(name: &str, n: usize) -> Result<Box<dyn ThirdOrderOracle>, CoreError> {
    match name {
        "rosenbrock" => Ok(Box::new(Rosenbrock::new(n)?)),
        "quartic_well" => Ok(Box::new(QuarticWell::new(n)?)),
        "scaled_exponential_like" => Ok(Box::new(ScaledExponentialLike::new(n)?)),
        other => Err(CoreError::UnknownProblem(other.to_string())),
    }
}
