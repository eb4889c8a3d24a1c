//! Special functions, truncated Poisson sums, quadrature and random sampling.

mod poisson;
mod quadrature;
mod rng;
mod special;

pub use poisson::{poisson_expectation, poisson_sum, truncation_window, PoissonSum};
pub use quadrature::{integrate, integrate_with_breaks, Quadrature, MAX_DEPTH};
pub use rng::{sample_dirichlet, sample_gamma, sample_poisson, RngStream};
pub use special::{
    ln_factorial, log_gamma, log_gamma_diff, log_lower_gamma, log_poisson_pmf,
    regularized_lower_gamma,
};

pub(crate) use rng::standard_gamma;
pub(crate) use special::{lgamma, ln_poisson};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy targets shared by quadrature and truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Bound on the Poisson probability mass discarded by truncation.
    pub tail_mass: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-10, rel_tol: 1e-10, tail_mass: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, tail_mass: f64) -> Result<Self> {
        for (name, v) in [("abs_tol", abs_tol), ("rel_tol", rel_tol), ("tail_mass", tail_mass)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Tolerance { abs_tol, rel_tol, tail_mass })
    }
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln(e^a + e^b)`
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
