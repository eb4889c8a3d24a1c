//! Truncated Poisson expectations with a certified tail.

use super::special::ln_poisson;
use super::{NeumaierSum, Tolerance};
use crate::error::{Error, Result};

/// Upper log-bound on `P(X >= k)` for `X ~ Poisson(m)`, valid when `k > m`.
fn ln_chernoff_tail(m: f64, k: u64) -> f64 {
    let kf = k as f64;
    -m + kf * (1.0 + (m / kf).ln())
}

/// Last count `K(m)` summed by [`poisson_expectation`].
///
/// Starts at `⌈m + 12√(m+1) + 30⌉` and grows until the Chernoff bound on the
/// discarded mass is at most `tail_mass`.
pub fn truncation_window(m: f64, tail_mass: f64) -> u64 {
    if m == 0.0 {
        return 0;
    }
    let mut k = (m + 12.0 * (m + 1.0).sqrt() + 30.0).ceil() as u64;
    let step = (m + 1.0).sqrt().ceil() as u64 + 1;
    let ln_tail = tail_mass.ln();
    while ln_chernoff_tail(m, k) > ln_tail {
        k += step;
    }
    k
}

/// Result of a truncated Poisson sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSum {
    pub value: f64,
    /// Last count included.
    pub last: u64,
    /// Chernoff bound on the discarded probability mass.
    pub tail_mass: f64,
    /// `|f(last)|`, a scale for the discarded contribution.
    pub boundary: f64,
}

/// `E[f(X)]` for `X ~ Poisson(m)`, truncated at [`truncation_window`].
pub fn poisson_expectation<F>(f: F, m: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(u64) -> f64,
{
    poisson_sum(f, m, tol).map(|s| s.value)
}

/// As [`poisson_expectation`], also reporting the truncation metadata.
pub fn poisson_sum<F>(mut f: F, m: f64, tol: &Tolerance) -> Result<PoissonSum>
where
    F: FnMut(u64) -> f64,
{
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("Poisson rate must be finite and >= 0, got {m}")));
    }
    if m == 0.0 {
        let v = f(0);
        if !v.is_finite() {
            return Err(Error::Evaluation { k: 0, value: v });
        }
        return Ok(PoissonSum { value: v, last: 0, tail_mass: 0.0, boundary: v.abs() });
    }
    let last = truncation_window(m, tol.tail_mass);
    let mut acc = NeumaierSum::default();
    let mut boundary = 0.0;
    for k in 0..=last {
        let v = f(k);
        if !v.is_finite() {
            return Err(Error::Evaluation { k, value: v });
        }
        let p = ln_poisson(k, m).exp();
        if p > 0.0 {
            acc.add(p * v);
        }
        boundary = v.abs();
    }
    Ok(PoissonSum {
        value: acc.sum(),
        last,
        tail_mass: ln_chernoff_tail(m, last + 1).exp(),
        boundary,
    })
}
