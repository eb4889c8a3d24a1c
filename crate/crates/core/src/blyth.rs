//! Bayes-risk gap between a prior with reduction exponent `c ∈ [0, 1)` and its
//! truncation `π^{[l]} = π · h_l²/2`, with the analytic `1/ln l` bound.
//!
//! For each count `z` and exposure `t` the gap integrand reduces to
//! `t^c W₀/z! · μ̂ · φ(A/μ̂)` with `A = (z+1-c)/t`, `φ(u) = u - 1 - ln u` and
//! `W₀ = ∫ e^{-tμ}(tμ)^{z-c} g_l(μ) dμ`, so each term is nonnegative.
//! All moments are carried in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    integrate, integrate_with_breaks, lgamma, log_add_exp, log_lower_gamma, truncation_window, NeumaierSum,
    Tolerance,
};

/// Counts summed beyond `K(t·l)`.
const Z_MARGIN: u64 = 20;
/// Log-drop from the peak at which moment integrands are cut off.
const WINDOW_DROP: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlythConfig {
    l: f64,
    c: f64,
    a: f64,
    b: f64,
    tol: Tolerance,
}

impl BlythConfig {
    pub fn new(l: f64, c: f64, a: f64, b: f64, tol: Tolerance) -> Result<Self> {
        if !(l > 1.0) || !l.is_finite() {
            return Err(Error::domain(format!("truncation level l must be > 1, got {l}")));
        }
        if !(0.0..1.0).contains(&c) {
            return Err(Error::domain(format!("reduction exponent c must lie in [0, 1), got {c}")));
        }
        if !(a > 0.0) || !a.is_finite() || !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain(format!("exposures must be > 0, got a={a}, b={b}")));
        }
        Ok(BlythConfig { l, c, a, b, tol })
    }

    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }
}

/// 1 on `[0, 1]`, `1 - ln μ / ln l` on `(1, l]`, 0 beyond.
pub fn h_l(mu: f64, l: f64) -> f64 {
    if mu <= 1.0 {
        1.0
    } else if mu <= l {
        1.0 - mu.ln() / l.ln()
    } else {
        0.0
    }
}

/// Derivative of [`h_l`]: `-1/(μ ln l)` on `(1, l)`, 0 elsewhere.
pub fn h_l_prime(mu: f64, l: f64) -> f64 {
    if mu > 1.0 && mu < l {
        -1.0 / (mu * l.ln())
    } else {
        0.0
    }
}

/// `ln ∫₀^L exp(p·u - t·eᵘ) (1 - u/L)^k du` for `p > 0`.
///
/// The integrand is log-concave, so it is integrated over the window where it
/// lies within `WINDOW_DROP` of its peak, split at the peak.
fn log_window_integral(p: f64, t: f64, big_l: f64, k: f64, tol: &Tolerance) -> Result<f64> {
    let f = |u: f64| {
        let r = 1.0 - u / big_l;
        if r <= 0.0 {
            f64::NEG_INFINITY
        } else {
            p * u - t * u.exp() + k * r.ln()
        }
    };
    let slope = |u: f64| p - t * u.exp() - k / (big_l - u);

    let peak = if slope(0.0) <= 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, big_l);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let f_max = f(peak);
    let floor = f_max - WINDOW_DROP;

    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if f(mid) >= floor {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        outside
    };
    let lo = if f(0.0) >= floor { 0.0 } else { bisect(peak, 0.0) };
    let hi = bisect(peak, big_l);

    let mut points = vec![lo];
    if peak > lo && peak < hi {
        points.push(peak);
    }
    points.push(hi);
    let quad_tol = Tolerance { abs_tol: 1e-300, rel_tol: tol.rel_tol.min(1e-11), tail_mass: tol.tail_mass };
    let q = integrate_with_breaks(|u| (f(u) - f_max).exp(), &points, &quad_tol)?;
    Ok(q.value.ln() + f_max)
}

/// `ln ∫₀^∞ e^{-tμ}(tμ)^s g_l(μ) dμ` for `s > -1`.
fn log_moment(s: f64, t: f64, l: f64, tol: &Tolerance) -> Result<f64> {
    // on [0, 1] g_l = ½: ½ γ(s+1, t) / t
    let inner = log_lower_gamma(s + 1.0, t)? - t.ln() - std::f64::consts::LN_2;
    // on [1, l] with μ = eᵘ: e^{s ln t} ∫ exp((s+1)u - t eᵘ) ½(1 - u/ln l)² du
    let outer = s * t.ln() - std::f64::consts::LN_2 + log_window_integral(s + 1.0, t, l.ln(), 2.0, tol)?;
    Ok(log_add_exp(inner, outer))
}

/// `ln ∫₀^∞ e^{-tμ}(tμ)^{z+1-c} (-g_l′(μ)) dμ`, supported on `[1, l]`.
fn log_derivative_moment(z: u64, t: f64, cfg: &BlythConfig) -> Result<f64> {
    // -g′ = -h h′ = h/(μ ln l); dμ/μ = du
    let p = z as f64 + 1.0 - cfg.c;
    let big_l = cfg.l.ln();
    Ok(p * t.ln() - big_l.ln() + log_window_integral(p, t, big_l, 1.0, &cfg.tol)?)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be > 0, got {t}")));
    }
    Ok(())
}

/// `ln ∫₀^∞ e^{-tμ}(tμ)^{z-c+shift} g_l(μ) dμ`.
pub fn log_weighted_moment(z: u64, t: f64, power_shift: u32, cfg: &BlythConfig) -> Result<f64> {
    check_t(t)?;
    if power_shift > 1 {
        return Err(Error::domain(format!("power_shift must be 0 or 1, got {power_shift}")));
    }
    log_moment(z as f64 - cfg.c + power_shift as f64, t, cfg.l, &cfg.tol)
}

/// `∫₀^∞ e^{-tμ}(tμ)^{z-c+shift} g_l(μ) dμ`; may overflow for large `z`, see [`log_weighted_moment`].
pub fn weighted_moment(z: u64, t: f64, power_shift: u32, cfg: &BlythConfig) -> Result<f64> {
    log_weighted_moment(z, t, power_shift, cfg).map(f64::exp)
}

/// `(z+1-c)/t - μ̂`, from the derivative form of the truncated-prior estimate.
fn correction(z: u64, t: f64, log_w0: f64, cfg: &BlythConfig) -> Result<f64> {
    Ok((log_derivative_moment(z, t, cfg)? - 2.0 * t.ln() - log_w0).exp())
}

/// Truncated-prior estimate of `μ` given count `z` at exposure `t`:
/// `(z+1-c)/t + ∫ e^{-tμ}(tμ)^{z+1-c} g_l′ dμ / (t² ∫ e^{-tμ}(tμ)^{z-c} g_l dμ)`.
pub fn mu_hat(z: u64, t: f64, cfg: &BlythConfig) -> Result<f64> {
    check_t(t)?;
    let log_w0 = log_weighted_moment(z, t, 0, cfg)?;
    Ok((z as f64 + 1.0 - cfg.c) / t - correction(z, t, log_w0, cfg)?)
}

/// The same estimate as the posterior-mean ratio `W₁/(t W₀)`.
pub fn mu_hat_posterior_mean(z: u64, t: f64, cfg: &BlythConfig) -> Result<f64> {
    check_t(t)?;
    let log_w0 = log_weighted_moment(z, t, 0, cfg)?;
    let log_w1 = log_weighted_moment(z, t, 1, cfg)?;
    Ok((log_w1 - log_w0 - t.ln()).exp())
}

/// `δ - ln(1+δ)`, accurate for small `δ`.
fn phi_shifted(delta: f64) -> f64 {
    if delta.abs() < 0.05 {
        let mut term = -delta;
        let mut sum = 0.0;
        for n in 2..40 {
            term *= -delta;
            let next = sum + term / n as f64;
            if next == sum {
                break;
            }
            sum = next;
        }
        sum
    } else {
        delta - delta.ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub value: f64,
    /// 1 when a roundoff-negative final value was set to zero.
    pub clamped: u32,
    /// Largest count summed at any exposure.
    pub max_z: u64,
    /// Largest final summand over all exposures, a scale for the truncated tail.
    pub last_term: f64,
}

/// Inner gap integrand at exposure `t`, with the last count and last summand.
fn gap_integrand(t: f64, cfg: &BlythConfig) -> Result<(f64, u64, f64)> {
    let c = cfg.c;
    let last = truncation_window(t * cfg.l, cfg.tol.tail_mass) + Z_MARGIN;
    let mut acc = NeumaierSum::default();
    let mut log_w0 = log_moment(-c, t, cfg.l, &cfg.tol)?;
    let mut term = 0.0;
    for z in 0..=last {
        // W₁(z) is W₀(z+1)
        let log_w1 = log_moment(z as f64 + 1.0 - c, t, cfg.l, &cfg.tol)?;
        let mu = (log_w1 - log_w0 - t.ln()).exp();
        let corr = correction(z, t, log_w0, cfg)?;
        let phi = phi_shifted(corr / mu);
        term = if phi > 0.0 {
            (c * t.ln() + log_w0 - lgamma(z as f64 + 1.0) + mu.ln() + phi.ln()).exp()
        } else {
            0.0
        };
        acc.add(term);
        log_w0 = log_w1;
    }
    Ok((acc.sum(), last, term))
}

/// Integrated Bayes-risk difference between the prior and its truncation at `l`.
pub fn bayes_risk_gap(cfg: &BlythConfig) -> Result<f64> {
    bayes_risk_gap_report(cfg).map(|r| r.value)
}

/// [`bayes_risk_gap`] with truncation diagnostics.
pub fn bayes_risk_gap_report(cfg: &BlythConfig) -> Result<GapReport> {
    let mut failure = None;
    let mut max_z = 0;
    let mut last_term: f64 = 0.0;
    let value = integrate(
        |t| match gap_integrand(t, cfg) {
            Ok((v, z, term)) => {
                max_z = max_z.max(z);
                last_term = last_term.max(term);
                v
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        cfg.a,
        cfg.a + cfg.b,
        &cfg.tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let (value, clamped) = if (-1e-13..0.0).contains(&value) { (0.0, 1) } else { (value, 0) };
    Ok(GapReport { value, clamped, max_z, last_term })
}

/// `2/((1-c) ln l) · (1/a - 1/(a+b))`.
pub fn gap_upper_bound(cfg: &BlythConfig) -> f64 {
    2.0 / ((1.0 - cfg.c) * cfg.l.ln()) * (1.0 / cfg.a - 1.0 / (cfg.a + cfg.b))
}
