//! Kullback–Leibler risks of the predictive distributions.
//!
//! The totals risk of a prior with reduction exponent `c` is the integral over
//! `t ∈ [a, a+b]` of a Poisson expectation at rate `tμ`; risk differences between
//! equal-β priors reduce to the same totals quantity. Full `d`-dimensional risks
//! are available by Monte Carlo over `x` and by direct enumeration.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Counts, MeanVector, ModelConfig, PriorAlphaBeta};
use crate::numerics::{
    integrate, ln_poisson, log_gamma_diff, poisson_expectation, poisson_sum,
    sample_poisson, truncation_window, NeumaierSum, RngStream, Tolerance,
};
use crate::predictive::{log_predictive_pmf, PredictivePmfSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiskMethod {
    #[serde(rename = "exact-1d")]
    Exact1d,
    #[serde(rename = "brute-force")]
    BruteForce,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

impl RiskMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RiskMethod::Exact1d => "exact-1d",
            RiskMethod::BruteForce => "brute-force",
            RiskMethod::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: RiskMethod,
    pub n_samples: u64,
    /// Bound on the contribution of truncated Poisson tails.
    pub truncation_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl RiskEstimate {
    pub fn deterministic(value: f64, method: RiskMethod, truncation_bound: f64) -> Self {
        RiskEstimate { value, std_error: 0.0, method, n_samples: 0, truncation_bound, diagnostic: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub d: usize,
    pub a: f64,
    pub b: f64,
    pub priors: Vec<String>,
    pub method: RiskMethod,
    pub tolerance: Tolerance,
}

/// Risk values along an increasing grid of totals `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    mu_grid: Vec<f64>,
    values: Vec<f64>,
    metadata: CurveMetadata,
}

impl RiskCurve {
    pub fn new(mu_grid: Vec<f64>, values: Vec<f64>, metadata: CurveMetadata) -> Result<Self> {
        if mu_grid.len() != values.len() {
            return Err(Error::Dimension { expected: mu_grid.len(), got: values.len() });
        }
        if mu_grid.iter().any(|m| !(*m >= 0.0)) || mu_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("mu grid must be nonnegative and strictly increasing"));
        }
        Ok(RiskCurve { mu_grid, values, metadata })
    }

    pub fn mu_grid(&self) -> &[f64] {
        &self.mu_grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn metadata(&self) -> &CurveMetadata {
        &self.metadata
    }
}

/// `risk_difference(δ, a, b, μ)` over a grid.
pub fn risk_difference_curve(
    delta: f64,
    model: &ModelConfig,
    mu_grid: Vec<f64>,
    priors: Vec<String>,
    tol: &Tolerance,
) -> Result<RiskCurve> {
    let values = mu_grid
        .iter()
        .map(|&mu| risk_difference(delta, model.a(), model.b(), mu, tol))
        .collect::<Result<Vec<_>>>()?;
    let metadata =
        CurveMetadata { d: model.d(), a: model.a(), b: model.b(), priors, method: RiskMethod::Exact1d, tolerance: *tol };
    RiskCurve::new(mu_grid, values, metadata)
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() || !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(format!("exposures must be > 0, got a={a}, b={b}")));
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::domain(format!("mu must be finite and >= 0, got {mu}")));
    }
    Ok(())
}

fn check_c(c: f64) -> Result<()> {
    if !(c < 1.0) || !c.is_finite() {
        return Err(Error::domain(format!("reduction exponent must be < 1, got {c}")));
    }
    Ok(())
}

/// `b·(λ̂ - λ - λ ln(λ̂/λ))` for one coordinate, with `0·ln 0 = 0`.
fn kl_poisson(lambda: f64, lambda_hat: f64, b: f64) -> f64 {
    if lambda == 0.0 {
        return b * lambda_hat;
    }
    if lambda_hat == 0.0 {
        return f64::INFINITY;
    }
    b * (lambda_hat - lambda - lambda * (lambda_hat / lambda).ln())
}

/// KL divergence between independent Poisson vectors with means `bλ` and `bλ̂`.
pub fn kl_poisson_vec(lambda_true: &MeanVector, lambda_hat: &[f64], b: f64) -> Result<f64> {
    if lambda_hat.len() != lambda_true.d() {
        return Err(Error::Dimension { expected: lambda_true.d(), got: lambda_hat.len() });
    }
    if lambda_hat.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::domain("estimates must be >= 0"));
    }
    if !(b > 0.0) {
        return Err(Error::domain(format!("exposure b must be > 0, got {b}")));
    }
    Ok(lambda_true.lambdas().iter().zip(lambda_hat).map(|(&l, &lh)| kl_poisson(l, lh, b)).sum())
}

/// Integrand of the totals risk at exposure `t`:
/// `Σ_z Pois(z; tμ)·[(z+1-c)/t - μ - μ ln((z+1-c)/(tμ))]`.
pub fn eq21_integrand(c: f64, t: f64, mu: f64, tol: &Tolerance) -> Result<f64> {
    check_c(c)?;
    check_mu(mu)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be > 0, got {t}")));
    }
    if mu == 0.0 {
        return Ok((1.0 - c) / t);
    }
    let ln_tmu = (t * mu).ln();
    poisson_expectation(
        |z| {
            let s = z as f64 + 1.0 - c;
            s / t - mu - mu * (s.ln() - ln_tmu)
        },
        t * mu,
        tol,
    )
}

/// Risk of the totals predictive with reduction exponent `c` at total mean `μ`.
pub fn exact_total_risk(c: f64, a: f64, b: f64, mu: f64, tol: &Tolerance) -> Result<f64> {
    check_c(c)?;
    check_ab(a, b)?;
    check_mu(mu)?;
    if mu == 0.0 {
        return Ok((1.0 - c) * (b / a).ln_1p());
    }
    let mut failure = None;
    let v = integrate(
        |t| match eq21_integrand(c, t, mu, tol) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        a + b,
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `E[lnΓ(X+1+δ) - lnΓ(X+1)] - δ ln m` for `X ~ Poisson(m)`.
#[allow(non_snake_case)]
pub fn lemma2_L(m: f64, delta: f64, tol: &Tolerance) -> Result<f64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("lemma2_L needs m > 0, got {m}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain(format!("lemma2_L needs delta > 0, got {delta}")));
    }
    Ok(gamma_shift_expectation(m, delta, tol)? - delta * m.ln())
}

fn gamma_shift_expectation(m: f64, delta: f64, tol: &Tolerance) -> Result<f64> {
    poisson_expectation(|k| log_gamma_diff(k as f64 + 1.0, delta), m, tol)
}

/// Risk of the prior with `c = -δ` minus the risk of the `c = 0` prior.
///
/// Valid for `δ > -1`. `lemma2_L(aμ, δ) - lemma2_L((a+b)μ, δ)`; the `δ ln` terms are combined
/// before subtraction so small `μ` keeps full precision.
pub fn risk_difference(delta: f64, a: f64, b: f64, mu: f64, tol: &Tolerance) -> Result<f64> {
    if !(delta > -1.0) || !delta.is_finite() {
        return Err(Error::domain(format!("delta must be > -1, got {delta}")));
    }
    check_ab(a, b)?;
    check_mu(mu)?;
    let shift = delta * (b / a).ln_1p();
    if mu == 0.0 || delta == 0.0 {
        return Ok(shift);
    }
    let near = gamma_shift_expectation(a * mu, delta, tol)?;
    let far = gamma_shift_expectation((a + b) * mu, delta, tol)?;
    Ok(near - far + shift)
}

/// Risk of the plug-in totals predictive `Poisson(b μ̂)` with `μ̂ = (x̃+1)/a`.
pub fn plugin_total_risk(a: f64, b: f64, mu: f64, tol: &Tolerance) -> Result<f64> {
    check_ab(a, b)?;
    check_mu(mu)?;
    if mu == 0.0 {
        return Ok(b / a);
    }
    let ln_amu = (a * mu).ln();
    let e = poisson_expectation(
        |x| {
            let s = x as f64 + 1.0;
            s / a - mu - mu * (s.ln() - ln_amu)
        },
        a * mu,
        tol,
    )?;
    Ok(b * e)
}

/// Plug-in risk minus the shrinkage-prior totals risk.
pub fn theorem5_gap(a: f64, b: f64, mu: f64, tol: &Tolerance) -> Result<f64> {
    Ok(plugin_total_risk(a, b, mu, tol)? - exact_total_risk(0.0, a, b, mu, tol)?)
}

fn check_risk_inputs(prior: &PriorAlphaBeta, model: &ModelConfig, lambda: &MeanVector) -> Result<()> {
    if prior.d() != model.d() {
        return Err(Error::Dimension { expected: model.d(), got: prior.d() });
    }
    if lambda.d() != model.d() {
        return Err(Error::Dimension { expected: model.d(), got: lambda.d() });
    }
    Ok(())
}

/// Per-observation KL divergence `D(p(·|λ), p̂(·|x))`, less the `x`-free entropy term.
///
/// With `y` independent Poisson the `ln yᵢ!` terms cancel and the divergence
/// separates into an expectation over the total `ỹ ~ Poisson(bμ)` and one per
/// coordinate `yᵢ ~ Poisson(bλᵢ)`; both are cached per distinct count.
struct Divergence<'a> {
    prior: &'a PriorAlphaBeta,
    b: f64,
    log_a_share: f64,
    log_b_share: f64,
    lambdas: Vec<f64>,
    mu: f64,
    tol: Tolerance,
    totals: HashMap<u64, (f64, f64)>,
    coords: Vec<HashMap<u64, (f64, f64)>>,
}

impl<'a> Divergence<'a> {
    fn new(prior: &'a PriorAlphaBeta, model: &ModelConfig, lambda: &MeanVector, tol: &Tolerance) -> Self {
        let (a, b) = (model.a(), model.b());
        Divergence {
            prior,
            b,
            log_a_share: -(b / a).ln_1p(),
            log_b_share: -(a / b).ln_1p(),
            lambdas: lambda.lambdas().to_vec(),
            mu: lambda.mu(),
            tol: *tol,
            totals: HashMap::new(),
            coords: vec![HashMap::new(); model.d()],
        }
    }

    /// `Σᵢ b λᵢ (ln(b λᵢ) - 1)`, the `x`-free part `E[ln p(y|λ) + Σ ln yᵢ!]`.
    fn entropy_part(&self) -> f64 {
        self.lambdas.iter().filter(|l| **l > 0.0).map(|&l| self.b * l * ((self.b * l).ln() - 1.0)).sum()
    }

    /// `E[ln p̂(y|x) + Σ ln yᵢ!]` over `y ~ p(·|λ)`, with a truncation bound.
    fn cross_part(&mut self, x: &[u64]) -> Result<(f64, f64)> {
        let e = self.prior.excess();
        let big_b = self.prior.beta_sum();
        let xt: u64 = x.iter().sum();
        let xtf = xt as f64;
        let m = self.b * self.mu;
        let (total_term, mut bound) = match self.totals.get(&xt) {
            Some(v) => *v,
            None => {
                let s = poisson_sum(
                    |yt| log_gamma_diff(xtf + e, yt as f64) - log_gamma_diff(xtf + big_b, yt as f64),
                    m,
                    &self.tol,
                )?;
                let v = (s.value, s.tail_mass * s.boundary);
                self.totals.insert(xt, v);
                v
            }
        };
        let mut acc = NeumaierSum::default();
        acc.add((xtf + e) * self.log_a_share);
        acc.add(m * self.log_b_share);
        acc.add(total_term);
        for (i, &xi) in x.iter().enumerate() {
            let rate = self.b * self.lambdas[i];
            let bi = self.prior.beta()[i];
            let v = match self.coords[i].get(&xi) {
                Some(v) => *v,
                None => {
                    let s = poisson_sum(|yi| log_gamma_diff(xi as f64 + bi, yi as f64), rate, &self.tol)?;
                    let v = (s.value, s.tail_mass * s.boundary);
                    self.coords[i].insert(xi, v);
                    v
                }
            };
            acc.add(v.0);
            bound += v.1;
        }
        Ok((acc.sum(), bound))
    }
}

fn draw_x(lambdas: &[f64], a: f64, rng: &mut RngStream, x: &mut [u64]) -> Result<()> {
    for (xi, &l) in x.iter_mut().zip(lambdas) {
        *xi = sample_poisson(a * l, rng)?;
    }
    Ok(())
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mut sum = NeumaierSum::default();
    samples.iter().for_each(|v| sum.add(*v));
    let mean = sum.sum() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let mut ss = NeumaierSum::default();
    samples.iter().for_each(|v| ss.add((v - mean) * (v - mean)));
    let sd = (ss.sum() / (n - 1.0)).sqrt();
    (mean, sd / n.sqrt())
}

/// Monte Carlo estimate of the full `d`-dimensional KL risk at `λ`.
///
/// `x` is sampled `n` times; for each draw the `y`-expectation is evaluated
/// exactly up to a Poisson tail of `y_tail.tail_mass` per coordinate.
pub fn mc_full_risk(
    prior: &PriorAlphaBeta,
    model: &ModelConfig,
    lambda: &MeanVector,
    n: usize,
    rng: &mut RngStream,
    y_tail: &Tolerance,
) -> Result<RiskEstimate> {
    check_risk_inputs(prior, model, lambda)?;
    if n == 0 {
        return Err(Error::domain("Monte Carlo needs n >= 1"));
    }
    let mut div = Divergence::new(prior, model, lambda, y_tail);
    let entropy = div.entropy_part();
    let mut x = vec![0u64; model.d()];
    let mut samples = Vec::with_capacity(n);
    let mut bound: f64 = 0.0;
    for _ in 0..n {
        draw_x(lambda.lambdas(), model.a(), rng, &mut x)?;
        let (cross, tb) = div.cross_part(&x)?;
        bound = bound.max(tb);
        samples.push(entropy - cross);
    }
    let (value, std_error) = mean_and_se(&samples);
    let diagnostic = (!value.is_finite()).then(|| "predictive assigned zero mass to a reachable outcome".to_string());
    Ok(RiskEstimate {
        value: if value.is_nan() { f64::INFINITY } else { value },
        std_error,
        method: RiskMethod::MonteCarlo,
        n_samples: n as u64,
        truncation_bound: bound,
        diagnostic,
    })
}

/// Monte Carlo estimate of `risk(first) - risk(second)` on common `x` draws.
pub fn mc_paired_risk_difference(
    first: &PriorAlphaBeta,
    second: &PriorAlphaBeta,
    model: &ModelConfig,
    lambda: &MeanVector,
    n: usize,
    rng: &mut RngStream,
    y_tail: &Tolerance,
) -> Result<RiskEstimate> {
    check_risk_inputs(first, model, lambda)?;
    check_risk_inputs(second, model, lambda)?;
    if n == 0 {
        return Err(Error::domain("Monte Carlo needs n >= 1"));
    }
    let mut div1 = Divergence::new(first, model, lambda, y_tail);
    let mut div2 = Divergence::new(second, model, lambda, y_tail);
    let mut x = vec![0u64; model.d()];
    let mut samples = Vec::with_capacity(n);
    let mut bound: f64 = 0.0;
    for _ in 0..n {
        draw_x(lambda.lambdas(), model.a(), rng, &mut x)?;
        let (c1, b1) = div1.cross_part(&x)?;
        let (c2, b2) = div2.cross_part(&x)?;
        bound = bound.max(b1 + b2);
        samples.push(c2 - c1);
    }
    let (value, std_error) = mean_and_se(&samples);
    Ok(RiskEstimate {
        value,
        std_error,
        method: RiskMethod::MonteCarlo,
        n_samples: n as u64,
        truncation_bound: bound,
        diagnostic: None,
    })
}

/// Largest exposure-times-mean allowed by [`brute_full_risk`].
pub const BRUTE_MAX_RATE: f64 = 30.0;
/// Largest dimension allowed by [`brute_full_risk`].
pub const BRUTE_MAX_D: usize = 3;
/// Largest number of `(x, y)` cell pairs [`brute_full_risk`] will visit.
pub const BRUTE_MAX_PAIRS: u128 = 2_000_000_000;

/// `[lo, hi]` holding all but at most `eps` of the Poisson(m) mass on each side.
fn central_window(m: f64, eps: f64) -> (u64, Vec<f64>) {
    if m == 0.0 {
        return (0, vec![0.0]);
    }
    let last = truncation_window(m, eps);
    let logs: Vec<f64> = (0..=last).map(|k| ln_poisson(k, m)).collect();
    let mut lo = 0usize;
    let mut left = 0.0;
    while lo + 1 < logs.len() && left + logs[lo].exp() <= eps {
        left += logs[lo].exp();
        lo += 1;
    }
    let mut hi = logs.len() - 1;
    let mut right = 0.0;
    while hi > lo && right + logs[hi].exp() <= eps {
        right += logs[hi].exp();
        hi -= 1;
    }
    (lo as u64, logs[lo..=hi].to_vec())
}

/// All vectors of the product window, paired with their joint log pmf.
fn product_cells(windows: &[(u64, Vec<f64>)]) -> Vec<(Vec<u64>, f64)> {
    let mut cells = vec![(Vec::new(), 0.0)];
    for (lo, logs) in windows {
        let mut next = Vec::with_capacity(cells.len() * logs.len());
        for (v, lp) in &cells {
            for (j, l) in logs.iter().enumerate() {
                let mut w = v.clone();
                w.push(lo + j as u64);
                next.push((w, lp + l));
            }
        }
        cells = next;
    }
    cells
}

/// Full KL risk by enumerating both `x` and `y` over central Poisson windows.
///
/// Each coordinate window drops at most `tail_mass/(4d)` on each side, so the
/// discarded joint mass is at most `tol.tail_mass`.
pub fn brute_full_risk(
    prior: &PriorAlphaBeta,
    model: &ModelConfig,
    lambda: &MeanVector,
    tol: &Tolerance,
) -> Result<f64> {
    check_risk_inputs(prior, model, lambda)?;
    let d = model.d();
    let (a, b) = (model.a(), model.b());
    if d > BRUTE_MAX_D {
        return Err(Error::Guard(format!("brute force needs d <= {BRUTE_MAX_D}, got {d}")));
    }
    if a * lambda.mu() > BRUTE_MAX_RATE || b * lambda.mu() > BRUTE_MAX_RATE {
        return Err(Error::Guard(format!(
            "brute force needs aμ, bμ <= {BRUTE_MAX_RATE}, got aμ = {}, bμ = {}",
            a * lambda.mu(),
            b * lambda.mu()
        )));
    }
    let eps = tol.tail_mass / (4.0 * d as f64);
    let xw: Vec<_> = lambda.lambdas().iter().map(|&l| central_window(a * l, eps)).collect();
    let yw: Vec<_> = lambda.lambdas().iter().map(|&l| central_window(b * l, eps)).collect();
    let nx: u128 = xw.iter().map(|w| w.1.len() as u128).product();
    let ny: u128 = yw.iter().map(|w| w.1.len() as u128).product();
    if nx * ny > BRUTE_MAX_PAIRS {
        return Err(Error::Guard(format!(
            "brute force would visit {} (x, y) pairs, limit {BRUTE_MAX_PAIRS}",
            nx * ny
        )));
    }
    let xs = product_cells(&xw);
    let ys: Vec<(Counts, f64)> = product_cells(&yw).into_iter().map(|(v, lp)| (Counts::new(v), lp)).collect();

    let mut total = NeumaierSum::default();
    for (x, lpx) in xs {
        let spec = PredictivePmfSpec::new(prior.clone(), *model, Counts::new(x))?;
        let mut inner = NeumaierSum::default();
        for (y, lpy) in &ys {
            let lq = log_predictive_pmf(&spec, y)?;
            inner.add(lpy.exp() * (lpy - lq));
        }
        total.add(lpx.exp() * inner.sum());
    }
    Ok(total.sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{jeffreys, make_prior, shrinkage_s};
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn kl_examples() {
        let l = MeanVector::new(vec![1.0, 2.5]).unwrap();
        assert_eq!(kl_poisson_vec(&l, &[1.0, 2.5], 3.0).unwrap(), 0.0);
        let l = MeanVector::new(vec![1.0]).unwrap();
        assert!((kl_poisson_vec(&l, &[2.0], 1.0).unwrap() - (1.0 - LN_2)).abs() < 1e-15);
        assert_eq!(kl_poisson_vec(&l, &[0.0], 1.0).unwrap(), f64::INFINITY);
        assert!(kl_poisson_vec(&l, &[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn exact_risk_at_origin() {
        assert!((exact_total_risk(0.0, 1.0, 1.0, 0.0, &tol()).unwrap() - LN_2).abs() < 1e-15);
        assert!((exact_total_risk(-0.5, 1.0, 1.0, 0.0, &tol()).unwrap() - 1.039_720_770_8).abs() < 1e-10);
        // the quadrature route agrees with the closed form as μ → 0
        let v = exact_total_risk(0.0, 1.0, 1.0, 1e-9, &tol()).unwrap();
        assert!((v - LN_2).abs() < 1e-7);
        assert!(exact_total_risk(1.0, 1.0, 1.0, 0.0, &tol()).is_err());
    }

    #[test]
    fn shift_function_examples() {
        let t = tol();
        let v = lemma2_L(1.0, 1.0, &t).unwrap();
        // E[ln(X+1)] for X ~ Poisson(1), summed directly
        let mut direct = 0.0;
        let mut p = (-1.0f64).exp();
        for k in 0..=60u32 {
            if k > 0 {
                p /= k as f64;
            }
            direct += p * (k as f64 + 1.0).ln();
        }
        assert!((v - direct).abs() < 1e-13);
        assert!((v - 0.5734).abs() < 1e-4);
        assert!(lemma2_L(1.0, 1.0, &t).unwrap() > lemma2_L(2.0, 1.0, &t).unwrap());
        assert!(lemma2_L(1e4, 0.5, &t).unwrap().abs() <= 0.01);
        assert!(lemma2_L(0.0, 1.0, &t).is_err());
        assert!(lemma2_L(1.0, 0.0, &t).is_err());
    }

    #[test]
    fn shift_function_decreasing_on_log_grid() {
        let t = tol();
        for delta in [0.5, 1.0, 2.5, 5.0] {
            let vals: Vec<f64> =
                (0..60).map(|i| lemma2_L(10f64.powf(-3.0 + 6.0 * i as f64 / 59.0), delta, &t).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "delta={delta}");
        }
    }

    #[test]
    fn risk_difference_examples() {
        let t = tol();
        assert!((risk_difference(0.5, 1.0, 1.0, 0.0, &t).unwrap() - 0.346_573_590_3).abs() < 1e-10);
        assert!((risk_difference(5.0, 1.0, 1.0, 0.0, &t).unwrap() - 5.0 * LN_2).abs() < 1e-14);
        let rd = risk_difference(0.5, 1.0, 1.0, 2.0, &t).unwrap();
        let route = exact_total_risk(-0.5, 1.0, 1.0, 2.0, &t).unwrap() - exact_total_risk(0.0, 1.0, 1.0, 2.0, &t).unwrap();
        assert!((rd - route).abs() < 1e-8, "{rd} vs {route}");
        let via_l = lemma2_L(2.0, 0.5, &t).unwrap() - lemma2_L(4.0, 0.5, &t).unwrap();
        assert!((rd - via_l).abs() < 1e-12);
        // negative shift: a prior with 0 < c < 1
        let rd = risk_difference(-0.5, 1.0, 2.0, 1.5, &t).unwrap();
        let route = exact_total_risk(0.5, 1.0, 2.0, 1.5, &t).unwrap() - exact_total_risk(0.0, 1.0, 2.0, 1.5, &t).unwrap();
        assert!((rd - route).abs() < 1e-8, "{rd} vs {route}");
        assert!(risk_difference(-1.0, 1.0, 1.0, 1.0, &t).is_err());
    }

    #[test]
    fn domination_on_grids() {
        let t = tol();
        for (a, b) in [(1.0, 1.0), (1.0, 5.0), (5.0, 1.0)] {
            for delta in [0.5, 1.5, 5.0] {
                for i in 0..=25 {
                    let mu = 2.0 * i as f64;
                    assert!(risk_difference(delta, a, b, mu, &t).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn plugin_risk_exceeds_shrinkage_risk() {
        let t = tol();
        assert_eq!(plugin_total_risk(1.0, 1.0, 0.0, &t).unwrap(), 1.0);
        assert_eq!(plugin_total_risk(2.0, 1.0, 0.0, &t).unwrap(), 0.5);
        assert!((theorem5_gap(1.0, 1.0, 0.0, &t).unwrap() - (1.0 - LN_2)).abs() < 1e-15);
        for i in 0..=40 {
            let mu = 0.5 * i as f64;
            assert!(theorem5_gap(1.0, 1.0, mu, &t).unwrap() > 0.0, "mu={mu}");
        }
        for mu in [0.0, 0.7, 3.0] {
            let lhs = eq21_integrand(0.0, 1.0, mu, &t).unwrap();
            let rhs = plugin_total_risk(1.0, 1.0, mu, &t).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn plugin_risk_matches_monte_carlo() {
        let t = tol();
        let mut rng = RngStream::new(17, 0);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let x = sample_poisson(1.0, &mut rng).unwrap();
                kl_poisson(1.0, x as f64 + 1.0, 1.0)
            })
            .collect();
        let (m, se) = mean_and_se(&samples);
        let exact = plugin_total_risk(1.0, 1.0, 1.0, &t).unwrap();
        assert!((m - exact).abs() < 4.0 * se, "{m} ± {se} vs {exact}");
    }

    #[test]
    fn integrand_decreasing_in_t() {
        let t = tol();
        for mu in [0.1, 1.0, 10.0] {
            for i in 0..10 {
                let tt = 1.0 + 0.1 * i as f64;
                let h = 1e-4;
                let slope = (eq21_integrand(0.0, tt + h, mu, &t).unwrap() - eq21_integrand(0.0, tt - h, mu, &t).unwrap()) / (2.0 * h);
                assert!(slope < 0.0, "mu={mu} t={tt}");
            }
        }
    }

    #[test]
    fn mc_at_origin_is_degenerate() {
        let p = shrinkage_s(3).unwrap();
        let m = ModelConfig::new(3, 1.0, 1.0).unwrap();
        let l = MeanVector::new(vec![0.0; 3]).unwrap();
        let r = mc_full_risk(&p, &m, &l, 100, &mut RngStream::new(1, 0), &tol()).unwrap();
        assert!((r.value - LN_2).abs() < 1e-15);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.method, RiskMethod::MonteCarlo);
        let again = mc_full_risk(&p, &m, &l, 100, &mut RngStream::new(1, 0), &tol()).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn mc_matches_exact_in_one_dimension() {
        let p = make_prior(0.0, vec![1.0]).unwrap();
        let m = ModelConfig::new(1, 1.0, 1.0).unwrap();
        let l = MeanVector::new(vec![1.0]).unwrap();
        let r = mc_full_risk(&p, &m, &l, 100_000, &mut RngStream::new(7, 0), &tol()).unwrap();
        let exact = exact_total_risk(0.0, 1.0, 1.0, 1.0, &tol()).unwrap();
        assert!((r.value - exact).abs() < 4.0 * r.std_error, "{} ± {} vs {exact}", r.value, r.std_error);
    }

    #[test]
    fn mc_is_deterministic() {
        let p = jeffreys(2).unwrap();
        let m = ModelConfig::new(2, 1.0, 2.0).unwrap();
        let l = MeanVector::new(vec![0.5, 1.5]).unwrap();
        let r1 = mc_full_risk(&p, &m, &l, 500, &mut RngStream::new(99, 4), &tol()).unwrap();
        let r2 = mc_full_risk(&p, &m, &l, 500, &mut RngStream::new(99, 4), &tol()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn paired_difference_depends_only_on_total() {
        let j = jeffreys(3).unwrap();
        let s = shrinkage_s(3).unwrap();
        let m = ModelConfig::new(3, 1.0, 1.0).unwrap();
        let want = risk_difference(0.5, 1.0, 1.0, 3.0, &tol()).unwrap();
        for (k, lam) in [vec![3.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![0.3, 0.3, 2.4]].into_iter().enumerate() {
            let l = MeanVector::new(lam).unwrap();
            let r = mc_paired_risk_difference(&j, &s, &m, &l, 20_000, &mut RngStream::new(5, k as u64), &tol()).unwrap();
            assert!((r.value - want).abs() < 4.0 * r.std_error.max(1e-12), "{} ± {} vs {want}", r.value, r.std_error);
        }
    }

    #[test]
    fn brute_examples() {
        let t = tol();
        let s3 = shrinkage_s(3).unwrap();
        let m3 = ModelConfig::new(3, 1.0, 1.0).unwrap();
        let v = brute_full_risk(&s3, &m3, &MeanVector::new(vec![0.0; 3]).unwrap(), &t).unwrap();
        assert!((v - LN_2).abs() < 1e-15);

        let p = make_prior(0.0, vec![1.0]).unwrap();
        let m1 = ModelConfig::new(1, 1.0, 1.0).unwrap();
        let v = brute_full_risk(&p, &m1, &MeanVector::new(vec![1.0]).unwrap(), &t).unwrap();
        let exact = exact_total_risk(0.0, 1.0, 1.0, 1.0, &t).unwrap();
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");

        let m2 = ModelConfig::new(2, 1.0, 1.0).unwrap();
        let l = MeanVector::new(vec![0.5, 0.5]).unwrap();
        let diff = brute_full_risk(&jeffreys(2).unwrap(), &m2, &l, &t).unwrap()
            - brute_full_risk(&shrinkage_s(2).unwrap(), &m2, &l, &t).unwrap();
        assert!(diff.abs() < 1e-8);
    }

    #[test]
    fn brute_difference_matches_totals_route_in_two_dimensions() {
        // α = -1 versus α = 0 with β = (½, ½): δ = 1
        let t = tol();
        let m2 = ModelConfig::new(2, 1.0, 1.0).unwrap();
        let l = MeanVector::new(vec![0.4, 1.1]).unwrap();
        let p1 = make_prior(-1.0, vec![0.5, 0.5]).unwrap();
        let p0 = make_prior(0.0, vec![0.5, 0.5]).unwrap();
        let diff = brute_full_risk(&p1, &m2, &l, &t).unwrap() - brute_full_risk(&p0, &m2, &l, &t).unwrap();
        let want = risk_difference(1.0, 1.0, 1.0, 1.5, &t).unwrap();
        assert!((diff - want).abs() < 1e-8, "{diff} vs {want}");
    }

    #[test]
    fn mc_brackets_brute_in_two_dimensions() {
        let t = tol();
        let p = jeffreys(2).unwrap();
        let m = ModelConfig::new(2, 1.0, 2.0).unwrap();
        let l = MeanVector::new(vec![0.7, 0.2]).unwrap();
        let brute = brute_full_risk(&p, &m, &l, &t).unwrap();
        let r = mc_full_risk(&p, &m, &l, 50_000, &mut RngStream::new(3, 0), &t).unwrap();
        assert!((r.value - brute).abs() < 4.0 * r.std_error, "{} ± {} vs {brute}", r.value, r.std_error);
        // the composition part makes the full risk exceed the totals risk
        assert!(brute > exact_total_risk(p.c(), 1.0, 2.0, 0.9, &t).unwrap());
    }

    #[test]
    fn brute_guards() {
        let t = tol();
        let p = shrinkage_s(4).unwrap();
        let m = ModelConfig::new(4, 1.0, 1.0).unwrap();
        assert!(matches!(brute_full_risk(&p, &m, &MeanVector::new(vec![0.1; 4]).unwrap(), &t), Err(Error::Guard(_))));
        let p = shrinkage_s(1).unwrap();
        let m = ModelConfig::new(1, 1.0, 1.0).unwrap();
        assert!(matches!(brute_full_risk(&p, &m, &MeanVector::new(vec![31.0]).unwrap(), &t), Err(Error::Guard(_))));
    }

    #[test]
    fn curve_validation() {
        let m = ModelConfig::new(3, 1.0, 1.0).unwrap();
        let c = risk_difference_curve(0.5, &m, vec![0.0, 1.0, 2.0], vec!["jeffreys".into(), "shrinkage".into()], &tol()).unwrap();
        assert_eq!(c.values().len(), 3);
        assert!(RiskCurve::new(vec![1.0, 1.0], vec![0.0, 0.0], c.metadata().clone()).is_err());
        assert!(RiskCurve::new(vec![1.0], vec![0.0, 0.0], c.metadata().clone()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn routes_agree(delta in 0.05f64..6.0, a in 0.5f64..5.0, b in 0.5f64..5.0, mu in 0.0f64..20.0) {
            let t = tol();
            let rd = risk_difference(delta, a, b, mu, &t).unwrap();
            let route = exact_total_risk(-delta, a, b, mu, &t).unwrap() - exact_total_risk(0.0, a, b, mu, &t).unwrap();
            prop_assert!((rd - route).abs() <= 1e-8, "{} vs {}", rd, route);
            prop_assert!(rd > 0.0);
        }

        #[test]
        fn exact_risk_is_nonnegative(c in -4.0f64..0.99, a in 0.2f64..5.0, b in 0.2f64..5.0, mu in 0.0f64..30.0) {
            prop_assert!(exact_total_risk(c, a, b, mu, &tol()).unwrap() >= 0.0);
        }
    }
}
