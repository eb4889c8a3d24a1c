//! Predictive distributions: the closed-form Bayes predictive under the
//! `(α, β)` family, its totals marginal, an exact sampler, and the plug-in
//! and mixed predictives built from the shrinkage estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Counts, ModelConfig, PriorAlphaBeta};
use crate::numerics::{
    ln_factorial, ln_poisson, log_gamma_diff, sample_poisson, standard_gamma, NeumaierSum,
    RngStream,
};

/// Most entries [`predictive_table`] will return.
pub const TABLE_LIMIT: usize = 10_000_000;

/// The predictive `p(y | x)` of a prior, model and observed counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictivePmfSpec {
    prior: PriorAlphaBeta,
    model: ModelConfig,
    x: Counts,
}

impl PredictivePmfSpec {
    pub fn new(prior: PriorAlphaBeta, model: ModelConfig, x: Counts) -> Result<Self> {
        if prior.d() != model.d() {
            return Err(Error::Dimension { expected: model.d(), got: prior.d() });
        }
        x.check_len(model.d())?;
        Ok(PredictivePmfSpec { prior, model, x })
    }

    pub fn prior(&self) -> &PriorAlphaBeta {
        &self.prior
    }
    pub fn model(&self) -> &ModelConfig {
        &self.model
    }
    pub fn x(&self) -> &Counts {
        &self.x
    }
}

/// `p(y | λ̂)` with a fixed estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlugInSpec {
    lambda_hat: Vec<f64>,
    b: f64,
}

impl PlugInSpec {
    pub fn new(lambda_hat: Vec<f64>, b: f64) -> Result<Self> {
        if lambda_hat.is_empty() {
            return Err(Error::domain("plug-in estimate must be non-empty"));
        }
        if let Some(l) = lambda_hat.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(Error::domain(format!("plug-in estimate must be finite and >= 0, got {l}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain(format!("exposure b must be > 0, got {b}")));
        }
        Ok(PlugInSpec { lambda_hat, b })
    }

    pub fn lambda_hat(&self) -> &[f64] {
        &self.lambda_hat
    }
    pub fn b(&self) -> f64 {
        self.b
    }

    /// A zero component gives infinite risk whenever the true mean is positive.
    pub fn has_zero_component(&self) -> bool {
        self.lambda_hat.contains(&0.0)
    }
}

fn check_exposures(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() || !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(format!("exposures must be > 0, got a={a}, b={b}")));
    }
    Ok(())
}

/// `(ln(a/(a+b)), ln(b/(a+b)))`
fn log_split(a: f64, b: f64) -> (f64, f64) {
    (-(b / a).ln_1p(), -(a / b).ln_1p())
}

/// Log pmf of the Bayes predictive:
///
/// `(a/(a+b))^{x̃+e} (b/(a+b))^{ỹ} Γ(x̃+ỹ+e)/Γ(x̃+e) · Γ(x̃+B)/Γ(x̃+ỹ+B) · ∏ Γ(xᵢ+yᵢ+βᵢ)/(Γ(xᵢ+βᵢ) yᵢ!)`
///
/// with `e = -α + Σβ`, `B = Σβ` and tildes denoting totals.
pub fn log_predictive_pmf(spec: &PredictivePmfSpec, y: &Counts) -> Result<f64> {
    y.check_len(spec.model.d())?;
    let (la, lb) = log_split(spec.model.a(), spec.model.b());
    let e = spec.prior.excess();
    let big_b = spec.prior.beta_sum();
    let xt = spec.x.total() as f64;
    let yt = y.total() as f64;
    let mut acc = NeumaierSum::default();
    acc.add((xt + e) * la);
    if y.total() > 0 {
        acc.add(yt * lb);
    }
    acc.add(log_gamma_diff(xt + e, yt));
    acc.add(-log_gamma_diff(xt + big_b, yt));
    for ((&xi, &yi), &bi) in spec.x.values().iter().zip(y.values()).zip(spec.prior.beta()) {
        if yi > 0 {
            acc.add(log_gamma_diff(xi as f64 + bi, yi as f64) - ln_factorial(yi));
        }
    }
    Ok(acc.sum())
}

/// Log pmf of the total `ỹ` given `x̃` for a prior with reduction exponent `c`:
/// `(a/(a+b))^{x̃+1-c} (b/(a+b))^{ỹ} Γ(x̃+ỹ-c+1)/(Γ(x̃-c+1) ỹ!)`.
pub fn log_total_predictive_pmf(c: f64, a: f64, b: f64, x_total: u64, y_total: u64) -> Result<f64> {
    if !(c < 1.0) {
        return Err(Error::domain(format!("reduction exponent must be < 1, got {c}")));
    }
    check_exposures(a, b)?;
    let (la, lb) = log_split(a, b);
    let shape = x_total as f64 + 1.0 - c;
    let yt = y_total as f64;
    let tail = if y_total > 0 { yt * lb } else { 0.0 };
    Ok(shape * la + tail + log_gamma_diff(shape, yt) - ln_factorial(y_total))
}

/// Visits `y` by ascending total, then lexicographically, until `visit` returns false.
fn for_each_composition<F: FnMut(&[u64]) -> bool>(d: usize, mut visit: F) {
    let mut y = vec![0u64; d];
    let mut total = 0u64;
    loop {
        if !visit(&y) {
            return;
        }
        // advance to the next composition of `total`, or the first of `total + 1`
        let mut carried = false;
        let mut right = y[d - 1];
        for i in (0..d.saturating_sub(1)).rev() {
            if right > 0 {
                y[i] += 1;
                for v in y[i + 1..].iter_mut() {
                    *v = 0;
                }
                y[d - 1] = right - 1;
                carried = true;
                break;
            }
            right += y[i];
        }
        if !carried {
            total += 1;
            y.iter_mut().for_each(|v| *v = 0);
            y[d - 1] = total;
        }
    }
}

/// Leading entries of the predictive whose summed mass reaches `coverage`.
///
/// Entries are ordered by total `ỹ = 0, 1, 2, …` and lexicographically within
/// a total; the list stops at the first entry that brings the mass to `coverage`.
pub fn predictive_table(spec: &PredictivePmfSpec, coverage: f64) -> Result<Vec<(Counts, f64)>> {
    if !(coverage > 0.0) || coverage > 1.0 - 1e-12 {
        return Err(Error::domain(format!("coverage must lie in (0, 1 - 1e-12], got {coverage}")));
    }
    let d = spec.model.d();

    // count first so the guard trips before anything large is allocated
    let mut mass = NeumaierSum::default();
    let mut len = 0usize;
    let mut failure = None;
    for_each_composition(d, |y| {
        match log_predictive_pmf(spec, &Counts::new(y.to_vec())) {
            Ok(lp) => mass.add(lp.exp()),
            Err(e) => {
                failure = Some(e);
                return false;
            }
        }
        len += 1;
        if len > TABLE_LIMIT {
            failure = Some(Error::SupportExplosion { limit: TABLE_LIMIT });
            return false;
        }
        mass.sum() < coverage
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let mut table = Vec::with_capacity(len);
    for_each_composition(d, |y| {
        let y = Counts::new(y.to_vec());
        let lp = log_predictive_pmf(spec, &y).expect("evaluated in the counting pass");
        table.push((y, lp.exp()));
        table.len() < len
    });
    Ok(table)
}

/// `n` independent draws from the predictive.
///
/// Draws the posterior total `μ ~ Gamma(x̃ + e, rate a)` and direction
/// `w ~ Dirichlet(x + β)`, then `yᵢ ~ Poisson(b μ wᵢ)`.
pub fn sample_predictive(spec: &PredictivePmfSpec, n: usize, rng: &mut RngStream) -> Result<Vec<Counts>> {
    let a = spec.model.a();
    let b = spec.model.b();
    let shape = spec.x.total() as f64 + spec.prior.excess();
    let dir: Vec<f64> = spec.x.values().iter().zip(spec.prior.beta()).map(|(&x, &bt)| x as f64 + bt).collect();
    let mut out = Vec::with_capacity(n);
    let mut w = vec![0.0; dir.len()];
    for _ in 0..n {
        let mu = standard_gamma(shape, rng) / a;
        let mut s = 0.0;
        for (wi, &p) in w.iter_mut().zip(&dir) {
            *wi = standard_gamma(p, rng);
            s += *wi;
        }
        let mut y = Vec::with_capacity(w.len());
        for wi in &w {
            y.push(sample_poisson(b * mu * wi / s, rng)?);
        }
        out.push(Counts::new(y));
    }
    Ok(out)
}

/// Generalized Bayes estimate under the shrinkage prior:
/// `λ̂ᵢ = (1/a)·(x̃+1)/(x̃+d/2)·(xᵢ+½)`.
pub fn gb_estimate(x: &Counts, a: f64, d: usize) -> Result<Vec<f64>> {
    x.check_len(d)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("exposure a must be > 0, got {a}")));
    }
    let xt = x.total() as f64;
    let factor = (xt + 1.0) / (xt + d as f64 / 2.0) / a;
    Ok(x.values().iter().map(|&xi| factor * (xi as f64 + 0.5)).collect())
}

/// `Σᵢ ln Pois(yᵢ; b λ̂ᵢ)`; `-inf` when some `λ̂ᵢ = 0 < yᵢ`.
pub fn log_plugin_pmf(plug: &PlugInSpec, y: &Counts) -> Result<f64> {
    y.check_len(plug.lambda_hat.len())?;
    Ok(plug.lambda_hat.iter().zip(y.values()).map(|(&l, &yi)| ln_poisson(yi, plug.b * l)).sum())
}

/// Shrinkage totals predictive split by the multinomial with
/// `ŵᵢ = (xᵢ+½)/(x̃+d/2)`.
pub fn log_mixed_pmf(x: &Counts, y: &Counts, model: &ModelConfig) -> Result<f64> {
    let d = model.d();
    x.check_len(d)?;
    y.check_len(d)?;
    let xt = x.total() as f64;
    let log_norm = (xt + d as f64 / 2.0).ln();
    let mut split = NeumaierSum::default();
    split.add(ln_factorial(y.total()));
    for (&xi, &yi) in x.values().iter().zip(y.values()) {
        if yi > 0 {
            split.add(yi as f64 * ((xi as f64 + 0.5).ln() - log_norm) - ln_factorial(yi));
        }
    }
    Ok(log_total_predictive_pmf(0.0, model.a(), model.b(), x.total(), y.total())? + split.sum())
}
