//! The prediction problem and the prior family
//! `π(λ) ∝ ∏ λᵢ^{βᵢ-1} / (Σλᵢ)^α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::lgamma;

/// Dimension `d` and exposures: `x ~ Poisson(aλ)`, `y ~ Poisson(bλ)` coordinatewise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    d: usize,
    a: f64,
    b: f64,
}

impl ModelConfig {
    pub fn new(d: usize, a: f64, b: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension d must be >= 1"));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("exposure a must be > 0, got {a}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain(format!("exposure b must be > 0, got {b}")));
        }
        Ok(ModelConfig { d, a, b })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
}

/// A vector of counts with its cached total.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Counts {
    values: Vec<u64>,
    total: u64,
}

impl Counts {
    pub fn new(values: Vec<u64>) -> Self {
        let total = values.iter().sum();
        Counts { values, total }
    }

    pub fn zeros(d: usize) -> Self {
        Counts { values: vec![0; d], total: 0 }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_len(&self, d: usize) -> Result<()> {
        if self.values.len() != d {
            return Err(Error::Dimension { expected: d, got: self.values.len() });
        }
        Ok(())
    }

    /// Coordinatewise sum; lengths must match.
    pub fn plus(&self, other: &Counts) -> Result<Counts> {
        other.check_len(self.len())?;
        Ok(Counts::new(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect()))
    }
}

impl From<Vec<u64>> for Counts {
    fn from(values: Vec<u64>) -> Self {
        Counts::new(values)
    }
}

/// Which named member of the family a prior is, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Jeffreys,
    Shrinkage,
    Custom,
}

/// A validated `(α, β)` prior with `-α + Σβ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorAlphaBeta {
    kind: PriorKind,
    alpha: f64,
    beta: Vec<f64>,
    beta_sum: f64,
    /// Reduction exponent `α - Σβ + 1`; the totals prior behaves as `μ^{-c}`.
    c: f64,
}

impl PriorAlphaBeta {
    pub fn kind(&self) -> PriorKind {
        self.kind
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
    pub fn beta_sum(&self) -> f64 {
        self.beta_sum
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> usize {
        self.beta.len()
    }

    /// `-α + Σβ`, the posterior shape offset for the total `μ`.
    pub fn excess(&self) -> f64 {
        self.beta_sum - self.alpha
    }

    /// Short identifier used in output metadata.
    pub fn label(&self) -> String {
        match self.kind {
            PriorKind::Jeffreys => "jeffreys".to_string(),
            PriorKind::Shrinkage => "shrinkage".to_string(),
            PriorKind::Custom => {
                let betas: Vec<String> = self.beta.iter().map(|b| b.to_string()).collect();
                format!("custom:{}:{}", self.alpha, betas.join(","))
            }
        }
    }

    fn with_kind(mut self, kind: PriorKind) -> Self {
        self.kind = kind;
        self
    }
}

pub fn make_prior(alpha: f64, beta: Vec<f64>) -> Result<PriorAlphaBeta> {
    if beta.is_empty() {
        return Err(Error::domain("beta must have at least one component"));
    }
    if !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be finite, got {alpha}")));
    }
    if let Some(b) = beta.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
        return Err(Error::domain(format!("every beta must be > 0, got {b}")));
    }
    let beta_sum: f64 = beta.iter().sum();
    let excess = beta_sum - alpha;
    if !(excess > 0.0) {
        return Err(Error::Propriety { excess });
    }
    Ok(PriorAlphaBeta { kind: PriorKind::Custom, alpha, beta, beta_sum, c: alpha - beta_sum + 1.0 })
}

/// `π_J ∝ ∏ λᵢ^{-1/2}`: α = 0, β = ½.
pub fn jeffreys(d: usize) -> Result<PriorAlphaBeta> {
    if d == 0 {
        return Err(Error::domain("dimension d must be >= 1"));
    }
    make_prior(0.0, vec![0.5; d]).map(|p| p.with_kind(PriorKind::Jeffreys))
}

/// `π_S`: α = d/2 - 1, β = ½, so that `c = 0`.
pub fn shrinkage_s(d: usize) -> Result<PriorAlphaBeta> {
    if d == 0 {
        return Err(Error::domain("dimension d must be >= 1"));
    }
    make_prior(d as f64 / 2.0 - 1.0, vec![0.5; d]).map(|p| p.with_kind(PriorKind::Shrinkage))
}

/// True iff `0 < -α + Σβ <= 1`, the band whose predictives are admissible.
pub fn in_admissible_class(prior: &PriorAlphaBeta) -> bool {
    let e = prior.excess();
    e > 0.0 && e <= 1.0
}

/// Log of `∫ π(λ) ∏ e^{-aλᵢ}(aλᵢ)^{xᵢ} dλ`
/// `= a^{α-Σβ} Γ(Σx - α + Σβ)/Γ(Σx + Σβ) ∏ Γ(xᵢ + βᵢ)`.
pub fn log_marginal(prior: &PriorAlphaBeta, a: f64, x: &Counts) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("exposure a must be > 0, got {a}")));
    }
    x.check_len(prior.d())?;
    let xt = x.total() as f64;
    let coords: f64 = x.values().iter().zip(prior.beta()).map(|(&xi, &bi)| lgamma(xi as f64 + bi)).sum();
    Ok(-prior.excess() * a.ln() + lgamma(xt + prior.excess()) - lgamma(xt + prior.beta_sum()) + coords)
}

/// True mean vector with its total `μ` and direction `w = λ/μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanVector {
    lambdas: Vec<f64>,
    mu: f64,
}

impl MeanVector {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::domain("mean vector must be non-empty"));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(Error::domain(format!("means must be finite and >= 0, got {l}")));
        }
        let mu = lambdas.iter().sum();
        Ok(MeanVector { lambdas, mu })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn d(&self) -> usize {
        self.lambdas.len()
    }

    /// `λᵢ/μ`, or `None` at the origin.
    pub fn weights(&self) -> Option<Vec<f64>> {
        (self.mu > 0.0).then(|| self.lambdas.iter().map(|l| l / self.mu).collect())
    }
}
