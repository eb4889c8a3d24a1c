//! Bayesian predictive distributions for independent Poisson observables.
//!
//! Observations `x ~ Poisson(aλ)` are used to predict `y ~ Poisson(bλ)` in `d`
//! coordinates. The crate provides the closed-form predictive distributions
//! under the `(α, β)` prior family (including the Jeffreys and shrinkage
//! priors), their Kullback–Leibler risks by exact one-dimensional integrals,
//! enumeration and Monte Carlo, and the Bayes-risk gap computation used to
//! verify admissibility of the predictives in the band `0 < -α + Σβ <= 1`.
//!
//! - [`numerics`]: special functions, Poisson sums, quadrature, sampling
//! - [`model`]: model configuration, counts and priors
//! - [`predictive`]: predictive pmfs, tables, samplers, plug-in rules
//! - [`risk`]: KL risks and risk differences
//! - [`blyth`]: truncated-prior Bayes-risk gap and its bound

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod blyth;
pub mod error;
pub mod model;
pub mod numerics;
pub mod predictive;
pub mod risk;

pub use error::{Error, Result};
pub use model::{
    in_admissible_class, jeffreys, log_marginal, make_prior, shrinkage_s, Counts, MeanVector,
    ModelConfig, PriorAlphaBeta, PriorKind,
};
pub use numerics::{RngStream, Tolerance};
