//! Library results against brute numerical integration.

use poispred_core::blyth::{bayes_risk_gap, BlythConfig};
use poispred_core::numerics::{integrate, integrate_with_breaks, ln_factorial};
use poispred_core::predictive::{log_predictive_pmf, predictive_table, sample_predictive, PredictivePmfSpec};
use poispred_core::{make_prior, shrinkage_s, Counts, ModelConfig, PriorAlphaBeta, RngStream, Tolerance};
use proptest::prelude::*;
use std::collections::HashMap;

fn quad_tol() -> Tolerance {
    Tolerance::new(1e-300, 1e-11, 1e-14).unwrap()
}

/// `∫ ∏ (sλᵢ)^{zᵢ} e^{-sλᵢ} π(λ) dλ` in log coordinates `λᵢ = e^{uᵢ}`.
fn marginal(prior: &PriorAlphaBeta, s: f64, z: &[u64]) -> f64 {
    let beta = prior.beta();
    let alpha = prior.alpha();
    let tol = quad_tol();
    // lower cut where the slowest decaying power has dropped by e^-45
    let slowest = beta.iter().zip(z).map(|(b, &zi)| b + zi as f64).fold(prior.excess() + z.iter().sum::<u64>() as f64, f64::min);
    let lo = (-45.0 / slowest).max(-700.0);
    let hi = (80.0 / s).ln();
    match z.len() {
        1 => {
            let f = |u: f64| {
                let l = u.exp();
                (u * (beta[0] - alpha) + z[0] as f64 * (s * l).ln() - s * l).exp()
            };
            integrate(f, lo, hi, &tol).unwrap()
        }
        2 => {
            let outer = |u1: f64| {
                let l1 = u1.exp();
                let inner = |u2: f64| {
                    let l2 = u2.exp();
                    let lp = beta[0] * u1 + beta[1] * u2 - alpha * (l1 + l2).ln() - s * (l1 + l2)
                        + z[0] as f64 * (s * l1).ln()
                        + z[1] as f64 * (s * l2).ln();
                    lp.exp()
                };
                integrate(inner, lo, hi, &tol).unwrap()
            };
            integrate(outer, lo, hi, &tol).unwrap()
        }
        _ => unreachable!(),
    }
}

/// Predictive pmf as a ratio of marginals.
fn oracle_pmf(prior: &PriorAlphaBeta, a: f64, b: f64, x: &[u64], y: &[u64]) -> f64 {
    let xy: Vec<u64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
    let mut log_factor = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        log_factor += xi as f64 * a.ln() + yi as f64 * b.ln() - (xi + yi) as f64 * (a + b).ln() - ln_factorial(yi);
    }
    marginal(prior, a + b, &xy) / marginal(prior, a, x) * log_factor.exp()
}

fn small_counts(d: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..=2, d).prop_filter("total <= 4", |v| v.iter().sum::<u64>() <= 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closed_form_matches_marginal_ratio_d1(
        alpha in -1.0f64..0.5, beta in 0.4f64..2.0, a in 0.5f64..3.0, b in 0.5f64..3.0,
        x in small_counts(1), y in small_counts(1),
    ) {
        prop_assume!(beta - alpha >= 0.3);
        let prior = make_prior(alpha, vec![beta]).unwrap();
        let spec = PredictivePmfSpec::new(prior.clone(), ModelConfig::new(1, a, b).unwrap(), Counts::new(x.clone())).unwrap();
        let got = log_predictive_pmf(&spec, &Counts::new(y.clone())).unwrap().exp();
        let want = oracle_pmf(&prior, a, b, &x, &y);
        prop_assert!((got / want - 1.0).abs() < 1e-6, "{} vs {}", got, want);
    }

    #[test]
    fn closed_form_matches_marginal_ratio_d2(
        alpha in -1.0f64..1.0, b1 in 0.4f64..1.5, b2 in 0.4f64..1.5, a in 0.5f64..3.0, b in 0.5f64..3.0,
        x in small_counts(2), y in small_counts(2),
    ) {
        prop_assume!(b1 + b2 - alpha >= 0.3);
        let prior = make_prior(alpha, vec![b1, b2]).unwrap();
        let spec = PredictivePmfSpec::new(prior.clone(), ModelConfig::new(2, a, b).unwrap(), Counts::new(x.clone())).unwrap();
        let got = log_predictive_pmf(&spec, &Counts::new(y.clone())).unwrap().exp();
        let want = oracle_pmf(&prior, a, b, &x, &y);
        prop_assert!((got / want - 1.0).abs() < 1e-6, "{} vs {}", got, want);
    }
}

/// Truncated-prior Bayes risk gap straight from its defining double integral,
/// with the posterior mean taken by quadrature. `μ = s²` removes the `μ^{-c}`
/// singularity for `c ∈ {0, ½}`.
fn gap_by_quadrature(l: f64, c: f64, a: f64, b: f64) -> f64 {
    let tol = Tolerance::new(1e-300, 1e-10, 1e-14).unwrap();
    let g = |mu: f64| {
        let h = if mu <= 1.0 { 1.0 } else if mu <= l { 1.0 - mu.ln() / l.ln() } else { 0.0 };
        0.5 * h * h
    };
    // ∫ g(μ) μ^{k-c} e^{-tμ} / z! dμ, scaled by t^z
    let moment = |z: u64, k: i32, t: f64| {
        let f = |s: f64| {
            let mu = s * s;
            if mu == 0.0 {
                return if z == 0 && k == 0 && c == 0.5 { 2.0 * g(0.0) } else { 0.0 };
            }
            let lp = (z as f64 + k as f64 - c) * mu.ln() + z as f64 * t.ln() - t * mu - ln_factorial(z);
            2.0 * s * g(mu) * lp.exp()
        };
        integrate_with_breaks(f, &[0.0, 1.0, l.sqrt()], &tol).unwrap().value
    };
    let inner = |t: f64| {
        let last = (t * l + 12.0 * (t * l).sqrt() + 40.0) as u64;
        let mut total = 0.0;
        for z in 0..=last {
            let m0 = moment(z, 0, t);
            let m1 = moment(z, 1, t);
            if m0 == 0.0 {
                continue;
            }
            let mu_hat = m1 / m0;
            let s = z as f64 + 1.0 - c;
            total += (s / t) * m0 - m1 - (s / (t * mu_hat)).ln() * m1;
        }
        total
    };
    integrate(inner, a, a + b, &Tolerance::new(1e-300, 1e-9, 1e-14).unwrap()).unwrap()
}

#[test]
fn blyth_gap_matches_double_integral() {
    for c in [0.0, 0.5] {
        let cfg = BlythConfig::new(10.0, c, 1.0, 1.0, Tolerance::default()).unwrap();
        let got = bayes_risk_gap(&cfg).unwrap();
        let want = gap_by_quadrature(10.0, c, 1.0, 1.0);
        assert!((got / want - 1.0).abs() < 1e-6, "c={c}: {got} vs {want}");
    }
}

fn total_variation(samples: &[Counts], table: &[(Counts, f64)]) -> f64 {
    let n = samples.len() as f64;
    let mut freq: HashMap<&Counts, f64> = HashMap::new();
    for s in samples {
        *freq.entry(s).or_default() += 1.0 / n;
    }
    let mut tv = 0.0;
    let mut matched = 0.0;
    for (y, p) in table {
        let e = freq.get(y).copied().unwrap_or(0.0);
        matched += e;
        tv += (e - p).abs();
    }
    0.5 * (tv + (1.0 - matched))
}

/// Inverse-cdf draws from the table itself: the TV reference level caused by sampling noise alone.
fn table_draws(table: &[(Counts, f64)], n: usize, rng: &mut RngStream) -> Vec<Counts> {
    let mut cdf = Vec::with_capacity(table.len());
    let mut acc = 0.0;
    for (_, p) in table {
        acc += p;
        cdf.push(acc);
    }
    (0..n)
        .map(|_| {
            let u = rng.uniform() * acc;
            let i = cdf.partition_point(|&c| c < u).min(table.len() - 1);
            table[i].0.clone()
        })
        .collect()
}

#[test]
fn sampler_tv_is_at_the_sampling_noise_level() {
    let spec = PredictivePmfSpec::new(shrinkage_s(3).unwrap(), ModelConfig::new(3, 1.0, 1.0).unwrap(), Counts::new(vec![2, 0, 1]))
        .unwrap();
    let table = predictive_table(&spec, 0.9999).unwrap();
    let n = 100_000;
    let mut tv_sampler = 0.0;
    let mut tv_reference = 0.0;
    for rep in 0..4 {
        let s = sample_predictive(&spec, n, &mut RngStream::new(11, rep)).unwrap();
        tv_sampler += total_variation(&s, &table) / 4.0;
        let r = table_draws(&table, n, &mut RngStream::new(12, rep));
        tv_reference += total_variation(&r, &table) / 4.0;
    }
    assert!((tv_sampler - tv_reference).abs() < 0.1 * tv_reference, "{tv_sampler} vs {tv_reference}");
}

#[test]
fn sampler_totals_follow_the_total_pmf() {
    let spec = PredictivePmfSpec::new(shrinkage_s(3).unwrap(), ModelConfig::new(3, 1.0, 1.0).unwrap(), Counts::new(vec![2, 0, 1]))
        .unwrap();
    let draws = sample_predictive(&spec, 200_000, &mut RngStream::new(3, 0)).unwrap();
    let n = draws.len() as f64;
    let mean = draws.iter().map(|y| y.total() as f64).sum::<f64>() / n;
    let var = draws.iter().map(|y| (y.total() as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // shape x̃ + e = 3 + 1 = 4, odds b/a = 1: mean 4, variance 8
    assert!((mean - 4.0).abs() < 4.0 * (8.0 / n).sqrt(), "{mean}");
    assert!((var - 8.0).abs() < 0.15, "{var}");
}
