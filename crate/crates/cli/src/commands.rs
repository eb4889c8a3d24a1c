use poispred_core::blyth::{bayes_risk_gap_report, gap_upper_bound, BlythConfig};
use poispred_core::numerics::{log_gamma, poisson_expectation};
use poispred_core::predictive::{predictive_table, sample_predictive, PredictivePmfSpec};
use poispred_core::risk::{
    brute_full_risk, exact_total_risk, mc_full_risk, plugin_total_risk, risk_difference, theorem5_gap, RiskEstimate,
    RiskMethod,
};
use poispred_core::{Counts, MeanVector, ModelConfig, RngStream, Tolerance};
use rayon::prelude::*;

use crate::args::{
    parse_grid, parse_prior, AsymptoticsArgs, BlythArgs, Figure1Args, Method, PredictArgs, RiskArgs, Theorem5Args,
};
use crate::output::{num, Body, Document, Provenance, Table};
use crate::CliError;

fn y_header(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("y{i}")).collect()
}

fn join_u64(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

pub fn predict(args: &PredictArgs, command: String) -> Result<Document, CliError> {
    let prior = parse_prior(&args.prior, args.d)?;
    let model = ModelConfig::new(args.d, args.a, args.b)?;
    let spec = PredictivePmfSpec::new(prior.clone(), model, Counts::new(args.x.clone()))?;

    let mut prov = Provenance::new(command, Tolerance::default());
    prov.note(format!("model: d={} a={} b={}", args.d, num(args.a), num(args.b)));
    prov.note(format!("prior: {} alpha={} beta={}", prior.label(), num(prior.alpha()), join_f64(prior.beta())));
    prov.note(format!("x: {}", join_u64(&args.x)));

    let mut header = y_header(args.d);
    let table = match (args.table_coverage, args.sample) {
        (Some(p), _) => {
            prov.note(format!("table_coverage: {}", num(p)));
            header.push("probability".into());
            let mut t = Table { header, rows: Vec::new() };
            for (y, prob) in predictive_table(&spec, p)? {
                let mut row: Vec<String> = y.values().iter().map(u64::to_string).collect();
                row.push(num(prob));
                t.rows.push(row);
            }
            t
        }
        (None, Some(n)) => {
            let seed = args.seed.ok_or_else(|| CliError::Usage("--sample needs --seed".into()))?;
            prov = prov.with_seed(seed);
            let mut t = Table { header, rows: Vec::new() };
            for y in sample_predictive(&spec, n, &mut RngStream::new(seed, 0))? {
                t.rows.push(y.values().iter().map(u64::to_string).collect());
            }
            t
        }
        (None, None) => return Err(CliError::Usage("one of --table-coverage or --sample is required".into())),
    };
    Ok(Document { provenance: prov, body: Body::Table(table) })
}

pub fn figure1(args: &Figure1Args, command: String) -> Result<Document, CliError> {
    let tol = args.tol.tolerance()?;
    let grid = parse_grid(&args.mu_grid)?;
    if args.d.contains(&0) {
        return Err(CliError::Usage("--d entries must be >= 1".into()));
    }
    ModelConfig::new(1, args.a, args.b)?;

    let mut prov = Provenance::new(command, tol);
    prov.note(format!("exposures: a={} b={} (defaults a=b=1 unless given)", num(args.a), num(args.b)));
    prov.note("delta: risk of the Jeffreys predictive minus risk of the shrinkage predictive");
    for &d in args.d.iter().filter(|&&d| d < 3) {
        prov.note(format!("advisory: d={d} < 3, domination is not guaranteed"));
    }

    let cells: Vec<(f64, usize)> = grid.iter().flat_map(|&mu| args.d.iter().map(move |&d| (mu, d))).collect();
    let values = cells
        .par_iter()
        .map(|&(mu, d)| risk_difference(d as f64 / 2.0 - 1.0, args.a, args.b, mu, &tol))
        .collect::<Result<Vec<_>, _>>()?;

    let mut t = Table::new(&["mu", "d", "delta"]);
    for (&(mu, d), v) in cells.iter().zip(values) {
        t.rows.push(vec![num(mu), d.to_string(), num(v)]);
    }
    Ok(Document { provenance: prov, body: Body::Table(t) })
}

fn mean_vector(args: &RiskArgs) -> Result<MeanVector, CliError> {
    match (&args.lambda, args.mu) {
        (Some(l), _) => Ok(MeanVector::new(l.clone())?),
        (None, Some(mu)) if args.d == 1 => Ok(MeanVector::new(vec![mu])?),
        _ => Err(CliError::Usage("--lambda is required for this method unless --d 1".into())),
    }
}

pub fn risk(args: &RiskArgs, command: String) -> Result<Document, CliError> {
    let tol = args.tol.tolerance()?;
    let prior = parse_prior(&args.prior, args.d)?;
    let model = ModelConfig::new(args.d, args.a, args.b)?;

    let mut prov = Provenance::new(command, tol);
    prov.note(format!("model: d={} a={} b={}", args.d, num(args.a), num(args.b)));
    prov.note(format!("prior: {} c={}", prior.label(), num(prior.c())));

    let estimate = match args.method {
        Method::Exact => {
            let mu = match (&args.lambda, args.mu) {
                (Some(l), _) => MeanVector::new(l.clone())?.mu(),
                (None, Some(mu)) => mu,
                (None, None) => unreachable!("clap requires --lambda or --mu"),
            };
            let value = exact_total_risk(prior.c(), args.a, args.b, mu, &tol)?;
            let mut e = RiskEstimate::deterministic(value, RiskMethod::Exact1d, tol.tail_mass);
            if args.d > 1 {
                e.diagnostic =
                    Some("risk of the totals predictive only; the composition term depends on lambda/mu".into());
            }
            e
        }
        Method::Mc => {
            let lambda = mean_vector(args)?;
            prov = prov.with_seed(args.seed);
            let mut rng = RngStream::new(args.seed, 0);
            mc_full_risk(&prior, &model, &lambda, args.n, &mut rng, &tol)?
        }
        Method::Brute => {
            let lambda = mean_vector(args)?;
            let value = brute_full_risk(&prior, &model, &lambda, &tol)?;
            RiskEstimate::deterministic(value, RiskMethod::BruteForce, tol.tail_mass)
        }
    };
    let body = serde_json::to_value(&estimate).expect("estimates serialize");
    Ok(Document { provenance: prov, body: Body::Json(body) })
}

pub fn theorem5(args: &Theorem5Args, command: String) -> Result<Document, CliError> {
    let tol = args.tol.tolerance()?;
    let grid = parse_grid(&args.mu_grid)?;
    ModelConfig::new(1, args.a, args.b)?;
    let mut prov = Provenance::new(command, tol);
    prov.note(format!("exposures: a={} b={}", num(args.a), num(args.b)));
    prov.note("bayes_risk: shrinkage prior totals risk; gap = plugin_risk - bayes_risk");

    let rows = grid
        .par_iter()
        .map(|&mu| -> Result<[f64; 4], CliError> {
            let plugin = plugin_total_risk(args.a, args.b, mu, &tol)?;
            let bayes = exact_total_risk(0.0, args.a, args.b, mu, &tol)?;
            let gap = theorem5_gap(args.a, args.b, mu, &tol)?;
            Ok([mu, plugin, bayes, gap])
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut t = Table::new(&["mu", "plugin_risk", "bayes_risk", "gap"]);
    t.rows = rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()).collect();
    Ok(Document { provenance: prov, body: Body::Table(t) })
}

pub fn blyth(args: &BlythArgs, command: String) -> Result<Document, CliError> {
    let tol = args.tol.tolerance()?;
    let configs = args
        .l
        .iter()
        .map(|&l| BlythConfig::new(l, args.c, args.a, args.b, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut prov = Provenance::new(command, tol);
    prov.note(format!("c={} a={} b={}", num(args.c), num(args.a), num(args.b)));

    let reports = configs
        .par_iter()
        .map(|cfg| bayes_risk_gap_report(cfg).map(|r| (cfg.l(), r, gap_upper_bound(cfg))))
        .collect::<Result<Vec<_>, _>>()?;

    let mut t = Table::new(&["l", "gap", "bound", "ratio"]);
    for (l, report, bound) in reports {
        if report.clamped > 0 {
            prov.note(format!("l={}: {} negative terms clamped to zero", num(l), report.clamped));
        }
        t.rows.push(vec![num(l), num(report.value), num(bound), num(report.value / bound)]);
    }
    Ok(Document { provenance: prov, body: Body::Table(t) })
}

/// `E[lnΓ(X + d/2) - lnΓ(X + 1)] - (d/2 - 1) ln(aμ)` for `X ~ Poisson(aμ)`.
pub fn large_b_limit(d: usize, a: f64, mu: f64, tol: &Tolerance) -> Result<f64, CliError> {
    let half = d as f64 / 2.0;
    let m = a * mu;
    let e = poisson_expectation(
        |k| {
            let k = k as f64;
            match (log_gamma(k + half), log_gamma(k + 1.0)) {
                (Ok(p), Ok(q)) => p - q,
                _ => f64::NAN,
            }
        },
        m,
        tol,
    )?;
    Ok(e - (half - 1.0) * m.ln())
}

pub fn asymptotics(args: &AsymptoticsArgs, command: String) -> Result<Document, CliError> {
    let tol = args.tol.tolerance()?;
    if args.d == 0 {
        return Err(CliError::Usage("--d must be >= 1".into()));
    }
    for &b in &args.b_grid {
        ModelConfig::new(args.d, args.a, b)?;
    }
    if !(args.mu >= 0.0) || !args.mu.is_finite() {
        return Err(CliError::Usage(format!("--mu must be finite and >= 0, got {}", args.mu)));
    }
    let delta = args.d as f64 / 2.0 - 1.0;
    let mut prov = Provenance::new(command, tol);
    prov.note(format!("d={} a={} mu={}", args.d, num(args.a), num(args.mu)));

    let limit = if args.mu > 0.0 { Some(large_b_limit(args.d, args.a, args.mu, &tol)?) } else { None };
    if limit.is_none() {
        prov.note("mu=0: delta_limit is (d/2-1) ln((a+b)/a), which diverges in b");
    }

    let values = args
        .b_grid
        .par_iter()
        .map(|&b| risk_difference(delta, args.a, b, args.mu, &tol))
        .collect::<Result<Vec<_>, _>>()?;

    let mut t = Table::new(&["b", "delta", "delta_limit", "abs_err"]);
    for (&b, v) in args.b_grid.iter().zip(values) {
        let row = match limit {
            Some(lim) => vec![num(b), num(v), num(lim), num((v - lim).abs())],
            None => vec![num(b), num(v), num(delta * (b / args.a).ln_1p()), "log-divergent".into()],
        };
        t.rows.push(row);
    }
    Ok(Document { provenance: prov, body: Body::Table(t) })
}
