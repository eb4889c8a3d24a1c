use clap::{ArgGroup, Args};
use poispred_core::{jeffreys, make_prior, shrinkage_s, PriorAlphaBeta, Tolerance};

use crate::output::Format;
use crate::CliError;

#[derive(Args, Debug, Clone)]
pub struct TolArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Bound on discarded Poisson tail mass
    #[arg(long, default_value_t = 1e-12)]
    pub tail_mass: f64,
}

impl TolArgs {
    pub fn tolerance(&self) -> Result<Tolerance, CliError> {
        Tolerance::new(self.abs_tol, self.rel_tol, self.tail_mass).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output file, or - for standard output
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("mode").required(true).args(["table_coverage", "sample"])))]
pub struct PredictArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// jeffreys | shrinkage | custom:<alpha>:<beta1,...,betad>
    #[arg(long)]
    pub prior: String,
    /// Observed counts, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<u64>,
    /// List the predictive until this much mass is covered
    #[arg(long)]
    pub table_coverage: Option<f64>,
    /// Draw this many samples instead
    #[arg(long, requires = "seed")]
    pub sample: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct Figure1Args {
    #[arg(long, value_delimiter = ',', default_values_t = [3usize, 5, 8, 12])]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// lo:hi:step
    #[arg(long, default_value = "0:10:0.1")]
    pub mu_grid: String,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Exact,
    Mc,
    Brute,
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("mean").required(true).args(["lambda", "mu"])))]
pub struct RiskArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long)]
    pub prior: String,
    /// True means, comma separated
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// True total mean (exact method, or d = 1)
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct Theorem5Args {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value = "0:20:0.25")]
    pub mu_grid: String,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct BlythArgs {
    /// Truncation levels, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 100.0, 1000.0, 10000.0])]
    pub l: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AsymptoticsArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6])]
    pub b_grid: Vec<f64>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// `jeffreys`, `shrinkage` or `custom:<alpha>:<beta1,...,betad>` with exactly `d` betas.
pub fn parse_prior(text: &str, d: usize) -> Result<PriorAlphaBeta, CliError> {
    let usage = |msg: String| CliError::Usage(format!("--prior {text}: {msg}"));
    let prior = match text {
        "jeffreys" => jeffreys(d),
        "shrinkage" => shrinkage_s(d),
        _ => {
            let rest = text.strip_prefix("custom:").ok_or_else(|| usage("expected jeffreys, shrinkage or custom:<alpha>:<betas>".into()))?;
            let (alpha, betas) = rest.split_once(':').ok_or_else(|| usage("custom prior needs <alpha>:<betas>".into()))?;
            let alpha: f64 = alpha.trim().parse().map_err(|_| usage(format!("bad alpha {alpha:?}")))?;
            let beta = betas
                .split(',')
                .map(|b| b.trim().parse::<f64>().map_err(|_| usage(format!("bad beta {b:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if beta.len() != d {
                return Err(usage(format!("expected {d} betas for --d {d}, got {}", beta.len())));
            }
            make_prior(alpha, beta)
        }
    };
    prior.map_err(|e| usage(e.to_string()))
}

/// `lo:hi:step` as `lo + i·step` for `i = 0, 1, …` while the value stays below `hi` (up to rounding).
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let usage = |msg: &str| CliError::Usage(format!("grid {text:?}: {msg}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(usage("expected lo:hi:step"));
    }
    let vals = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| usage("not a number")))
        .collect::<Result<Vec<_>, _>>()?;
    let (lo, hi, step) = (vals[0], vals[1], vals[2]);
    if !lo.is_finite() || !hi.is_finite() || !(step > 0.0) || hi < lo {
        return Err(usage("need finite lo <= hi and step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(usage("more than 10^6 grid points"));
    }
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}
