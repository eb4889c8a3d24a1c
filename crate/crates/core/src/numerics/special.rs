//! Log-gamma, incomplete gamma and the log-space Poisson pmf.
//!
//! The Poisson pmf follows Loader's saddle-point form
//! `-½ln(2πk) - stirlerr(k) - bd0(k, m)`, which keeps full relative accuracy
//! for large rates where the naive `k ln m - m - lnΓ(k+1)` cancels badly.

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_4;

/// Lanczos coefficients, g = 671/128 minus ½, 14 terms.
const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

/// `lnΓ(n+1) - (n+½)ln n + n - ln√(2π)` for n = 1..=15.
const STIRLERR_SMALL: [f64; 15] = [
    0.081_061_466_795_327_258_22,
    0.041_340_695_955_409_294_09,
    0.027_677_925_684_998_339_15,
    0.020_790_672_103_765_093_11,
    0.016_644_691_189_821_192_16,
    0.013_876_128_823_070_747_99,
    0.011_896_709_945_891_770_10,
    0.010_411_265_261_972_096_50,
    0.009_255_462_182_712_732_918,
    0.008_330_563_433_362_871_256,
    0.007_573_675_487_951_840_795,
    0.006_942_840_107_209_529_866,
    0.006_408_994_188_004_207_068,
    0.005_951_370_112_758_847_736,
    0.005_554_733_551_962_801_371,
];

/// Natural log of Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(lgamma(x))
}

/// Unchecked `lnΓ(x)`; callers guarantee `x > 0`.
pub(crate) fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "lgamma({x})");
    if x <= 23.0 && x.fract() == 0.0 {
        // (x-1)! is exact in f64 up to 22!
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f.ln();
    }
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail(x);
    }
    let tmp = x + LANCZOS_G;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    let mut y = x;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Asymptotic correction `lnΓ(z) - [(z-½)ln z - z + ln√(2π)]`, valid for z ≥ 10.
fn stirling_tail(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0
                    - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 / 156.0))))))
}

/// `lnΓ(x + h) - lnΓ(x)` without cancellation for large arguments.
///
/// Requires `x > 0` and `x + h > 0`.
pub fn log_gamma_diff(x: f64, h: f64) -> f64 {
    let xh = x + h;
    if h == 0.0 {
        return 0.0;
    }
    if x >= 10.0 && xh >= 10.0 {
        (x - 0.5) * (h / x).ln_1p() + h * xh.ln() - h + (stirling_tail(xh) - stirling_tail(x))
    } else {
        lgamma(xh) - lgamma(x)
    }
}

/// `ln k!`
pub fn ln_factorial(k: u64) -> f64 {
    lgamma(k as f64 + 1.0)
}

/// Error of Stirling's formula, `ln n! - [(n+½)ln n - n + ln√(2π)]`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if (1..=15).contains(&n) {
        return STIRLERR_SMALL[n as usize - 1];
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x/m) + m - x`, evaluated stably when x ≈ m.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln(e^{-m} m^k / k!)`; `m = 0` gives 0 at `k = 0` and `-inf` otherwise.
pub fn log_poisson_pmf(k: u64, m: f64) -> Result<f64> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("Poisson rate must be finite and >= 0, got {m}")));
    }
    Ok(ln_poisson(k, m))
}

pub(crate) fn ln_poisson(k: u64, m: f64) -> f64 {
    if m == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return -m;
    }
    let kf = k as f64;
    -0.5 * (std::f64::consts::TAU * kf).ln() - stirlerr(k) - bd0(kf, m)
}

/// Regularized lower incomplete gamma `P(s, x) = γ(s, x) / Γ(s)`.
pub fn regularized_lower_gamma(s: f64, x: f64) -> Result<f64> {
    check_incomplete_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < s + 1.0 {
        let (ln_sum, _) = lower_series(s, x);
        Ok((ln_sum + s * x.ln() - x - lgamma(s)).exp().min(1.0))
    } else {
        Ok(1.0 - upper_continued_fraction(s, x))
    }
}

/// `ln γ(s, x)` (unregularized); `-inf` at `x = 0`.
///
/// Stays finite where `P(s, x)` underflows, e.g. `s` in the thousands with `x` of order one.
pub fn log_lower_gamma(s: f64, x: f64) -> Result<f64> {
    check_incomplete_args(s, x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x < s + 1.0 {
        let (ln_sum, _) = lower_series(s, x);
        Ok(ln_sum + s * x.ln() - x)
    } else {
        Ok(lgamma(s) + (-upper_continued_fraction(s, x)).ln_1p())
    }
}

fn check_incomplete_args(s: f64, x: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("incomplete gamma requires s > 0, got {s}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(())
}

/// `ln Σ_n x^n / (s (s+1) ... (s+n))`, the series for `γ(s,x) e^x x^{-s}`.
fn lower_series(s: f64, x: f64) -> (f64, usize) {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut ap = s;
    let mut n = 0;
    while n < 100_000 {
        n += 1;
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (sum.ln(), n)
}

/// `Q(s, x)` by the modified Lentz continued fraction; for `x >= s + 1`.
fn upper_continued_fraction(s: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (s * x.ln() - x - lgamma(s)).exp() * h
}
