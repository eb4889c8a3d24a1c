//! Globally adaptive Gauss–Kronrod (10/21) quadrature.
//!
//! The interval with the largest `|K21 - G10|` is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol·|I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{NeumaierSum, Tolerance};
use crate::error::{Error, Result};

pub const MAX_DEPTH: u32 = 60;
const MAX_INTERVALS: usize = 50_000;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_140,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// A converged integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64, depth: u32) -> Result<Panel> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::NonFiniteIntegrand { at: center });
    }
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: x1 });
        }
        if !f2.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: x2 });
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        depth,
    })
}

/// `∫_lo^hi f(t) dt`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64> {
    integrate_with_breaks(f, &[lo, hi], tol).map(|q| q.value)
}

/// Integrates over `[points[0], points[last]]`, seeding panels at every break.
///
/// Breaks must be nondecreasing; zero-width panels are dropped.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: &Tolerance,
) -> Result<Quadrature> {
    if points.len() < 2 {
        return Err(Error::domain("integration needs at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("integration limits must be finite"));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain(format!("integration limits must be increasing: {points:?}")));
    }
    if points[0] == points[points.len() - 1] {
        return Err(Error::domain("empty integration interval"));
    }

    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod21(&mut f, w[0], w[1], 0)?);
        }
    }

    loop {
        let (value, error) = totals(&heap);
        let target = tol.abs_tol.max(tol.rel_tol * value.abs());
        if error <= target {
            return Ok(Quadrature { value, error, intervals: heap.len() });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let exhausted = worst.depth >= MAX_DEPTH
            || heap.len() + 2 > MAX_INTERVALS
            || mid <= worst.lo
            || mid >= worst.hi;
        if exhausted {
            heap.push(worst);
            let (estimate, error_estimate) = totals(&heap);
            return Err(Error::Convergence { estimate, error_estimate });
        }
        heap.push(kronrod21(&mut f, worst.lo, mid, worst.depth + 1)?);
        heap.push(kronrod21(&mut f, mid, worst.hi, worst.depth + 1)?);
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut value = NeumaierSum::default();
    let mut error = NeumaierSum::default();
    for p in heap.iter() {
        value.add(p.value);
        error.add(p.error);
    }
    (value.sum(), error.sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        for p in 0..=30 {
            let got = kronrod21(&mut |x: f64| x.powi(p), -1.0, 1.0, 0).unwrap().value;
            let want = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((got - want).abs() < 1e-14, "degree {p}");
        }
        let weights: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((weights - 2.0).abs() < 1e-15);
    }

    #[test]
    fn examples() {
        let v = integrate(|x| x * x, 0.0, 1.0, &tol()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        let v = integrate(|t| 1.0 / t, 1.0, 2.0, &tol()).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-13);
        let v = integrate(|t| (-t).exp(), 0.0, 50.0, &tol()).unwrap();
        assert!((v - (1.0 - (-50.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn integrable_endpoint_singularity_converges() {
        let q = integrate_with_breaks(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], &Tolerance::new(1e-9, 1e-9, 1e-12).unwrap())
            .unwrap();
        assert!((q.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn non_convergence_carries_estimate() {
        let tight = Tolerance::new(1e-300, 1e-300, 1e-12).unwrap();
        match integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &tight) {
            Err(Error::Convergence { estimate, error_estimate }) => {
                assert!((estimate - 4.0 / 3.0).abs() < 1e-6);
                assert!(error_estimate > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_limits_and_nan() {
        assert!(integrate(|x| x, 1.0, 0.0, &tol()).is_err());
        assert!(integrate(|x| x, 1.0, 1.0, &tol()).is_err());
        assert!(matches!(
            integrate(|_| f64::NAN, 0.0, 1.0, &tol()),
            Err(Error::NonFiniteIntegrand { .. })
        ));
    }
}
