//! Seedable random streams and the samplers built on them.
//!
//! The generator is xoshiro256** seeded through SplitMix64, so a given
//! `(seed, stream_id)` pair produces the same sequence everywhere.

use super::special::lgamma;
use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    state: [u64; 4],
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut sm = mix64(seed) ^ mix64(stream_id.wrapping_add(GOLDEN) ^ 0xD1B5_4A32_D192_ED03);
        let mut state = [0u64; 4];
        for s in state.iter_mut() {
            sm = sm.wrapping_add(GOLDEN);
            *s = mix64(sm);
        }
        if state == [0; 4] {
            state[0] = GOLDEN;
        }
        RngStream { seed, stream_id, state }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent stream for task `index`, derived from this stream's identity.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream::new(self.seed, mix64(self.stream_id ^ mix64(index.wrapping_add(1))))
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by the Marsaglia polar method.
    pub fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }
}

/// Poisson(m) draw: inversion for `m <= 30`, PTRS transformed rejection above.
pub fn sample_poisson(m: f64, rng: &mut RngStream) -> Result<u64> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("Poisson rate must be finite and >= 0, got {m}")));
    }
    if m == 0.0 {
        return Ok(0);
    }
    if m <= 30.0 {
        let u = rng.uniform();
        let mut k = 0u64;
        let mut p = (-m).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= m / k as f64;
            if p == 0.0 {
                break;
            }
            cdf += p;
        }
        return Ok(k);
    }
    Ok(poisson_ptrs(m, rng))
}

// Hörmann (1993), "The transformed rejection method for generating Poisson random variables".
fn poisson_ptrs(m: f64, rng: &mut RngStream) -> u64 {
    let log_m = m.ln();
    let smu = m.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + m + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -m + k * log_m - lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Gamma(shape, rate) draw by Marsaglia–Tsang, boosted for `shape < 1`.
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::domain(format!("gamma shape must be > 0, got {shape}")));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("gamma rate must be > 0, got {rate}")));
    }
    Ok(standard_gamma(shape, rng) / rate)
}

pub(crate) fn standard_gamma(shape: f64, rng: &mut RngStream) -> f64 {
    if shape < 1.0 {
        let g = standard_gamma(shape + 1.0, rng);
        let u = rng.uniform_open();
        // keep the draw positive when u^(1/shape) underflows
        return (g * u.powf(1.0 / shape)).max(f64::MIN_POSITIVE);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Dirichlet draw as normalized unit-rate gammas.
pub fn sample_dirichlet(params: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
    if params.is_empty() {
        return Err(Error::domain("Dirichlet needs at least one parameter"));
    }
    if let Some(p) = params.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::domain(format!("Dirichlet parameters must be > 0, got {p}")));
    }
    let mut draws: Vec<f64> = params.iter().map(|&a| standard_gamma(a, rng)).collect();
    let total: f64 = draws.iter().sum();
    for g in draws.iter_mut() {
        *g /= total;
    }
    Ok(draws)
}
