//! Seeded random streams and distribution functions.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed with the 64-bit
//! ChaCha stream counter set to `stream_id`, so distinct stream ids are
//! non-overlapping keystreams of the same key. Nested streams (for example one
//! per Monte Carlo replication, then one per state inside a replication) are
//! derived with [`RandomStream::child`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};
use statrs::function::erf;
use statrs::function::gamma;

use crate::error::{Error, Result};

/// Generator type produced by [`RandomStream::generator`].
pub type StreamRng = ChaCha8Rng;

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn generator(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Sibling stream with the same key.
    pub const fn with_stream(&self, stream_id: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id,
        }
    }

    /// Stream `index` of a fresh key derived from this stream.
    pub fn child(&self, index: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x632b_e59b_d9b4_e019))),
            stream_id: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `count` iid standard normal variates from a fresh generator for `stream`.
pub fn std_normal_draws(stream: &RandomStream, count: usize) -> Vec<f64> {
    let mut rng = stream.generator();
    (0..count).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform draw on `{lo, ..., hi}` (rejection sampling, no modulo bias).
pub fn uniform_int<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> Result<i64> {
    if lo > hi {
        return Err(Error::invalid(format!("empty integer range {lo}..={hi}")));
    }
    Ok(rng.random_range(lo..=hi))
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `P(Z > x)` without cancellation for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Two-sided p-value of a standard normal test statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    (2.0 * normal_sf(z.abs())).min(1.0)
}

/// Standard normal quantile function.
pub fn normal_quantile(prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::invalid(format!("probability {prob} outside (0, 1)")));
    }
    Ok(-std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * prob))
}

/// `P(χ²_df > x)` via the regularized upper incomplete gamma function.
pub fn chi2_upper_tail(x: f64, df: u32) -> Result<f64> {
    if df < 1 {
        return Err(Error::invalid("chi-square degrees of freedom must be >= 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("chi-square argument {x} is negative")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma::gamma_ur(df as f64 / 2.0, x / 2.0))
}

/// Upper-tail critical value: the `x` with `P(χ²_df > x) = alpha`.
pub fn chi2_quantile(alpha: f64, df: u32) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("tail probability {alpha} outside (0, 1)")));
    }
    if df < 1 {
        return Err(Error::invalid("chi-square degrees of freedom must be >= 1"));
    }
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::invalid(e.to_string()))?;
    let mut x = dist.inverse_cdf(1.0 - alpha);
    // Newton polish on the upper tail; the library inverse is only bisection-accurate.
    for _ in 0..20 {
        let f = chi2_upper_tail(x, df)? - alpha;
        let dens = dist.pdf(x);
        if dens <= 0.0 {
            break;
        }
        let step = f / dens;
        x = (x + step).max(x / 2.0);
        if step.abs() <= 1e-14 * x.max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Two-sided standard normal critical value `Φ⁻¹(1 - alpha/2)`.
pub fn normal_two_sided_critical(alpha: f64) -> Result<f64> {
    normal_quantile(1.0 - alpha / 2.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (divisor `n - 1`).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}
