//! Seedable random streams and the variate generators used throughout the crate.
//!
//! Every sampler is a free function of an explicitly passed [`RandomStream`];
//! nothing here holds global state. Parallel work derives one substream per
//! task with [`RandomStream::substream`].

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A nonnegative integer count stored as `f64`.
///
/// Values are exact below 2^53. Heavy-tailed draws beyond that are kept as
/// the nearest representable real; every estimator term that consumes a
/// count (`(1-p)^X`, `X(1-p)^X`) underflows to zero long before that.
pub type Count = f64;

/// Largest mean for which the Poisson sampler is exact; above it a rounded
/// Gaussian is used (integers stop being representable at 2^53 anyway).
pub const POISSON_GAUSSIAN_THRESHOLD: f64 = 9_007_199_254_740_992.0;

/// Below this mean the Poisson sampler inverts the c.d.f. by sequential search.
pub const POISSON_INVERSION_MAX_MEAN: f64 = 10.0;

/// Parameters `(a, λ)` of the discrete stable and positive stable families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableParams {
    a: f64,
    lambda: f64,
}

impl StableParams {
    pub fn new(a: f64, lambda: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::invalid("a", "a in (0, 1]", a));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", "lambda > 0 and finite", lambda));
        }
        Ok(StableParams { a, lambda })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// A reproducible random stream keyed by `(master_seed, substream_index)`.
///
/// The key schedule expands `master_seed` into a ChaCha8 key and uses
/// `substream_index` as the ChaCha stream id, so streams sharing a master
/// seed never overlap. Output is identical on every platform.
#[derive(Clone, Debug)]
pub struct RandomStream {
    master_seed: u64,
    substream_index: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(master_seed: u64, substream_index: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = master_seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(substream_index);
        RandomStream {
            master_seed,
            substream_index,
            rng,
        }
    }

    /// Derive a child stream. Children of distinct parents, and distinct
    /// children of one parent, are keyed differently.
    pub fn substream(&self, index: u64) -> RandomStream {
        let child_master =
            splitmix64(self.master_seed ^ splitmix64(self.substream_index ^ 0xD1B5_4A32_D192_ED03));
        RandomStream::new(child_master, index)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn substream_index(&self) -> u64 {
        self.substream_index
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    /// Unit exponential, i.e. Gamma(1, 1).
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Geometric variate on `{1, 2, ...}` with `P(n) = p(1-p)^(n-1)`, by inversion.
pub fn sample_geometric(stream: &mut RandomStream, p: f64) -> Result<Count> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid("p", "p in (0, 1]", p));
    }
    Ok(geometric_unchecked(stream, p))
}

#[inline]
pub(crate) fn geometric_unchecked(stream: &mut RandomStream, p: f64) -> Count {
    if p == 1.0 {
        return 1.0;
    }
    let u = stream.uniform();
    (u.ln() / (-p).ln_1p()).ceil().max(1.0)
}

/// Positive stable variate with Laplace transform `exp(-λ t^a)`, via Kanter's
/// representation.
pub fn sample_positive_stable(stream: &mut RandomStream, params: StableParams) -> f64 {
    let (a, lambda) = (params.a(), params.lambda());
    if a == 1.0 {
        return lambda;
    }
    // Keep sin(πU) away from zero.
    let u = stream.uniform().clamp(f64::EPSILON, 1.0 - f64::EPSILON);
    let g = stream.exponential();

    let sin_a = (a * PI * u).sin();
    let sin_1ma = ((1.0 - a) * PI * u).sin();
    let sin_u = (PI * u).sin();

    // Log space keeps the a = 0.25 case (exponents 3 and 4) from overflowing
    // in intermediate products.
    let log_s = (1.0 - a) / a * (sin_1ma.ln() - g.ln() - sin_a.ln())
        + (lambda.ln() + sin_a.ln() - sin_u.ln()) / a;
    log_s.min(f64::MAX.ln()).exp()
}

/// Poisson variate. Exact below 2^53, rounded Gaussian above.
pub fn sample_poisson(stream: &mut RandomStream, mean: f64) -> Result<Count> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::invalid("mean", "mean >= 0 and finite", mean));
    }
    Ok(poisson_unchecked(stream, mean))
}

pub(crate) fn poisson_unchecked(stream: &mut RandomStream, mean: f64) -> Count {
    if mean == 0.0 {
        0.0
    } else if mean <= POISSON_INVERSION_MAX_MEAN {
        poisson_inversion(stream, mean)
    } else if mean <= POISSON_GAUSSIAN_THRESHOLD {
        poisson_ptrs(stream, mean)
    } else {
        (mean + mean.sqrt() * stream.standard_normal())
            .round()
            .max(0.0)
    }
}

fn poisson_inversion(stream: &mut RandomStream, mean: f64) -> Count {
    let u = stream.uniform();
    let mut k = 0.0;
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    // The tail beyond k = 200 has mass far below 2^-53 for mean <= 10.
    while u > cdf && k < 200.0 {
        k += 1.0;
        pmf *= mean / k;
        cdf += pmf;
    }
    k
}

/// Transformed rejection with squeeze (Hörmann's PTRS), valid for mean >= 10.
fn poisson_ptrs(stream: &mut RandomStream, mean: f64) -> Count {
    let smu = mean.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = stream.uniform() - 0.5;
        let v = stream.uniform();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= poisson_log_pmf(k, mean) {
            return k;
        }
    }
}

/// `ln P(K = k)` for `K ~ Poisson(mean)`, written around the mode so the
/// large-mean case does not cancel two numbers of size `k ln k`.
fn poisson_log_pmf(k: f64, mean: f64) -> f64 {
    if k < 10.0 {
        return k * mean.ln() - mean - ln_factorial_small(k as usize);
    }
    let delta = k - mean;
    // k ln(k/mean) - (k - mean)
    let deviance = k * (delta / mean).ln_1p() - delta;
    -deviance - 0.5 * (2.0 * PI * k).ln() - stirling_tail(k)
}

fn ln_factorial_small(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// `ln k! - [(k + 1/2) ln k - k + ln sqrt(2π)]` for `k >= 10`.
fn stirling_tail(k: f64) -> f64 {
    let inv = 1.0 / k;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Discrete stable variate: Poisson with a positive stable random mean.
pub fn sample_discrete_stable(stream: &mut RandomStream, params: StableParams) -> Count {
    let s = sample_positive_stable(stream, params);
    poisson_unchecked(stream, s)
}

/// `n` discrete stable draws.
pub fn sample_discrete_stable_n(
    stream: &mut RandomStream,
    params: StableParams,
    n: usize,
) -> Vec<Count> {
    (0..n)
        .map(|_| sample_discrete_stable(stream, params))
        .collect()
}
