//! Geometric censoring of count samples and the quantities built on it.
//!
//! For `T ~ Geometric(p)` independent of `X`, the censored variable
//! `Y = X·1{X < T}` satisfies `P(Y = n) = P(X = n)(1-p)^n` for `n >= 1`, so
//! its p.g.f. is `1 - g(1-p) + g(s(1-p))` and its first moment
//! `(1-p) g'(1-p)` is finite whatever the tail of `X`.

use crate::error::{Error, Result};
use crate::sampling::{geometric_unchecked, Count, RandomStream};
use crate::util::{mean, pow_base, pow_complement};

/// A nonempty sample of nonnegative integer counts.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSample {
    values: Vec<Count>,
}

impl CountSample {
    pub fn new(values: Vec<Count>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite() && value.fract() == 0.0) {
                return Err(Error::InvalidCount { index, value });
            }
        }
        Ok(CountSample { values })
    }

    pub fn from_counts(values: &[u64]) -> Self {
        assert!(!values.is_empty(), "sample must be nonempty");
        CountSample {
            values: values.iter().map(|&v| v as f64).collect(),
        }
    }

    #[inline]
    pub fn values(&self) -> &[Count] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn into_inner(self) -> Vec<Count> {
        self.values
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("p", "p in (0, 1]", p))
    }
}

/// Empirical p.g.f. `n⁻¹ Σ s^Xᵢ`, with `0⁰ = 1`.
pub fn empirical_pgf(sample: &CountSample, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid("s", "s in [0, 1]", s));
    }
    Ok(mean(sample.values.iter().map(|&x| pow_base(s, x))))
}

/// `ĝ(1-p) = n⁻¹ Σ (1-p)^Xᵢ`, computed stably for large counts.
pub(crate) fn pgf_at_complement(sample: &CountSample, p: f64) -> f64 {
    mean(sample.values.iter().map(|&x| pow_complement(p, x)))
}

/// Replace each `Xᵢ` by `Xᵢ·1{Xᵢ < Tᵢ}` with fresh geometric `Tᵢ`.
pub fn censor_sample(
    sample: &CountSample,
    p: f64,
    stream: &mut RandomStream,
) -> Result<CountSample> {
    check_p(p)?;
    let values = sample
        .values
        .iter()
        .map(|&x| {
            let t = geometric_unchecked(stream, p);
            if x < t {
                x
            } else {
                0.0
            }
        })
        .collect();
    Ok(CountSample { values })
}

/// One realisation of the censored sample mean `n⁻¹ Σ Xᵢ·1{Xᵢ < Tᵢ}`.
pub(crate) fn censored_mean_once(values: &[Count], p: f64, stream: &mut RandomStream) -> f64 {
    mean(values.iter().map(|&x| {
        let t = geometric_unchecked(stream, p);
        if x < t {
            x
        } else {
            0.0
        }
    }))
}

/// Average of `r` independent censored sample means.
///
/// Converges to [`censored_moment_cond`] as `r` grows; kept as an
/// independent check of the conditional-expectation shortcut.
pub fn censored_moment_mc(
    sample: &CountSample,
    p: f64,
    r: usize,
    stream: &mut RandomStream,
) -> Result<f64> {
    check_p(p)?;
    if r == 0 {
        return Err(Error::invalid("R", "R >= 1", 0.0));
    }
    let total: f64 = (0..r)
        .map(|_| censored_mean_once(&sample.values, p, stream))
        .sum();
    Ok(total / r as f64)
}

/// `E[m̂ | X] = n⁻¹ Σ Xᵢ (1-p)^Xᵢ`.
pub fn censored_moment_cond(sample: &CountSample, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(censored_moment_cond_unchecked(sample, p))
}

pub(crate) fn censored_moment_cond_unchecked(sample: &CountSample, p: f64) -> f64 {
    mean(sample.values.iter().map(|&x| x * pow_complement(p, x)))
}

/// `ĝ(1-p)` and the conditional censored moment at one censoring level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalSummaries {
    pub p: f64,
    pub g_hat: f64,
    pub m_cond: f64,
}

impl EmpiricalSummaries {
    pub fn compute(sample: &CountSample, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(EmpiricalSummaries {
            p,
            g_hat: pgf_at_complement(sample, p),
            m_cond: censored_moment_cond_unchecked(sample, p),
        })
    }
}

/// A p.g.f. with its first two derivatives on `[0, 1]`.
///
/// Derivatives may diverge at `s = 1`; they are only evaluated at `1 - p`
/// for `p > 0`.
pub trait PgfTriple {
    fn g(&self, s: f64) -> f64;
    fn g1(&self, s: f64) -> f64;
    fn g2(&self, s: f64) -> f64;
}

/// Law of the `p`-censoring of a variable with p.g.f. `pgf`.
#[derive(Clone, Copy, Debug)]
pub struct CensoredLaw<'a, P: ?Sized> {
    pgf: &'a P,
    p: f64,
    /// `E[Y] = (1-p) g'(1-p)`
    pub mean: f64,
    /// `E[Y²] = (1-p)² g''(1-p) + (1-p) g'(1-p)`
    pub second_moment: f64,
}

impl<P: PgfTriple + ?Sized> CensoredLaw<'_, P> {
    /// `g_Y(s) = 1 - g(1-p) + g(s(1-p))`.
    pub fn pgf(&self, s: f64) -> f64 {
        let q = 1.0 - self.p;
        1.0 - self.pgf.g(q) + self.pgf.g(s * q)
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

pub fn theoretical_censored<P: PgfTriple + ?Sized>(pgf: &P, p: f64) -> Result<CensoredLaw<'_, P>> {
    check_p(p)?;
    let q = 1.0 - p;
    let g1 = pgf.g1(q);
    let g2 = pgf.g2(q);
    Ok(CensoredLaw {
        pgf,
        p,
        mean: q * g1,
        second_moment: q * q * g2 + q * g1,
    })
}
