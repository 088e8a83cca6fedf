//! Censoring estimators for the discrete stable family `DS(a, λ)`.
//!
//! `DS(a, λ)` has p.g.f. `g(s) = exp(-λ(1-s)^a)`, `0 < a ≤ 1`, `λ > 0`; it is
//! Poisson at `a = 1` and has no finite mean for `a < 1`. The censored first
//! moment gives `E[Y] = -a p⁻¹ (1-p) g(1-p) log g(1-p)`, which yields `a`
//! given `p` and `g(1-p)`, and then `λ = -p^(-a) log g(1-p)`.
//!
//! The censoring level is chosen from the data as
//! `p* = max{p ∈ (0, 1/2] : ĝ(1-p) ≥ 1/e}`. Two regimes follow:
//!
//! - [`Branch::Root`]: `ĝ(1/2) < 1/e`, so `p* < 1/2` solves `ĝ(1-p*) = 1/e`
//!   and the estimators simplify to `â = e p* m̂ / (1-p*)`, `λ̂ = p*^(-â)`.
//! - [`Branch::Half`]: `p* = 1/2` and the general form is used with `ĝ(1/2)`.

use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::{E, LN_2};

use crate::censoring::{censored_moment_cond_unchecked, pgf_at_complement, CountSample, PgfTriple};
use crate::error::{Error, Result};
use crate::generic::{FamilyMap, Matrix2, SINGULAR_MAGNITUDE};
use crate::sampling::StableParams;
use crate::util::pow_complement;

/// Default bisection width for [`select_p_star`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Bisection iteration cap.
pub const MAX_BISECTION_ITERS: usize = 100;

/// Estimates with `â` outside `(0, VALID_A_MAX]` are flagged invalid.
pub const VALID_A_MAX: f64 = 1.5;

const INV_E: f64 = 1.0 / E;

/// `exp(-λ(1-s)^a)`
pub fn stable_pgf(params: StableParams, s: f64) -> f64 {
    (-params.lambda() * (1.0 - s).powf(params.a())).exp()
}

impl PgfTriple for StableParams {
    fn g(&self, s: f64) -> f64 {
        stable_pgf(*self, s)
    }

    fn g1(&self, s: f64) -> f64 {
        let (a, l) = (self.a(), self.lambda());
        a * l * (1.0 - s).powf(a - 1.0) * self.g(s)
    }

    fn g2(&self, s: f64) -> f64 {
        let (a, l) = (self.a(), self.lambda());
        let t = 1.0 - s;
        self.g(s) * (a * l * (1.0 - a) * t.powf(a - 2.0) + (a * l).powi(2) * t.powf(2.0 * a - 2.0))
    }
}

/// `min(λ^(-1/a), 1/2)`, the almost-sure limit of `p*`.
pub fn population_limit_p(params: StableParams) -> f64 {
    params.lambda().powf(-1.0 / params.a()).min(0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `p* < 1/2` with `ĝ(1-p*) = 1/e`.
    Root,
    /// `p* = 1/2`.
    Half,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Root => "Root",
            Branch::Half => "Half",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PStarSelection {
    pub p_star: f64,
    pub branch: Branch,
}

/// Data-driven censoring level.
///
/// On the root branch the returned `p*` is the lower end of the final
/// bracket, so `ĝ(1-p*) ≥ 1/e` always holds; bisection continues until the
/// bracket is narrower than `tol` and `|ĝ(1-p*) - 1/e| ≤ tol`, or the
/// iteration cap is reached.
pub fn select_p_star(sample: &CountSample, tol: f64) -> Result<PStarSelection> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tol", "tol > 0", tol));
    }
    let excess = |p: f64| pgf_at_complement(sample, p) - INV_E;
    if excess(0.5) >= 0.0 {
        return Ok(PStarSelection {
            p_star: 0.5,
            branch: Branch::Half,
        });
    }
    // excess(0) = 1 - 1/e > 0 and excess is strictly decreasing in p.
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    let mut lo_excess = 1.0 - INV_E;
    for _ in 0..MAX_BISECTION_ITERS {
        if hi - lo <= tol && lo_excess <= tol && lo > 0.0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = excess(mid);
        if e >= 0.0 {
            lo = mid;
            lo_excess = e;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        // Only reachable with a pathological tol; the bracket top is still a root.
        lo = hi;
    }
    Ok(PStarSelection {
        p_star: lo,
        branch: Branch::Root,
    })
}

/// Fitted `DS(a, λ)` parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableEstimate {
    pub a_hat: f64,
    pub lambda_hat: f64,
    pub p_star: f64,
    pub branch: Branch,
    /// Estimated covariance of `√n(â - a, λ̂ - λ)`; `None` until computed.
    pub sigma: Option<Matrix2>,
    /// False when `â ∉ (0, 1.5]` or `λ̂` is not finite and positive. The raw
    /// values are kept either way.
    pub valid: bool,
    pub n: usize,
}

impl StableEstimate {
    /// Standard errors `sqrt(Σ̂ₖₖ / n)` for `(â, λ̂)`.
    pub fn standard_errors(&self) -> Option<(f64, f64)> {
        let s = self.sigma?;
        let n = self.n as f64;
        Some(((s.get(0, 0) / n).sqrt(), (s.get(1, 1) / n).sqrt()))
    }
}

fn half_log_g(sample: &CountSample) -> Result<(f64, f64)> {
    let g = pgf_at_complement(sample, 0.5);
    let lg = g.ln();
    if lg == 0.0 || (g * lg).abs() < SINGULAR_MAGNITUDE {
        return Err(Error::Degenerate(
            "log ĝ(1/2) = 0 (every count is zero); the estimator of a is undefined".into(),
        ));
    }
    Ok((g, lg))
}

fn is_valid(a_hat: f64, lambda_hat: f64) -> bool {
    a_hat > 0.0 && a_hat <= VALID_A_MAX && lambda_hat.is_finite() && lambda_hat > 0.0
}

/// Point estimates `(â, λ̂)` at a selected censoring level.
pub fn estimate(sample: &CountSample, sel: PStarSelection) -> Result<StableEstimate> {
    let p = sel.p_star;
    let (a_hat, lambda_hat) = match sel.branch {
        Branch::Root => {
            if !(p > 0.0 && p < 0.5) {
                return Err(Error::invalid(
                    "p_star",
                    "p_star in (0, 1/2) on the root branch",
                    p,
                ));
            }
            let m = censored_moment_cond_unchecked(sample, p);
            let a_hat = E * p * m / (1.0 - p);
            (a_hat, p.powf(-a_hat))
        }
        Branch::Half => {
            if p != 0.5 {
                return Err(Error::invalid(
                    "p_star",
                    "p_star = 1/2 on the half branch",
                    p,
                ));
            }
            let (g, lg) = half_log_g(sample)?;
            let m = censored_moment_cond_unchecked(sample, 0.5);
            let a_hat = -m / (g * lg);
            (a_hat, -(a_hat * LN_2).exp() * lg)
        }
    };
    if !a_hat.is_finite() || lambda_hat.is_nan() {
        return Err(Error::NonFinite {
            what: "discrete stable estimate",
            replicate: None,
        });
    }
    let valid = is_valid(a_hat, lambda_hat);
    Ok(StableEstimate {
        a_hat,
        lambda_hat,
        p_star: p,
        branch: sel.branch,
        sigma: None,
        valid,
        n: sample.len(),
    })
}

/// Per-observation influence rows `[W*₁ᵢ, W*₂ᵢ]` for the branch of `est`.
pub fn influence_pairs(sample: &CountSample, est: &StableEstimate) -> Result<Vec<[f64; 2]>> {
    let xs = sample.values();
    let rows: Vec<[f64; 2]> = match est.branch {
        Branch::Root => {
            let p = est.p_star;
            let q = 1.0 - p;
            let lp = p.ln();
            xs.iter()
                .map(|&x| {
                    let w = pow_complement(p, x);
                    // X (1-p)^(X-1)
                    let xw = x * w / q;
                    [E * p * xw, -E * est.lambda_hat * (w + xw * p * lp)]
                })
                .collect()
        }
        Branch::Half => {
            let (g, lg) = half_log_g(sample)?;
            let a = est.a_hat;
            let l = est.lambda_hat;
            let scale2 = (a * LN_2).exp() * (l * (-a * LN_2).exp()).exp();
            let const2 = a * (1.0 - l * (-a * LN_2).exp()) * LN_2 - 1.0;
            xs.iter()
                .map(|&x| {
                    let w = pow_complement(0.5, x);
                    [
                        -w * (x + a * (1.0 + lg)) / (g * lg),
                        scale2 * w * (x * LN_2 + const2),
                    ]
                })
                .collect()
        }
    };
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "influence terms",
            replicate: None,
        });
    }
    Ok(rows)
}

/// Sample covariance of the influence rows, estimating the asymptotic
/// covariance of `√n(â - a, λ̂ - λ)`.
pub fn asymptotic_covariance(sample: &CountSample, est: &StableEstimate) -> Result<Matrix2> {
    if sample.len() < 2 {
        return Err(Error::TooFewObservations {
            n: sample.len(),
            required: 2,
        });
    }
    Matrix2::sample_covariance(&influence_pairs(sample, est)?)
}

/// Selects `p*`, estimates, and attaches the covariance estimate.
pub fn fit(sample: &CountSample) -> Result<StableEstimate> {
    let sel = select_p_star(sample, DEFAULT_ROOT_TOL)?;
    let mut est = estimate(sample, sel)?;
    est.sigma = Some(asymptotic_covariance(sample, &est)?);
    Ok(est)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Two-sided standard normal quantile `z_{(1+level)/2}`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", "level in (0, 1)", level));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 * (1.0 + level)))
}

/// Normal-theory intervals `θ̂ ± z·sqrt(Σ̂ₖₖ/n)` for `a` and `λ`.
pub fn confidence_intervals(
    est: &StableEstimate,
    level: f64,
) -> Result<(ConfidenceInterval, ConfidenceInterval)> {
    let z = normal_quantile(level)?;
    let (se_a, se_l) = est
        .standard_errors()
        .ok_or(Error::Misuse("covariance has not been estimated"))?;
    let ci = |theta: f64, se: f64| ConfidenceInterval {
        lo: theta - z * se,
        hi: theta + z * se,
        level,
    };
    Ok((ci(est.a_hat, se_a), ci(est.lambda_hat, se_l)))
}

/// Reparameterisation for the root branch: `f₁ = e·x·z/(1-x)`, `f₂ = x^(-z)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RootFamily;

impl FamilyMap for RootFamily {
    fn f1(&self, x: f64, _y: f64, z: f64) -> f64 {
        E * x * z / (1.0 - x)
    }

    fn f2(&self, x: f64, _y: f64, z: f64) -> f64 {
        x.powf(-z)
    }

    fn grad_f1(&self, x: f64, _y: f64, z: f64) -> [f64; 3] {
        let q = 1.0 - x;
        [E * z / (q * q), 0.0, E * x / q]
    }

    fn grad_f2(&self, x: f64, _y: f64, z: f64) -> [f64; 3] {
        let v = x.powf(-z);
        [-z * v / x, 0.0, -v * x.ln()]
    }

    fn linear_in_moment(&self) -> bool {
        true
    }

    fn singularity(&self, x: f64, _y: f64, _z: f64) -> Option<&'static str> {
        (!(x > 0.0 && x < 1.0)).then_some("censoring level outside (0, 1)")
    }
}

/// General reparameterisation: `f₁ = -x·z/((1-x)·y·log y)`, `f₂ = -x^(-z)·log y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HalfFamily;

impl FamilyMap for HalfFamily {
    fn f1(&self, x: f64, y: f64, z: f64) -> f64 {
        -x * z / ((1.0 - x) * y * y.ln())
    }

    fn f2(&self, x: f64, y: f64, z: f64) -> f64 {
        -x.powf(-z) * y.ln()
    }

    fn grad_f1(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        let q = 1.0 - x;
        let ly = y.ln();
        let yl = y * ly;
        [
            -z / (q * q * yl),
            x * z * (1.0 + ly) / (q * yl * yl),
            -x / (q * yl),
        ]
    }

    fn grad_f2(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        let v = x.powf(-z);
        let ly = y.ln();
        [z * v * ly / x, -v / y, v * x.ln() * ly]
    }

    fn linear_in_moment(&self) -> bool {
        true
    }

    fn singularity(&self, x: f64, y: f64, _z: f64) -> Option<&'static str> {
        if !(x > 0.0 && x < 1.0) {
            Some("censoring level outside (0, 1)")
        } else if !(y > 0.0 && y < 1.0) || (y * y.ln()).abs() < SINGULAR_MAGNITUDE {
            Some("log ĝ = 0 (every count is zero); the estimator of a is undefined")
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::empirical_pgf;
    use crate::generic::{check_derivatives, estimate_closed};
    use crate::sampling::{sample_discrete_stable_n, RandomStream};
    use proptest::prelude::*;

    fn params(a: f64, l: f64) -> StableParams {
        StableParams::new(a, l).unwrap()
    }

    #[test]
    fn pgf_values() {
        assert_eq!(stable_pgf(params(0.3, 7.0), 1.0), 1.0);
        assert!((stable_pgf(params(1.0, 2.0), 0.5) - 0.367_879_441_171_442_3).abs() < 1e-15);
        for &(a, l) in &[(0.25, 3.0), (0.5, 9.0), (1.0, 1.0), (0.7, 100.0)] {
            let pr = params(a, l);
            let s = 1.0 - l.powf(-1.0 / a);
            assert!((stable_pgf(pr, s) - INV_E).abs() < 1e-14);
        }
    }

    #[test]
    fn pgf_derivatives_match_finite_differences() {
        let pr = params(0.6, 2.5);
        let h = 1e-6;
        for &s in &[0.1, 0.4, 0.8] {
            let d1 = (pr.g(s + h) - pr.g(s - h)) / (2.0 * h);
            let d2 = (pr.g1(s + h) - pr.g1(s - h)) / (2.0 * h);
            assert!((pr.g1(s) - d1).abs() < 1e-7 * d1.abs().max(1.0));
            assert!((pr.g2(s) - d2).abs() < 1e-6 * d2.abs().max(1.0));
        }
    }

    #[test]
    fn population_limit() {
        assert_eq!(population_limit_p(params(1.0, 4.0)), 0.25);
        assert_eq!(population_limit_p(params(1.0, 1.0)), 0.5);
        assert!((population_limit_p(params(0.5, 10.0)) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn all_zero_sample_is_half_and_degenerate() {
        let s = CountSample::from_counts(&[0; 10]);
        let sel = select_p_star(&s, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(
            sel,
            PStarSelection {
                p_star: 0.5,
                branch: Branch::Half
            }
        );
        assert!(matches!(estimate(&s, sel), Err(Error::Degenerate(_))));
        assert!(matches!(fit(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn small_sample_root_branch() {
        // Reference values solve (q² + q³ + q⁴)/3 = 1/e in 30-digit arithmetic.
        let s = CountSample::from_counts(&[2, 3, 4]);
        let sel = select_p_star(&s, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(sel.branch, Branch::Root);
        assert!((sel.p_star - 0.292_873_597_236_877_5).abs() < 1e-11);
        let est = estimate(&s, sel).unwrap();
        assert!((est.a_hat - 1.148_702_750_489_776_8).abs() < 1e-10);
        assert!((est.lambda_hat - 4.098_509_031_759_907).abs() < 1e-9);
        assert_eq!(est.lambda_hat, est.p_star.powf(-est.a_hat));
        assert!(est.valid);
        let g = pgf_at_complement(&s, sel.p_star);
        assert!((g - INV_E).abs() <= DEFAULT_ROOT_TOL);
        assert!(g >= INV_E);
    }

    #[test]
    fn half_branch_identity() {
        let s = CountSample::from_counts(&[0, 0, 0, 1, 0, 2, 0, 1]);
        let sel = select_p_star(&s, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(sel.branch, Branch::Half);
        let est = estimate(&s, sel).unwrap();
        let g = empirical_pgf(&s, 0.5).unwrap();
        assert!(g >= INV_E);
        assert!((est.lambda_hat * 2f64.powf(-est.a_hat) + g.ln()).abs() < 1e-14);
    }

    #[test]
    fn validity_rule() {
        assert!(is_valid(1.0, 3.0));
        assert!(is_valid(VALID_A_MAX, 3.0));
        assert!(!is_valid(1.6, 3.0));
        assert!(!is_valid(0.0, 3.0));
        assert!(!is_valid(0.5, f64::INFINITY));
        assert!(!is_valid(0.5, 0.0));
        let s = CountSample::from_counts(&[0, 0, 0, 0, 0, 0, 0, 0, 0, 50]);
        let est = fit(&s).unwrap();
        assert!(est.a_hat.is_finite());
        assert_eq!(est.valid, is_valid(est.a_hat, est.lambda_hat));
    }

    #[test]
    fn root_branch_zero_row() {
        let s = CountSample::from_counts(&[0, 2, 3, 4, 9]);
        let est = estimate(&s, select_p_star(&s, DEFAULT_ROOT_TOL).unwrap()).unwrap();
        assert_eq!(est.branch, Branch::Root);
        let rows = influence_pairs(&s, &est).unwrap();
        assert_eq!(rows[0][0], 0.0);
        assert!((rows[0][1] + E * est.lambda_hat).abs() < 1e-14);
    }

    #[test]
    fn root_influence_forms_agree() {
        // e·p·X(1-p)^(X-1) = (e·p/(1-p))·X(1-p)^X for X in 0..=50.
        for &p in &[0.01, 0.2, 0.3, 0.49] {
            let q: f64 = 1.0 - p;
            for x in 0..=50 {
                let x = x as f64;
                let lhs = if x == 0.0 {
                    0.0
                } else {
                    E * p * x * q.powf(x - 1.0)
                };
                let rhs = E * p / q * x * q.powf(x);
                assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn half_covariance_matches_generic_framework() {
        let s = CountSample::from_counts(&[0, 0, 1, 0, 3, 0, 0, 1, 2, 0, 7, 0]);
        let est = fit(&s).unwrap();
        assert_eq!(est.branch, Branch::Half);
        let generic = crate::generic::fit_closed(&s, 0.5, &HalfFamily, |_| 0.0).unwrap();
        let sigma = est.sigma.unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let scale = sigma.get(i, i).abs().max(sigma.get(j, j).abs());
                assert!((sigma.get(i, j) - generic.sigma.get(i, j)).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn root_covariance_close_to_generic_with_z_terms() {
        // The dedicated root-branch rows drop Z terms that cancel only in the
        // population, so agreement is asymptotic.
        let mut rs = RandomStream::new(12, 0);
        let pr = params(0.5, 5.0);
        let s = CountSample::new(sample_discrete_stable_n(&mut rs, pr, 200_000)).unwrap();
        let est = fit(&s).unwrap();
        assert_eq!(est.branch, Branch::Root);
        let p = est.p_star;
        let a = est.a_hat;
        let xs = s.values().to_vec();
        let generic =
            crate::generic::fit_closed(&s, p, &RootFamily, |i| E * p * (1.0 - p).powf(xs[i]) / a)
                .unwrap();
        let sigma = est.sigma.unwrap();
        for k in 0..2 {
            let rel = (sigma.get(k, k) - generic.sigma.get(k, k)).abs() / sigma.get(k, k);
            assert!(rel < 0.05, "entry {k}: {rel}");
        }
    }

    #[test]
    fn generic_equivalence_small_samples() {
        for xs in [
            &[2u64, 3, 4][..],
            &[0, 1, 0, 2],
            &[5, 9, 0, 1, 40, 3],
            &[0, 0, 1],
        ] {
            let s = CountSample::from_counts(xs);
            let sel = select_p_star(&s, DEFAULT_ROOT_TOL).unwrap();
            let est = estimate(&s, sel).unwrap();
            let g = match sel.branch {
                Branch::Root => estimate_closed(&s, sel.p_star, &RootFamily).unwrap(),
                Branch::Half => estimate_closed(&s, sel.p_star, &HalfFamily).unwrap(),
            };
            assert!((est.a_hat - g.theta1).abs() <= 1e-12 * est.a_hat.abs().max(1.0));
            assert!((est.lambda_hat - g.theta2).abs() <= 1e-12 * est.lambda_hat.abs().max(1.0));
        }
    }

    #[test]
    fn half_family_rejects_log_one() {
        let s = CountSample::from_counts(&[0, 0, 0]);
        assert!(matches!(
            estimate_closed(&s, 0.5, &HalfFamily),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn derivative_examples() {
        assert!(check_derivatives(&RootFamily, (0.3, 0.4, 1.0)).unwrap() < 1e-6);
        assert!(check_derivatives(&HalfFamily, (0.3, 0.4, 1.0)).unwrap() < 1e-6);
    }

    #[test]
    fn normal_quantile_values() {
        let z = normal_quantile(0.95).unwrap();
        assert!((z - 1.959_963_984_540_054).abs() < 1e-9);
        assert!(normal_quantile(1e-12).unwrap().abs() < 1e-11);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn interval_half_width_and_degenerate_level() {
        let s = CountSample::from_counts(&[0, 2, 3, 4, 9, 1, 0, 5]);
        let est = fit(&s).unwrap();
        let (ca, cl) = confidence_intervals(&est, 0.95).unwrap();
        let (se_a, se_l) = est.standard_errors().unwrap();
        assert!((ca.half_width() - 1.959964 * se_a).abs() < 1e-6 * se_a);
        assert!((cl.half_width() - 1.959964 * se_l).abs() < 1e-6 * se_l);
        assert!(ca.contains(est.a_hat) && ca.lo <= ca.hi);
        let (ca0, _) = confidence_intervals(&est, 1e-12).unwrap();
        assert!((ca0.hi - ca0.lo).abs() < 1e-9);
        let mut bare = est;
        bare.sigma = None;
        assert!(matches!(
            confidence_intervals(&bare, 0.95),
            Err(Error::Misuse(_))
        ));
        assert!(confidence_intervals(&est, 1.5).is_err());
    }

    #[test]
    fn consistency_poisson_case() {
        let mut rs = RandomStream::new(31, 0);
        let s =
            CountSample::new(sample_discrete_stable_n(&mut rs, params(1.0, 4.0), 100_000)).unwrap();
        let est = fit(&s).unwrap();
        assert_eq!(est.branch, Branch::Root);
        assert!((est.a_hat - 1.0).abs() < 0.02, "{}", est.a_hat);
        assert!((est.lambda_hat - 4.0).abs() < 0.15, "{}", est.lambda_hat);
        assert!((est.p_star - 0.25).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn selection_dichotomy_and_permutation_invariance(
            xs in proptest::collection::vec(0u64..1000, 2..60),
            rot in 0usize..60,
        ) {
            let s = CountSample::from_counts(&xs);
            let sel = select_p_star(&s, DEFAULT_ROOT_TOL).unwrap();
            let g_half = pgf_at_complement(&s, 0.5);
            match sel.branch {
                Branch::Half => prop_assert!(g_half >= INV_E),
                Branch::Root => {
                    prop_assert!(g_half < INV_E);
                    let g = pgf_at_complement(&s, sel.p_star);
                    prop_assert!((g - INV_E).abs() <= DEFAULT_ROOT_TOL);
                }
            }
            let mut perm = xs.clone();
            perm.rotate_left(rot % xs.len());
            perm.reverse();
            let s2 = CountSample::from_counts(&perm);
            match (fit(&s), fit(&s2)) {
                (Ok(e1), Ok(e2)) => {
                    prop_assert_eq!(e1.branch, e2.branch);
                    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
                    prop_assert!(close(e1.p_star, e2.p_star));
                    prop_assert!(close(e1.a_hat, e2.a_hat));
                    prop_assert!(close(e1.lambda_hat, e2.lambda_hat));
                    let (c1, c2) = (e1.sigma.unwrap(), e2.sigma.unwrap());
                    prop_assert!(c1.is_symmetric() && c1.is_psd(1e-10));
                    for i in 0..2 { for j in 0..2 {
                        prop_assert!((c1.get(i, j) - c2.get(i, j)).abs() <= 1e-8 * c1.trace().abs().max(1e-300));
                    }}
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "fit disagreed across permutations"),
            }
        }
    }
}
