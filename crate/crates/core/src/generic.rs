//! Family-agnostic estimation through the censored first moment.
//!
//! A two-parameter family fits this framework when its parameters can be
//! written as `θ₁ = f₁(p, g(1-p), E[Y])` and `θ₂ = f₂(p, g(1-p), θ₁)` for
//! known smooth `f₁`, `f₂`. Estimates substitute `ĝ(1-p)` and the censored
//! sample mean, averaged over the censoring draws; when `f₁` is affine in its
//! third argument that average has the closed form [`censored_moment_cond`].
//!
//! The covariance of `√n(θ̂ - θ)` is estimated by the sample covariance of
//! per-observation influence terms `W*₁ᵢ`, `W*₂ᵢ` (see [`influence_rows`]).
//!
//! [`censored_moment_cond`]: crate::censoring::censored_moment_cond

use rayon::prelude::*;

use crate::censoring::{
    censored_mean_once, censored_moment_cond_unchecked, pgf_at_complement, CountSample,
};
use crate::error::{Error, Result};
use crate::sampling::RandomStream;
use crate::util::{mean, pow_complement};

/// Default replicate count for [`estimate_mc`].
pub const DEFAULT_REPLICATES: usize = 1000;

/// Magnitudes below this are treated as division by zero.
pub const SINGULAR_MAGNITUDE: f64 = 1e-300;

/// The reparameterisation `(x, y, z) ↦ θ` with `x = p`, `y = g(1-p)`, and
/// `z = E[Y]` for `f₁` or `z = θ₁` for `f₂`.
pub trait FamilyMap {
    fn f1(&self, x: f64, y: f64, z: f64) -> f64;
    fn f2(&self, x: f64, y: f64, z: f64) -> f64;
    /// `[∂f₁/∂x, ∂f₁/∂y, ∂f₁/∂z]`
    fn grad_f1(&self, x: f64, y: f64, z: f64) -> [f64; 3];
    /// `[∂f₂/∂x, ∂f₂/∂y, ∂f₂/∂z]`
    fn grad_f2(&self, x: f64, y: f64, z: f64) -> [f64; 3];
    /// True iff `f₁` is affine in `z`.
    fn linear_in_moment(&self) -> bool;

    /// Reason the point is a singularity of `f₁`/`f₂`, if it is one.
    fn singularity(&self, _x: f64, _y: f64, _z: f64) -> Option<&'static str> {
        None
    }
}

/// Symmetric 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Matrix2(pub [[f64; 2]; 2]);

impl Matrix2 {
    pub fn zeros() -> Self {
        Matrix2([[0.0; 2]; 2])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn is_symmetric(&self) -> bool {
        self.0[0][1] == self.0[1][0]
    }

    /// Positive semidefinite up to `tol · trace`.
    pub fn is_psd(&self, rel_tol: f64) -> bool {
        let slack = rel_tol * self.trace().abs().max(f64::MIN_POSITIVE);
        self.0[0][0] >= -slack
            && self.0[1][1] >= -slack
            && self.det() >= -slack * self.trace().abs()
    }

    /// Unbiased (divisor `n - 1`) sample covariance of paired observations.
    pub fn sample_covariance(rows: &[[f64; 2]]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewObservations { n, required: 2 });
        }
        let m0 = mean(rows.iter().map(|r| r[0]));
        let m1 = mean(rows.iter().map(|r| r[1]));
        let (mut s00, mut s01, mut s11) = (0.0, 0.0, 0.0);
        for r in rows {
            let d0 = r[0] - m0;
            let d1 = r[1] - m1;
            s00 += d0 * d0;
            s01 += d0 * d1;
            s11 += d1 * d1;
        }
        let k = (n - 1) as f64;
        let c = Matrix2([[s00 / k, s01 / k], [s01 / k, s11 / k]]);
        if c.0.iter().flatten().all(|v| v.is_finite()) {
            Ok(c)
        } else {
            Err(Error::NonFinite {
                what: "covariance",
                replicate: None,
            })
        }
    }
}

/// Point estimates at a given censoring level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointEstimate {
    pub theta1: f64,
    pub theta2: f64,
    pub p_star: f64,
}

/// Point estimates with their estimated asymptotic covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateResult {
    pub theta1: f64,
    pub theta2: f64,
    pub p_star: f64,
    pub sigma: Matrix2,
    pub n: usize,
}

/// Result of [`estimate_mc`], with the spread of the `f₁` replicates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub theta1: f64,
    pub theta2: f64,
    /// Standard deviation of `f₁` across replicates (0 when `R = 1`).
    pub replicate_sd: f64,
}

/// How the censoring indicator `1{Xᵢ < Tᵢ}` is generated in [`estimate_mc_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CensoringDraw {
    Geometric,
    /// Indicator fixed at 1, i.e. the plug-in on the raw sample.
    Disabled,
}

fn check_p_star(p: f64) -> Result<()> {
    if p > 0.0 && p <= 0.5 {
        Ok(())
    } else {
        Err(Error::invalid("p_star", "p_star in (0, 1/2]", p))
    }
}

fn eval_checked<F: FamilyMap + ?Sized>(
    fam: &F,
    point: (f64, f64, f64),
    which: u8,
    replicate: Option<usize>,
) -> Result<f64> {
    let (x, y, z) = point;
    if let Some(why) = fam.singularity(x, y, z) {
        return Err(Error::Degenerate(why.to_string()));
    }
    let v = if which == 1 {
        fam.f1(x, y, z)
    } else {
        fam.f2(x, y, z)
    };
    if v.is_finite() {
        Ok(v)
    } else if replicate.is_some() {
        Err(Error::NonFinite {
            what: if which == 1 { "f1" } else { "f2" },
            replicate,
        })
    } else {
        Err(Error::Degenerate(format!(
            "f{which} is not finite at (x, y, z) = ({x}, {y}, {z})"
        )))
    }
}

/// Estimates via the conditional censored moment. Requires `f₁` affine in `z`.
pub fn estimate_closed<F: FamilyMap + ?Sized>(
    sample: &CountSample,
    p_star: f64,
    fam: &F,
) -> Result<PointEstimate> {
    if !fam.linear_in_moment() {
        return Err(Error::Misuse(
            "closed-form estimation needs f1 affine in the moment; use estimate_mc",
        ));
    }
    check_p_star(p_star)?;
    let y = pgf_at_complement(sample, p_star);
    let z = censored_moment_cond_unchecked(sample, p_star);
    let theta1 = eval_checked(fam, (p_star, y, z), 1, None)?;
    let theta2 = eval_checked(fam, (p_star, y, theta1), 2, None)?;
    Ok(PointEstimate {
        theta1,
        theta2,
        p_star,
    })
}

/// Estimates by averaging `f₁` over `r` independent censoring replicates.
pub fn estimate_mc<F: FamilyMap + Sync + ?Sized>(
    sample: &CountSample,
    p_star: f64,
    fam: &F,
    r: usize,
    stream: &RandomStream,
) -> Result<MonteCarloEstimate> {
    estimate_mc_with(sample, p_star, fam, r, stream, CensoringDraw::Geometric)
}

/// [`estimate_mc`] with a selectable censoring draw. Replicate `k` uses
/// `stream.substream(k)`, so the result does not depend on scheduling.
pub fn estimate_mc_with<F: FamilyMap + Sync + ?Sized>(
    sample: &CountSample,
    p_star: f64,
    fam: &F,
    r: usize,
    stream: &RandomStream,
    draw: CensoringDraw,
) -> Result<MonteCarloEstimate> {
    if r == 0 {
        return Err(Error::invalid("R", "R >= 1", 0.0));
    }
    check_p_star(p_star)?;
    let y = pgf_at_complement(sample, p_star);
    let values = sample.values();
    let f1s = (0..r)
        .into_par_iter()
        .map(|k| {
            let m = match draw {
                CensoringDraw::Geometric => {
                    censored_mean_once(values, p_star, &mut stream.substream(k as u64))
                }
                CensoringDraw::Disabled => mean(values.iter().copied()),
            };
            eval_checked(fam, (p_star, y, m), 1, Some(k))
        })
        .collect::<Result<Vec<f64>>>()?;
    let theta1 = mean(f1s.iter().copied());
    let replicate_sd = if r > 1 {
        (f1s.iter().map(|v| (v - theta1).powi(2)).sum::<f64>() / (r - 1) as f64).sqrt()
    } else {
        0.0
    };
    let theta2 = eval_checked(fam, (p_star, y, theta1), 2, None)?;
    Ok(MonteCarloEstimate {
        theta1,
        theta2,
        replicate_sd,
    })
}

/// Per-observation influence terms.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceSet {
    pub z: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub x_double_prime: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Influence terms at `P*₀ = (p*, ĝ(1-p*), m̂)` and `P*₁ = (p*, ĝ(1-p*), θ̂₁)`.
///
/// `z(i)` supplies the realisation `Zᵢ` of the linearisation of `p* - p`;
/// pass `|_| 0.0` when the censoring level is fixed in advance. The
/// expectations appearing in `X′ᵢ`, `X″ᵢ` are replaced by sample means.
pub fn influence_rows<F: FamilyMap + ?Sized>(
    sample: &CountSample,
    est: &PointEstimate,
    fam: &F,
    z: impl Fn(usize) -> f64,
) -> Result<InfluenceSet> {
    let p = est.p_star;
    check_p_star(p)?;
    let q = 1.0 - p;
    let xs = sample.values();
    let y = pgf_at_complement(sample, p);
    let m = censored_moment_cond_unchecked(sample, p);

    let pow: Vec<f64> = xs.iter().map(|&x| pow_complement(p, x)).collect();
    // Sample analogues of E[X(1-p)^(X-1)] and E[X²(1-p)^(X-1)].
    let e1 = mean(xs.iter().zip(&pow).map(|(&x, &w)| x * w / q));
    let e2 = mean(xs.iter().zip(&pow).map(|(&x, &w)| x * x * w / q));

    let grad1 = fam.grad_f1(p, y, m);
    let grad2 = fam.grad_f2(p, y, est.theta1);
    if !all_finite(&grad1) || !all_finite(&grad2) {
        return Err(Error::NonFinite {
            what: "partial derivatives",
            replicate: None,
        });
    }
    let [d1x, d1y, d1z] = grad1;
    let [d2x, d2y, d2z] = grad2;

    let zs: Vec<f64> = (0..xs.len()).map(&z).collect();
    let x_prime: Vec<f64> = pow.iter().zip(&zs).map(|(&w, &zi)| w - e1 * zi).collect();
    let x_double_prime: Vec<f64> = xs
        .iter()
        .zip(&pow)
        .zip(&zs)
        .map(|((&x, &w), &zi)| x * w - e2 * zi)
        .collect();

    let cz = d2x + d2z * d1x;
    let cy = d2y + d2z * d1y;
    let czz = d2z * d1z;
    let mut w1 = Vec::with_capacity(xs.len());
    let mut w2 = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        w1.push(d1x * zs[i] + d1y * x_prime[i] + d1z * x_double_prime[i]);
        w2.push(cz * zs[i] + cy * x_prime[i] + czz * x_double_prime[i]);
    }
    if !all_finite(&w1) || !all_finite(&w2) || !all_finite(&zs) {
        return Err(Error::NonFinite {
            what: "influence terms",
            replicate: None,
        });
    }
    Ok(InfluenceSet {
        z: zs,
        x_prime,
        x_double_prime,
        w1,
        w2,
    })
}

/// Sample covariance of `[W*₁ᵢ, W*₂ᵢ]`, estimating the asymptotic covariance
/// of `√n(θ̂ - θ)`.
pub fn covariance_estimate<F: FamilyMap + ?Sized>(
    sample: &CountSample,
    est: &PointEstimate,
    fam: &F,
    z: impl Fn(usize) -> f64,
) -> Result<Matrix2> {
    if sample.len() < 2 {
        return Err(Error::TooFewObservations {
            n: sample.len(),
            required: 2,
        });
    }
    let inf = influence_rows(sample, est, fam, z)?;
    let rows: Vec<[f64; 2]> = inf.w1.iter().zip(&inf.w2).map(|(&a, &b)| [a, b]).collect();
    Matrix2::sample_covariance(&rows)
}

/// Closed-form estimates plus covariance in one call.
pub fn fit_closed<F: FamilyMap + ?Sized>(
    sample: &CountSample,
    p_star: f64,
    fam: &F,
    z: impl Fn(usize) -> f64,
) -> Result<EstimateResult> {
    let est = estimate_closed(sample, p_star, fam)?;
    let sigma = covariance_estimate(sample, &est, fam, z)?;
    Ok(EstimateResult {
        theta1: est.theta1,
        theta2: est.theta2,
        p_star,
        sigma,
        n: sample.len(),
    })
}

/// Largest discrepancy between the supplied partials and central differences.
///
/// Each discrepancy is `|analytic - numeric| / max(|numeric|, 1)`: relative
/// for derivatives of magnitude above one, absolute below. The step is
/// `ε^(1/3) · max(|coordinate|, 1)`.
pub fn check_derivatives<F: FamilyMap + ?Sized>(fam: &F, point: (f64, f64, f64)) -> Result<f64> {
    let h_unit = f64::EPSILON.cbrt();
    let base = [point.0, point.1, point.2];
    let mut worst = 0.0f64;
    for which in [1u8, 2] {
        let eval = |v: [f64; 3]| {
            if which == 1 {
                fam.f1(v[0], v[1], v[2])
            } else {
                fam.f2(v[0], v[1], v[2])
            }
        };
        let analytic = if which == 1 {
            fam.grad_f1(point.0, point.1, point.2)
        } else {
            fam.grad_f2(point.0, point.1, point.2)
        };
        for k in 0..3 {
            let h = h_unit * base[k].abs().max(1.0);
            let mut up = base;
            let mut down = base;
            up[k] += h;
            down[k] -= h;
            let numeric = (eval(up) - eval(down)) / (up[k] - down[k]);
            if !numeric.is_finite() || !analytic[k].is_finite() {
                return Err(Error::NonFinite {
                    what: "derivative check",
                    replicate: None,
                });
            }
            let err = (analytic[k] - numeric).abs() / numeric.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
