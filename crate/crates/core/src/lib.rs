//! Parameter estimation for heavy-tailed count distributions by geometric censoring.
//!
//! A count variable `X` whose moments may not exist is replaced by its
//! `p`-censoring `Y = X·1{X < T}` with `T ~ Geometric(p)`. `Y` always has
//! finite moments, and its p.g.f. is a simple function of the p.g.f. of `X`,
//! so any two-parameter family whose parameters can be recovered from
//! `(p, g(1-p), E[Y])` admits closed-form moment-type estimators together with
//! a delta-method covariance estimate.
//!
//! Modules:
//!
//! - [`sampling`]: seedable streams and variate generators (geometric, Poisson,
//!   positive stable, discrete stable).
//! - [`censoring`]: the censoring transform, empirical p.g.f. and censored moments.
//! - [`generic`]: the family-agnostic estimator and its influence-function covariance.
//! - [`discrete_stable`]: the discrete stable instantiation with data-driven
//!   censoring parameter and normal-theory confidence intervals.
//! - [`monte_carlo`]: the simulation harness (RRMSE, coverage) and report emission.

pub mod censoring;
pub mod discrete_stable;
mod error;
pub mod generic;
pub mod monte_carlo;
pub mod sampling;
mod util;

pub use censoring::{CountSample, EmpiricalSummaries, PgfTriple};
pub use discrete_stable::{Branch, ConfidenceInterval, StableEstimate};
pub use error::{Error, Result};
pub use generic::{EstimateResult, FamilyMap, Matrix2};
pub use monte_carlo::{McCellResult, McConfig};
pub use sampling::{Count, RandomStream, StableParams};
