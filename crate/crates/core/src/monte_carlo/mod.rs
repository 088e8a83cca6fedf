//! Simulation harness: RRMSE and confidence-interval coverage over an
//! `(a, λ, n)` grid.
//!
//! Cell `c` (in grid order: `a`, then `λ`, then `n`) draws from
//! `RandomStream::new(seed, c)`, and replicate `r` of that cell from its
//! `substream(r)`. Aggregation runs in replicate order, so results are
//! independent of the number of worker threads.

mod config;
mod report;

pub use config::McConfig;
pub use report::{
    csv_string, emit_report, format_sig6, svg_file_name, write_csv, write_svgs, CSV_HEADER,
};

use rayon::prelude::*;

use crate::censoring::CountSample;
use crate::discrete_stable::{confidence_intervals, fit};
use crate::error::{Error, Result};
use crate::sampling::{sample_discrete_stable_n, RandomStream, StableParams};

/// Aggregated results for one `(a, λ, n)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct McCellResult {
    pub a: f64,
    pub lambda: f64,
    pub n: usize,
    /// `sqrt(mean((â - a)²)) / a`, as a fraction.
    pub rrmse_a: f64,
    pub rrmse_lambda: f64,
    /// Delta-method Monte Carlo standard errors of the two RRMSE values.
    pub rrmse_a_se: f64,
    pub rrmse_lambda_se: f64,
    pub coverage_a: f64,
    pub coverage_lambda: f64,
    pub mean_p_star: f64,
    /// Replicates that raised an estimation error; excluded from the aggregates.
    pub invalid_count: usize,
    /// Replicates included in the aggregates whose estimate was flagged invalid.
    pub flagged_count: usize,
    pub replicates: usize,
}

#[derive(Clone, Copy, Debug)]
struct Replicate {
    a_hat: f64,
    lambda_hat: f64,
    covers_a: bool,
    covers_lambda: bool,
    p_star: f64,
    valid: bool,
}

fn one_replicate(
    params: StableParams,
    n: usize,
    level: f64,
    stream: &mut RandomStream,
) -> Result<Replicate> {
    let sample = CountSample::new(sample_discrete_stable_n(stream, params, n))?;
    let est = fit(&sample)?;
    let (ci_a, ci_l) = confidence_intervals(&est, level)?;
    Ok(Replicate {
        a_hat: est.a_hat,
        lambda_hat: est.lambda_hat,
        covers_a: ci_a.contains(params.a()),
        covers_lambda: ci_l.contains(params.lambda()),
        p_star: est.p_star,
        valid: est.valid,
    })
}

fn check_cell(n: usize, replicates: usize, level: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("n", "n >= 2", n as f64));
    }
    if replicates == 0 {
        return Err(Error::invalid("replicates", "replicates >= 1", 0.0));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", "level in (0, 1)", level));
    }
    Ok(())
}

/// Simulate one cell. Replicate `r` draws from `stream.substream(r)`.
pub fn run_cell(
    params: StableParams,
    n: usize,
    replicates: usize,
    level: f64,
    stream: &RandomStream,
) -> Result<McCellResult> {
    check_cell(n, replicates, level)?;
    let reps: Vec<Option<Replicate>> = (0..replicates)
        .into_par_iter()
        .map(|r| one_replicate(params, n, level, &mut stream.substream(r as u64)).ok())
        .collect();

    let (a, lambda) = (params.a(), params.lambda());
    let mut used = 0usize;
    let (mut sq_a, mut sq_l, mut cov_a, mut cov_l, mut ps) = (0.0, 0.0, 0usize, 0usize, 0.0);
    let mut flagged = 0usize;
    for rep in reps.iter().flatten() {
        used += 1;
        sq_a += (rep.a_hat - a).powi(2);
        sq_l += (rep.lambda_hat - lambda).powi(2);
        cov_a += rep.covers_a as usize;
        cov_l += rep.covers_lambda as usize;
        ps += rep.p_star;
        flagged += !rep.valid as usize;
    }
    let k = used as f64;
    let rrmse_se = |truth: f64, mse: f64, sq: &dyn Fn(&Replicate) -> f64| {
        // sd of squared errors / sqrt(k), mapped through sqrt(·)/truth.
        let var = reps
            .iter()
            .flatten()
            .map(|r| (sq(r) - mse).powi(2))
            .sum::<f64>()
            / (k - 1.0);
        (var / k).sqrt() / (2.0 * mse.sqrt() * truth)
    };
    let rrmse_a_se = rrmse_se(a, sq_a / k, &|r| (r.a_hat - a).powi(2));
    let rrmse_lambda_se = rrmse_se(lambda, sq_l / k, &|r| (r.lambda_hat - lambda).powi(2));
    Ok(McCellResult {
        a,
        lambda,
        n,
        rrmse_a: (sq_a / k).sqrt() / a,
        rrmse_lambda: (sq_l / k).sqrt() / lambda,
        rrmse_a_se,
        rrmse_lambda_se,
        coverage_a: if used > 0 { cov_a as f64 / k } else { 0.0 },
        coverage_lambda: if used > 0 { cov_l as f64 / k } else { 0.0 },
        mean_p_star: ps / k,
        invalid_count: replicates - used,
        flagged_count: flagged,
        replicates,
    })
}

/// Run every cell of the grid on the current rayon pool.
pub fn run_grid(config: &McConfig) -> Result<Vec<McCellResult>> {
    run_grid_with_progress(config, |_| {})
}

/// [`run_grid`] on a dedicated pool with `threads` workers.
pub fn run_grid_with_threads(config: &McConfig, threads: usize) -> Result<Vec<McCellResult>> {
    run_grid_threaded(config, threads, |_| {})
}

/// [`run_grid_with_progress`] on a dedicated pool with `threads` workers.
pub fn run_grid_threaded(
    config: &McConfig,
    threads: usize,
    progress: impl Fn(&McCellResult) + Sync + Send,
) -> Result<Vec<McCellResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|_| Error::Misuse("failed to build thread pool"))?;
    pool.install(|| run_grid_with_progress(config, progress))
}

/// [`run_grid`], calling `progress` as each cell finishes (in completion order).
pub fn run_grid_with_progress(
    config: &McConfig,
    progress: impl Fn(&McCellResult) + Sync,
) -> Result<Vec<McCellResult>> {
    config.validate()?;
    let cells = config.cells();
    cells
        .par_iter()
        .enumerate()
        .map(|(index, &(a, lambda, n))| {
            let params = StableParams::new(a, lambda)?;
            let stream = RandomStream::new(config.master_seed, index as u64);
            let res = run_cell(params, n, config.replicates, config.level, &stream)?;
            progress(&res);
            Ok(res)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> McConfig {
        McConfig {
            a_values: vec![0.5, 1.0],
            lambda_values: vec![2.0],
            n_values: vec![50, 100],
            replicates: 40,
            level: 0.95,
            master_seed: 9,
        }
    }

    #[test]
    fn zero_lambda_is_rejected() {
        assert!(StableParams::new(1.0, 0.0).is_err());
        let mut cfg = tiny_config();
        cfg.lambda_values = vec![0.0];
        assert!(run_grid(&cfg).is_err());
    }

    #[test]
    fn single_cell_grid_equals_run_cell() {
        let cfg = McConfig {
            a_values: vec![0.75],
            lambda_values: vec![3.0],
            n_values: vec![80],
            replicates: 30,
            level: 0.9,
            master_seed: 4,
        };
        let grid = run_grid(&cfg).unwrap();
        let cell = run_cell(
            StableParams::new(0.75, 3.0).unwrap(),
            80,
            30,
            0.9,
            &RandomStream::new(4, 0),
        )
        .unwrap();
        assert_eq!(grid, vec![cell]);
    }

    #[test]
    fn grid_order_and_bounds() {
        let res = run_grid(&tiny_config()).unwrap();
        let keys: Vec<(f64, f64, usize)> = res.iter().map(|r| (r.a, r.lambda, r.n)).collect();
        assert_eq!(keys, tiny_config().cells());
        for r in &res {
            assert!((0.0..=1.0).contains(&r.coverage_a));
            assert!((0.0..=1.0).contains(&r.coverage_lambda));
            assert!(r.rrmse_a >= 0.0 && r.rrmse_lambda >= 0.0);
            assert!(r.rrmse_a.is_finite());
            assert_eq!(r.replicates, 40);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = tiny_config();
        let one = run_grid_with_threads(&cfg, 1).unwrap();
        let three = run_grid_with_threads(&cfg, 3).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn degenerate_replicates_are_counted() {
        // λ tiny: almost every sample of size 2 is all zeros.
        let res = run_cell(
            StableParams::new(1.0, 1e-6).unwrap(),
            2,
            20,
            0.95,
            &RandomStream::new(0, 0),
        )
        .unwrap();
        assert_eq!(res.invalid_count, 20);
        assert!(res.rrmse_a.is_nan());
        assert_eq!(res.coverage_a, 0.0);
    }
}
