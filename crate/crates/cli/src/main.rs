//! `censorfit` command-line front end.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use censorfit::discrete_stable::{self, confidence_intervals};
use censorfit::monte_carlo::{self, emit_report, format_sig6};
use censorfit::sampling::sample_discrete_stable_n;
use censorfit::{CountSample, Error, McConfig, RandomStream, StableParams};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "censorfit",
    version,
    about = "Fit and simulate discrete stable count data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a DS(a, λ) sample and write one count per line.
    Sample {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit DS(a, λ) to a file of counts.
    Estimate {
        input: PathBuf,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the Monte Carlo study described by a config file.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => 1,
            Error::Degenerate(_) => 3,
            Error::InvalidParameter { .. }
            | Error::EmptySample
            | Error::InvalidCount { .. }
            | Error::TooFewObservations { .. }
            | Error::Config { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    }
}

#[derive(Serialize)]
struct EstimateReport {
    a_hat: f64,
    lambda_hat: f64,
    p_star: f64,
    branch: &'static str,
    se_a: f64,
    se_lambda: f64,
    ci_a: [f64; 2],
    ci_lambda: [f64; 2],
    n: usize,
    valid: bool,
}

fn cmd_sample(
    a: f64,
    lambda: f64,
    n: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let params = StableParams::new(a, lambda)?;
    if n == 0 {
        return Err(Failure::usage("invalid n: 0 (must satisfy n >= 1)"));
    }
    let mut stream = RandomStream::new(seed, 0);
    let draws = sample_discrete_stable_n(&mut stream, params, n);
    let mut text = String::with_capacity(n * 4);
    for x in draws {
        text.push_str(&format!("{x}\n"));
    }
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| io_failure(&path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn read_counts(path: &Path) -> Result<CountSample, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || {
            Failure::usage(format!(
                "{}:{}: expected a nonnegative integer count, got {line:?}",
                path.display(),
                i + 1
            ))
        };
        let x: f64 = line.parse().map_err(|_| bad())?;
        if !(x.is_finite() && x >= 0.0 && x.fract() == 0.0) {
            return Err(bad());
        }
        values.push(x);
    }
    Ok(CountSample::new(values)?)
}

fn cmd_estimate(input: &Path, level: f64, format: Format) -> Result<(), Failure> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Failure::usage(format!(
            "invalid level: {level} (must satisfy level in (0, 1))"
        )));
    }
    let sample = read_counts(input)?;
    let est = discrete_stable::fit(&sample)?;
    let (ci_a, ci_l) = confidence_intervals(&est, level)?;
    let (se_a, se_lambda) = est.standard_errors().unwrap_or((f64::NAN, f64::NAN));
    let report = EstimateReport {
        a_hat: est.a_hat,
        lambda_hat: est.lambda_hat,
        p_star: est.p_star,
        branch: est.branch.as_str(),
        se_a,
        se_lambda,
        ci_a: [ci_a.lo, ci_a.hi],
        ci_lambda: [ci_l.lo, ci_l.hi],
        n: est.n,
        valid: est.valid,
    };
    let mut out = BufWriter::new(io::stdout().lock());
    let written = match format {
        Format::Json => serde_json::to_writer_pretty(&mut out, &report)
            .map_err(io::Error::from)
            .and_then(|_| writeln!(out)),
        Format::Text => write_text(&mut out, &report, level),
    };
    written
        .and_then(|_| out.flush())
        .map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn write_text(out: &mut impl Write, r: &EstimateReport, level: f64) -> io::Result<()> {
    let pct = level * 100.0;
    writeln!(out, "n          {}", r.n)?;
    writeln!(out, "branch     {}", r.branch)?;
    writeln!(out, "p_star     {}", r.p_star)?;
    writeln!(out, "a_hat      {}  (se {})", r.a_hat, r.se_a)?;
    writeln!(out, "lambda_hat {}  (se {})", r.lambda_hat, r.se_lambda)?;
    writeln!(out, "{pct}% CI a      [{}, {}]", r.ci_a[0], r.ci_a[1])?;
    writeln!(
        out,
        "{pct}% CI lambda [{}, {}]",
        r.ci_lambda[0], r.ci_lambda[1]
    )?;
    writeln!(out, "valid      {}", r.valid)
}

fn cmd_mc(config: &Path, out: &Path, threads: Option<usize>) -> Result<(), Failure> {
    let text = fs::read_to_string(config).map_err(|e| io_failure(config, e))?;
    let cfg = McConfig::parse(&text)?;
    cfg.validate()?;
    if threads == Some(0) {
        return Err(Failure::usage(
            "invalid threads: 0 (must satisfy threads >= 1)",
        ));
    }
    fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;

    let total = cfg.cells().len();
    let done = AtomicUsize::new(0);
    let progress = |r: &censorfit::McCellResult| {
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        eprintln!(
            "[{k}/{total}] a={} lambda={} n={}: rrmse_a={}% rrmse_lambda={}% cov_a={} cov_lambda={}",
            r.a,
            r.lambda,
            r.n,
            format_sig6(100.0 * r.rrmse_a),
            format_sig6(100.0 * r.rrmse_lambda),
            format_sig6(r.coverage_a),
            format_sig6(r.coverage_lambda),
        );
    };
    let results = match threads {
        Some(t) => monte_carlo::run_grid_threaded(&cfg, t, progress)?,
        None => monte_carlo::run_grid_with_progress(&cfg, progress)?,
    };
    let csv = out.join("report.csv");
    let svgs = emit_report(&results, cfg.level, &csv, out)?;
    eprintln!("wrote {} and {} charts", csv.display(), svgs.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample {
            a,
            lambda,
            n,
            seed,
            out,
        } => cmd_sample(a, lambda, n, seed, out),
        Command::Estimate {
            input,
            level,
            format,
        } => cmd_estimate(&input, level, format),
        Command::Mc {
            config,
            out,
            threads,
        } => cmd_mc(&config, &out, threads),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("censorfit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
