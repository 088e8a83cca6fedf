use std::collections::HashMap;

use crate::error::{Error, Result};

/// Simulation grid and replication settings.
#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub a_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub replicates: usize,
    pub level: f64,
    pub master_seed: u64,
}

const KEYS: [&str; 6] = [
    "a_values",
    "lambda_values",
    "n_values",
    "replicates",
    "level",
    "seed",
];

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| config_err(key, format!("invalid value for {key}: {s:?}")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse::<T>()
        .map_err(|_| config_err(key, format!("invalid value for {key}: {:?}", raw.trim())))
}

impl McConfig {
    /// The reference design: `a ∈ {0.25, 0.5, 0.75, 1}`, `λ = 0.5, 1, ..., 12`,
    /// `n ∈ {100, 200}`, 5000 replicates, 95% intervals.
    pub fn reference_grid(master_seed: u64) -> Self {
        McConfig {
            a_values: vec![0.25, 0.5, 0.75, 1.0],
            lambda_values: (1..=24).map(|k| k as f64 * 0.5).collect(),
            n_values: vec![100, 200],
            replicates: 5000,
            level: 0.95,
            master_seed,
        }
    }

    /// Parse flat `key = value` text. Lists are comma-separated; `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: HashMap<&str, &str> = HashMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected key=value, got {line:?}")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(config_err(key, format!("unknown key: {key}")));
            }
            if map.insert(key, value).is_some() {
                return Err(config_err(key, format!("duplicate key: {key}")));
            }
        }
        let get = |key: &str| {
            map.get(key)
                .copied()
                .ok_or_else(|| config_err(key, format!("missing key: {key}")))
        };
        let cfg = McConfig {
            a_values: parse_list("a_values", get("a_values")?)?,
            lambda_values: parse_list("lambda_values", get("lambda_values")?)?,
            n_values: parse_list("n_values", get("n_values")?)?,
            replicates: parse_one("replicates", get("replicates")?)?,
            level: parse_one("level", get("level")?)?,
            master_seed: parse_one("seed", get("seed")?)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_values.is_empty() {
            return Err(config_err("a_values", "a_values must not be empty"));
        }
        if let Some(&a) = self.a_values.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
            return Err(config_err(
                "a_values",
                format!("a must lie in (0, 1], got {a}"),
            ));
        }
        if self.lambda_values.is_empty() {
            return Err(config_err(
                "lambda_values",
                "lambda_values must not be empty",
            ));
        }
        if let Some(&l) = self
            .lambda_values
            .iter()
            .find(|&&l| !(l > 0.0 && l.is_finite()))
        {
            return Err(config_err(
                "lambda_values",
                format!("lambda must be > 0, got {l}"),
            ));
        }
        if self.n_values.is_empty() {
            return Err(config_err("n_values", "n_values must not be empty"));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(config_err(
                "n_values",
                format!("n must be at least 2, got {n}"),
            ));
        }
        if self.replicates == 0 {
            return Err(config_err("replicates", "replicates must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(config_err(
                "level",
                format!("level must lie in (0, 1), got {}", self.level),
            ));
        }
        Ok(())
    }

    /// `(a, λ, n)` for every cell, in grid order.
    pub fn cells(&self) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::with_capacity(
            self.a_values.len() * self.lambda_values.len() * self.n_values.len(),
        );
        for &a in &self.a_values {
            for &l in &self.lambda_values {
                for &n in &self.n_values {
                    out.push((a, l, n));
                }
            }
        }
        out
    }
}
