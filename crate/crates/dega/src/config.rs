//! Flat key-value sweep configuration files.
//!
//! Global keys come first, then one `[algorithm-id]` section per algorithm
//! entry (the same identifier may appear several times with different
//! parameters). Lines starting with `#` are comments. Unknown keys are
//! rejected with their line number, and `parse` / `serialize` round-trip
//! losslessly.
//!
//! ```text
//! benchmark = lo
//! n-start = 100
//! n-end = 3000
//! size-count = 10
//! repetitions = 50
//! master-seed = 7
//! budget = 500*n^2
//! protocol = time-to-optimum
//! normalization = n^2
//!
//! [dega-a]
//! lambda = (n*ln)^(2/3)
//! ```

use thiserror::Error;

use crate::algorithms::Algorithm;
use crate::benchmarks::Benchmark;
use crate::experiments::{AlgorithmSpec, ExperimentConfig};

#[derive(Debug, Error, PartialEq)]
pub enum SweepConfigError {
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {detail}")]
    BadValue { line: usize, detail: String },
    #[error("line {line}: expected `key = value` or `[algorithm]`")]
    Malformed { line: usize },
    #[error("missing required key `benchmark`")]
    MissingBenchmark,
}

pub fn parse_sweep_config(text: &str) -> Result<ExperimentConfig, SweepConfigError> {
    // First pass: find the benchmark so the remaining keys override its
    // defaults.
    let mut benchmark: Option<Benchmark> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.starts_with('[') {
            break;
        }
        if let Some((k, v)) = split_kv(t) {
            if k == "benchmark" {
                benchmark = Some(v.parse().map_err(|e| SweepConfigError::BadValue {
                    line,
                    detail: e,
                })?);
            }
        }
    }
    let benchmark = benchmark.ok_or(SweepConfigError::MissingBenchmark)?;
    let mut cfg = ExperimentConfig::defaults(benchmark);
    cfg.algorithms.clear();

    let mut in_section = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let algorithm: Algorithm =
                name.trim().parse().map_err(|e| SweepConfigError::BadValue { line, detail: e })?;
            cfg.algorithms.push(AlgorithmSpec::new(algorithm));
            in_section = true;
            continue;
        }
        let Some((key, value)) = split_kv(t) else {
            return Err(SweepConfigError::Malformed { line });
        };
        let bad = |detail: String| SweepConfigError::BadValue { line, detail };
        if in_section {
            let spec = cfg.algorithms.last_mut().expect("inside a section");
            match key {
                "lambda" => spec.lambda = Some(value.parse().map_err(bad)?),
                "p-c" => {
                    spec.p_c =
                        Some(value.parse().map_err(|e| bad(format!("bad p-c: {e}")))?)
                }
                "k" => spec.k = Some(value.parse().map_err(bad)?),
                "mu" => spec.mu = Some(value.parse().map_err(bad)?),
                "cap" => spec.cap = Some(value.parse().map_err(bad)?),
                other => {
                    return Err(SweepConfigError::UnknownKey {
                        line,
                        key: other.to_string(),
                    })
                }
            }
        } else if key == "benchmark" {
            // Already consumed by the first pass.
        } else {
            apply_global_key(&mut cfg, key, value, line)?;
        }
    }
    Ok(cfg)
}

/// Sets one global configuration key; also used for command-line
/// `key=value` overrides (with line 0).
pub fn apply_global_key(
    cfg: &mut ExperimentConfig,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), SweepConfigError> {
    let bad = |detail: String| SweepConfigError::BadValue { line, detail };
    match key {
        "n-start" => cfg.n_start = parse_num(value, line)?,
        "n-end" => cfg.n_end = parse_num(value, line)?,
        "size-count" => cfg.size_count = parse_num(value, line)?,
        "repetitions" => cfg.repetitions = parse_num(value, line)?,
        "master-seed" => cfg.master_seed = parse_num(value, line)?,
        "budget" => cfg.budget = value.parse().map_err(bad)?,
        "protocol" => cfg.protocol = value.parse().map_err(bad)?,
        "normalization" => cfg.normalization = value.parse().map_err(bad)?,
        "pilot-runs" => cfg.pilot_runs = parse_num(value, line)?,
        "pilot-budget" => cfg.pilot_budget = value.parse().map_err(bad)?,
        other => {
            return Err(SweepConfigError::UnknownKey {
                line,
                key: other.to_string(),
            })
        }
    }
    Ok(())
}

fn split_kv(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

fn parse_num<T: std::str::FromStr>(value: &str, line: usize) -> Result<T, SweepConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| SweepConfigError::BadValue {
        line,
        detail: format!("bad number {value:?}: {e}"),
    })
}

/// Canonical serialization; `parse_sweep_config` reads it back losslessly.
pub fn serialize_sweep_config(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("benchmark", cfg.benchmark.to_string());
    kv("n-start", cfg.n_start.to_string());
    kv("n-end", cfg.n_end.to_string());
    kv("size-count", cfg.size_count.to_string());
    kv("repetitions", cfg.repetitions.to_string());
    kv("master-seed", cfg.master_seed.to_string());
    kv("budget", cfg.budget.to_string());
    kv("protocol", cfg.protocol.to_string());
    kv("normalization", cfg.normalization.to_string());
    kv("pilot-runs", cfg.pilot_runs.to_string());
    kv("pilot-budget", cfg.pilot_budget.to_string());
    for spec in &cfg.algorithms {
        out.push('\n');
        out.push_str(&format!("[{}]\n", spec.algorithm));
        if let Some(r) = spec.lambda {
            out.push_str(&format!("lambda = {r}\n"));
        }
        if let Some(p) = spec.p_c {
            out.push_str(&format!("p-c = {p}\n"));
        }
        if let Some(r) = spec.k {
            out.push_str(&format!("k = {r}\n"));
        }
        if let Some(r) = spec.mu {
            out.push_str(&format!("mu = {r}\n"));
        }
        if let Some(c) = spec.cap {
            out.push_str(&format!("cap = {c}\n"));
        }
    }
    out
}
