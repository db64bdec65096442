//! Experimental protocol: log-spaced size sweeps with seeded repetitions,
//! summary statistics, runtime normalization, log-log regression of the
//! empirical scaling degree, and the time-to-target procedure for the MIVS
//! benchmark.
//!
//! A sweep is a pure function of its configuration: every run's seed is
//! derived from the master seed and the (algorithm, size, repetition) triple,
//! so record sets are bit-identical across reruns and independent of
//! scheduling.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::algorithms::{run, Algorithm, ConfigError, OptimizerConfig};
use crate::benchmarks::Benchmark;
use crate::rng::{derive_seed, RandomSource};

/// Size-dependent parameter rules for lambda-style parameters.
/// Parsed from / serialized to the spellings shown on each variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamRule {
    /// `"17"` — a constant.
    Const(u64),
    /// `"ln"` — natural logarithm of n.
    LnN,
    /// `"sqrt(ln)"` — square root of ln n.
    SqrtLnN,
    /// `"n^(1/3)"`.
    CbrtN,
    /// `"n^(1/2)"`.
    SqrtN,
    /// `"n^(2/3)"`.
    NPow23,
    /// `"(n*ln)^(2/3)"` — the proof-optimal growth for the diversity
    /// exploitation parameter.
    NLnNPow23,
    /// `"sqrt(n)*ln"` — the UMDA population default.
    SqrtNLnN,
}

impl ParamRule {
    /// Rounds the rule value at size `n`, clamped from below.
    pub fn resolve(self, n: usize, min: u64) -> u64 {
        let n = n as f64;
        let v = match self {
            ParamRule::Const(k) => k as f64,
            ParamRule::LnN => n.ln(),
            ParamRule::SqrtLnN => n.ln().sqrt(),
            ParamRule::CbrtN => n.powf(1.0 / 3.0),
            ParamRule::SqrtN => n.sqrt(),
            ParamRule::NPow23 => n.powf(2.0 / 3.0),
            ParamRule::NLnNPow23 => (n * n.ln()).powf(2.0 / 3.0),
            ParamRule::SqrtNLnN => n.sqrt() * n.ln(),
        };
        (v.round() as u64).max(min)
    }
}

impl fmt::Display for ParamRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamRule::Const(k) => write!(f, "{k}"),
            ParamRule::LnN => f.write_str("ln"),
            ParamRule::SqrtLnN => f.write_str("sqrt(ln)"),
            ParamRule::CbrtN => f.write_str("n^(1/3)"),
            ParamRule::SqrtN => f.write_str("n^(1/2)"),
            ParamRule::NPow23 => f.write_str("n^(2/3)"),
            ParamRule::NLnNPow23 => f.write_str("(n*ln)^(2/3)"),
            ParamRule::SqrtNLnN => f.write_str("sqrt(n)*ln"),
        }
    }
}

impl FromStr for ParamRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ln" => Ok(ParamRule::LnN),
            "sqrt(ln)" => Ok(ParamRule::SqrtLnN),
            "n^(1/3)" => Ok(ParamRule::CbrtN),
            "n^(1/2)" => Ok(ParamRule::SqrtN),
            "n^(2/3)" => Ok(ParamRule::NPow23),
            "(n*ln)^(2/3)" => Ok(ParamRule::NLnNPow23),
            "sqrt(n)*ln" => Ok(ParamRule::SqrtNLnN),
            other => other
                .parse::<u64>()
                .map(ParamRule::Const)
                .map_err(|_| format!("unknown parameter rule {other:?}")),
        }
    }
}

/// Evaluation budgets as a function of the problem size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BudgetRule {
    /// `"1000000"` — fixed count.
    Fixed(u64),
    /// `"500*n^2"`.
    TimesN2(f64),
    /// `"30*n*ln"` — c * n * ln(n), rounded up.
    TimesNLnN(f64),
}

impl BudgetRule {
    pub fn resolve(self, n: usize) -> u64 {
        let nf = n as f64;
        match self {
            BudgetRule::Fixed(v) => v,
            BudgetRule::TimesN2(c) => (c * nf * nf).ceil() as u64,
            BudgetRule::TimesNLnN(c) => (c * nf * nf.ln()).ceil() as u64,
        }
    }
}

impl fmt::Display for BudgetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetRule::Fixed(v) => write!(f, "{v}"),
            BudgetRule::TimesN2(c) => write!(f, "{c}*n^2"),
            BudgetRule::TimesNLnN(c) => write!(f, "{c}*n*ln"),
        }
    }
}

impl FromStr for BudgetRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let coeff = |prefix: &str| -> Result<f64, String> {
            prefix
                .parse::<f64>()
                .map_err(|_| format!("bad budget coefficient in {s:?}"))
        };
        if let Some(c) = s.strip_suffix("*n^2") {
            Ok(BudgetRule::TimesN2(coeff(c)?))
        } else if let Some(c) = s.strip_suffix("*n*ln") {
            Ok(BudgetRule::TimesNLnN(coeff(c)?))
        } else {
            s.parse::<u64>()
                .map(BudgetRule::Fixed)
                .map_err(|_| format!("unknown budget rule {s:?}"))
        }
    }
}

/// Display normalization of mean runtimes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    None,
    N2,
    NLnN,
}

impl Normalization {
    pub fn divisor(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Normalization::None => 1.0,
            Normalization::N2 => nf * nf,
            Normalization::NLnN => nf * nf.ln(),
        }
    }

    /// The conventional normalization per benchmark family.
    pub fn default_for(benchmark: Benchmark) -> Self {
        match benchmark {
            Benchmark::LeadingOnes => Normalization::N2,
            Benchmark::OneMax | Benchmark::Lfhw => Normalization::NLnN,
            Benchmark::Mivs => Normalization::None,
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::None => "none",
            Normalization::N2 => "n^2",
            Normalization::NLnN => "n*ln",
        })
    }
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Normalization::None),
            "n^2" => Ok(Normalization::N2),
            "n*ln" => Ok(Normalization::NLnN),
            other => Err(format!("unknown normalization {other:?}; valid: none, n^2, n*ln")),
        }
    }
}

/// Per-phase evaluation cap rules for the diversity-exploiting GA.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapRule {
    /// `"lambda*ln"` — ceil(lambda * ln n).
    LambdaLnN,
    /// `"5000"` — fixed count.
    Fixed(u64),
}

impl CapRule {
    pub fn resolve(self, n: usize, lambda: u64) -> u64 {
        match self {
            CapRule::LambdaLnN => (lambda as f64 * (n as f64).ln()).ceil() as u64,
            CapRule::Fixed(v) => v,
        }
    }
}

impl fmt::Display for CapRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapRule::LambdaLnN => f.write_str("lambda*ln"),
            CapRule::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for CapRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "lambda*ln" {
            Ok(CapRule::LambdaLnN)
        } else {
            s.parse::<u64>()
                .map(CapRule::Fixed)
                .map_err(|_| format!("unknown cap rule {s:?}"))
        }
    }
}

/// An algorithm plus its size-dependent parameter rules.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmSpec {
    pub algorithm: Algorithm,
    pub lambda: Option<ParamRule>,
    pub p_c: Option<f64>,
    pub k: Option<ParamRule>,
    pub mu: Option<ParamRule>,
    pub cap: Option<CapRule>,
}

impl AlgorithmSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            lambda: None,
            p_c: None,
            k: None,
            mu: None,
            cap: None,
        }
    }

    pub fn with_lambda(mut self, rule: ParamRule) -> Self {
        self.lambda = Some(rule);
        self
    }

    /// Identifier plus parameter annotation, e.g. `dega-a[lambda=2;cap=lambda*ln]`.
    /// Used as the algorithm column of summary and regression outputs.
    pub fn label(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if let Some(r) = self.lambda {
            parts.push(format!("lambda={r}"));
        }
        if let Some(p) = self.p_c {
            parts.push(format!("p-c={p}"));
        }
        if let Some(r) = self.k {
            parts.push(format!("k={r}"));
        }
        if let Some(r) = self.mu {
            parts.push(format!("mu={r}"));
        }
        if let Some(c) = self.cap {
            parts.push(format!("cap={c}"));
        }
        if parts.is_empty() {
            self.algorithm.id().to_string()
        } else {
            format!("{}[{}]", self.algorithm.id(), parts.join(";"))
        }
    }

    /// Resolves the rules at size `n` into a concrete run configuration.
    pub fn resolve(
        &self,
        n: usize,
        budget: u64,
        target: Option<f64>,
    ) -> Result<OptimizerConfig, ConfigError> {
        let lambda_min = if self.algorithm == Algorithm::DegaA { 2 } else { 1 };
        let mut cfg = OptimizerConfig::new(self.algorithm, budget);
        cfg.target = target;
        cfg.lambda = self.lambda.map(|r| r.resolve(n, lambda_min));
        cfg.p_c = self.p_c;
        cfg.k = self.k.map(|r| r.resolve(n, 1));
        cfg.mu = self.mu.map(|r| r.resolve(n, 1));
        cfg.exploitation_cap = match (self.cap, cfg.lambda) {
            (Some(rule), Some(lambda)) => Some(rule.resolve(n, lambda)),
            (Some(CapRule::Fixed(v)), None) => Some(v),
            (Some(CapRule::LambdaLnN), None) => {
                return Err(ConfigError::MissingParameter {
                    algorithm: self.algorithm.id(),
                    name: "lambda (required by cap rule)",
                })
            }
            (None, _) => None,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Protocol {
    /// Run until the known optimum (or an explicit target) is evaluated.
    #[default]
    TimeToOptimum,
    /// MIVS procedure: derive the target from (1+1)-EA pilots, cap candidate
    /// runs, count capped runs at the cap value.
    TimeToTarget,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::TimeToOptimum => "time-to-optimum",
            Protocol::TimeToTarget => "time-to-target",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time-to-optimum" => Ok(Protocol::TimeToOptimum),
            "time-to-target" => Ok(Protocol::TimeToTarget),
            other => Err(format!(
                "unknown protocol {other:?}; valid: time-to-optimum, time-to-target"
            )),
        }
    }
}

/// Declarative sweep: algorithms x sizes x repetitions under one protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub algorithms: Vec<AlgorithmSpec>,
    pub n_start: usize,
    pub n_end: usize,
    pub size_count: usize,
    pub repetitions: u32,
    pub master_seed: u64,
    pub budget: BudgetRule,
    pub protocol: Protocol,
    pub normalization: Normalization,
    /// Pilot runs defining the time-to-target fitness.
    pub pilot_runs: u32,
    pub pilot_budget: BudgetRule,
}

impl ExperimentConfig {
    /// Harness defaults for a benchmark: 10 log-spaced sizes, 50 repetitions
    /// (100 for time-to-target), a 500 n^2 optimum budget or a 30 n ln n
    /// target cap, and the conventional normalization.
    pub fn defaults(benchmark: Benchmark) -> Self {
        let protocol = match benchmark {
            Benchmark::Mivs => Protocol::TimeToTarget,
            _ => Protocol::TimeToOptimum,
        };
        let (repetitions, budget) = match protocol {
            Protocol::TimeToOptimum => (50, BudgetRule::TimesN2(500.0)),
            Protocol::TimeToTarget => (100, BudgetRule::TimesNLnN(30.0)),
        };
        let n_end = match benchmark {
            Benchmark::LeadingOnes => 3000,
            Benchmark::OneMax | Benchmark::Lfhw => 30_000,
            Benchmark::Mivs => 1000,
        };
        Self {
            benchmark,
            algorithms: Vec::new(),
            n_start: 100,
            n_end,
            size_count: 10,
            repetitions,
            master_seed: 1,
            budget,
            protocol,
            normalization: Normalization::default_for(benchmark),
            pilot_runs: 1000,
            pilot_budget: BudgetRule::TimesNLnN(3.0),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n_start < 1 {
            return Err(ExperimentError::Invalid("n-start must be >= 1".into()));
        }
        if self.n_start >= self.n_end {
            return Err(ExperimentError::Invalid(
                "n-start must be smaller than n-end".into(),
            ));
        }
        if self.size_count < 2 {
            return Err(ExperimentError::Invalid("size-count must be >= 2".into()));
        }
        if self.repetitions < 1 {
            return Err(ExperimentError::Invalid("repetitions must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(ExperimentError::Invalid(
                "at least one algorithm section is required".into(),
            ));
        }
        if self.benchmark == Benchmark::Mivs && self.n_start < 4 {
            return Err(ExperimentError::Invalid(
                "mivs requires n-start >= 4".into(),
            ));
        }
        if self.protocol == Protocol::TimeToTarget && self.benchmark != Benchmark::Mivs {
            return Err(ExperimentError::Invalid(
                "the time-to-target protocol applies to the mivs benchmark only".into(),
            ));
        }
        // Resolve every algorithm at the smallest size so bad parameter
        // combinations fail before any run starts.
        for spec in &self.algorithms {
            spec.resolve(self.sizes()[0], 1, None)?;
        }
        Ok(())
    }

    /// The log-spaced problem sizes of this sweep (rounded to even for MIVS).
    pub fn sizes(&self) -> Vec<usize> {
        let raw = log_spaced_sizes(self.n_start, self.n_end, self.size_count);
        if self.benchmark == Benchmark::Mivs {
            let mut even: Vec<usize> = raw
                .into_iter()
                .map(|n| (((n as f64) / 2.0).round() as usize * 2).max(4))
                .collect();
            even.dedup();
            even
        } else {
            raw
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// `count` geometrically spaced integers covering `[n_start, n_end]`,
/// deduplicated after rounding (so the result is strictly increasing).
pub fn log_spaced_sizes(n_start: usize, n_end: usize, count: usize) -> Vec<usize> {
    assert!(n_start >= 1 && n_start < n_end, "invalid size range");
    assert!(count >= 2, "need at least two sizes");
    let ratio = n_end as f64 / n_start as f64;
    let mut sizes: Vec<usize> = (0..count)
        .map(|i| {
            let exp = i as f64 / (count - 1) as f64;
            (n_start as f64 * ratio.powf(exp)).round() as usize
        })
        .collect();
    sizes.dedup();
    sizes
}

/// One completed optimizer run, tagged with its sweep coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub benchmark: Benchmark,
    pub algorithm: Algorithm,
    /// Algorithm identifier with parameter annotation (see
    /// [`AlgorithmSpec::label`]).
    pub label: String,
    pub lambda_rule: Option<String>,
    pub n: usize,
    pub repetition: u32,
    pub seed: u64,
    pub evaluations: u64,
    pub success: bool,
    pub best_fitness: f64,
}

/// Seed stream tag for the per-size pilot phase (distinct from run seeds).
const PILOT_STREAM: u64 = 0x70_69_6c_6f_74; // "pilot"

/// Executes the full sweep. The record set is sorted by (algorithm index,
/// size index, repetition) and is a pure function of the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, ExperimentError> {
    cfg.validate()?;
    let sizes = cfg.sizes();
    // Per-size budget and target fitness.
    let mut per_size: Vec<(usize, u64, Option<f64>)> = Vec::with_capacity(sizes.len());
    for (si, &n) in sizes.iter().enumerate() {
        let budget = cfg.budget.resolve(n);
        let target = match cfg.protocol {
            Protocol::TimeToOptimum => None,
            Protocol::TimeToTarget => {
                let mut rng =
                    RandomSource::from_seed(derive_seed(cfg.master_seed, &[PILOT_STREAM, si as u64]));
                let t = mivs_target_with(n, cfg.pilot_runs, cfg.pilot_budget.resolve(n), &mut rng);
                Some((t - 0.5).round())
            }
        };
        per_size.push((n, budget, target));
    }

    let mut jobs: Vec<(usize, usize, u32)> = Vec::new();
    for ai in 0..cfg.algorithms.len() {
        for si in 0..per_size.len() {
            for rep in 0..cfg.repetitions {
                jobs.push((ai, si, rep));
            }
        }
    }
    let records: Result<Vec<RunRecord>, ExperimentError> = jobs
        .into_par_iter()
        .map(|(ai, si, rep)| {
            let spec = &cfg.algorithms[ai];
            let (n, budget, target) = per_size[si];
            let run_cfg = spec.resolve(n, budget, target)?;
            let seed = derive_seed(cfg.master_seed, &[ai as u64, si as u64, rep as u64]);
            let mut f = cfg.benchmark.instantiate(n);
            let mut rng = RandomSource::from_seed(seed);
            let result = run(&mut f, &run_cfg, &mut rng)?;
            Ok(RunRecord {
                benchmark: cfg.benchmark,
                algorithm: spec.algorithm,
                label: spec.label(),
                lambda_rule: spec.lambda.map(|r| r.to_string()),
                n,
                repetition: rep,
                seed,
                evaluations: result.evaluations_used,
                success: result.success,
                best_fitness: result.best_fitness,
            })
        })
        .collect();
    records
    // Jobs were generated in (algorithm, size, repetition) order and rayon's
    // collect preserves input order, so the record set is already sorted.
}

/// Time-to-target fitness for the generated MIVS instance of size `n`:
/// the mean best fitness of 1000 independent (1+1)-EA runs, each budgeted
/// `ceil(3 n ln n)` evaluations.
pub fn mivs_target(n: usize, rng: &mut RandomSource) -> f64 {
    let budget = BudgetRule::TimesNLnN(3.0).resolve(n);
    mivs_target_with(n, 1000, budget, rng)
}

/// [`mivs_target`] with explicit pilot count and per-run budget.
pub fn mivs_target_with(n: usize, runs: u32, budget: u64, rng: &mut RandomSource) -> f64 {
    let base = rng.next_u64();
    let bests: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let cfg = OptimizerConfig::new(Algorithm::OnePlusOneEa, budget);
            let mut f = Benchmark::Mivs.instantiate(n);
            let mut run_rng = RandomSource::from_seed(derive_seed(base, &[r as u64]));
            run(&mut f, &cfg, &mut run_rng)
                .expect("pilot configuration is valid")
                .best_fitness
        })
        .collect();
    bests.iter().sum::<f64>() / runs as f64
}

/// Aggregate statistics over the repetitions at one problem size.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Lower-middle convention on even counts, so integer-valued runtimes
    /// stay integers.
    pub median: f64,
    /// Sample standard deviation (divisor reps - 1); 0 for a single record,
    /// flagged by `single_sample`.
    pub stddev: f64,
    pub success_rate: f64,
    /// Number of runs that failed to reach the target/optimum.
    pub truncated_count: u64,
    pub single_sample: bool,
}

/// Summarizes the records at size `n`. Unsuccessful runs enter mean and
/// median at their recorded (capped) evaluation counts.
pub fn summarize(records: &[RunRecord], n: usize) -> SummaryStats {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| r.n == n)
        .map(|r| r.evaluations as f64)
        .collect();
    assert!(!values.is_empty(), "no records at size {n}");
    let truncated = records.iter().filter(|r| r.n == n && !r.success).count() as u64;
    let successes = records.iter().filter(|r| r.n == n && r.success).count();
    summarize_values(&values, n, truncated, successes)
}

fn summarize_values(values: &[f64], n: usize, truncated: u64, successes: usize) -> SummaryStats {
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[(count - 1) / 2];
    let stddev = if count > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    SummaryStats {
        n,
        mean,
        median,
        stddev,
        success_rate: successes as f64 / count as f64,
        truncated_count: truncated,
        single_sample: count == 1,
    }
}

/// Mean runtime under a display normalization; raw means stay available on
/// the stats themselves.
pub fn normalize(stats: &SummaryStats, rule: Normalization) -> f64 {
    stats.mean / rule.divisor(stats.n)
}

/// Ordinary least squares on `(ln n_j, ln y_j)` after dropping the first
/// `skip` points. Returns `(slope, intercept, residual sum of squares)`.
pub fn loglog_slope(
    sizes: &[usize],
    means: &[f64],
    skip: usize,
) -> Result<(f64, f64, f64), ExperimentError> {
    assert_eq!(sizes.len(), means.len());
    if sizes.len() <= skip + 1 {
        return Err(ExperimentError::Invalid(format!(
            "need at least 2 points after skipping {skip}, got {}",
            sizes.len().saturating_sub(skip)
        )));
    }
    let points: Vec<(f64, f64)> = sizes[skip..]
        .iter()
        .zip(&means[skip..])
        .map(|(&n, &t)| ((n as f64).ln(), t.ln()))
        .collect();
    let m = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom == 0.0 {
        return Err(ExperimentError::Invalid(
            "degenerate regression: identical sizes".into(),
        ));
    }
    let a = (m * sxy - sx * sy) / denom;
    let b = (sy - a * sx) / m;
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let e = y - (a * x + b);
            e * e
        })
        .sum();
    Ok((a, b, rss))
}

/// Runs `repetitions` seeded runs of one algorithm against a fixed target
/// fitness with a hard evaluation cap; capped runs count at exactly the cap.
pub fn time_to_target(
    spec: &AlgorithmSpec,
    n: usize,
    t: f64,
    cap: u64,
    repetitions: u32,
    rng: &mut RandomSource,
) -> Result<SummaryStats, ExperimentError> {
    let target = (t - 0.5).round();
    let run_cfg = spec.resolve(n, cap, Some(target))?;
    let base = rng.next_u64();
    let results: Vec<(u64, bool)> = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let mut f = Benchmark::Mivs.instantiate(n);
            let mut run_rng = RandomSource::from_seed(derive_seed(base, &[r as u64]));
            let res = run(&mut f, &run_cfg, &mut run_rng).expect("validated configuration");
            // A capped run reports exactly the cap.
            let evals = if res.success { res.evaluations_used } else { cap };
            (evals, res.success)
        })
        .collect();
    let values: Vec<f64> = results.iter().map(|&(e, _)| e as f64).collect();
    let successes = results.iter().filter(|&&(_, s)| s).count();
    let truncated = results.len() - successes;
    Ok(summarize_values(&values, n, truncated as u64, successes))
}

/// Summary CSV row: one (algorithm, size) cell of a sweep.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub benchmark: Benchmark,
    pub label: String,
    pub stats: SummaryStats,
    pub normalized_mean: f64,
    pub normalization: Normalization,
}

/// Groups records by algorithm label and size, in first-appearance order.
pub fn summarize_records(records: &[RunRecord], normalization: Normalization) -> Vec<SummaryRow> {
    let mut labels: Vec<String> = Vec::new();
    for r in records {
        if !labels.contains(&r.label) {
            labels.push(r.label.clone());
        }
    }
    let mut rows = Vec::new();
    for label in &labels {
        let of_label: Vec<RunRecord> = records.iter().filter(|r| &r.label == label).cloned().collect();
        let mut sizes: Vec<usize> = of_label.iter().map(|r| r.n).collect();
        sizes.dedup();
        for n in sizes {
            let stats = summarize(&of_label, n);
            let normalized_mean = normalize(&stats, normalization);
            rows.push(SummaryRow {
                benchmark: of_label[0].benchmark,
                label: label.clone(),
                stats,
                normalized_mean,
                normalization,
            });
        }
    }
    rows
}

/// Log-log regression per algorithm label over the summary rows.
#[derive(Clone, Debug)]
pub struct RegressionRow {
    pub label: String,
    pub skip: usize,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn regress_summaries(
    rows: &[SummaryRow],
    skip: usize,
) -> Result<Vec<RegressionRow>, ExperimentError> {
    let mut labels: Vec<String> = Vec::new();
    for r in rows {
        if !labels.contains(&r.label) {
            labels.push(r.label.clone());
        }
    }
    let mut out = Vec::new();
    for label in labels {
        let series: Vec<&SummaryRow> = rows.iter().filter(|r| r.label == label).collect();
        let sizes: Vec<usize> = series.iter().map(|r| r.stats.n).collect();
        let means: Vec<f64> = series.iter().map(|r| r.stats.mean).collect();
        let (slope, intercept, residual) = loglog_slope(&sizes, &means, skip)?;
        out.push(RegressionRow {
            label,
            skip,
            slope,
            intercept,
            residual,
        });
    }
    Ok(out)
}

pub const RAW_CSV_HEADER: &str =
    "benchmark,algorithm,lambda_rule,n,repetition,seed,evaluations,success,best_fitness";
pub const SUMMARY_CSV_HEADER: &str =
    "benchmark,algorithm,n,mean,median,stddev,success_rate,normalized_mean,normalization_rule";
pub const REGRESSION_CSV_HEADER: &str = "algorithm,skip,slope_a,intercept_b,residual";

pub fn write_raw_csv<W: Write>(mut w: W, records: &[RunRecord]) -> io::Result<()> {
    writeln!(w, "{RAW_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.benchmark,
            r.algorithm,
            r.lambda_rule.as_deref().unwrap_or("-"),
            r.n,
            r.repetition,
            r.seed,
            r.evaluations,
            r.success,
            r.best_fitness
        )?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(mut w: W, rows: &[SummaryRow]) -> io::Result<()> {
    writeln!(w, "{SUMMARY_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.benchmark,
            r.label,
            r.stats.n,
            r.stats.mean,
            r.stats.median,
            r.stats.stddev,
            r.stats.success_rate,
            r.normalized_mean,
            r.normalization
        )?;
    }
    Ok(())
}

pub fn write_regression_csv<W: Write>(mut w: W, rows: &[RegressionRow]) -> io::Result<()> {
    writeln!(w, "{REGRESSION_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.label, r.skip, r.slope, r.intercept, r.residual
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spaced_endpoints_and_midpoints() {
        assert_eq!(log_spaced_sizes(100, 100_000, 2), vec![100, 100_000]);
        assert_eq!(log_spaced_sizes(100, 10_000, 3), vec![100, 1000, 10_000]);
        let sizes = log_spaced_sizes(100, 3000, 10);
        assert_eq!(sizes.first(), Some(&100));
        assert_eq!(sizes.last(), Some(&3000));
        assert!(sizes.windows(2).all(|w| w[0] < w[1]), "{sizes:?}");
    }

    #[test]
    fn mivs_sizes_are_even() {
        let mut cfg = ExperimentConfig::defaults(Benchmark::Mivs);
        cfg.n_start = 100;
        cfg.n_end = 500;
        cfg.size_count = 5;
        for n in cfg.sizes() {
            assert_eq!(n % 2, 0);
        }
    }

    #[test]
    fn summarize_examples() {
        let mk = |evals: u64, success: bool| RunRecord {
            benchmark: Benchmark::LeadingOnes,
            algorithm: Algorithm::OnePlusOneEa,
            label: "opo-ea".into(),
            lambda_rule: None,
            n: 10,
            repetition: 0,
            seed: 0,
            evaluations: evals,
            success,
            best_fitness: 10.0,
        };
        let records = vec![mk(10, true), mk(20, true), mk(30, true)];
        let s = summarize(&records, 10);
        assert_eq!((s.mean, s.median, s.stddev), (20.0, 20.0, 10.0));
        assert_eq!(s.success_rate, 1.0);

        let two = vec![mk(5, true), mk(7, false)];
        let s = summarize(&two, 10);
        assert_eq!(s.median, 5.0, "lower-middle convention");
        assert_eq!(s.truncated_count, 1);

        let one = vec![mk(42, true)];
        let s = summarize(&one, 10);
        assert_eq!(s.stddev, 0.0);
        assert!(s.single_sample);
    }

    #[test]
    fn normalization_rules() {
        let stats = SummaryStats {
            n: 2000,
            mean: 4e6,
            median: 4e6,
            stddev: 0.0,
            success_rate: 1.0,
            truncated_count: 0,
            single_sample: false,
        };
        assert_eq!(normalize(&stats, Normalization::N2), 1.0);
        assert_eq!(normalize(&stats, Normalization::None), 4e6);
    }

    #[test]
    fn slope_recovers_exact_power_laws() {
        let sizes: Vec<usize> = log_spaced_sizes(100, 10_000, 8);
        for (c, k) in [(3.0, 2.0), (5.0, 1.0), (0.5, 1.5)] {
            let means: Vec<f64> = sizes.iter().map(|&n| c * (n as f64).powf(k)).collect();
            let (a, _, rss) = loglog_slope(&sizes, &means, 0).unwrap();
            assert!((a - k).abs() < 1e-9, "slope {a} for exponent {k}");
            assert!(rss < 1e-18);
        }
    }

    #[test]
    fn slope_requires_two_points_after_skip() {
        assert!(loglog_slope(&[100, 200], &[1.0, 2.0], 1).is_err());
        assert!(loglog_slope(&[100, 200, 400], &[1.0, 2.0, 4.0], 1).is_ok());
    }

    #[test]
    fn param_rules_round_trip_and_resolve() {
        for text in [
            "2",
            "ln",
            "sqrt(ln)",
            "n^(1/3)",
            "n^(1/2)",
            "n^(2/3)",
            "(n*ln)^(2/3)",
            "sqrt(n)*ln",
        ] {
            let rule: ParamRule = text.parse().unwrap();
            assert_eq!(rule.to_string(), text);
        }
        assert_eq!(ParamRule::Const(2).resolve(1000, 2), 2);
        assert_eq!(ParamRule::LnN.resolve(1000, 2), 7); // ln 1000 = 6.9
        assert_eq!(ParamRule::NPow23.resolve(1000, 2), 100);
        // Minimum clamp.
        assert_eq!(ParamRule::LnN.resolve(2, 2), 2);
    }

    #[test]
    fn budget_rules_round_trip_and_resolve() {
        for text in ["1000000", "500*n^2", "30*n*ln", "3*n*ln"] {
            let rule: BudgetRule = text.parse().unwrap();
            assert_eq!(rule.to_string(), text);
        }
        assert_eq!(BudgetRule::TimesN2(500.0).resolve(100), 5_000_000);
        let nlnn = BudgetRule::TimesNLnN(3.0).resolve(100);
        assert_eq!(nlnn, (300.0 * (100.0f64).ln()).ceil() as u64);
    }

    #[test]
    fn labels_carry_parameters() {
        let spec = AlgorithmSpec::new(Algorithm::DegaA)
            .with_lambda(ParamRule::LnN);
        assert_eq!(spec.label(), "dega-a[lambda=ln]");
        let mut with_cap = spec.clone();
        with_cap.cap = Some(CapRule::LambdaLnN);
        assert_eq!(with_cap.label(), "dega-a[lambda=ln;cap=lambda*ln]");
        assert_eq!(AlgorithmSpec::new(Algorithm::TwoPlusOneGa).label(), "tpo-ga");
    }

    #[test]
    fn small_experiment_is_deterministic_and_complete() {
        let mut cfg = ExperimentConfig::defaults(Benchmark::OneMax);
        cfg.algorithms = vec![
            AlgorithmSpec::new(Algorithm::OnePlusOneEa),
            AlgorithmSpec::new(Algorithm::TwoPlusOneGa),
        ];
        cfg.n_start = 20;
        cfg.n_end = 40;
        cfg.size_count = 2;
        cfg.repetitions = 1;
        cfg.master_seed = 9;
        let records = run_experiment(&cfg).unwrap();
        assert_eq!(records.len(), 4, "2 algorithms x 2 sizes x 1 repetition");
        let again = run_experiment(&cfg).unwrap();
        assert_eq!(records, again);
        let mut other_seed = cfg.clone();
        other_seed.master_seed = 10;
        let different = run_experiment(&other_seed).unwrap();
        assert_ne!(records, different, "seed must matter");
        for r in &records {
            assert!(r.success, "tiny OneMax instances must be solved: {r:?}");
        }
    }

    #[test]
    fn time_to_target_edge_cases() {
        let mut rng = RandomSource::from_seed(4);
        // Vacuous target: round(t - 1/2) = 0, reached at the first evaluated
        // string with non-negative fitness.
        let spec = AlgorithmSpec::new(Algorithm::OnePlusOneEa);
        let stats = time_to_target(&spec, 10, 0.4, 1000, 20, &mut rng).unwrap();
        assert_eq!(stats.success_rate, 1.0);
        assert!(stats.median < 50.0, "median {}", stats.median);

        // Unreachable target: every run is capped and counted at the cap.
        let stats = time_to_target(&spec, 10, 10.0, 500, 10, &mut rng).unwrap();
        assert_eq!(stats.success_rate, 0.0);
        assert_eq!(stats.truncated_count, 10);
        assert_eq!((stats.mean, stats.median), (500.0, 500.0));
    }

    #[test]
    fn mivs_target_is_deterministic_and_bounded() {
        let t1 = mivs_target_with(20, 50, 300, &mut RandomSource::from_seed(9));
        let t2 = mivs_target_with(20, 50, 300, &mut RandomSource::from_seed(9));
        assert_eq!(t1, t2);
        assert!(t1 > 0.0 && t1 <= 11.0, "t = {t1} vs optimum 11");
    }

    #[test]
    fn csv_outputs_are_stable() {
        let records = vec![RunRecord {
            benchmark: Benchmark::LeadingOnes,
            algorithm: Algorithm::DegaA,
            label: "dega-a[lambda=2]".into(),
            lambda_rule: Some("2".into()),
            n: 100,
            repetition: 0,
            seed: 7,
            evaluations: 1234,
            success: true,
            best_fitness: 100.0,
        }];
        let mut raw = Vec::new();
        write_raw_csv(&mut raw, &records).unwrap();
        assert_eq!(
            String::from_utf8(raw).unwrap(),
            format!("{RAW_CSV_HEADER}\nlo,dega-a,2,100,0,7,1234,true,100\n")
        );

        let rows = summarize_records(&records, Normalization::N2);
        let mut summary = Vec::new();
        write_summary_csv(&mut summary, &rows).unwrap();
        let text = String::from_utf8(summary).unwrap();
        assert!(text.starts_with(SUMMARY_CSV_HEADER));
        assert!(text.contains("lo,dega-a[lambda=2],100,1234,1234,0,1,0.1234,n^2"));
    }
}
