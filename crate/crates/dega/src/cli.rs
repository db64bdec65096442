//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 probe failure,
//! 4 probe inconclusive.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::algorithms::{run_observed, Algorithm, NoopObserver};
use crate::benchmarks::{load_graph, Benchmark, FitnessFunction};
use crate::config::{apply_global_key, parse_sweep_config};
use crate::experiments::{
    mivs_target_with, regress_summaries, run_experiment, summarize_records, write_raw_csv,
    write_regression_csv, write_summary_csv, AlgorithmSpec, BudgetRule, CapRule, ParamRule,
    SummaryRow,
};
use crate::instrumentation::{
    critical_bit_probe, improvement_time_probe, run_free_rider_probe, PopulationTracer,
    TraceWriter,
};
use crate::rng::RandomSource;

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_RUNTIME: i32 = 2;
const EXIT_PROBE_FAIL: i32 = 3;
const EXIT_PROBE_INCONCLUSIVE: i32 = 4;

const ALGORITHM_IDS: &str = "dega-a, dega-a-prime, dega-a-bb, opo-ea, tpo-ga, ollga, umda";
const BENCHMARK_IDS: &str = "lo, om, lfhw, mivs";

#[derive(Parser)]
#[command(
    name = "dega",
    version,
    about = "Diversity-exploiting genetic algorithms and a pseudo-Boolean benchmark harness",
    long_about = None
)]
struct Cli {
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true)]
    parallelism: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one seeded optimizer run and print its outcome.
    Run(RunArgs),
    /// Execute a full sweep from a configuration file, writing CSV outputs.
    Sweep(SweepArgs),
    /// Run the Monte-Carlo probe suite (critical bit, improvement time,
    /// free riders).
    Probes(ProbesArgs),
    /// Log-log regression of mean runtimes from a summary CSV.
    Regress(RegressArgs),
    /// Derive the time-to-target fitness for generated MIVS instances.
    MivsTarget(MivsTargetArgs),
    /// Emit plot-ready series and reference curves from a summary CSV.
    PlotData(PlotDataArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Algorithm identifier: dega-a, dega-a-prime, dega-a-bb, opo-ea,
    /// tpo-ga, ollga, umda.
    #[arg(long)]
    alg: String,
    /// Benchmark identifier: lo, om, lfhw, mivs.
    #[arg(long)]
    bench: String,
    /// Problem size (even and >= 4 for mivs).
    #[arg(long)]
    n: usize,
    /// Run seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Lambda rule, e.g. "2", "ln", "n^(2/3)", "(n*ln)^(2/3)".
    #[arg(long)]
    lambda: Option<String>,
    /// Crossover probability of tpo-ga (default 0.5).
    #[arg(long = "p-c")]
    p_c: Option<f64>,
    /// Mutation strength rule of ollga (default "sqrt(ln)").
    #[arg(long)]
    k: Option<String>,
    /// Truncation size rule of umda (default "ln").
    #[arg(long)]
    mu: Option<String>,
    /// dega-a exploitation cap rule: "lambda*ln" or a fixed count.
    #[arg(long)]
    cap: Option<String>,
    /// Evaluation budget rule (default "500*n^2").
    #[arg(long, default_value = "500*n^2")]
    budget: String,
    /// Stop at this fitness instead of the known optimum.
    #[arg(long)]
    target: Option<f64>,
    /// Write a per-generation phase trace (two-member algorithms only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// MIVS only: load the instance from an edge-list file instead of the
    /// generator.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for raw.csv, summary.csv and regression.csv.
    #[arg(long)]
    out: PathBuf,
    /// Override the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Global config overrides as key=value (e.g. repetitions=5).
    #[arg(long = "set")]
    overrides: Vec<String>,
    /// Also write regression.csv over the sweep means.
    #[arg(long)]
    regress: bool,
    /// Leading sizes to drop from the regression.
    #[arg(long, default_value_t = 4)]
    skip: usize,
}

#[derive(Args)]
struct ProbesArgs {
    /// Problem size for the critical-bit and free-rider probes.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Crossover bias denominator driving the probed runs.
    #[arg(long, default_value_t = 10)]
    lambda: u64,
    /// Events for the improvement-time and free-rider probes.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Runs for the critical-bit probe.
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct RegressArgs {
    /// summary.csv produced by `sweep`.
    #[arg(long)]
    summary: PathBuf,
    /// Leading sizes to drop.
    #[arg(long, default_value_t = 4)]
    skip: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MivsTargetArgs {
    /// Instance sizes (repeatable).
    #[arg(long, required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Pilot (1+1)-EA runs per size.
    #[arg(long, default_value_t = 1000)]
    pilot_runs: u32,
}

#[derive(Args)]
struct PlotDataArgs {
    /// summary.csv produced by `sweep`.
    #[arg(long)]
    summary: PathBuf,
    /// Output directory for the series files.
    #[arg(long)]
    out: PathBuf,
    /// Constant factor applied to the reference curves.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

/// Parses arguments and executes; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(threads) = cli.parallelism {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure parallelism: {e}");
            return EXIT_RUNTIME;
        }
    }
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Probes(args) => cmd_probes(args),
        Command::Regress(args) => cmd_regress(args),
        Command::MivsTarget(args) => cmd_mivs_target(args),
        Command::PlotData(args) => cmd_plot_data(args),
    }
}

fn usage_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn runtime_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_RUNTIME
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
        .map_err(|_| format!("unknown algorithm {s:?}; valid identifiers: {ALGORITHM_IDS}"))
}

fn parse_benchmark(s: &str) -> Result<Benchmark, String> {
    s.parse()
        .map_err(|_| format!("unknown benchmark {s:?}; valid identifiers: {BENCHMARK_IDS}"))
}

fn cmd_run(args: RunArgs) -> i32 {
    let algorithm = match parse_algorithm(&args.alg) {
        Ok(a) => a,
        Err(e) => return usage_error(&e),
    };
    let benchmark = match parse_benchmark(&args.bench) {
        Ok(b) => b,
        Err(e) => return usage_error(&e),
    };
    let mut spec = AlgorithmSpec::new(algorithm);
    macro_rules! parse_rule {
        ($field:ident, $ty:ty, $value:expr) => {
            match $value {
                None => None,
                Some(s) => match s.parse::<$ty>() {
                    Ok(v) => Some(v),
                    Err(e) => return usage_error(&e),
                },
            }
        };
    }
    spec.lambda = parse_rule!(lambda, ParamRule, &args.lambda);
    spec.k = parse_rule!(k, ParamRule, &args.k);
    spec.mu = parse_rule!(mu, ParamRule, &args.mu);
    spec.cap = parse_rule!(cap, CapRule, &args.cap);
    spec.p_c = args.p_c;
    let budget_rule: BudgetRule = match args.budget.parse() {
        Ok(b) => b,
        Err(e) => return usage_error(&e),
    };
    let cfg = match spec.resolve(args.n, budget_rule.resolve(args.n), args.target) {
        Ok(cfg) => cfg,
        Err(e) => return usage_error(&e.to_string()),
    };

    let mut f = match &args.graph {
        None => {
            if benchmark == Benchmark::Mivs && (args.n < 4 || !args.n.is_multiple_of(2)) {
                return usage_error("mivs requires an even size >= 4");
            }
            benchmark.instantiate(args.n)
        }
        Some(path) => {
            if benchmark != Benchmark::Mivs {
                return usage_error("--graph applies to the mivs benchmark only");
            }
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return runtime_error(&format!("cannot read {}: {e}", path.display())),
            };
            let graph = match load_graph(&text) {
                Ok(g) => g,
                Err(e) => return usage_error(&format!("{}: {e}", path.display())),
            };
            if graph.vertex_count() != args.n {
                return usage_error(&format!(
                    "graph has {} vertices but --n is {}",
                    graph.vertex_count(),
                    args.n
                ));
            }
            FitnessFunction::mivs(Arc::new(graph))
        }
    };

    if args.trace.is_some() && !algorithm.has_population_trace() {
        return usage_error(&format!(
            "--trace requires a two-member algorithm (dega-a, dega-a-prime, dega-a-bb, tpo-ga), not {}",
            algorithm.id()
        ));
    }

    let mut rng = RandomSource::from_seed(args.seed);
    let result = match &args.trace {
        Some(path) => {
            let file = match fs::File::create(path) {
                Ok(f) => f,
                Err(e) => return runtime_error(&format!("cannot create {}: {e}", path.display())),
            };
            let mut writer = TraceWriter::new(std::io::BufWriter::new(file));
            let mut tracer = PopulationTracer::new(&mut writer, args.n);
            let result = run_observed(&mut f, &cfg, &mut rng, &mut tracer);
            if let Err(e) = writer.finish() {
                return runtime_error(&format!("cannot write trace: {e}"));
            }
            result
        }
        None => run_observed(&mut f, &cfg, &mut rng, &mut NoopObserver),
    };
    match result {
        Ok(res) => {
            println!(
                "algorithm={} benchmark={} n={} seed={} evaluations={} success={} best_fitness={}",
                algorithm.id(),
                args.bench,
                args.n,
                args.seed,
                res.evaluations_used,
                res.success,
                res.best_fitness
            );
            EXIT_OK
        }
        Err(e) => usage_error(&e.to_string()),
    }
}

fn cmd_sweep(args: SweepArgs) -> i32 {
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return runtime_error(&format!("cannot read {}: {e}", args.config.display())),
    };
    let mut cfg = match parse_sweep_config(&text) {
        Ok(c) => c,
        Err(e) => return usage_error(&format!("{}: {e}", args.config.display())),
    };
    for setting in &args.overrides {
        let Some((key, value)) = setting.split_once('=') else {
            return usage_error(&format!("--set expects key=value, got {setting:?}"));
        };
        if let Err(e) = apply_global_key(&mut cfg, key.trim(), value.trim(), 0) {
            return usage_error(&e.to_string());
        }
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Err(e) = cfg.validate() {
        return usage_error(&e.to_string());
    }
    if let Err(e) = fs::create_dir_all(&args.out) {
        return runtime_error(&format!("cannot create {}: {e}", args.out.display()));
    }

    let records = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return runtime_error(&e.to_string()),
    };
    let rows = summarize_records(&records, cfg.normalization);
    for row in &rows {
        println!(
            "{} n={} mean={:.1} median={} stddev={:.1} success_rate={}",
            row.label,
            row.stats.n,
            row.stats.mean,
            row.stats.median,
            row.stats.stddev,
            row.stats.success_rate
        );
    }

    let write = |name: &str, body: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<(), String> {
        let mut buf = Vec::new();
        body(&mut buf).map_err(|e| e.to_string())?;
        let path = args.out.join(name);
        fs::write(&path, buf).map_err(|e| format!("cannot write {}: {e}", path.display()))
    };
    if let Err(e) = write("raw.csv", &|w| write_raw_csv(w, &records)) {
        return runtime_error(&e);
    }
    if let Err(e) = write("summary.csv", &|w| write_summary_csv(w, &rows)) {
        return runtime_error(&e);
    }
    if args.regress {
        let regression = match regress_summaries(&rows, args.skip) {
            Ok(r) => r,
            Err(e) => return runtime_error(&e.to_string()),
        };
        if let Err(e) = write("regression.csv", &|w| write_regression_csv(w, &regression)) {
            return runtime_error(&e);
        }
    }
    EXIT_OK
}

fn cmd_probes(args: ProbesArgs) -> i32 {
    let mut rng = RandomSource::from_seed(args.seed);
    if args.lambda < 2 {
        return usage_error("probes require lambda >= 2");
    }
    let reports = [
        critical_bit_probe(args.n, args.lambda, args.runs, &mut rng),
        improvement_time_probe(args.lambda, args.samples, &mut rng),
        run_free_rider_probe(args.n, args.lambda, args.samples, &mut rng),
    ];
    let mut failed = false;
    let mut inconclusive = false;
    for report in &reports {
        println!("{report}");
        inconclusive |= report.inconclusive;
        failed |= !report.pass && !report.inconclusive;
    }
    if failed {
        EXIT_PROBE_FAIL
    } else if inconclusive {
        EXIT_PROBE_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

/// Minimal parser for the summary CSV this harness writes.
fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, String> {
    use crate::experiments::{Normalization, SummaryStats, SUMMARY_CSV_HEADER};
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SUMMARY_CSV_HEADER => {}
        other => return Err(format!("unexpected summary header: {other:?}")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(format!("line {}: expected 9 columns", i + 2));
        }
        let num = |s: &str| -> Result<f64, String> {
            s.parse().map_err(|e| format!("line {}: {e}", i + 2))
        };
        rows.push(SummaryRow {
            benchmark: fields[0]
                .parse()
                .map_err(|e: String| format!("line {}: {e}", i + 2))?,
            label: fields[1].to_string(),
            stats: SummaryStats {
                n: num(fields[2])? as usize,
                mean: num(fields[3])?,
                median: num(fields[4])?,
                stddev: num(fields[5])?,
                success_rate: num(fields[6])?,
                truncated_count: 0,
                single_sample: false,
            },
            normalized_mean: num(fields[7])?,
            normalization: fields[8]
                .parse::<Normalization>()
                .map_err(|e| format!("line {}: {e}", i + 2))?,
        });
    }
    Ok(rows)
}

fn cmd_regress(args: RegressArgs) -> i32 {
    let rows = match read_summary_csv(&args.summary) {
        Ok(r) => r,
        Err(e) => return runtime_error(&e),
    };
    if rows.is_empty() {
        return runtime_error("summary contains no data rows");
    }
    let regression = match regress_summaries(&rows, args.skip) {
        Ok(r) => r,
        Err(e) => return runtime_error(&e.to_string()),
    };
    let mut buf = Vec::new();
    if write_regression_csv(&mut buf, &regression).is_err() {
        return runtime_error("cannot format regression output");
    }
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, buf) {
                return runtime_error(&format!("cannot write {}: {e}", path.display()));
            }
        }
        None => {
            let _ = std::io::stdout().write_all(&buf);
        }
    }
    EXIT_OK
}

fn cmd_mivs_target(args: MivsTargetArgs) -> i32 {
    for &n in &args.n {
        if n < 4 || n % 2 != 0 {
            return usage_error("mivs instance sizes must be even and >= 4");
        }
    }
    let mut rng = RandomSource::from_seed(args.seed);
    for &n in &args.n {
        let budget = BudgetRule::TimesNLnN(3.0).resolve(n);
        let t = mivs_target_with(n, args.pilot_runs, budget, &mut rng);
        println!("n={n} pilot_runs={} budget={budget} t={t}", args.pilot_runs);
    }
    EXIT_OK
}

/// File-name-safe rendering of an algorithm label.
fn sanitize(label: &str) -> String {
    let mut out = String::new();
    let mut last_dash = false;
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
            last_dash = false;
        } else if !last_dash && !out.is_empty() {
            out.push('-');
            last_dash = true;
        }
    }
    out.trim_end_matches('-').to_string()
}

/// Extracts a `lambda=<rule>` annotation from an algorithm label.
fn lambda_rule_of_label(label: &str) -> Option<ParamRule> {
    let start = label.find("lambda=")? + "lambda=".len();
    let rest = &label[start..];
    let end = rest.find([';', ']']).unwrap_or(rest.len());
    rest[..end].parse().ok()
}

fn cmd_plot_data(args: PlotDataArgs) -> i32 {
    let rows = match read_summary_csv(&args.summary) {
        Ok(r) => r,
        Err(e) => return runtime_error(&e),
    };
    if rows.is_empty() {
        return runtime_error("summary contains no data rows; nothing to plot");
    }
    if let Err(e) = fs::create_dir_all(&args.out) {
        return runtime_error(&format!("cannot create {}: {e}", args.out.display()));
    }
    let mut labels: Vec<String> = Vec::new();
    for r in &rows {
        if !labels.contains(&r.label) {
            labels.push(r.label.clone());
        }
    }
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.stats.n).collect();
    sizes.sort_unstable();
    sizes.dedup();

    let write_file = |name: String, content: String| -> Result<(), String> {
        let path = args.out.join(name);
        fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
    };

    for label in &labels {
        let mut body = String::from("n\tnormalized_mean\tstddev\n");
        for r in rows.iter().filter(|r| &r.label == label) {
            body.push_str(&format!(
                "{}\t{}\t{}\n",
                r.stats.n, r.normalized_mean, r.stats.stddev
            ));
        }
        let bench = rows
            .iter()
            .find(|r| &r.label == label)
            .map(|r| r.benchmark.to_string())
            .unwrap_or_default();
        if let Err(e) = write_file(format!("series_{}_{}.tsv", bench, sanitize(label)), body) {
            return runtime_error(&e);
        }
        // Scaled theoretical bound lambda*n + n^2 ln n / sqrt(lambda) for
        // series that carry a lambda rule.
        if let Some(rule) = lambda_rule_of_label(label) {
            let mut body = String::from("n\tbound\n");
            for &n in &sizes {
                let lambda = rule.resolve(n, 2) as f64;
                let nf = n as f64;
                let bound = args.scale * (lambda * nf + nf * nf * nf.ln() / lambda.sqrt());
                body.push_str(&format!("{n}\t{bound}\n"));
            }
            if let Err(e) = write_file(format!("ref_bound_{}.tsv", sanitize(label)), body) {
                return runtime_error(&e);
            }
        }
    }
    // Power-law reference curves over the sweep sizes.
    for (name, exponent) in [("ref_n2.tsv", 2.0), ("ref_n53.tsv", 5.0 / 3.0)] {
        let mut body = String::from("n\treference\n");
        for &n in &sizes {
            body.push_str(&format!("{n}\t{}\n", args.scale * (n as f64).powf(exponent)));
        }
        if let Err(e) = write_file(name.to_string(), body) {
            return runtime_error(&e);
        }
    }
    EXIT_OK
}
