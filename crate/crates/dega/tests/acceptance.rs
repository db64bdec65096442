//! Acceptance suite: one test per criterion, each asserting its stated
//! tolerance and printing a `criterion NN ... PASS` line (visible with
//! `cargo test --test acceptance -- --nocapture`).
//!
//! Every criterion is fully seeded, so the suite is deterministic.

use dega::algorithms::{dega_a_observed, run, Algorithm, OptimizerConfig};
use dega::benchmarks::{brute_force_mis, mivs_graph, Benchmark, FitnessFunction};
use dega::bits::hamming;
use dega::config::{parse_sweep_config, serialize_sweep_config};
use dega::experiments::{
    log_spaced_sizes, loglog_slope, regress_summaries, run_experiment, summarize,
    summarize_records, write_raw_csv, write_summary_csv, AlgorithmSpec, CapRule, ExperimentConfig,
    Normalization, ParamRule, Protocol,
};
use dega::instrumentation::{
    check_monotonicity, critical_bit_probe, improvement_time_probe, run_free_rider_tally,
    PopulationTracer, TraceRecorder, Z_THRESHOLD,
};
use dega::rng::{derive_seed, RandomSource};

fn lo_sweep(spec: AlgorithmSpec, n_end: usize, master_seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(Benchmark::LeadingOnes);
    cfg.algorithms = vec![spec];
    cfg.n_start = 100;
    cfg.n_end = n_end;
    cfg.size_count = 10;
    cfg.repetitions = 50;
    cfg.master_seed = master_seed;
    cfg
}

fn slope_of(cfg: &ExperimentConfig, skip: usize) -> f64 {
    let records = run_experiment(cfg).expect("sweep");
    let rows = summarize_records(&records, cfg.normalization);
    let regression = regress_summaries(&rows, skip).expect("regression");
    assert_eq!(regression.len(), 1);
    regression[0].slope
}

#[test]
fn criterion_01_leading_ones_scaling_proof_optimal_lambda() {
    let cfg = lo_sweep(
        AlgorithmSpec::new(Algorithm::DegaA).with_lambda(ParamRule::NLnNPow23),
        3000,
        0xACCE01,
    );
    let a = slope_of(&cfg, 4);
    assert!(
        (1.60..=1.90).contains(&a),
        "slope {a} outside [1.60, 1.90]"
    );
    println!("criterion 01 (LeadingOnes scaling, lambda=(n*ln)^(2/3)): PASS — slope a = {a:.3} in [1.60, 1.90]");
}

#[test]
fn criterion_02_lambda_two_quadratic_control() {
    let cfg = lo_sweep(
        AlgorithmSpec::new(Algorithm::DegaA).with_lambda(ParamRule::Const(2)),
        3000,
        0xACCE02,
    );
    let a = slope_of(&cfg, 4);
    assert!(a >= 1.90, "slope {a} below 1.90");
    println!("criterion 02 (lambda = 2 stays quadratic): PASS — slope a = {a:.3} >= 1.90");
}

#[test]
fn criterion_03_baseline_quadratic_barrier() {
    let mut cfg = lo_sweep(AlgorithmSpec::new(Algorithm::TwoPlusOneGa), 800, 0xACCE03);
    cfg.normalization = Normalization::N2;
    let records = run_experiment(&cfg).expect("sweep");
    let rows = summarize_records(&records, Normalization::N2);
    let first = rows.first().expect("rows").normalized_mean;
    let last = rows.last().expect("rows").normalized_mean;
    let ratio = (first / last).max(last / first);
    assert!(
        ratio < 1.5,
        "normalized means vary by {:.1}% between n=100 and n=800",
        (ratio - 1.0) * 100.0
    );
    println!(
        "criterion 03 ((2+1)-GA quadratic barrier): PASS — T/n^2 endpoints {first:.4} vs {last:.4} (x{ratio:.3} < 1.5)"
    );
}

fn mean_and_sd(alg: AlgorithmSpec, n: usize, reps: u32, seed: u64) -> (f64, f64) {
    let cfg = alg
        .resolve(n, 500 * (n as u64) * (n as u64), None)
        .expect("valid spec");
    let mut values = Vec::with_capacity(reps as usize);
    for r in 0..reps {
        let mut f = FitnessFunction::leading_ones(n);
        let mut rng = RandomSource::from_seed(derive_seed(seed, &[r as u64]));
        let res = run(&mut f, &cfg, &mut rng).unwrap();
        assert!(res.success);
        values.push(res.evaluations_used as f64);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

#[test]
fn criterion_04_variant_ordering_on_leading_ones() {
    let n = 1000;
    let reps = 50;
    let (m_bb, s_bb) = mean_and_sd(AlgorithmSpec::new(Algorithm::DegaABb), n, reps, 0xACCE04);
    let (m_a, s_a) = mean_and_sd(
        AlgorithmSpec::new(Algorithm::DegaA).with_lambda(ParamRule::NPow23),
        n,
        reps,
        0xACCE14,
    );
    let (m_ga, s_ga) = mean_and_sd(AlgorithmSpec::new(Algorithm::TwoPlusOneGa), n, reps, 0xACCE24);
    let pooled = |sa: f64, sb: f64| (sa * sa / reps as f64 + sb * sb / reps as f64).sqrt();
    let gap1 = m_a - m_bb;
    let gap2 = m_ga - m_a;
    assert!(
        gap1 > 2.0 * pooled(s_bb, s_a),
        "A_BB ({m_bb:.0}) vs A ({m_a:.0}): gap {gap1:.0} not significant"
    );
    assert!(
        gap2 > 2.0 * pooled(s_a, s_ga),
        "A ({m_a:.0}) vs (2+1)-GA ({m_ga:.0}): gap {gap2:.0} not significant"
    );
    println!(
        "criterion 04 (variant ordering at n=1000): PASS — means {m_bb:.0} < {m_a:.0} < {m_ga:.0}, gaps > 2 pooled SE"
    );
}

#[test]
fn criterion_05_critical_bit_law() {
    let mut rng = RandomSource::from_seed(0xACCE05);
    let report = critical_bit_probe(100, 10, 10_000, &mut rng);
    assert!(!report.inconclusive, "{report}");
    assert!(
        report.z_score.abs() <= Z_THRESHOLD,
        "aggregate z {:.3} exceeds 4",
        report.z_score
    );
    println!(
        "criterion 05 (critical-bit law): PASS — {} events, observed {:.4} vs predicted {:.4}, z = {:+.3}",
        report.samples, report.empirical_mean, report.predicted, report.z_score
    );
}

#[test]
fn criterion_06_improvement_time_is_geometric() {
    let mut rng = RandomSource::from_seed(0xACCE06);
    for lambda in [2u64, 16, 64] {
        let report = improvement_time_probe(lambda, 100_000, &mut rng);
        assert!(!report.inconclusive, "{report}");
        let rel = (report.empirical_mean - lambda as f64).abs() / lambda as f64;
        assert!(rel <= 0.05, "lambda={lambda}: mean off by {:.2}%", rel * 100.0);
        assert!(report.pass, "lambda={lambda}: {report}");
        println!(
            "criterion 06 (improvement time ~ Geometric(1/{lambda})): PASS — mean {:.3}, z = {:+.3}",
            report.empirical_mean, report.z_score
        );
    }
}

#[test]
fn criterion_07_free_rider_law() {
    let mut rng = RandomSource::from_seed(0xACCE07);
    let tally = run_free_rider_tally(500, 2, 100_000, &mut rng);
    assert!(tally.events >= 100_000, "only {} events", tally.events);
    let mean = tally.mean();
    assert!(
        (1.9..=2.1).contains(&mean),
        "mean jump {mean:.4} outside [1.9, 2.1]"
    );
    let tail5 = tally.tail(5);
    assert!(tail5 <= 0.0625 * 1.2, "Pr[jump >= 5] = {tail5:.4} exceeds 0.075");
    assert_eq!(tally.truncation_violations, 0);
    println!(
        "criterion 07 (free-rider jumps ~ 1 + Geometric(1/2)): PASS — {} events, mean {mean:.4}, Pr[jump>=5] = {tail5:.4} <= 0.075",
        tally.events
    );
}

#[test]
fn criterion_08_diversity_monotonicity_in_traces() {
    let n = 200;
    let cfg = OptimizerConfig::new(Algorithm::DegaA, 500 * (n as u64) * (n as u64)).with_lambda(10);
    let mut total_events = 0u64;
    for r in 0..100u64 {
        let mut f = FitnessFunction::leading_ones(n);
        let mut rng = RandomSource::from_seed(derive_seed(0xACCE08, &[r]));
        let mut rec = TraceRecorder::new();
        let mut tracer = PopulationTracer::new(&mut rec, n);
        let res = dega_a_observed(&mut f, &cfg, &mut rng, &mut tracer);
        assert!(res.success);
        let report = check_monotonicity(&rec.events);
        assert!(report.clean(), "run {r}: {report:?}");
        total_events += rec.events.len() as u64;
    }
    println!(
        "criterion 08 (phase-wise H monotonicity): PASS — 100 traced runs, {total_events} events, zero violations"
    );
}

#[test]
fn criterion_09_antipodal_initialization() {
    // All diversity-exploiting variants share the complementary-pair
    // initialization; check the pair itself at full Hamming distance and the
    // first trace snapshot of every variant (no agreeing positions in the
    // non-optimized part, less-fit member at fitness 0).
    let n = 64;
    let mut rng = RandomSource::from_seed(0xACCE09);
    for i in 0..100 {
        let (x, y) = dega::algorithms::antipodal_pair(1 + i % 97, &mut rng);
        assert_eq!(hamming(&x, &y), x.len());
    }
    for alg in [Algorithm::DegaA, Algorithm::DegaAPrime, Algorithm::DegaABb] {
        for r in 0..100u64 {
            let mut cfg = OptimizerConfig::new(alg, 2);
            if alg == Algorithm::DegaA {
                cfg.lambda = Some(4);
            }
            cfg.target = Some(f64::INFINITY);
            let mut f = FitnessFunction::leading_ones(n);
            let mut run_rng = RandomSource::from_seed(derive_seed(0xACCE19, &[r]));
            let mut rec = TraceRecorder::new();
            let mut tracer = PopulationTracer::new(&mut rec, n);
            dega::algorithms::run_observed(&mut f, &cfg, &mut run_rng, &mut tracer).unwrap();
            let first = rec.events.first().expect("initial snapshot");
            assert_eq!(first.lo1, 0.0, "{}", alg.id());
            assert_eq!((first.b, first.s), (0, 0), "{}", alg.id());
            assert_eq!(first.h, (first.alpha * n as f64).round() as u64);
        }
    }
    println!("criterion 09 (antipodal start): PASS — H(x1, x2) = n in 100/100 initializations per variant");
}

#[test]
fn criterion_10_mivs_generator_gate() {
    for n in [4usize, 6, 8, 10, 12, 14, 16] {
        let summary = brute_force_mis(&mivs_graph(n));
        assert_eq!(
            summary.max_size,
            n / 2 + 1,
            "n={n}: maximum independent set has size {}",
            summary.max_size
        );
        assert_eq!(
            summary.optimizer_count, 1,
            "n={n}: optimum is not unique ({} maximizers)",
            summary.optimizer_count
        );
    }
    println!(
        "criterion 10 (MIVS generator gate): PASS — unique maximum independent set of size n/2 + 1 for n in {{4..16}}"
    );
}

#[test]
fn criterion_11_mivs_time_to_target_competitiveness() {
    let mut cfg = ExperimentConfig::defaults(Benchmark::Mivs);
    let mut dega = AlgorithmSpec::new(Algorithm::DegaA).with_lambda(ParamRule::LnN);
    dega.cap = Some(CapRule::LambdaLnN);
    cfg.algorithms = vec![dega, AlgorithmSpec::new(Algorithm::TwoPlusOneGa)];
    cfg.n_start = 100;
    cfg.n_end = 500;
    cfg.size_count = 5;
    cfg.repetitions = 100;
    cfg.master_seed = 5;
    cfg.protocol = Protocol::TimeToTarget;
    let records = run_experiment(&cfg).expect("sweep");
    let sizes = cfg.sizes();
    let labels: Vec<String> = cfg.algorithms.iter().map(|s| s.label()).collect();
    for &n in &sizes {
        let of = |label: &str| {
            let recs: Vec<_> = records
                .iter()
                .filter(|r| r.label == label)
                .cloned()
                .collect();
            summarize(&recs, n).median
        };
        let med_dega = of(&labels[0]);
        let med_ga = of(&labels[1]);
        assert!(
            med_dega <= 3.0 * med_ga,
            "n={n}: dega median {med_dega} exceeds 3x GA median {med_ga}"
        );
        println!(
            "criterion 11 (MIVS time-to-target, n={n}): PASS — medians dega-a {med_dega} vs tpo-ga {med_ga} (x{:.2} <= 3)",
            med_dega / med_ga
        );
    }
}

#[test]
fn criterion_12_full_determinism_of_sweeps() {
    let cfg_text = "\
benchmark = lo
n-start = 50
n-end = 150
size-count = 2
repetitions = 3
master-seed = 77

[dega-a]
lambda = ln

[tpo-ga]
";
    let cfg = parse_sweep_config(cfg_text).unwrap();
    let csvs = |cfg: &ExperimentConfig| {
        let records = run_experiment(cfg).unwrap();
        let rows = summarize_records(&records, cfg.normalization);
        let mut raw = Vec::new();
        write_raw_csv(&mut raw, &records).unwrap();
        let mut summary = Vec::new();
        write_summary_csv(&mut summary, &rows).unwrap();
        (raw, summary)
    };
    let (raw1, sum1) = csvs(&cfg);
    let (raw2, sum2) = csvs(&cfg);
    assert_eq!(raw1, raw2, "raw CSV differs between reruns");
    assert_eq!(sum1, sum2, "summary CSV differs between reruns");

    let mut reseeded = cfg.clone();
    reseeded.master_seed = 78;
    let (raw3, _) = csvs(&reseeded);
    assert_ne!(raw1, raw3, "different master seed must change the records");

    // Config serialization round-trips, so a persisted config reproduces the
    // same bytes as well.
    let reparsed = parse_sweep_config(&serialize_sweep_config(&cfg)).unwrap();
    assert_eq!(cfg, reparsed);

    // The target-protocol pilot path is deterministic too.
    let mut mivs = ExperimentConfig::defaults(Benchmark::Mivs);
    let mut dega = AlgorithmSpec::new(Algorithm::DegaA).with_lambda(ParamRule::LnN);
    dega.cap = Some(CapRule::LambdaLnN);
    mivs.algorithms = vec![dega];
    mivs.n_start = 50;
    mivs.n_end = 100;
    mivs.size_count = 2;
    mivs.repetitions = 5;
    mivs.pilot_runs = 50;
    mivs.master_seed = 79;
    let (mraw1, _) = csvs(&mivs);
    let (mraw2, _) = csvs(&mivs);
    assert_eq!(mraw1, mraw2, "time-to-target records differ between reruns");
    println!("criterion 12 (sweep determinism): PASS — byte-identical CSVs on rerun, seed-sensitive records");
}

#[test]
fn criterion_13_slope_estimator_oracle() {
    let sizes = log_spaced_sizes(100, 30_000, 10);
    for k in [1.0f64, 1.5, 2.0] {
        let means: Vec<f64> = sizes.iter().map(|&n| 2.5 * (n as f64).powf(k)).collect();
        let (a, _, rss) = loglog_slope(&sizes, &means, 0).unwrap();
        assert!(
            (a - k).abs() <= 1e-9,
            "exponent {k}: recovered {a} (error {})",
            (a - k).abs()
        );
        assert!(rss <= 1e-16, "exponent {k}: residual {rss}");
    }
    println!("criterion 13 (slope estimator oracle): PASS — exponents 1, 1.5, 2 recovered to 1e-9");
}
