//! Phase classification, diversity statistics and Monte-Carlo probes.
//!
//! A run of a two-member optimizer decomposes into *diversity phases* (both
//! members equally fit) and *exploitation phases* (unequal fitness). Per
//! generation the tracer records the diversity bookkeeping over the
//! non-optimized part of the string: the suffix after the fitter member's
//! leading-ones prefix, excluding the critical bit (the first zero of the
//! fitter member) during diversity phases.
//!
//! The probes replay live runs of the diversity-exploiting GA on LeadingOnes
//! and compare measured frequencies against their predicted laws: the
//! critical-bit law `H / |NO|`, the geometric improvement time with mean
//! `lambda`, and the `1 + Geometric(1/2)` free-rider jump law.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::algorithms::{
    dega_a_observed, ExploitAccept, OptimizerConfig, Population2, RunObserver,
};
use crate::algorithms::Algorithm;
use crate::benchmarks::FitnessFunction;
use crate::rng::{derive_seed, RandomSource};

/// Two-sided z-score bar for all probes. Large enough that a correct
/// implementation essentially never flakes, small enough to catch
/// constant-factor bugs.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Diversity,
    Exploitation,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Diversity => "diversity",
            Phase::Exploitation => "exploitation",
        })
    }
}

/// Diversity phase iff both members have equal fitness.
pub fn classify_phase(pop: &Population2) -> Phase {
    if pop.f1() == pop.f2() {
        Phase::Diversity
    } else {
        Phase::Exploitation
    }
}

/// Snapshot of the diversity bookkeeping after one generation.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseEvent {
    /// Evaluation index of the generation this snapshot follows.
    pub generation: u64,
    pub kind: Phase,
    /// Fitness of the less-fit member.
    pub lo1: f64,
    /// Fitness of the fitter member.
    pub lo2: f64,
    /// Hamming distance over the non-optimized part.
    pub h: u64,
    /// Agreeing positions in the non-optimized part; always `b + s`.
    pub h_bar: u64,
    /// Blocking bits: non-optimized positions zero in both members.
    pub b: u64,
    /// Skipping bits: non-optimized positions one in both members.
    pub s: u64,
    /// `|NO| / n`.
    pub alpha: f64,
}

/// Computes the phase statistics of a population over the non-optimized
/// part. The boundary follows the phase kind: positions after the fitter
/// member's prefix, additionally excluding the critical bit in a diversity
/// phase.
pub fn diversity_stats(pop: &Population2, n: usize, generation: u64) -> PhaseEvent {
    let kind = classify_phase(pop);
    let level = (pop.f2().max(0.0) as usize).min(n);
    let start = match kind {
        Phase::Exploitation => level,
        Phase::Diversity => (level + 1).min(n),
    };
    let (h, s, b) = pop.x1().pair_counts_range(pop.x2(), start, n);
    let no_len = n - start;
    PhaseEvent {
        generation,
        kind,
        lo1: pop.f1(),
        lo2: pop.f2(),
        h: h as u64,
        h_bar: (b + s) as u64,
        b: b as u64,
        s: s as u64,
        alpha: no_len as f64 / n as f64,
    }
}

/// Receives phase events in generation order.
pub trait TraceSink {
    fn record(&mut self, event: &PhaseEvent);
}

/// Collects events in memory, keeping only the last snapshot of each
/// generation.
#[derive(Default)]
pub struct TraceRecorder {
    pub events: Vec<PhaseEvent>,
}

impl TraceRecorder {
    pub fn new() -> Self {
        Self::default()
    }
}

impl TraceSink for TraceRecorder {
    fn record(&mut self, event: &PhaseEvent) {
        if let Some(last) = self.events.last_mut() {
            if last.generation == event.generation {
                *last = event.clone();
                return;
            }
        }
        self.events.push(event.clone());
    }
}

/// Streams events as tab-separated lines; one pending event is buffered so
/// repeated snapshots of the same generation collapse to the final state.
pub struct TraceWriter<W: Write> {
    out: W,
    pending: Option<PhaseEvent>,
    header_written: bool,
}

pub const TRACE_HEADER: &str = "generation\tkind\tlo1\tlo2\tH\tH_bar\tB\tS\talpha";

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            pending: None,
            header_written: false,
        }
    }

    fn write_event(&mut self, e: &PhaseEvent) -> io::Result<()> {
        if !self.header_written {
            writeln!(self.out, "{TRACE_HEADER}")?;
            self.header_written = true;
        }
        writeln!(
            self.out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.generation, e.kind, e.lo1, e.lo2, e.h, e.h_bar, e.b, e.s, e.alpha
        )
    }

    /// Flushes the buffered event and the underlying writer.
    pub fn finish(mut self) -> io::Result<()> {
        if let Some(e) = self.pending.take() {
            self.write_event(&e)?;
        }
        self.out.flush()
    }
}

impl<W: Write> TraceSink for TraceWriter<W> {
    fn record(&mut self, event: &PhaseEvent) {
        if let Some(p) = &self.pending {
            if p.generation != event.generation {
                let p = self.pending.take().unwrap();
                // Errors surface at finish(); a sink callback cannot fail.
                let _ = self.write_event(&p);
            }
        }
        self.pending = Some(event.clone());
    }
}

/// Serializes a recorded trace in the TSV export format.
pub fn write_trace_tsv<W: Write>(mut w: W, events: &[PhaseEvent]) -> io::Result<()> {
    let mut tw = TraceWriter::new(&mut w);
    for e in events {
        tw.record(e);
    }
    tw.finish()
}

/// Parses the TSV trace format back into events.
pub fn parse_trace_tsv(text: &str) -> Result<Vec<PhaseEvent>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => return Err(format!("bad trace header: {other:?}")),
    }
    let mut events = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(format!("line {}: expected 9 fields", i + 2));
        }
        let kind = match fields[1] {
            "diversity" => Phase::Diversity,
            "exploitation" => Phase::Exploitation,
            other => return Err(format!("line {}: bad phase {other:?}", i + 2)),
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 2));
        let int = |s: &str| s.parse::<u64>().map_err(|e| format!("line {}: {e}", i + 2));
        events.push(PhaseEvent {
            generation: int(fields[0])?,
            kind,
            lo1: num(fields[2])?,
            lo2: num(fields[3])?,
            h: int(fields[4])?,
            h_bar: int(fields[5])?,
            b: int(fields[6])?,
            s: int(fields[7])?,
            alpha: num(fields[8])?,
        });
    }
    Ok(events)
}

/// Observer adapter that computes [`diversity_stats`] per generation and
/// forwards them to a sink. Records every generation for `n <= 2000`; above
/// that only every 16th generation is kept (plus the initial snapshot).
pub struct PopulationTracer<'s, S: TraceSink> {
    sink: &'s mut S,
    n: usize,
    every: u64,
}

impl<'s, S: TraceSink> PopulationTracer<'s, S> {
    pub fn new(sink: &'s mut S, n: usize) -> Self {
        Self {
            sink,
            n,
            every: if n <= 2000 { 1 } else { 16 },
        }
    }
}

impl<S: TraceSink> RunObserver for PopulationTracer<'_, S> {
    fn on_population(&mut self, pop: &Population2, evals: u64) {
        if self.every == 1 || evals.is_multiple_of(self.every) || evals <= 2 {
            self.sink.record(&diversity_stats(pop, self.n, evals));
        }
    }
}

/// Violations of the phase-wise diversity laws found in a trace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonotonicityReport {
    /// `H` decreased between consecutive diversity-phase events.
    pub diversity_violations: u64,
    /// `H` increased between consecutive exploitation-phase events.
    pub exploitation_violations: u64,
    /// `alpha` increased anywhere along the trace.
    pub alpha_violations: u64,
    pub transitions_checked: u64,
}

impl MonotonicityReport {
    pub fn clean(&self) -> bool {
        self.diversity_violations == 0
            && self.exploitation_violations == 0
            && self.alpha_violations == 0
    }
}

/// Checks that within maximal same-kind segments `H` is non-decreasing
/// (diversity) respectively non-increasing (exploitation), and that `alpha`
/// never grows. Requires a full-cadence trace.
pub fn check_monotonicity(events: &[PhaseEvent]) -> MonotonicityReport {
    let mut report = MonotonicityReport::default();
    for pair in events.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        report.transitions_checked += 1;
        if cur.alpha > prev.alpha + 1e-12 {
            report.alpha_violations += 1;
        }
        if prev.kind == cur.kind {
            match cur.kind {
                Phase::Diversity if cur.h < prev.h => report.diversity_violations += 1,
                Phase::Exploitation if cur.h > prev.h => report.exploitation_violations += 1,
                _ => {}
            }
        }
    }
    report
}

/// Monte-Carlo probe verdict.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub name: &'static str,
    pub samples: u64,
    pub empirical_mean: f64,
    pub predicted: f64,
    /// Standardized deviation; the pass bar is `|z| <= Z_THRESHOLD`.
    pub z_score: f64,
    pub pass: bool,
    /// Too few qualifying events to decide either way.
    pub inconclusive: bool,
    pub detail: String,
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.inconclusive {
            "INCONCLUSIVE"
        } else if self.pass {
            "pass"
        } else {
            "FAIL"
        };
        write!(
            f,
            "{:<18} samples={:<8} mean={:<10.4} predicted={:<10.4} z={:+.3} [{}] {}",
            self.name, self.samples, self.empirical_mean, self.predicted, self.z_score, verdict,
            self.detail
        )
    }
}

fn lo_run_config(n: usize, lambda: u64) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::new(Algorithm::DegaA, 500 * (n as u64) * (n as u64));
    cfg.lambda = Some(lambda);
    cfg
}

#[derive(Default, Clone)]
struct CriticalBitTally {
    events: u64,
    indicator_sum: u64,
    predicted_sum: f64,
    variance_sum: f64,
}

impl CriticalBitTally {
    fn merge(&mut self, other: &CriticalBitTally) {
        self.events += other.events;
        self.indicator_sum += other.indicator_sum;
        self.predicted_sum += other.predicted_sum;
        self.variance_sum += other.variance_sum;
    }
}

impl RunObserver for CriticalBitTally {
    fn on_exploit_accept(&mut self, a: &ExploitAccept<'_>) {
        // Qualifying event: the less-fit member first reaches level i while
        // the fitter member sits exactly at level i, i.e. the offspring
        // matches or beats the old fitter member.
        let i = a.old_fitter_fitness as usize;
        let n = a.offspring.len();
        if a.offspring_fitness < a.old_fitter_fitness || i >= n {
            return;
        }
        let no_len = n - i;
        let h = a.offspring.hamming_range(a.old_fitter, i, n);
        let p = h as f64 / no_len as f64;
        // The old fitter member keeps a zero at the critical position, so
        // "bit i+1 differs in the new pair" is exactly "LO(offspring) > i".
        let differs = a.offspring_fitness > a.old_fitter_fitness;
        self.events += 1;
        self.indicator_sum += differs as u64;
        self.predicted_sum += p;
        self.variance_sum += p * (1.0 - p);
    }
}

/// Validates the critical-bit law on live runs: whenever the lagging member
/// first catches up with the fitter member's level `i`, the probability that
/// position `i+1` differs in the new pair is `H / |NO|`, with `H` measured
/// right after the catch-up generation. Reports the aggregate z-score of the
/// observed frequency against the mean of the per-event predictions.
pub fn critical_bit_probe(
    n: usize,
    lambda: u64,
    runs: u64,
    rng: &mut RandomSource,
) -> ProbeReport {
    let base = rng.next_u64();
    let cfg = lo_run_config(n, lambda);
    let partials: Vec<CriticalBitTally> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut tally = CriticalBitTally::default();
            let mut f = FitnessFunction::leading_ones(n);
            let mut run_rng = RandomSource::from_seed(derive_seed(base, &[r]));
            dega_a_observed(&mut f, &cfg, &mut run_rng, &mut tally);
            tally
        })
        .collect();
    let mut tally = CriticalBitTally::default();
    for p in &partials {
        tally.merge(p);
    }
    let mean = tally.indicator_sum as f64 / tally.events.max(1) as f64;
    let predicted = tally.predicted_sum / tally.events.max(1) as f64;
    let z = if tally.variance_sum > 0.0 {
        (tally.indicator_sum as f64 - tally.predicted_sum) / tally.variance_sum.sqrt()
    } else {
        0.0
    };
    let inconclusive = tally.events < 1000;
    ProbeReport {
        name: "critical-bit",
        samples: tally.events,
        empirical_mean: mean,
        predicted,
        z_score: z,
        pass: !inconclusive && z.abs() <= Z_THRESHOLD,
        inconclusive,
        detail: format!("n={n} lambda={lambda} runs={runs}"),
    }
}

#[derive(Default)]
struct ImprovementTimes {
    trials: Vec<u64>,
}

impl RunObserver for ImprovementTimes {
    fn on_exploit_accept(&mut self, a: &ExploitAccept<'_>) {
        self.trials.push(a.trials);
    }
}

/// Problem size driving the improvement-time probe; large enough that
/// exploitation phases dominate for every tested `lambda`.
const IMPROVEMENT_PROBE_N: usize = 500;

/// Measures the evaluations per single improvement of the less-fit member
/// inside exploitation phases of live LeadingOnes runs, and tests the sample
/// against Geometric(1/lambda): the mean must sit within 5% of `lambda` and a
/// chi-squared statistic over 20 value bins (tail bins with expectation below
/// 8 pooled) must stay within the z bar.
pub fn improvement_time_probe(lambda: u64, samples: u64, rng: &mut RandomSource) -> ProbeReport {
    let n = IMPROVEMENT_PROBE_N;
    let base = rng.next_u64();
    let cfg = lo_run_config(n, lambda);
    let mut collected: Vec<u64> = Vec::with_capacity(samples as usize);
    let mut runs_done = 0u64;
    let max_runs = samples.max(64);
    while (collected.len() as u64) < samples && runs_done < max_runs {
        // Roughly one improvement per fitness level and per run; re-estimate
        // the rate from the batches already done.
        let rate = (collected.len() as u64)
            .checked_div(runs_done)
            .unwrap_or((n as u64) * 4 / 5)
            .max(1);
        let need = samples - collected.len() as u64;
        let batch = (need / rate + 1).clamp(1, 4096).min(max_runs - runs_done);
        let partials: Vec<Vec<u64>> = (runs_done..runs_done + batch)
            .into_par_iter()
            .map(|r| {
                let mut times = ImprovementTimes::default();
                let mut f = FitnessFunction::leading_ones(n);
                let mut run_rng = RandomSource::from_seed(derive_seed(base, &[r]));
                dega_a_observed(&mut f, &cfg, &mut run_rng, &mut times);
                times.trials
            })
            .collect();
        for p in partials {
            collected.extend(p);
        }
        runs_done += batch;
    }
    collected.truncate(samples as usize);
    let count = collected.len() as u64;
    if count < samples.min(1000) {
        return ProbeReport {
            name: "improvement-time",
            samples: count,
            empirical_mean: 0.0,
            predicted: lambda as f64,
            z_score: 0.0,
            pass: false,
            inconclusive: true,
            detail: format!("collected {count} of {samples} events"),
        };
    }

    let mean = collected.iter().sum::<u64>() as f64 / count as f64;
    // Geometric(1/lambda) on support {1, 2, ...}: 19 singleton bins plus a tail.
    let p = 1.0 / lambda as f64;
    let mut observed = [0u64; 20];
    for &t in &collected {
        let bin = (t.min(20) - 1) as usize;
        observed[bin] += 1;
    }
    let mut expected = [0f64; 20];
    for (k, e) in expected.iter_mut().enumerate().take(19) {
        *e = count as f64 * (1.0 - p).powi(k as i32) * p;
    }
    expected[19] = count as f64 * (1.0 - p).powi(19);
    // Pool trailing bins whose expectation is too small for the chi-squared
    // approximation.
    let mut chi = 0.0;
    let mut df = 0i64;
    let (mut pooled_obs, mut pooled_exp) = (0f64, 0f64);
    for k in (0..20).rev() {
        pooled_obs += observed[k] as f64;
        pooled_exp += expected[k];
        if pooled_exp >= 8.0 {
            chi += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
            df += 1;
            pooled_obs = 0.0;
            pooled_exp = 0.0;
        }
    }
    if pooled_exp > 0.0 && df > 0 {
        // Leftover head mass merges into the last accounted bin.
        chi += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
    }
    let df = (df - 1).max(1) as f64;
    let z_chi = (chi - df) / (2.0 * df).sqrt();
    // Scale the 5%-of-lambda mean band onto the same z bar, floored by the
    // Monte-Carlo standard error so small samples are judged against their
    // own noise (the band dominates at full scale).
    let se = ((1.0 - p).sqrt() / p) / (count as f64).sqrt();
    let band = (0.05 * lambda as f64 / Z_THRESHOLD).max(se);
    let z_mean = (mean - lambda as f64) / band;
    let z = if z_chi.abs() >= z_mean.abs() { z_chi } else { z_mean };
    let first_trial = observed[0] as f64 / count as f64;
    ProbeReport {
        name: "improvement-time",
        samples: count,
        empirical_mean: mean,
        predicted: lambda as f64,
        z_score: z,
        pass: z.abs() <= Z_THRESHOLD,
        inconclusive: false,
        detail: format!("chi2={chi:.1} df={df} Pr[T=1]={first_trial:.4} (predicted {p:.4})"),
    }
}

/// Streaming collector of fitness jumps at diversity-phase-ending
/// improvements.
#[derive(Clone, Debug, Default)]
pub struct FreeRiderTally {
    prev: Option<(Phase, f64)>,
    /// jump histogram; index k holds jumps of size k+1, last bin overflows.
    histogram: [u64; 32],
    pub events: u64,
    jump_sum: u64,
    /// Jumps exceeding the remaining suffix length (must stay zero).
    pub truncation_violations: u64,
}

impl FreeRiderTally {
    pub fn start_run(&mut self) {
        self.prev = None;
    }

    pub fn feed(&mut self, kind: Phase, lo2: f64, n: usize) {
        if let Some((Phase::Diversity, prev_lo2)) = self.prev {
            if lo2 > prev_lo2 {
                let jump = (lo2 - prev_lo2) as u64;
                self.events += 1;
                self.jump_sum += jump;
                self.histogram[(jump as usize - 1).min(31)] += 1;
                if jump > (n as f64 - prev_lo2) as u64 {
                    self.truncation_violations += 1;
                }
            }
        }
        self.prev = Some((kind, lo2));
    }

    pub fn merge(&mut self, other: &FreeRiderTally) {
        self.events += other.events;
        self.jump_sum += other.jump_sum;
        self.truncation_violations += other.truncation_violations;
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
    }

    /// Fraction of jumps of size at least `k`.
    pub fn tail(&self, k: u64) -> f64 {
        if self.events == 0 {
            return 0.0;
        }
        let at_least: u64 = self.histogram[(k as usize - 1).min(31)..].iter().sum();
        at_least as f64 / self.events as f64
    }

    pub fn mean(&self) -> f64 {
        self.jump_sum as f64 / self.events.max(1) as f64
    }

    fn into_report(self) -> ProbeReport {
        let mean = self.mean();
        let events = self.events.max(1) as f64;
        // Tail domination by Geometric: Pr[jump >= k] <= (1/2)^(k-1) * 1.2
        // for k up to 10, with a sampling allowance on top of the model
        // slack so small samples are not judged on single-digit counts.
        let mut tail_ok = self.truncation_violations == 0;
        let mut worst_tail = String::new();
        for k in 2..=10u64 {
            let bound = 1.2 * 0.5f64.powi(k as i32 - 1);
            let allowed = bound + Z_THRESHOLD * (bound * (1.0 - bound) / events).sqrt();
            let obs = self.tail(k);
            if obs > allowed {
                tail_ok = false;
                worst_tail = format!(" tail({k})={obs:.4}>{allowed:.4}");
            }
        }
        // Mean band [1.9, 2.1] mapped onto the z bar, floored by the
        // Monte-Carlo standard error of the mean.
        let band = (0.1 / Z_THRESHOLD).max(std::f64::consts::SQRT_2 / events.sqrt());
        let z = if self.events == 0 {
            0.0
        } else {
            (mean - 2.0) / band
        };
        let inconclusive = self.events < 1000;
        ProbeReport {
            name: "free-rider",
            samples: self.events,
            empirical_mean: mean,
            predicted: 2.0,
            z_score: z,
            pass: !inconclusive && z.abs() <= Z_THRESHOLD && tail_ok,
            inconclusive,
            detail: format!(
                "Pr[jump>=5]={:.4} (bound 0.075) truncation_violations={}{}",
                self.tail(5),
                self.truncation_violations,
                worst_tail
            ),
        }
    }
}

/// Checks the free-rider law on recorded traces: jumps at diversity-ending
/// improvements must average 2 (within the [1.9, 2.1] band) and their tail
/// must stay dominated by `Geometric(1/2)` up to a 20% slack. A tail or
/// truncation violation fails the probe even at a small z-score.
pub fn free_rider_probe<'a>(
    traces: impl IntoIterator<Item = &'a [PhaseEvent]>,
    n: usize,
) -> ProbeReport {
    let mut tally = FreeRiderTally::default();
    for trace in traces {
        tally.start_run();
        for e in trace {
            tally.feed(e.kind, e.lo2, n);
        }
    }
    tally.into_report()
}

struct FreeRiderObserver {
    tally: FreeRiderTally,
    n: usize,
}

impl RunObserver for FreeRiderObserver {
    fn on_population(&mut self, pop: &Population2, _evals: u64) {
        self.tally.feed(classify_phase(pop), pop.f2(), self.n);
    }
}

/// Drives fresh LeadingOnes runs until `min_events` diversity-ending jumps
/// have been observed (or a run cap is hit) and returns the raw jump tally.
pub fn run_free_rider_tally(
    n: usize,
    lambda: u64,
    min_events: u64,
    rng: &mut RandomSource,
) -> FreeRiderTally {
    let base = rng.next_u64();
    let cfg = lo_run_config(n, lambda);
    let mut tally = FreeRiderTally::default();
    let runs_per_batch = 64u64;
    let max_runs = min_events.max(64);
    let mut next_run = 0u64;
    while tally.events < min_events && next_run < max_runs {
        let end = (next_run + runs_per_batch).min(max_runs);
        let partials: Vec<FreeRiderTally> = (next_run..end)
            .into_par_iter()
            .map(|r| {
                let mut obs = FreeRiderObserver {
                    tally: FreeRiderTally::default(),
                    n,
                };
                let mut f = FitnessFunction::leading_ones(n);
                let mut run_rng = RandomSource::from_seed(derive_seed(base, &[r]));
                dega_a_observed(&mut f, &cfg, &mut run_rng, &mut obs);
                obs.tally
            })
            .collect();
        for p in &partials {
            tally.merge(p);
        }
        next_run = end;
    }
    tally
}

/// [`run_free_rider_tally`] followed by the free-rider checks.
pub fn run_free_rider_probe(
    n: usize,
    lambda: u64,
    min_events: u64,
    rng: &mut RandomSource,
) -> ProbeReport {
    let tally = run_free_rider_tally(n, lambda, min_events, rng);
    let mut report = tally.into_report();
    report.detail = format!("n={n} lambda={lambda} {}", report.detail);
    report
}

/// Per-phase fitness progress statistics of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseProgressSummary {
    /// Number of completed exploitation phases.
    pub exploitation_phases: u64,
    /// Quantiles of `L_k / (sqrt(lambda) ln n)` over exploitation phases.
    pub normalized_p50: f64,
    pub normalized_p90: f64,
    pub normalized_p99: f64,
    pub normalized_max: f64,
    /// Total fitness gained across exploitation phases.
    pub exploitation_total: f64,
    /// Total fitness gained across diversity phases.
    pub diversity_total: f64,
}

/// Computes the progress `L_k` of every maximal exploitation segment (the
/// fitter member's fitness at the next phase start minus at this phase
/// start) and reports quantiles of `L_k / (sqrt(lambda) ln n)`. A phase
/// boundary is any generation where the phase classification flips.
pub fn phase_progress_stats(events: &[PhaseEvent], lambda: u64, n: usize) -> PhaseProgressSummary {
    // Starts of maximal same-kind segments.
    let mut starts: Vec<(Phase, f64)> = Vec::new();
    for e in events {
        if starts.last().map(|(k, _)| *k) != Some(e.kind) {
            starts.push((e.kind, e.lo2));
        }
    }
    let final_lo2 = events.last().map(|e| e.lo2).unwrap_or(0.0);
    let mut exploit: Vec<f64> = Vec::new();
    let mut diversity_total = 0.0;
    let mut exploitation_total = 0.0;
    for (i, &(kind, lo2)) in starts.iter().enumerate() {
        let next = starts.get(i + 1).map(|(_, l)| *l).unwrap_or(final_lo2);
        let gain = next - lo2;
        match kind {
            Phase::Exploitation => {
                exploit.push(gain);
                exploitation_total += gain;
            }
            Phase::Diversity => diversity_total += gain,
        }
    }
    let scale = (lambda as f64).sqrt() * (n as f64).ln();
    let mut normalized: Vec<f64> = exploit.iter().map(|l| l / scale).collect();
    normalized.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| -> f64 {
        if normalized.is_empty() {
            return 0.0;
        }
        let idx = ((normalized.len() - 1) as f64 * q).round() as usize;
        normalized[idx]
    };
    PhaseProgressSummary {
        exploitation_phases: exploit.len() as u64,
        normalized_p50: quantile(0.5),
        normalized_p90: quantile(0.9),
        normalized_p99: quantile(0.99),
        normalized_max: normalized.last().copied().unwrap_or(0.0),
        exploitation_total,
        diversity_total,
    }
}
