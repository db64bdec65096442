//! The seven optimizers behind one interface: the diversity-exploiting
//! genetic algorithm in its three variants plus four classical baselines.
//!
//! Every optimizer consumes fitness evaluations through a [`RunContext`],
//! which enforces the evaluation budget, tracks the best fitness seen and
//! stops a run the moment the target (or known optimum) is evaluated. No
//! optimizer evaluates past its budget.

mod baselines;
mod dega;

pub use baselines::{one_plus_lambda_lambda_ga, one_plus_one_ea, two_plus_one_ga, umda};
pub use dega::{antipodal_pair, dega_a, dega_a_bb, dega_a_observed, dega_a_prime};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::benchmarks::FitnessFunction;
use crate::bits::{hamming, BitString};
use crate::instrumentation::PhaseEvent;
use crate::rng::RandomSource;

/// Algorithm identifiers, also used verbatim in configs and on the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    DegaA,
    DegaAPrime,
    DegaABb,
    OnePlusOneEa,
    TwoPlusOneGa,
    OneLambdaLambdaGa,
    Umda,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::DegaA,
        Algorithm::DegaAPrime,
        Algorithm::DegaABb,
        Algorithm::OnePlusOneEa,
        Algorithm::TwoPlusOneGa,
        Algorithm::OneLambdaLambdaGa,
        Algorithm::Umda,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::DegaA => "dega-a",
            Algorithm::DegaAPrime => "dega-a-prime",
            Algorithm::DegaABb => "dega-a-bb",
            Algorithm::OnePlusOneEa => "opo-ea",
            Algorithm::TwoPlusOneGa => "tpo-ga",
            Algorithm::OneLambdaLambdaGa => "ollga",
            Algorithm::Umda => "umda",
        }
    }

    /// Whether the optimizer maintains a two-member population whose state is
    /// reported to observers (and hence can be phase-traced).
    pub fn has_population_trace(self) -> bool {
        matches!(
            self,
            Algorithm::DegaA | Algorithm::DegaAPrime | Algorithm::DegaABb | Algorithm::TwoPlusOneGa
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL.into_iter().find(|a| a.id() == s).ok_or_else(|| {
            let ids: Vec<_> = Algorithm::ALL.iter().map(|a| a.id()).collect();
            format!("unknown algorithm {s:?}; valid identifiers: {}", ids.join(", "))
        })
    }
}

/// Resolved per-run optimizer parameters. Only the parameters an algorithm
/// actually uses may be set; [`OptimizerConfig::validate`] rejects extras.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    /// Crossover bias denominator for dega-a, offspring count for ollga,
    /// population size for umda.
    pub lambda: Option<u64>,
    /// Crossover probability of the (2+1)-GA (default 1/2).
    pub p_c: Option<f64>,
    /// Mutation strength parameter of the (1+(lambda,lambda))-GA.
    pub k: Option<u64>,
    /// Parent count of the UMDA truncation selection.
    pub mu: Option<u64>,
    /// dega-a only: evaluation cap per exploitation phase; on expiry the
    /// algorithm performs one mutation step before crossing over again.
    pub exploitation_cap: Option<u64>,
    /// Maximum number of fitness evaluations.
    pub budget: u64,
    /// Stop as soon as this fitness is evaluated; defaults to the
    /// benchmark's known optimum.
    pub target: Option<f64>,
    /// Record the (evaluation index, best fitness) improvement trajectory.
    pub record_trajectory: bool,
}

impl OptimizerConfig {
    /// A bare config with only the budget set; fill in what the algorithm
    /// needs.
    pub fn new(algorithm: Algorithm, budget: u64) -> Self {
        Self {
            algorithm,
            lambda: None,
            p_c: None,
            k: None,
            mu: None,
            exploitation_cap: None,
            budget,
            target: None,
            record_trajectory: false,
        }
    }

    pub fn with_lambda(mut self, lambda: u64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        use Algorithm::*;
        let alg = self.algorithm;
        if self.budget == 0 {
            return Err(ConfigError::InvalidValue {
                name: "budget",
                detail: "must be at least 1".into(),
            });
        }
        let reject_extra = |set: bool, name: &'static str| {
            if set {
                Err(ConfigError::UnexpectedParameter { algorithm: alg.id(), name })
            } else {
                Ok(())
            }
        };
        match alg {
            DegaA => {
                let lambda = self.lambda.ok_or(ConfigError::MissingParameter {
                    algorithm: alg.id(),
                    name: "lambda",
                })?;
                if lambda < 2 {
                    return Err(ConfigError::InvalidValue {
                        name: "lambda",
                        detail: "dega-a requires lambda >= 2".into(),
                    });
                }
                if self.exploitation_cap == Some(0) {
                    return Err(ConfigError::InvalidValue {
                        name: "cap",
                        detail: "must be at least 1".into(),
                    });
                }
                reject_extra(self.p_c.is_some(), "p-c")?;
                reject_extra(self.k.is_some(), "k")?;
                reject_extra(self.mu.is_some(), "mu")?;
            }
            DegaAPrime | DegaABb | OnePlusOneEa => {
                reject_extra(self.lambda.is_some(), "lambda")?;
                reject_extra(self.p_c.is_some(), "p-c")?;
                reject_extra(self.k.is_some(), "k")?;
                reject_extra(self.mu.is_some(), "mu")?;
                reject_extra(self.exploitation_cap.is_some(), "cap")?;
            }
            TwoPlusOneGa => {
                if let Some(p) = self.p_c {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(ConfigError::InvalidValue {
                            name: "p-c",
                            detail: "must lie in [0, 1]".into(),
                        });
                    }
                }
                reject_extra(self.lambda.is_some(), "lambda")?;
                reject_extra(self.k.is_some(), "k")?;
                reject_extra(self.mu.is_some(), "mu")?;
                reject_extra(self.exploitation_cap.is_some(), "cap")?;
            }
            OneLambdaLambdaGa => {
                if self.lambda == Some(0) || self.k == Some(0) {
                    return Err(ConfigError::InvalidValue {
                        name: "lambda/k",
                        detail: "must be at least 1".into(),
                    });
                }
                reject_extra(self.p_c.is_some(), "p-c")?;
                reject_extra(self.mu.is_some(), "mu")?;
                reject_extra(self.exploitation_cap.is_some(), "cap")?;
            }
            Umda => {
                if let (Some(mu), Some(lambda)) = (self.mu, self.lambda) {
                    if mu > lambda {
                        return Err(ConfigError::InvalidValue {
                            name: "mu",
                            detail: format!("mu = {mu} exceeds lambda = {lambda}"),
                        });
                    }
                }
                if self.lambda == Some(0) || self.mu == Some(0) {
                    return Err(ConfigError::InvalidValue {
                        name: "lambda/mu",
                        detail: "must be at least 1".into(),
                    });
                }
                reject_extra(self.p_c.is_some(), "p-c")?;
                reject_extra(self.k.is_some(), "k")?;
                reject_extra(self.exploitation_cap.is_some(), "cap")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{algorithm} requires parameter {name}")]
    MissingParameter {
        algorithm: &'static str,
        name: &'static str,
    },
    #[error("parameter {name} does not apply to {algorithm}")]
    UnexpectedParameter {
        algorithm: &'static str,
        name: &'static str,
    },
    #[error("invalid value for {name}: {detail}")]
    InvalidValue { name: &'static str, detail: String },
}

/// Outcome of a single optimizer run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub evaluations_used: u64,
    /// True iff the target (or known optimum) was evaluated within budget.
    pub success: bool,
    pub best_fitness: f64,
    /// (evaluation index, best fitness) at every improvement, when requested.
    pub trajectory: Option<Vec<(u64, f64)>>,
    /// Per-generation phase events, when the run was traced.
    pub phase_trace: Option<Vec<PhaseEvent>>,
}

/// Ordered pair of search points with cached fitness values; the invariant
/// `f1 <= f2` is re-established after every replacement.
#[derive(Clone, Debug)]
pub struct Population2 {
    x1: BitString,
    x2: BitString,
    f1: f64,
    f2: f64,
}

impl Population2 {
    pub fn new(a: BitString, fa: f64, b: BitString, fb: f64) -> Self {
        let mut pop = Self {
            x1: a,
            f1: fa,
            x2: b,
            f2: fb,
        };
        pop.reorder();
        pop
    }

    fn reorder(&mut self) {
        if self.f1 > self.f2 {
            std::mem::swap(&mut self.x1, &mut self.x2);
            std::mem::swap(&mut self.f1, &mut self.f2);
        }
    }

    /// The less-fit member (either one under a fitness tie).
    pub fn x1(&self) -> &BitString {
        &self.x1
    }

    /// The fitter member.
    pub fn x2(&self) -> &BitString {
        &self.x2
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    pub fn f2(&self) -> f64 {
        self.f2
    }

    pub fn member(&self, second: bool) -> &BitString {
        if second {
            &self.x2
        } else {
            &self.x1
        }
    }

    pub fn fitness(&self, second: bool) -> f64 {
        if second {
            self.f2
        } else {
            self.f1
        }
    }

    /// Full-string Hamming distance between the two members.
    pub fn hamming(&self) -> usize {
        hamming(&self.x1, &self.x2)
    }

    /// Replaces one member and restores the fitness ordering.
    pub fn replace(&mut self, second: bool, y: BitString, fy: f64) {
        if second {
            self.x2 = y;
            self.f2 = fy;
        } else {
            self.x1 = y;
            self.f1 = fy;
        }
        self.reorder();
    }
}

/// Observer hooks for the population-based runners. All callbacks default to
/// no-ops and receive no randomness, so observation can never perturb a run.
pub trait RunObserver {
    /// Initial population and the post-selection population after every
    /// subsequent evaluation of a two-member algorithm.
    fn on_population(&mut self, _pop: &Population2, _evals: u64) {}

    /// dega-a only: a biased-crossover offspring just replaced the less-fit
    /// member.
    fn on_exploit_accept(&mut self, _accept: &ExploitAccept<'_>) {}
}

/// Payload of [`RunObserver::on_exploit_accept`], captured before the
/// population is updated.
pub struct ExploitAccept<'a> {
    /// The fitter member the offspring was crossed towards.
    pub old_fitter: &'a BitString,
    pub old_fitter_fitness: f64,
    pub offspring: &'a BitString,
    pub offspring_fitness: f64,
    /// Crossover evaluations spent on this improvement, including the
    /// accepted offspring.
    pub trials: u64,
}

/// Observer that ignores everything.
pub struct NoopObserver;

impl RunObserver for NoopObserver {}

impl<A: RunObserver, B: RunObserver> RunObserver for (&mut A, &mut B) {
    fn on_population(&mut self, pop: &Population2, evals: u64) {
        self.0.on_population(pop, evals);
        self.1.on_population(pop, evals);
    }

    fn on_exploit_accept(&mut self, accept: &ExploitAccept<'_>) {
        self.0.on_exploit_accept(accept);
        self.1.on_exploit_accept(accept);
    }
}

/// Fitness-first, diversity-second survivor selection over a population pair
/// and one offspring: keep the two best fitness values; when several pairs
/// realize them, keep a pair of maximal Hamming distance, breaking remaining
/// ties uniformly at random.
///
/// Returns which candidates to keep, as indices into `[x1, x2, y]`.
fn select_best_two(
    cands: [(&BitString, f64); 3],
    rng: &mut RandomSource,
) -> (usize, usize) {
    let mut fits = [cands[0].1, cands[1].1, cands[2].1];
    fits.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (g1, g2) = (fits[0], fits[1]);
    let mut qualifying = [(0usize, 0usize); 3];
    let mut q = 0;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let (fa, fb) = (cands[a].1, cands[b].1);
        if fa.max(fb) == g1 && fa.min(fb) == g2 {
            qualifying[q] = (a, b);
            q += 1;
        }
    }
    if q == 1 {
        return qualifying[0];
    }
    let mut best = 0usize;
    let mut best_h = hamming(cands[qualifying[0].0].0, cands[qualifying[0].1].0);
    let mut ties = 1u64;
    for i in 1..q {
        let h = hamming(cands[qualifying[i].0].0, cands[qualifying[i].1].0);
        if h > best_h {
            best = i;
            best_h = h;
            ties = 1;
        } else if h == best_h {
            ties += 1;
            if rng.below(ties) == 0 {
                best = i;
            }
        }
    }
    qualifying[best]
}

/// Applies [`select_best_two`] to a population and an offspring, producing
/// the surviving pair.
pub(crate) fn select_survivors(
    pop: &Population2,
    y: BitString,
    fy: f64,
    rng: &mut RandomSource,
) -> Population2 {
    let keep = select_best_two([(&pop.x1, pop.f1), (&pop.x2, pop.f2), (&y, fy)], rng);
    let pick = |i: usize| -> (BitString, f64) {
        match i {
            0 => (pop.x1.clone(), pop.f1),
            1 => (pop.x2.clone(), pop.f2),
            _ => (y.clone(), fy),
        }
    };
    let (a, fa) = pick(keep.0);
    let (b, fb) = pick(keep.1);
    Population2::new(a, fa, b, fb)
}

/// Diversity-phase selection of the diversity-exploiting GA: requires both
/// population members to have equal fitness. A strictly fitter offspring is
/// always kept (together with the parent farther from it); a strictly worse
/// one is always discarded; under a three-way fitness tie the pair of maximal
/// Hamming distance survives, ties broken uniformly at random.
pub fn select_population(
    pop: &Population2,
    y: BitString,
    fy: f64,
    rng: &mut RandomSource,
) -> Population2 {
    assert_eq!(
        pop.f1, pop.f2,
        "diversity-phase selection requires equally fit members"
    );
    select_survivors(pop, y, fy, rng)
}

/// Bookkeeping around a fitness function for one run: budget enforcement,
/// best-so-far tracking and target detection.
pub(crate) struct RunContext<'a> {
    f: &'a mut FitnessFunction,
    budget: u64,
    stop_fitness: Option<f64>,
    best: f64,
    done: bool,
    trajectory: Option<Vec<(u64, f64)>>,
}

impl<'a> RunContext<'a> {
    pub(crate) fn new(f: &'a mut FitnessFunction, cfg: &OptimizerConfig) -> Self {
        debug_assert_eq!(f.evaluation_count(), 0, "run expects a fresh counter");
        let stop_fitness = cfg.target.or(f.known_optimum());
        Self {
            budget: cfg.budget,
            stop_fitness,
            best: f64::NEG_INFINITY,
            done: cfg.budget == 0,
            trajectory: cfg.record_trajectory.then(Vec::new),
            f,
        }
    }

    pub(crate) fn dimension(&self) -> usize {
        self.f.dimension()
    }

    pub(crate) fn evals(&self) -> u64 {
        self.f.evaluation_count()
    }

    pub(crate) fn done(&self) -> bool {
        self.done
    }

    pub(crate) fn eval(&mut self, x: &BitString) -> f64 {
        debug_assert!(!self.done, "evaluation past the end of the run");
        let v = self.f.evaluate(x);
        if v > self.best {
            self.best = v;
            if let Some(t) = &mut self.trajectory {
                t.push((self.f.evaluation_count(), v));
            }
        }
        if self.stop_fitness.is_some_and(|s| v >= s) {
            self.done = true;
        }
        if self.f.evaluation_count() >= self.budget {
            self.done = true;
        }
        v
    }

    pub(crate) fn finish(self) -> RunResult {
        RunResult {
            evaluations_used: self.f.evaluation_count(),
            success: self.stop_fitness.is_some_and(|s| self.best >= s),
            best_fitness: self.best,
            trajectory: self.trajectory,
            phase_trace: None,
        }
    }
}

/// Runs the configured optimizer on `f`. The fitness function must be fresh;
/// its counter becomes `RunResult::evaluations_used`.
pub fn run(
    f: &mut FitnessFunction,
    cfg: &OptimizerConfig,
    rng: &mut RandomSource,
) -> Result<RunResult, ConfigError> {
    run_observed(f, cfg, rng, &mut NoopObserver)
}

/// Like [`run`], with observer callbacks for population-based algorithms.
pub fn run_observed<O: RunObserver>(
    f: &mut FitnessFunction,
    cfg: &OptimizerConfig,
    rng: &mut RandomSource,
    obs: &mut O,
) -> Result<RunResult, ConfigError> {
    cfg.validate()?;
    Ok(match cfg.algorithm {
        Algorithm::DegaA => dega::dega_a_observed(f, cfg, rng, obs),
        Algorithm::DegaAPrime => dega::dega_a_prime_observed(f, cfg, rng, obs),
        Algorithm::DegaABb => dega::dega_a_bb_observed(f, cfg, rng, obs),
        Algorithm::OnePlusOneEa => baselines::one_plus_one_ea(f, cfg, rng),
        Algorithm::TwoPlusOneGa => baselines::two_plus_one_ga_observed(f, cfg, rng, obs),
        Algorithm::OneLambdaLambdaGa => baselines::one_plus_lambda_lambda_ga(f, cfg, rng),
        Algorithm::Umda => baselines::umda(f, cfg, rng),
    })
}
