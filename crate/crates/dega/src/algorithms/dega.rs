//! The diversity-exploiting genetic algorithm in its three flavours.
//!
//! All variants start from a pair of antipodal search points, i.e. from
//! maximal diversity. Variant A alternates diversity phases (mutation with
//! diversity-favouring selection while both members are equally fit) and
//! exploitation phases (repeated biased crossover pulling the less-fit member
//! towards the fitter one). A' mixes a mutation branch and a crossover branch
//! with probability 1/2 each and adapts the crossover bias to the Hamming
//! distance of the accepted uniform-crossover offspring. A-BB replaces the
//! biased-crossover refinement by a fixed loop of uniform crossovers.

use crate::benchmarks::FitnessFunction;
use crate::bits::{
    biased_crossover, complement, hamming, standard_mutate, uniform_crossover, uniform_random,
    BitString,
};
use crate::rng::RandomSource;

use super::{
    select_population, select_survivors, ExploitAccept, NoopObserver, OptimizerConfig,
    Population2, RunContext, RunObserver, RunResult,
};

/// A fresh uniform search point together with its complement. Every
/// diversity-exploiting variant initializes from such a pair, so the initial
/// Hamming distance is exactly the string length.
pub fn antipodal_pair(n: usize, rng: &mut RandomSource) -> (BitString, BitString) {
    let x = uniform_random(n, rng);
    let xbar = complement(&x);
    (x, xbar)
}

/// Evaluates the antipodal pair; `None` when the budget or target ends the
/// run before the second evaluation.
fn init_antipodal<O: RunObserver>(
    ctx: &mut RunContext<'_>,
    rng: &mut RandomSource,
    obs: &mut O,
) -> Option<Population2> {
    let (x, xbar) = antipodal_pair(ctx.dimension(), rng);
    let fx = ctx.eval(&x);
    if ctx.done() {
        return None;
    }
    let fxbar = ctx.eval(&xbar);
    let pop = Population2::new(x, fx, xbar, fxbar);
    obs.on_population(&pop, ctx.evals());
    Some(pop)
}

/// Variant A with parameter `lambda >= 2`.
///
/// While both members are equally fit, a uniformly chosen member is mutated
/// at rate `1/n` and the population is selected fitness-first with diversity
/// as the secondary criterion. Otherwise offspring are drawn by biased
/// crossover (bias `1/lambda` towards the fitter member) until one strictly
/// improves on the less-fit member, which it then replaces. With an
/// exploitation cap set, a phase that spends that many crossover evaluations
/// without ending performs a single mutation step with best-two-of-three
/// selection and then re-enters the outer loop.
pub fn dega_a(
    f: &mut FitnessFunction,
    cfg: &OptimizerConfig,
    rng: &mut RandomSource,
) -> RunResult {
    dega_a_observed(f, cfg, rng, &mut NoopObserver)
}

pub fn dega_a_observed<O: RunObserver>(
    f: &mut FitnessFunction,
    cfg: &OptimizerConfig,
    rng: &mut RandomSource,
    obs: &mut O,
) -> RunResult {
    let lambda = cfg.lambda.expect("dega-a requires lambda");
    assert!(lambda >= 2, "dega-a requires lambda >= 2");
    let bias = 1.0 / lambda as f64;
    let n = f.dimension();
    let rate = 1.0 / n as f64;

    let mut ctx = RunContext::new(f, cfg);
    let Some(mut pop) = init_antipodal(&mut ctx, rng, obs) else {
        return ctx.finish();
    };

    // Crossover evaluations inside the current exploitation phase, and inside
    // the current improvement attempt.
    let mut phase_evals = 0u64;
    let mut trials = 0u64;
    while !ctx.done() {
        if pop.f1() == pop.f2() {
            phase_evals = 0;
            trials = 0;
            let y = standard_mutate(pop.member(rng.bit()), rate, rng);
            let fy = ctx.eval(&y);
            pop = select_population(&pop, y, fy, rng);
            obs.on_population(&pop, ctx.evals());
        } else if cfg.exploitation_cap.is_some_and(|cap| phase_evals >= cap) {
            // Cap expired: one mutation step so the algorithm cannot
            // livelock on functions without improving biased crossovers.
            phase_evals = 0;
            trials = 0;
            let y = standard_mutate(pop.member(rng.bit()), rate, rng);
            let fy = ctx.eval(&y);
            pop = select_survivors(&pop, y, fy, rng);
            obs.on_population(&pop, ctx.evals());
        } else {
            let y = biased_crossover(pop.x1(), pop.x2(), bias, rng);
            let fy = ctx.eval(&y);
            phase_evals += 1;
            trials += 1;
            if fy > pop.f1() {
                obs.on_exploit_accept(&ExploitAccept {
                    old_fitter: pop.x2(),
                    old_fitter_fitness: pop.f2(),
                    offspring: &y,
                    offspring_fitness: fy,
                    trials,
                });
                trials = 0;
                pop.replace(false, y, fy);
            }
            obs.on_population(&pop, ctx.evals());
        }
    }
    ctx.finish()
}

/// Selects the strictly-less-fit member; a fitness tie is broken uniformly.
/// Returns whether the chosen member is the second (fitter-labelled) slot.
fn weaker_slot(pop: &Population2, rng: &mut RandomSource) -> bool {
    if pop.f1() == pop.f2() {
        rng.bit()
    } else {
        false
    }
}

/// Variant A': each generation flips a fair coin between a mutation branch
/// (offspring may only replace its own parent, on strict fitness improvement
/// or on equal fitness with strictly larger distance to the other member) and
/// a crossover branch (a uniform-crossover offspring `y` that beats the
/// less-fit member `x'` triggers up to `ceil(h ln n)` biased crossovers with
/// bias `1/h`, `h = H(x', y)`, the first of which to beat `x'` replaces it).
pub fn dega_a_prime(
    f: &mut FitnessFunction,
    cfg: &OptimizerConfig,
    rng: &mut RandomSource,
) -> RunResult {
    dega_a_prime_observed(f, cfg, rng, &mut NoopObserver)
}

pub fn dega_a_prime_observed<O: RunObserver>(
    f: &mut FitnessFunction,
    cfg: &OptimizerConfig,
    rng: &mut RandomSource,
    obs: &mut O,
) -> RunResult {
    let n = f.dimension();
    let rate = 1.0 / n as f64;
    let ln_n = (n as f64).ln();

    let mut ctx = RunContext::new(f, cfg);
    let Some(mut pop) = init_antipodal(&mut ctx, rng, obs) else {
        return ctx.finish();
    };

    while !ctx.done() {
        if rng.bit() {
            // Mutation branch.
            let slot = rng.bit();
            let y = standard_mutate(pop.member(slot), rate, rng);
            let fy = ctx.eval(&y);
            let fp = pop.fitness(slot);
            let other = pop.member(!slot);
            let accept = fy > fp
                || (fy == fp && hamming(&y, other) > hamming(pop.member(slot), other));
            if accept {
                pop.replace(slot, y, fy);
            }
            obs.on_population(&pop, ctx.evals());
        } else {
            // Crossover branch.
            let y = uniform_crossover(pop.x1(), pop.x2(), rng);
            let fy = ctx.eval(&y);
            obs.on_population(&pop, ctx.evals());
            if ctx.done() {
                break;
            }
            let slot = weaker_slot(&pop, rng);
            let fw = pop.fitness(slot);
            if fy <= fw {
                continue;
            }
            let h = hamming(pop.member(slot), &y);
            let bias = 1.0 / h as f64;
            let iters = (h as f64 * ln_n).ceil() as u64;
            for _ in 0..iters {
                if ctx.done() {
                    break;
                }
                let z = biased_crossover(pop.member(slot), &y, bias, rng);
                let fz = ctx.eval(&z);
                let accepted = fz > fw;
                if accepted {
                    pop.replace(slot, z, fz);
                }
                obs.on_population(&pop, ctx.evals());
                if accepted {
                    break;
                }
            }
        }
    }
    ctx.finish()
}

/// Variant A-BB: like A', but a crossover offspring `y` beating the less-fit
/// member `x'` is refined by `ceil(10 ln n)` uniform crossovers between `x'`
/// and `y`, each replacing `y` when fitter than `x'`; the final `y` replaces
/// `x'` unconditionally.
pub fn dega_a_bb(
    f: &mut FitnessFunction,
    cfg: &OptimizerConfig,
    rng: &mut RandomSource,
) -> RunResult {
    dega_a_bb_observed(f, cfg, rng, &mut NoopObserver)
}

pub fn dega_a_bb_observed<O: RunObserver>(
    f: &mut FitnessFunction,
    cfg: &OptimizerConfig,
    rng: &mut RandomSource,
    obs: &mut O,
) -> RunResult {
    let n = f.dimension();
    let rate = 1.0 / n as f64;
    let refine_iters = (10.0 * (n as f64).ln()).ceil() as u64;

    let mut ctx = RunContext::new(f, cfg);
    let Some(mut pop) = init_antipodal(&mut ctx, rng, obs) else {
        return ctx.finish();
    };

    while !ctx.done() {
        if rng.bit() {
            let slot = rng.bit();
            let y = standard_mutate(pop.member(slot), rate, rng);
            let fy = ctx.eval(&y);
            let fp = pop.fitness(slot);
            let other = pop.member(!slot);
            let accept = fy > fp
                || (fy == fp && hamming(&y, other) > hamming(pop.member(slot), other));
            if accept {
                pop.replace(slot, y, fy);
            }
            obs.on_population(&pop, ctx.evals());
        } else {
            let y = uniform_crossover(pop.x1(), pop.x2(), rng);
            let fy = ctx.eval(&y);
            obs.on_population(&pop, ctx.evals());
            if ctx.done() {
                break;
            }
            let slot = weaker_slot(&pop, rng);
            let fw = pop.fitness(slot);
            if fy <= fw {
                continue;
            }
            let mut best = y;
            let mut fbest = fy;
            let mut it = 0;
            while it < refine_iters && !ctx.done() {
                let z = uniform_crossover(pop.member(slot), &best, rng);
                let fz = ctx.eval(&z);
                it += 1;
                if fz > fw {
                    best = z;
                    fbest = fz;
                }
                if it < refine_iters && !ctx.done() {
                    obs.on_population(&pop, ctx.evals());
                }
            }
            // The accepted crossover offspring (possibly refined) takes the
            // weaker slot even when no refinement beat it.
            pop.replace(slot, best, fbest);
            obs.on_population(&pop, ctx.evals());
        }
    }
    ctx.finish()
}
