//! Diversity-exploiting genetic algorithms and a pseudo-Boolean benchmark
//! harness.
//!
//! The core idea: when a crossover offspring improves on the weaker of two
//! parents, do not accept it directly — subsample its improving mask through
//! *biased crossover* so the critical bit flips survive while most of the
//! population diversity is preserved. The crate implements the (2+1)
//! diversity-exploiting GA built on this idea (variants `dega-a`,
//! `dega-a-prime`, `dega-a-bb`), the classical baselines it is measured
//! against ((1+1)-EA, (2+1)-GA, (1+(λ,λ))-GA, UMDA), four pseudo-Boolean
//! benchmarks (LeadingOnes, OneMax, linear functions with harmonic weights,
//! and a maximum-independent-vertex-set instance), diversity instrumentation
//! with Monte-Carlo probes, and a deterministic experiment runner with
//! log-log scaling regression.
//!
//! Everything is seeded: the same configuration and master seed reproduce
//! every CSV byte for byte.

pub mod algorithms;
pub mod benchmarks;
pub mod bits;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod instrumentation;
pub mod rng;

pub use algorithms::{Algorithm, OptimizerConfig, Population2, RunResult};
pub use benchmarks::{Benchmark, FitnessFunction, Graph};
pub use bits::BitString;
pub use experiments::{AlgorithmSpec, ExperimentConfig, RunRecord, SummaryStats};
pub use instrumentation::{Phase, PhaseEvent, ProbeReport};
pub use rng::RandomSource;
