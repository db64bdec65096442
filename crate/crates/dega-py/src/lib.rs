//! Python bindings exposing the bit-string operators, the benchmark
//! functions and single optimizer runs.
//!
//! Build with `cargo build -p dega-py --release`; the resulting
//! `libdega_py.so` imports as the module `dega_py` (see
//! `python/smoke_test.py`).

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dega::algorithms::{run as run_optimizer, Algorithm};
use dega::benchmarks::{load_graph, Benchmark, FitnessFunction};
use dega::bits;
use dega::experiments::{
    log_spaced_sizes as core_log_spaced, loglog_slope as core_slope, AlgorithmSpec, BudgetRule,
    CapRule, ParamRule,
};
use dega::rng::{derive_seed, RandomSource};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Deterministic random source; identical seeds give identical draws.
#[pyclass(name = "RandomSource")]
struct PyRandomSource {
    inner: RandomSource,
}

#[pymethods]
impl PyRandomSource {
    #[new]
    fn new(seed: u64) -> Self {
        Self {
            inner: RandomSource::from_seed(seed),
        }
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform float in [0, 1).
    fn real(&mut self) -> f64 {
        self.inner.real()
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        self.inner.bernoulli(p)
    }

    /// Independent child source for a tagged stream.
    fn derive(&self, stream: u64) -> Self {
        Self {
            inner: RandomSource::from_seed(derive_seed(self.inner.seed(), &[stream])),
        }
    }
}

/// Fixed-length binary search point.
#[pyclass(name = "BitString")]
struct PyBitString {
    inner: bits::BitString,
}

#[pymethods]
impl PyBitString {
    /// Parse from a string of '0'/'1'; the first character is position 1.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: text.parse().map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn zeros(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(value_err("length must be positive"));
        }
        Ok(Self {
            inner: bits::BitString::zeros(n),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("BitString('{}')", self.inner)
    }

    fn __richcmp__(&self, other: &Self, op: pyo3::basic::CompareOp) -> PyResult<bool> {
        match op {
            pyo3::basic::CompareOp::Eq => Ok(self.inner == other.inner),
            pyo3::basic::CompareOp::Ne => Ok(self.inner != other.inner),
            _ => Err(value_err("bit strings are not ordered")),
        }
    }

    fn get(&self, i: usize) -> PyResult<bool> {
        if i >= self.inner.len() {
            return Err(value_err("position out of range"));
        }
        Ok(self.inner.get(i))
    }

    fn count_ones(&self) -> usize {
        self.inner.count_ones()
    }

    fn leading_ones(&self) -> usize {
        self.inner.leading_ones()
    }

    fn complement(&self) -> Self {
        Self {
            inner: bits::complement(&self.inner),
        }
    }

    fn hamming(&self, other: &Self) -> PyResult<usize> {
        if self.inner.len() != other.inner.len() {
            return Err(value_err("length mismatch"));
        }
        Ok(bits::hamming(&self.inner, &other.inner))
    }
}

#[pyfunction]
fn uniform_random(n: usize, rng: &mut PyRandomSource) -> PyResult<PyBitString> {
    if n == 0 {
        return Err(value_err("length must be positive"));
    }
    Ok(PyBitString {
        inner: bits::uniform_random(n, &mut rng.inner),
    })
}

#[pyfunction]
fn standard_mutate(x: &PyBitString, rate: f64, rng: &mut PyRandomSource) -> PyResult<PyBitString> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(value_err("mutation rate must be in (0, 1]"));
    }
    Ok(PyBitString {
        inner: bits::standard_mutate(&x.inner, rate, &mut rng.inner),
    })
}

#[pyfunction]
fn biased_crossover(
    x1: &PyBitString,
    x2: &PyBitString,
    p: f64,
    rng: &mut PyRandomSource,
) -> PyResult<PyBitString> {
    if x1.inner.len() != x2.inner.len() {
        return Err(value_err("length mismatch"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(value_err("bias must be a probability"));
    }
    Ok(PyBitString {
        inner: bits::biased_crossover(&x1.inner, &x2.inner, p, &mut rng.inner),
    })
}

#[pyfunction]
fn uniform_crossover(
    x1: &PyBitString,
    x2: &PyBitString,
    rng: &mut PyRandomSource,
) -> PyResult<PyBitString> {
    biased_crossover(x1, x2, 0.5, rng)
}

#[pyfunction]
fn xor_mask(x: &PyBitString, m: &PyBitString) -> PyResult<PyBitString> {
    if x.inner.len() != m.inner.len() {
        return Err(value_err("length mismatch"));
    }
    Ok(PyBitString {
        inner: bits::xor_mask(&x.inner, &m.inner),
    })
}

/// Evaluation-counting benchmark instance.
#[pyclass(name = "FitnessFunction")]
struct PyFitnessFunction {
    inner: FitnessFunction,
}

#[pymethods]
impl PyFitnessFunction {
    #[staticmethod]
    fn leading_ones(n: usize) -> Self {
        Self {
            inner: FitnessFunction::leading_ones(n),
        }
    }

    #[staticmethod]
    fn one_max(n: usize) -> Self {
        Self {
            inner: FitnessFunction::one_max(n),
        }
    }

    #[staticmethod]
    fn lfhw(n: usize) -> Self {
        Self {
            inner: FitnessFunction::lfhw(n),
        }
    }

    /// Generated independent-set instance (n even, >= 4) with known optimum
    /// n/2 + 1.
    #[staticmethod]
    fn mivs(n: usize) -> PyResult<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(value_err("mivs requires an even size >= 4"));
        }
        Ok(Self {
            inner: FitnessFunction::mivs_generated(n),
        })
    }

    /// Independent-set instance from edge-list text (no known optimum).
    #[staticmethod]
    fn mivs_from_edge_list(text: &str) -> PyResult<Self> {
        let graph = load_graph(text).map_err(value_err)?;
        Ok(Self {
            inner: FitnessFunction::mivs(Arc::new(graph)),
        })
    }

    fn evaluate(&mut self, x: &PyBitString) -> PyResult<f64> {
        if x.inner.len() != self.inner.dimension() {
            return Err(value_err("dimension mismatch"));
        }
        Ok(self.inner.evaluate(&x.inner))
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn known_optimum(&self) -> Option<f64> {
        self.inner.known_optimum()
    }

    #[getter]
    fn evaluation_count(&self) -> u64 {
        self.inner.evaluation_count()
    }
}

/// Outcome of one optimizer run.
#[pyclass(name = "RunResult")]
struct PyRunResult {
    #[pyo3(get)]
    evaluations: u64,
    #[pyo3(get)]
    success: bool,
    #[pyo3(get)]
    best_fitness: f64,
    #[pyo3(get)]
    trajectory: Vec<(u64, f64)>,
}

#[pymethods]
impl PyRunResult {
    fn __repr__(&self) -> String {
        format!(
            "RunResult(evaluations={}, success={}, best_fitness={})",
            self.evaluations, self.success, self.best_fitness
        )
    }
}

/// Executes one seeded optimizer run.
///
/// `algorithm` is one of dega-a, dega-a-prime, dega-a-bb, opo-ea, tpo-ga,
/// ollga, umda; `benchmark` one of lo, om, lfhw, mivs. Parameter rules use
/// the same spellings as the CLI (e.g. `lambda_="(n*ln)^(2/3)"`,
/// `budget="500*n^2"`, `cap="lambda*ln"`).
#[pyfunction]
#[pyo3(signature = (algorithm, benchmark, n, seed=1, budget="500*n^2", lambda_=None, p_c=None, k=None, mu=None, cap=None, target=None, trajectory=false))]
#[allow(clippy::too_many_arguments)]
fn run(
    algorithm: &str,
    benchmark: &str,
    n: usize,
    seed: u64,
    budget: &str,
    lambda_: Option<&str>,
    p_c: Option<f64>,
    k: Option<&str>,
    mu: Option<&str>,
    cap: Option<&str>,
    target: Option<f64>,
    trajectory: bool,
) -> PyResult<PyRunResult> {
    let algorithm: Algorithm = algorithm.parse().map_err(value_err)?;
    let benchmark: Benchmark = benchmark.parse().map_err(value_err)?;
    if benchmark == Benchmark::Mivs && (n < 4 || !n.is_multiple_of(2)) {
        return Err(value_err("mivs requires an even size >= 4"));
    }
    let mut spec = AlgorithmSpec::new(algorithm);
    let parse_rule = |s: Option<&str>| -> PyResult<Option<ParamRule>> {
        s.map(|t| t.parse::<ParamRule>().map_err(value_err)).transpose()
    };
    spec.lambda = parse_rule(lambda_)?;
    spec.k = parse_rule(k)?;
    spec.mu = parse_rule(mu)?;
    spec.cap = cap
        .map(|t| t.parse::<CapRule>().map_err(value_err))
        .transpose()?;
    spec.p_c = p_c;
    let budget_rule: BudgetRule = budget.parse().map_err(value_err)?;
    let mut cfg = spec
        .resolve(n, budget_rule.resolve(n), target)
        .map_err(value_err)?;
    cfg.record_trajectory = trajectory;
    let mut f = benchmark.instantiate(n);
    let mut rng = RandomSource::from_seed(seed);
    let result = run_optimizer(&mut f, &cfg, &mut rng).map_err(value_err)?;
    Ok(PyRunResult {
        evaluations: result.evaluations_used,
        success: result.success,
        best_fitness: result.best_fitness,
        trajectory: result.trajectory.unwrap_or_default(),
    })
}

/// Edges of the generated independent-set instance as 0-based pairs.
#[pyfunction]
fn mivs_edges(n: usize) -> PyResult<Vec<(usize, usize)>> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(value_err("mivs requires an even size >= 4"));
    }
    Ok(dega::benchmarks::mivs_graph(n).edges().to_vec())
}

#[pyfunction]
fn log_spaced_sizes(n_start: usize, n_end: usize, count: usize) -> PyResult<Vec<usize>> {
    if n_start < 1 || n_start >= n_end || count < 2 {
        return Err(value_err("need 1 <= n_start < n_end and count >= 2"));
    }
    Ok(core_log_spaced(n_start, n_end, count))
}

/// Least-squares slope of log-means over log-sizes after dropping the first
/// `skip` points; returns (slope, intercept, residual).
#[pyfunction]
#[pyo3(signature = (sizes, means, skip=0))]
fn loglog_slope(sizes: Vec<usize>, means: Vec<f64>, skip: usize) -> PyResult<(f64, f64, f64)> {
    if sizes.len() != means.len() {
        return Err(value_err("sizes and means must have equal length"));
    }
    core_slope(&sizes, &means, skip).map_err(value_err)
}

#[pymodule]
fn dega_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRandomSource>()?;
    m.add_class::<PyBitString>()?;
    m.add_class::<PyFitnessFunction>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(uniform_random, m)?)?;
    m.add_function(wrap_pyfunction!(standard_mutate, m)?)?;
    m.add_function(wrap_pyfunction!(biased_crossover, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_crossover, m)?)?;
    m.add_function(wrap_pyfunction!(xor_mask, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(mivs_edges, m)?)?;
    m.add_function(wrap_pyfunction!(log_spaced_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(loglog_slope, m)?)?;
    m.add(
        "ALGORITHMS",
        vec![
            "dega-a",
            "dega-a-prime",
            "dega-a-bb",
            "opo-ea",
            "tpo-ga",
            "ollga",
            "umda",
        ],
    )?;
    m.add("BENCHMARKS", vec!["lo", "om", "lfhw", "mivs"])?;
    Ok(())
}
