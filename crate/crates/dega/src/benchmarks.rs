//! Pseudo-Boolean benchmark functions and the graph machinery behind the
//! maximum independent vertex set (MIVS) benchmark.
//!
//! Every benchmark is wrapped in an evaluation-counting [`FitnessFunction`];
//! the number of `evaluate` calls is the universal cost measure of the
//! harness.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::BitString;

/// Length of the all-ones prefix.
pub fn leading_ones(x: &BitString) -> usize {
    x.leading_ones()
}

/// Number of one-bits.
pub fn one_max(x: &BitString) -> usize {
    x.count_ones()
}

/// Linear function with harmonic weights: each one-bit contributes its
/// 1-based position.
pub fn lfhw(x: &BitString) -> f64 {
    x.weighted_position_sum() as f64
}

/// Penalized independent-set fitness: number of selected vertices minus
/// `n` per violated edge. Any selection with a violated edge scores below
/// every feasible independent set of size >= 1.
pub fn mivs_fitness(x: &BitString, g: &Graph) -> f64 {
    assert_eq!(x.len(), g.vertex_count(), "dimension mismatch");
    let ones = x.count_ones() as i64;
    let mut violated = 0i64;
    for &(i, j) in g.edges() {
        if x.get(i) && x.get(j) {
            violated += 1;
        }
    }
    (ones - g.vertex_count() as i64 * violated) as f64
}

/// Undirected simple graph with vertices `0..n` (0-based in code; the
/// edge-list file format is 1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: malformed entry: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: self-loop at vertex {v}")]
    SelfLoop { line: usize, v: usize },
    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("line {line}: endpoint {v} outside 1..={n}")]
    OutOfRange { line: usize, v: usize, n: usize },
    #[error("missing vertex-count header line")]
    MissingHeader,
    #[error("vertex count must be positive")]
    EmptyGraph,
}

impl Graph {
    /// Builds a graph from 0-based endpoint pairs, rejecting self-loops,
    /// duplicates and out-of-range endpoints.
    pub fn new(vertex_count: usize, raw_edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut edges = Vec::with_capacity(raw_edges.len());
        let mut seen = std::collections::HashSet::new();
        for (line, &(a, b)) in raw_edges.iter().enumerate() {
            let line = line + 1;
            if a == b {
                return Err(GraphError::SelfLoop { line, v: a + 1 });
            }
            let (i, j) = (a.min(b), a.max(b));
            if j >= vertex_count {
                return Err(GraphError::OutOfRange {
                    line,
                    v: j + 1,
                    n: vertex_count,
                });
            }
            if !seen.insert((i, j)) {
                return Err(GraphError::DuplicateEdge {
                    line,
                    i: i + 1,
                    j: j + 1,
                });
            }
            edges.push((i, j));
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Edges as 0-based pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Parses the plain-text edge-list format: the first non-comment line is the
/// vertex count `n`, each following line is `i j` with 1-based endpoints,
/// lines starting with `#` are ignored. Errors carry the offending line
/// number.
pub fn load_graph(source: &str) -> Result<Graph, GraphError> {
    let mut vertex_count: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        match vertex_count {
            None => {
                let n: usize = text.parse().map_err(|_| GraphError::Malformed {
                    line,
                    detail: format!("expected vertex count, got {text:?}"),
                })?;
                if n == 0 {
                    return Err(GraphError::EmptyGraph);
                }
                vertex_count = Some(n);
            }
            Some(n) => {
                let mut parts = text.split_whitespace();
                let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(a), Some(b), None) => (a, b),
                    _ => {
                        return Err(GraphError::Malformed {
                            line,
                            detail: format!("expected two endpoints, got {text:?}"),
                        })
                    }
                };
                let parse = |s: &str| -> Result<usize, GraphError> {
                    s.parse().map_err(|_| GraphError::Malformed {
                        line,
                        detail: format!("bad endpoint {s:?}"),
                    })
                };
                let (a, b) = (parse(a)?, parse(b)?);
                if a == b {
                    return Err(GraphError::SelfLoop { line, v: a });
                }
                if a < 1 || a > n {
                    return Err(GraphError::OutOfRange { line, v: a, n });
                }
                if b < 1 || b > n {
                    return Err(GraphError::OutOfRange { line, v: b, n });
                }
                let (i, j) = (a.min(b) - 1, a.max(b) - 1);
                if !seen.insert((i, j)) {
                    return Err(GraphError::DuplicateEdge {
                        line,
                        i: i + 1,
                        j: j + 1,
                    });
                }
                edges.push((i, j));
            }
        }
    }
    match vertex_count {
        Some(n) => Ok(Graph {
            vertex_count: n,
            edges,
        }),
        None => Err(GraphError::MissingHeader),
    }
}

/// Serializes a graph in the edge-list format accepted by [`load_graph`].
pub fn graph_to_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", g.vertex_count()));
    for &(i, j) in g.edges() {
        out.push_str(&format!("{} {}\n", i + 1, j + 1));
    }
    out
}

/// Deterministic MIVS benchmark instance on `n` vertices (`n` even, >= 4)
/// with a unique maximum independent set of size `n/2 + 1`.
///
/// Construction (1-based): take the path `1 - 2 - ... - n`, remove the edge
/// `(m, m+1)` where `m` is the largest odd number <= n/2, and add the cross
/// links `(i, i + m + 1)` for `i = 1..=n/2 - 1`. The two remaining paths have
/// odd vertex counts, so each has a unique maximum independent set (its
/// odd-indexed vertices), and every cross link joins an odd position of one
/// path to an even position of the other. The union of the two path optima is
/// therefore independent, has size `n/2 + 1`, and is the unique global
/// optimum. The `validate_mivs_instance` gate checks this exhaustively for
/// small `n`.
pub fn mivs_graph(n: usize) -> Graph {
    assert!(n >= 4 && n.is_multiple_of(2), "instance size must be even and >= 4");
    let half = n / 2;
    let m = if half % 2 == 1 { half } else { half - 1 };
    let mut edges = Vec::with_capacity(3 * n / 2 - 3);
    for i in 1..n {
        if i != m {
            edges.push((i - 1, i)); // 0-based (i-1, i) is 1-based (i, i+1)
        }
    }
    for i in 1..half {
        edges.push((i - 1, i + m)); // 1-based (i, i + m + 1)
    }
    Graph {
        vertex_count: n,
        edges,
    }
}

/// Result of exhaustively enumerating all `2^n` vertex subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MisSummary {
    /// Size of a maximum independent set.
    pub max_size: usize,
    /// Number of distinct independent sets attaining that size.
    pub optimizer_count: u64,
    /// One maximizer, as a vertex bitmask.
    pub witness: u64,
}

/// Brute-force maximum-independent-set oracle for graphs with at most 30
/// vertices. Works directly on the edge structure and is independent of the
/// penalized fitness formula.
pub fn brute_force_mis(g: &Graph) -> MisSummary {
    let n = g.vertex_count();
    assert!(n <= 30, "exhaustive enumeration is limited to small graphs");
    let mut adj = vec![0u64; n];
    for &(i, j) in g.edges() {
        adj[i] |= 1 << j;
        adj[j] |= 1 << i;
    }
    let mut best = 0usize;
    let mut count = 0u64;
    let mut witness = 0u64;
    for set in 0u64..(1 << n) {
        let size = set.count_ones() as usize;
        if size < best {
            continue;
        }
        let mut s = set;
        let mut independent = true;
        while s != 0 {
            let v = s.trailing_zeros() as usize;
            if adj[v] & set != 0 {
                independent = false;
                break;
            }
            s &= s - 1;
        }
        if !independent {
            continue;
        }
        if size > best {
            best = size;
            count = 1;
            witness = set;
        } else {
            count += 1;
        }
    }
    MisSummary {
        max_size: best,
        optimizer_count: count,
        witness,
    }
}

/// Checks by exhaustive enumeration that the generated instance of size `n`
/// has a unique maximum independent set of size `n/2 + 1`.
pub fn validate_mivs_instance(n: usize) -> bool {
    let summary = brute_force_mis(&mivs_graph(n));
    summary.max_size == n / 2 + 1 && summary.optimizer_count == 1
}

/// Benchmark family identifiers used by configs and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Benchmark {
    LeadingOnes,
    OneMax,
    Lfhw,
    Mivs,
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::LeadingOnes,
        Benchmark::OneMax,
        Benchmark::Lfhw,
        Benchmark::Mivs,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Benchmark::LeadingOnes => "lo",
            Benchmark::OneMax => "om",
            Benchmark::Lfhw => "lfhw",
            Benchmark::Mivs => "mivs",
        }
    }

    /// Builds a fresh counting fitness function of dimension `n`.
    /// MIVS uses the generated instance, so `n` must be even and >= 4.
    pub fn instantiate(self, n: usize) -> FitnessFunction {
        match self {
            Benchmark::LeadingOnes => FitnessFunction::leading_ones(n),
            Benchmark::OneMax => FitnessFunction::one_max(n),
            Benchmark::Lfhw => FitnessFunction::lfhw(n),
            Benchmark::Mivs => FitnessFunction::mivs_generated(n),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.id() == s)
            .ok_or_else(|| format!("unknown benchmark {s:?}; valid: lo, om, lfhw, mivs"))
    }
}

#[derive(Clone)]
enum EvalKind {
    LeadingOnes,
    OneMax,
    Lfhw,
    MivsEdges(Arc<Graph>),
    /// Generated MIVS instance: both edge families are fixed-offset pairs
    /// `(i, i+d)`, so violations are counted with shifted-AND popcounts.
    MivsFast {
        graph: Arc<Graph>,
        families: [PairFamily; 2],
    },
}

/// Edge family `{(i, i + distance) : allowed(i)}` with the allowed left
/// endpoints packed into a word mask.
#[derive(Clone)]
struct PairFamily {
    distance: usize,
    allowed: Vec<u64>,
}

impl PairFamily {
    fn new(n: usize, distance: usize, lefts: impl Iterator<Item = usize>) -> Self {
        let mut allowed = vec![0u64; n.div_ceil(64)];
        for i in lefts {
            allowed[i / 64] |= 1 << (i % 64);
        }
        Self { distance, allowed }
    }

    fn count_violations(&self, words: &[u64]) -> u32 {
        let (q, r) = (self.distance / 64, self.distance % 64);
        let nw = words.len();
        let mut total = 0;
        for w in 0..nw {
            let hi = if w + q < nw { words[w + q] } else { 0 };
            let shifted = if r == 0 {
                hi
            } else {
                let hi2 = if w + q + 1 < nw { words[w + q + 1] } else { 0 };
                (hi >> r) | (hi2 << (64 - r))
            };
            total += (words[w] & shifted & self.allowed[w]).count_ones();
        }
        total
    }
}

/// A benchmark instance that counts its own evaluations.
///
/// Evaluation is pure in the bit string; the counter is the only state.
/// Instances are cheap to clone and are never shared between concurrent
/// runs — every run owns its counter.
#[derive(Clone)]
pub struct FitnessFunction {
    name: String,
    dimension: usize,
    known_optimum: Option<f64>,
    evaluations: u64,
    kind: EvalKind,
}

impl FitnessFunction {
    pub fn leading_ones(n: usize) -> Self {
        Self {
            name: "lo".into(),
            dimension: n,
            known_optimum: Some(n as f64),
            evaluations: 0,
            kind: EvalKind::LeadingOnes,
        }
    }

    pub fn one_max(n: usize) -> Self {
        Self {
            name: "om".into(),
            dimension: n,
            known_optimum: Some(n as f64),
            evaluations: 0,
            kind: EvalKind::OneMax,
        }
    }

    pub fn lfhw(n: usize) -> Self {
        Self {
            name: "lfhw".into(),
            dimension: n,
            known_optimum: Some((n * (n + 1) / 2) as f64),
            evaluations: 0,
            kind: EvalKind::Lfhw,
        }
    }

    /// MIVS on a user-supplied graph. No known optimum, so runs on it only
    /// terminate via an explicit target or the budget.
    pub fn mivs(graph: Arc<Graph>) -> Self {
        Self {
            name: "mivs".into(),
            dimension: graph.vertex_count(),
            known_optimum: None,
            evaluations: 0,
            kind: EvalKind::MivsEdges(graph),
        }
    }

    /// MIVS on the generated instance of size `n` (even, >= 4); the known
    /// optimum is `n/2 + 1`.
    pub fn mivs_generated(n: usize) -> Self {
        let graph = Arc::new(mivs_graph(n));
        let half = n / 2;
        let m = if half % 2 == 1 { half } else { half - 1 };
        let families = [
            PairFamily::new(n, 1, (0..n - 1).filter(|&i| i != m - 1)),
            PairFamily::new(n, m + 1, 0..half - 1),
        ];
        Self {
            name: "mivs".into(),
            dimension: n,
            known_optimum: Some((half + 1) as f64),
            evaluations: 0,
            kind: EvalKind::MivsFast { graph, families },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn evaluation_count(&self) -> u64 {
        self.evaluations
    }

    pub fn reset_evaluations(&mut self) {
        self.evaluations = 0;
    }

    /// The underlying MIVS graph, when there is one.
    pub fn graph(&self) -> Option<&Arc<Graph>> {
        match &self.kind {
            EvalKind::MivsEdges(g) | EvalKind::MivsFast { graph: g, .. } => Some(g),
            _ => None,
        }
    }

    /// Evaluates `x`, incrementing the evaluation counter by exactly one.
    pub fn evaluate(&mut self, x: &BitString) -> f64 {
        assert_eq!(x.len(), self.dimension, "dimension mismatch");
        self.evaluations += 1;
        match &self.kind {
            EvalKind::LeadingOnes => x.leading_ones() as f64,
            EvalKind::OneMax => x.count_ones() as f64,
            EvalKind::Lfhw => x.weighted_position_sum() as f64,
            EvalKind::MivsEdges(g) => mivs_fitness(x, g),
            EvalKind::MivsFast { families, .. } => {
                let violations: u32 = families.iter().map(|f| f.count_violations(x.words())).sum();
                x.count_ones() as f64 - self.dimension as f64 * violations as f64
            }
        }
    }
}
