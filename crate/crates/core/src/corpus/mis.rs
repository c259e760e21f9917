//! Programs whose cheapest fix solves a maximum independent set instance.
//!
//! Every vertex becomes a declaration `InMIS v{i};` and every edge
//! `(x, y)` becomes `n` copies of `v{x}.addEdge(v{y});`. A call only
//! type-checks when one side is an `OutMIS`, so the cheapest fix retypes a
//! minimum vertex cover and costs `n - α(g)`.

use thiserror::Error;

use crate::langs::minijava::{MiniJava, MjEnv};
use crate::langs::Frontend;
use crate::modgraph::Token;

pub const MIS_ENV: &str = "\
class InMIS : Object {
  method void addEdge(OutMIS);
}
class OutMIS : Object {
  method void addEdge(InMIS);
  method void addEdge(OutMIS);
}
";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    Duplicate(usize, usize),
}

/// Vertices are `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl UndirectedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut seen = Vec::new();
        for &(a, b) in &edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a >= n || b >= n {
                return Err(GraphError::OutOfRange(a, b));
            }
            let key = (a.min(b), a.max(b));
            if seen.contains(&key) {
                return Err(GraphError::Duplicate(a, b));
            }
            seen.push(key);
        }
        Ok(UndirectedGraph { n, edges })
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Every graph on `n` vertices, one per subset of the possible edges.
    pub fn all(n: usize) -> impl Iterator<Item = UndirectedGraph> {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        (0u64..1 << pairs.len()).map(move |mask| UndirectedGraph {
            n,
            edges: (0..pairs.len()).filter(|k| mask >> k & 1 == 1).map(|k| pairs[k]).collect(),
        })
    }
}

/// Size of a largest independent set, by trying every vertex subset.
pub fn max_independent_set(g: &UndirectedGraph) -> usize {
    (0u64..1 << g.n)
        .filter(|set| g.edges.iter().all(|&(a, b)| set >> a & 1 == 0 || set >> b & 1 == 0))
        .map(|set| set.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

pub fn mis_env() -> MjEnv {
    MjEnv::parse(MIS_ENV).expect("built-in environment")
}

/// Source text of the encoding, one statement per line.
pub fn mis_source(g: &UndirectedGraph) -> String {
    let mut out = String::new();
    for i in 1..=g.n {
        out.push_str(&format!("InMIS v{i};\n"));
    }
    for &(x, y) in &g.edges {
        for _ in 0..g.n {
            out.push_str(&format!("v{}.addEdge(v{});\n", x + 1, y + 1));
        }
    }
    out
}

pub fn encode_mis(g: &UndirectedGraph) -> (MjEnv, Vec<Token>) {
    let env = mis_env();
    let tokens = MiniJava::new(env.clone())
        .lex(&mis_source(g))
        .expect("encoding lexes");
    (env, tokens)
}
