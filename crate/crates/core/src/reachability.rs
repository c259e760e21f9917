//! Shortest-path CFL reachability that keeps every derivation.
//!
//! Edges are identified by `(from, to, symbol, weight)`: deriving the same
//! labelled span again at a higher weight creates a separate edge instead of
//! being discarded, and every way of deriving an edge at its weight is kept as
//! an [`Expansion`]. The work queue serves lower weights first and, at equal
//! weight, non-root edges before root edges, so by the time a root edge of
//! weight `k` is handed out every edge and expansion of weight `<= k` below it
//! is final.
//!
//! Deletions are not grammar symbols. A terminal edge absorbs the run of
//! deleted tokens directly before it (`lead`), and a run reaching the end of
//! the input (`trail`); an ε-rule may absorb the deletion of the whole input.
//! Each emitted string therefore has one canonical place for every deletion.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use serde::Serialize;

use crate::grammar::{Grammar, ProdId, SymbolId};
use crate::modgraph::{EdgeKind, ModGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Expansion {
    /// `A -> ε`; when the edge spans `i < j` the tokens in between are deleted.
    Epsilon { production: ProdId },
    Unary { production: ProdId, child: EdgeId },
    Binary {
        production: ProdId,
        left: EdgeId,
        right: EdgeId,
    },
    /// A modification-graph edge with `lead` deleted tokens before it and
    /// `trail` deleted tokens after it.
    Terminal { mod_edge: usize, lead: u32, trail: u32 },
}

impl Expansion {
    pub fn production(&self) -> Option<ProdId> {
        match *self {
            Expansion::Epsilon { production }
            | Expansion::Unary { production, .. }
            | Expansion::Binary { production, .. } => Some(production),
            Expansion::Terminal { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReachEdge {
    pub from: usize,
    pub to: usize,
    pub symbol: SymbolId,
    pub weight: u32,
    pub is_root: bool,
    /// Ordered by the weight of the left child, then by creation.
    pub expansions: SmallVec<[Expansion; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachError {
    NotNormalized,
}

impl std::fmt::Display for ReachError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReachError::NotNormalized => write!(f, "grammar is not normalized"),
        }
    }
}

impl std::error::Error for ReachError {}


pub struct ReachState<'a> {
    grammar: &'a Grammar,
    graph: &'a ModGraph,
    edges: Vec<ReachEdge>,
    lookup: FxHashMap<(u32, u32, SymbolId, u32), EdgeId>,
    /// Dequeued edges by `(vertex, symbol)`, flattened as `vertex * symbols + symbol`.
    out_index: Vec<Vec<EdgeId>>,
    in_index: Vec<Vec<EdgeId>>,
    symbols: usize,
    /// `deletable[v]`: token `v` can be deleted; `deletable_tail[v]`: every token from `v` on can.
    deletable: Vec<bool>,
    deletable_tail: Vec<bool>,
    /// FIFO buckets, non-root then root for each weight.
    queue: Vec<VecDeque<EdgeId>>,
    queued: usize,
    /// Lowest bucket that may be non-empty.
    cursor: usize,
    cap: u32,
    pending_root: Option<EdgeId>,
    pops: u64,
    expansion_count: usize,
    last_root_weight: Option<u32>,
}

impl<'a> ReachState<'a> {
    /// Seeds ε self-loops and terminal edges. `cap` bounds the weight of every
    /// derived edge.
    pub fn new(graph: &'a ModGraph, grammar: &'a Grammar, cap: u32) -> Result<Self, ReachError> {
        if !grammar.is_normalized() {
            return Err(ReachError::NotNormalized);
        }
        let symbols = grammar.symbols().len();
        let slots = (graph.last_vertex() + 1) * symbols;
        let deletable: Vec<bool> = (0..=graph.last_vertex())
            .map(|v| !graph.edges_from(v, None).is_empty())
            .collect();
        let mut deletable_tail = vec![true; deletable.len()];
        for v in (0..graph.last_vertex()).rev() {
            deletable_tail[v] = deletable[v] && deletable_tail[v + 1];
        }
        let mut state = ReachState {
            grammar,
            graph,
            edges: Vec::new(),
            lookup: FxHashMap::default(),
            out_index: vec![Vec::new(); slots],
            in_index: vec![Vec::new(); slots],
            symbols,
            deletable,
            deletable_tail,
            queue: vec![VecDeque::new(); 2 * (cap as usize + 1)],
            queued: 0,
            cursor: 0,
            cap,
            pending_root: None,
            pops: 0,
            expansion_count: 0,
            last_root_weight: None,
        };
        let n = graph.last_vertex();
        for p in grammar.productions().iter().filter(|p| p.rhs.is_empty()) {
            let exp = Expansion::Epsilon { production: p.id };
            for v in 0..=n {
                state.add(v, v, p.lhs, 0, exp, 0);
            }
            if n > 0 {
                state.add(0, n, p.lhs, n as u32, exp, 0);
            }
        }
        for (idx, e) in graph.edges().iter().enumerate() {
            if e.kind == EdgeKind::Deletion {
                continue;
            }
            let sym = e.symbol.expect("only deletions are unlabelled");
            state.add(
                e.from,
                e.to,
                sym,
                e.weight,
                Expansion::Terminal {
                    mod_edge: idx,
                    lead: 0,
                    trail: 0,
                },
                0,
            );
        }
        Ok(state)
    }

    pub fn grammar(&self) -> &'a Grammar {
        self.grammar
    }

    pub fn graph(&self) -> &'a ModGraph {
        self.graph
    }

    pub fn edge(&self, id: EdgeId) -> &ReachEdge {
        &self.edges[id.index()]
    }

    pub fn edges(&self) -> &[ReachEdge] {
        &self.edges
    }

    pub fn queue_len(&self) -> usize {
        self.queued
    }

    pub fn expansion_count(&self) -> usize {
        self.expansion_count
    }

    pub fn pops(&self) -> u64 {
        self.pops
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn find(&self, from: usize, to: usize, symbol: SymbolId, weight: u32) -> Option<EdgeId> {
        self.lookup
            .get(&(from as u32, to as u32, symbol, weight))
            .copied()
    }

    /// All weight layers of one labelled span, lightest first.
    pub fn layers(&self, from: usize, to: usize, symbol: SymbolId) -> Vec<EdgeId> {
        (0..=self.cap)
            .filter_map(|w| self.find(from, to, symbol, w))
            .collect()
    }

    /// Rough size of the edge store in bytes.
    pub fn approx_bytes(&self) -> usize {
        self.edges.len() * (std::mem::size_of::<ReachEdge>() + 64)
            + self.expansion_count * (std::mem::size_of::<Expansion>() * 2 + 16)
    }

    /// Combined weight of an expansion's parts.
    pub fn expansion_weight(&self, owner: EdgeId, exp: &Expansion) -> u32 {
        match *exp {
            Expansion::Epsilon { .. } => {
                let e = self.edge(owner);
                (e.to - e.from) as u32
            }
            Expansion::Unary { child, .. } => self.edge(child).weight,
            Expansion::Binary { left, right, .. } => self.edge(left).weight + self.edge(right).weight,
            Expansion::Terminal {
                mod_edge,
                lead,
                trail,
            } => self.graph.edge(mod_edge).weight + lead + trail,
        }
    }

    fn add(&mut self, from: usize, to: usize, symbol: SymbolId, weight: u32, exp: Expansion, order_key: u32) {
        if weight > self.cap {
            return;
        }
        let key = (from as u32, to as u32, symbol, weight);
        let id = match self.lookup.get(&key) {
            Some(&id) => id,
            None => {
                let id = EdgeId(self.edges.len() as u32);
                let is_root =
                    symbol == self.grammar.start() && from == 0 && to == self.graph.last_vertex();
                self.edges.push(ReachEdge {
                    from,
                    to,
                    symbol,
                    weight,
                    is_root,
                    expansions: SmallVec::new(),
                });
                self.lookup.insert(key, id);
                let bucket = 2 * weight as usize + is_root as usize;
                self.queue[bucket].push_back(id);
                self.queued += 1;
                self.cursor = self.cursor.min(bucket);
                id
            }
        };
        self.expansion_count += 1;
        let edges = &self.edges;
        let left_weight = |x: &Expansion| match *x {
            Expansion::Binary { left, .. } => edges[left.index()].weight,
            _ => 0,
        };
        let list = &self.edges[id.index()].expansions;
        let at = list.partition_point(|x| left_weight(x) <= order_key);
        self.edges[id.index()].expansions.insert(at, exp);
    }

    /// Continues saturation until the next root edge is dequeued.
    pub fn next_root_edge(&mut self) -> Option<EdgeId> {
        self.next_root_edge_checked(|_| false).unwrap_or(None)
    }

    /// Like [`next_root_edge`](Self::next_root_edge) but consults `abort`
    /// every 4096 dequeues; returns `Err(())` when it asks to stop.
    pub fn next_root_edge_checked(
        &mut self,
        mut abort: impl FnMut(&ReachState<'a>) -> bool,
    ) -> Result<Option<EdgeId>, ()> {
        if let Some(root) = self.pending_root.take() {
            self.compose(root);
        }
        while let Some(id) = self.pop() {
            let is_root = self.edges[id.index()].is_root;
            self.pops += 1;
            if self.pops % 4096 == 0 && abort(self) {
                // put it back so the state stays consistent
                let bucket = 2 * self.edges[id.index()].weight as usize + is_root as usize;
                self.queue[bucket].push_front(id);
                self.queued += 1;
                self.cursor = self.cursor.min(bucket);
                return Err(());
            }
            let (from, to, symbol) = {
                let e = &self.edges[id.index()];
                (e.from as u32, e.to as u32, e.symbol)
            };
            self.out_index[from as usize * self.symbols + symbol.index()].push(id);
            self.in_index[to as usize * self.symbols + symbol.index()].push(id);
            self.extend_deletions(id);
            if is_root {
                debug_assert!(self.last_root_weight.is_none_or(|w| w <= self.edges[id.index()].weight));
                self.last_root_weight = Some(self.edges[id.index()].weight);
                self.pending_root = Some(id);
                return Ok(Some(id));
            }
            self.compose(id);
        }
        Ok(None)
    }

    fn pop(&mut self) -> Option<EdgeId> {
        while self.cursor < self.queue.len() {
            if let Some(id) = self.queue[self.cursor].pop_front() {
                self.queued -= 1;
                return Some(id);
            }
            self.cursor += 1;
        }
        None
    }

    /// Derives the one-more-deletion variants of a terminal edge.
    fn extend_deletions(&mut self, id: EdgeId) {
        let n = self.graph.last_vertex();
        let e = &self.edges[id.index()];
        let (from, to, symbol, weight) = (e.from, e.to, e.symbol, e.weight);
        let terminal_exps: Vec<(usize, u32)> = e
            .expansions
            .iter()
            .filter_map(|x| match *x {
                Expansion::Terminal {
                    mod_edge,
                    lead,
                    trail: 0,
                } => Some((mod_edge, lead)),
                _ => None,
            })
            .collect();
        for (mod_edge, lead) in terminal_exps {
            if from > 0 && self.deletable[from - 1] {
                self.add(
                    from - 1,
                    to,
                    symbol,
                    weight + 1,
                    Expansion::Terminal {
                        mod_edge,
                        lead: lead + 1,
                        trail: 0,
                    },
                    0,
                );
            }
            if to < n && self.deletable_tail[to] {
                let trail = (n - to) as u32;
                self.add(
                    from,
                    n,
                    symbol,
                    weight + trail,
                    Expansion::Terminal {
                        mod_edge,
                        lead,
                        trail,
                    },
                    0,
                );
            }
        }
    }

    /// Applies `A -> B` and `A -> B C` with `id` as `B` or `C`, joining only
    /// edges that have already been dequeued.
    fn compose(&mut self, id: EdgeId) {
        let g = self.grammar;
        let (from, to, symbol, weight) = {
            let e = &self.edges[id.index()];
            (e.from, e.to, e.symbol, e.weight)
        };
        for &pid in g.by_first(symbol) {
            let p = g.production(pid);
            match p.rhs.len() {
                1 => self.add(
                    from,
                    to,
                    p.lhs,
                    weight,
                    Expansion::Unary {
                        production: pid,
                        child: id,
                    },
                    0,
                ),
                2 => {
                    let slot = to * self.symbols + p.rhs[1].index();
                    for k in 0..self.out_index[slot].len() {
                        let right = self.out_index[slot][k];
                        let r = &self.edges[right.index()];
                        let (rto, rw) = (r.to, r.weight);
                        self.add(
                            from,
                            rto,
                            p.lhs,
                            weight + rw,
                            Expansion::Binary {
                                production: pid,
                                left: id,
                                right,
                            },
                            weight,
                        );
                    }
                }
                _ => {}
            }
        }
        for &pid in g.by_second(symbol) {
            let p = g.production(pid);
            let slot = from * self.symbols + p.rhs[0].index();
            for k in 0..self.in_index[slot].len() {
                let left = self.in_index[slot][k];
                if left == id {
                    // already joined with itself as the left child
                    continue;
                }
                let l = &self.edges[left.index()];
                let (lfrom, lw) = (l.from, l.weight);
                self.add(
                    lfrom,
                    to,
                    p.lhs,
                    lw + weight,
                    Expansion::Binary {
                        production: pid,
                        left,
                        right: id,
                    },
                    lw,
                );
            }
        }
    }

    /// Every terminal string (as symbol sequences) derivable from an edge.
    /// Exponential; meant for tests on tiny inputs.
    pub fn yields(&self, id: EdgeId) -> Vec<Vec<SymbolId>> {
        let mut out = Vec::new();
        for exp in &self.edge(id).expansions {
            match *exp {
                Expansion::Epsilon { .. } => out.push(Vec::new()),
                Expansion::Terminal { mod_edge, .. } => {
                    out.push(vec![self.graph.edge(mod_edge).symbol.unwrap()])
                }
                Expansion::Unary { child, .. } => out.extend(self.yields(child)),
                Expansion::Binary { left, right, .. } => {
                    let rs = self.yields(right);
                    for l in self.yields(left) {
                        for r in &rs {
                            let mut s = l.clone();
                            s.extend_from_slice(r);
                            out.push(s);
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn stats(&self) -> ReachStats {
        let mut counts: FxHashMap<(u32, SymbolId), usize> = FxHashMap::default();
        for e in &self.edges {
            *counts.entry((e.weight, e.symbol)).or_default() += 1;
        }
        let per = counts
            .into_iter()
            .map(|((w, sym), c)| ((w, self.grammar.symbol(sym).name.clone()), c));
        let mut by_weight_symbol: Vec<WeightSymbolCount> = per
            .into_iter()
            .map(|((weight, symbol), count)| WeightSymbolCount {
                weight,
                symbol,
                count,
            })
            .collect();
        by_weight_symbol.sort_by(|a, b| (a.weight, &a.symbol).cmp(&(b.weight, &b.symbol)));
        ReachStats {
            edges: self.edges.len(),
            expansions: self.expansion_count,
            dequeued: self.pops,
            pending: self.queued,
            by_weight_symbol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightSymbolCount {
    pub weight: u32,
    pub symbol: String,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachStats {
    pub edges: usize,
    pub expansions: usize,
    pub dequeued: u64,
    pub pending: usize,
    pub by_weight_symbol: Vec<WeightSymbolCount>,
}
