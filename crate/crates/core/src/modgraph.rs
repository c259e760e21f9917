//! The weighted modification graph of a token sequence.
//!
//! For `n` tokens there are vertices `v0..=vn`. Original edges carry the
//! tokens at weight 0; insertion self-loops, update edges and ε deletion
//! edges carry weight 1. Class terminals (identifiers, literals) appear once
//! in the vocabulary: a single class edge stands for "some lexeme of this
//! class", and the concrete spelling is chosen later by the attribute rules.

use rustc_hash::FxHashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{Grammar, SymbolId, SymbolKind, TerminalClass};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub terminal: SymbolId,
    pub lexeme: String,
    pub position: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Original,
    Insertion,
    Update,
    Deletion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModEdge {
    pub from: usize,
    pub to: usize,
    /// `None` is the ε label of a deletion edge.
    pub symbol: Option<SymbolId>,
    pub weight: u32,
    pub kind: EdgeKind,
    /// Index of the original token this edge keeps, replaces or deletes.
    pub token: Option<usize>,
}

impl ModEdge {
    /// A class-terminal update whose replacement must spell differently.
    pub fn requires_different_lexeme(&self, tokens: &[Token]) -> bool {
        self.kind == EdgeKind::Update
            && matches!((self.token, self.symbol), (Some(i), Some(s)) if tokens[i].terminal == s)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModGraphError {
    #[error("token {position} (`{lexeme}`) is not a terminal of the grammar")]
    UnknownTerminal { position: usize, lexeme: String },
    #[error("path is disconnected at edge {0}")]
    Disconnected(usize),
    #[error("path does not span v0..vn")]
    NotSpanning,
}

#[derive(Clone, Debug)]
pub struct ModGraph {
    tokens: Vec<Token>,
    edges: Vec<ModEdge>,
    from_index: FxHashMap<(usize, Option<SymbolId>), Vec<usize>>,
    to_index: FxHashMap<(usize, Option<SymbolId>), Vec<usize>>,
}

impl ModGraph {
    pub fn build(tokens: &[Token], g: &Grammar) -> Result<ModGraph, ModGraphError> {
        for (i, t) in tokens.iter().enumerate() {
            let ok = t.terminal.index() < g.symbols().len() && g.symbol(t.terminal).is_terminal();
            if !ok {
                return Err(ModGraphError::UnknownTerminal {
                    position: i,
                    lexeme: t.lexeme.clone(),
                });
            }
        }
        let vocab: Vec<SymbolId> = g.terminals().map(|s| s.id).collect();
        let n = tokens.len();
        let mut edges = Vec::with_capacity(n + (n + 1) * vocab.len() + n * vocab.len() + n);
        for (i, t) in tokens.iter().enumerate() {
            edges.push(ModEdge {
                from: i,
                to: i + 1,
                symbol: Some(t.terminal),
                weight: 0,
                kind: EdgeKind::Original,
                token: Some(i),
            });
        }
        for v in 0..=n {
            for &t in &vocab {
                edges.push(ModEdge {
                    from: v,
                    to: v,
                    symbol: Some(t),
                    weight: 1,
                    kind: EdgeKind::Insertion,
                    token: None,
                });
            }
        }
        for (i, tok) in tokens.iter().enumerate() {
            for &t in &vocab {
                let class = match g.symbol(t).kind {
                    SymbolKind::Terminal(c) => c,
                    SymbolKind::Nonterminal => unreachable!(),
                };
                // a class terminal may replace a token of its own class as
                // long as the spelling changes
                if t == tok.terminal && class == TerminalClass::Fixed {
                    continue;
                }
                edges.push(ModEdge {
                    from: i,
                    to: i + 1,
                    symbol: Some(t),
                    weight: 1,
                    kind: EdgeKind::Update,
                    token: Some(i),
                });
            }
        }
        for i in 0..n {
            edges.push(ModEdge {
                from: i,
                to: i + 1,
                symbol: None,
                weight: 1,
                kind: EdgeKind::Deletion,
                token: Some(i),
            });
        }
        let mut from_index: FxHashMap<_, Vec<usize>> = FxHashMap::default();
        let mut to_index: FxHashMap<_, Vec<usize>> = FxHashMap::default();
        for (idx, e) in edges.iter().enumerate() {
            from_index.entry((e.from, e.symbol)).or_default().push(idx);
            to_index.entry((e.to, e.symbol)).or_default().push(idx);
        }
        Ok(ModGraph {
            tokens: tokens.to_vec(),
            edges,
            from_index,
            to_index,
        })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn vertex_count(&self) -> usize {
        self.tokens.len() + 1
    }

    pub fn last_vertex(&self) -> usize {
        self.tokens.len()
    }

    pub fn edges(&self) -> &[ModEdge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &ModEdge {
        &self.edges[idx]
    }

    pub fn edges_from(&self, v: usize, symbol: Option<SymbolId>) -> &[usize] {
        self.from_index.get(&(v, symbol)).map_or(&[], |v| v.as_slice())
    }

    pub fn edges_to(&self, v: usize, symbol: Option<SymbolId>) -> &[usize] {
        self.to_index.get(&(v, symbol)).map_or(&[], |v| v.as_slice())
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Sum of edge weights along a connected `v0 -> vn` path.
    pub fn path_weight(&self, path: &[usize]) -> Result<u32, ModGraphError> {
        let mut at = 0;
        let mut weight = 0;
        for (k, &idx) in path.iter().enumerate() {
            let e = &self.edges[idx];
            if e.from != at {
                return Err(ModGraphError::Disconnected(k));
            }
            at = e.to;
            weight += e.weight;
        }
        if at != self.last_vertex() {
            return Err(ModGraphError::NotSpanning);
        }
        Ok(weight)
    }

    /// Terminal string spelled by a path (ε edges contribute nothing).
    pub fn path_symbols(&self, path: &[usize]) -> Vec<SymbolId> {
        path.iter().filter_map(|&i| self.edges[i].symbol).collect()
    }

    pub fn to_dot(&self, g: &Grammar) -> String {
        let mut out = String::from("digraph modgraph {\n  rankdir=LR;\n");
        for v in 0..self.vertex_count() {
            let _ = writeln!(out, "  v{v};");
        }
        for e in &self.edges {
            let label = match e.symbol {
                None => "ε".to_string(),
                Some(s) => match (e.kind, e.token) {
                    (EdgeKind::Original, Some(i)) => self.tokens[i].lexeme.clone(),
                    _ => g.symbol(s).name.clone(),
                },
            };
            let style = if e.kind == EdgeKind::Original {
                "solid"
            } else {
                "dashed"
            };
            let _ = writeln!(
                out,
                "  v{} -> v{} [label=\"{}/{}\", style={style}];",
                e.from,
                e.to,
                label.replace('"', "\\\""),
                e.weight
            );
        }
        out.push_str("}\n");
        out
    }
}
