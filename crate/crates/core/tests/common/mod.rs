//! Oracles shared by the integration tests. None of them reuse library
//! recognizers or search code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use ordfix_core::grammar::{Grammar, Production, SymbolId};
use ordfix_core::langs::tiny_assign::{TinyAssign, TinyEnv};
use ordfix_core::Token;

/// Membership by fixpoint over spans, on productions of any arity.
pub fn recognizes(g: &Grammar, productions: &[Production], input: &[SymbolId]) -> bool {
    let n = input.len();
    let mut table = vec![vec![BTreeSet::<SymbolId>::new(); n + 1]; n + 1];
    for (i, &t) in input.iter().enumerate() {
        table[i][i + 1].insert(t);
    }
    loop {
        let mut changed = false;
        for p in productions {
            for i in 0..=n {
                // vertices reachable from i by reading a prefix of the rhs
                let mut at: BTreeSet<usize> = [i].into();
                for sym in &p.rhs {
                    let mut next = BTreeSet::new();
                    for &v in &at {
                        for j in v..=n {
                            if table[v][j].contains(sym) {
                                next.insert(j);
                            }
                        }
                    }
                    at = next;
                }
                for j in at {
                    if table[i][j].insert(p.lhs) {
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    table[0][n].contains(&g.start())
}

/// Every string over `alphabet` of length at most `max_len`.
pub fn all_strings<T: Clone>(alphabet: &[T], max_len: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &layer {
            for a in alphabet {
                let mut t: Vec<T> = s.clone();
                t.push(a.clone());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(x != y)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Every string within `k` single-symbol edits of `s`.
pub fn neighbourhood<T: Clone + Ord>(s: &[T], alphabet: &[T], k: usize) -> BTreeSet<Vec<T>> {
    let mut all: BTreeSet<Vec<T>> = [s.to_vec()].into();
    let mut frontier = all.clone();
    for _ in 0..k {
        let mut next = BTreeSet::new();
        for w in &frontier {
            for p in 0..=w.len() {
                for a in alphabet {
                    let mut t = w.clone();
                    t.insert(p, a.clone());
                    next.insert(t);
                    if p < w.len() {
                        let mut u = w.clone();
                        u[p] = a.clone();
                        next.insert(u);
                    }
                }
                if p < w.len() {
                    let mut t = w.clone();
                    t.remove(p);
                    next.insert(t);
                }
            }
        }
        next.retain(|w| !all.contains(w));
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

pub fn tiny_env() -> TinyEnv {
    TinyEnv::parse("var x : A;\nvar y : A;\nvar z : B;\n").unwrap()
}

pub fn tiny() -> TinyAssign {
    TinyAssign::new(tiny_env())
}

pub fn spell(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.lexeme.as_str()).collect::<Vec<_>>().join(" ")
}

/// Tokens over a grammar whose terminals are all fixed, one per word.
pub fn fixed_tokens(g: &Grammar, text: &str) -> Vec<Token> {
    text.split_whitespace()
        .enumerate()
        .map(|(i, l)| Token {
            terminal: g.fixed_terminal(l).unwrap_or_else(|| panic!("no terminal {l}")),
            lexeme: l.to_string(),
            position: i,
        })
        .collect()
}
