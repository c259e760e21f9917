//! Exhaustive minimal-fix search, independent of the graph machinery.
//!
//! Candidate programs are enumerated by single token edits drawn from the
//! frontend's finite alphabet, and validated by the reference checker
//! alone. A non-viable prefix ending at token `d` can only be repaired by an
//! edit at or before `d`, so each step only edits there.

use std::collections::HashMap;

use thiserror::Error;

use crate::grammar::TerminalClass;
use crate::langs::{token_for, Frontend};
use crate::modgraph::Token;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search cap of {cap} checks exceeded at distance {distance}")]
    SearchCap { cap: u64, distance: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub k_max: u32,
    /// Reference-checker calls allowed in total.
    pub max_checks: u64,
}

impl OracleLimits {
    pub fn new(k_max: u32) -> Self {
        OracleLimits {
            k_max,
            max_checks: 20_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleStats {
    pub checks: u64,
}

struct Search<'f, F: Frontend> {
    frontend: &'f F,
    /// Every token the search may write, as prototypes.
    alphabet: Vec<Token>,
    checks: u64,
    cap: u64,
    seen: HashMap<Vec<u16>, u32>,
}

impl<F: Frontend> Search<'_, F> {
    fn intern(&mut self, t: &Token) -> u16 {
        match self
            .alphabet
            .iter()
            .position(|a| a.lexeme == t.lexeme && a.terminal == t.terminal)
        {
            Some(k) => k as u16,
            None => {
                self.alphabet.push(t.clone());
                (self.alphabet.len() - 1) as u16
            }
        }
    }

    fn tokens(&self, s: &[u16]) -> Vec<Token> {
        s.iter()
            .enumerate()
            .map(|(i, &k)| Token {
                position: i,
                ..self.alphabet[k as usize].clone()
            })
            .collect()
    }

    /// Whether some program within `budget` edits of `s` compiles.
    fn reachable(&mut self, s: &mut Vec<u16>, budget: u32, writable: usize, distance: u32) -> Result<bool, OracleError> {
        if self.seen.get(s.as_slice()).is_some_and(|&b| b >= budget) {
            return Ok(false);
        }
        self.seen.insert(s.clone(), budget);
        if self.checks >= self.cap {
            return Err(OracleError::SearchCap {
                cap: self.cap,
                distance,
            });
        }
        self.checks += 1;
        let verdict = self.frontend.check_compiles(&self.tokens(s));
        if verdict.ok {
            return Ok(true);
        }
        if budget == 0 {
            return Ok(false);
        }
        let last = verdict.dead_at.min(s.len());
        for p in 0..=last {
            for a in 0..writable as u16 {
                s.insert(p, a);
                let hit = self.reachable(s, budget - 1, writable, distance)?;
                s.remove(p);
                if hit {
                    return Ok(true);
                }
            }
            if p == s.len() {
                continue;
            }
            let old = s.remove(p);
            let hit = self.reachable(s, budget - 1, writable, distance)?;
            s.insert(p, old);
            if hit {
                return Ok(true);
            }
            let old_class = self.alphabet[old as usize].terminal;
            for a in 0..writable as u16 {
                let t = &self.alphabet[a as usize];
                if t.lexeme == self.alphabet[old as usize].lexeme && t.terminal == old_class {
                    continue;
                }
                s[p] = a;
                let hit = self.reachable(s, budget - 1, writable, distance)?;
                s[p] = old;
                if hit {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Least number of token insertions, deletions and replacements that makes
/// `tokens` pass the reference checker, if it is at most `limits.k_max`.
pub fn oracle_min_fix<F: Frontend>(
    frontend: &F,
    tokens: &[Token],
    limits: OracleLimits,
) -> Result<(Option<u32>, OracleStats), OracleError> {
    let g = frontend.grammar();
    let mut lexemes: Vec<String> = g
        .terminals()
        .filter(|s| s.class() == Some(TerminalClass::Fixed))
        .filter_map(|s| s.fixed_lexeme().map(str::to_string))
        .collect();
    lexemes.extend(frontend.identifier_alphabet(tokens));
    if g.terminals().any(|s| s.class() == Some(TerminalClass::Literal)) {
        lexemes.extend(frontend.literal_alphabet());
    }
    let mut search = Search {
        frontend,
        alphabet: Vec::new(),
        checks: 0,
        cap: limits.max_checks,
        seen: HashMap::new(),
    };
    for l in &lexemes {
        let t = token_for(g, l, 0).expect("alphabet lexeme has a terminal");
        search.intern(&t);
    }
    let writable = search.alphabet.len();
    let start: Vec<u16> = tokens.iter().map(|t| search.intern(t)).collect();
    for k in 0..=limits.k_max {
        search.seen.clear();
        let mut s = start.clone();
        if search.reachable(&mut s, k, writable, k)? {
            return Ok((Some(k), OracleStats { checks: search.checks }));
        }
    }
    Ok((None, OracleStats { checks: search.checks }))
}
