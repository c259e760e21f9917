//! Token-level mutation operators.
//!
//! | id  | action                                    |
//! |-----|-------------------------------------------|
//! | M.1 | insert a punctuation mark or keyword      |
//! | M.2 | delete a punctuation mark or keyword      |
//! | M.3 | duplicate a punctuation mark or keyword   |
//! | M.4 | replace a punctuation mark or keyword     |
//! | M.5 | insert an identifier                      |
//! | M.6 | delete an identifier                      |
//! | M.7 | duplicate an identifier                   |
//! | M.8 | replace an identifier                     |

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rng;
use crate::grammar::TerminalClass;
use crate::langs::{fresh_name, renumber, token_for, Frontend};
use crate::modgraph::Token;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationOp {
    InsertFixed,
    DeleteFixed,
    DuplicateFixed,
    ReplaceFixed,
    InsertIdent,
    DeleteIdent,
    DuplicateIdent,
    ReplaceIdent,
}

impl MutationOp {
    pub const ALL: [MutationOp; 8] = [
        MutationOp::InsertFixed,
        MutationOp::DeleteFixed,
        MutationOp::DuplicateFixed,
        MutationOp::ReplaceFixed,
        MutationOp::InsertIdent,
        MutationOp::DeleteIdent,
        MutationOp::DuplicateIdent,
        MutationOp::ReplaceIdent,
    ];

    pub fn id(self) -> &'static str {
        ["M.1", "M.2", "M.3", "M.4", "M.5", "M.6", "M.7", "M.8"][self as usize]
    }

    /// Whether the operator acts on identifiers rather than on punctuation
    /// and keywords.
    pub fn on_identifiers(self) -> bool {
        self as usize >= 4
    }
}

impl fmt::Display for MutationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for MutationOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        MutationOp::ALL
            .into_iter()
            .find(|op| op.id() == s)
            .ok_or_else(|| format!("unknown mutation operator `{s}`"))
    }
}

impl Serialize for MutationOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for MutationOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Operator groups for building mutant sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    /// M.1 to M.4, mostly syntax errors.
    Syn,
    /// M.8, mostly type errors.
    Sem,
    /// All eight.
    Mix,
}

impl Group {
    pub fn ops(self) -> Vec<MutationOp> {
        match self {
            Group::Syn => MutationOp::ALL[..4].to_vec(),
            Group::Sem => vec![MutationOp::ReplaceIdent],
            Group::Mix => MutationOp::ALL.to_vec(),
        }
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "syn" => Ok(Group::Syn),
            "sem" => Ok(Group::Sem),
            "mix" => Ok(Group::Mix),
            _ => Err(format!("unknown group `{s}` (expected syn, sem or mix)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationSpec {
    pub ops: Vec<MutationOp>,
    pub count: u32,
    pub seed: u64,
}

impl MutationSpec {
    pub fn new(ops: Vec<MutationOp>, count: u32, seed: u64) -> Self {
        MutationSpec { ops, count, seed }
    }

    pub fn group(group: Group, count: u32, seed: u64) -> Self {
        MutationSpec::new(group.ops(), count, seed)
    }
}

/// One applied operator; `pos` indexes the token stream it was applied to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutation {
    pub op: MutationOp,
    pub pos: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MutateError {
    #[error("mutation spec has no operators")]
    NoOperators,
    #[error("mutation count must be at least 1")]
    ZeroCount,
    #[error("no operator in the set applies after {0} draws")]
    Inapplicable(u32),
}

const REDRAWS: u32 = 64;

/// Applies `spec.count` operators one after another, each to the output of
/// the previous one.
pub fn mutate<F: Frontend>(
    frontend: &F,
    tokens: &[Token],
    spec: &MutationSpec,
) -> Result<(Vec<Token>, Vec<Mutation>), MutateError> {
    if spec.ops.is_empty() {
        return Err(MutateError::NoOperators);
    }
    if spec.count == 0 {
        return Err(MutateError::ZeroCount);
    }
    let mut rng = rng(spec.seed, 0);
    let mut cur = tokens.to_vec();
    let mut log = Vec::new();
    for _ in 0..spec.count {
        let mut applied = None;
        for _ in 0..REDRAWS {
            let op = *spec.ops.choose(&mut rng).unwrap();
            if let Some(pos) = apply(frontend, &mut cur, op, &mut rng) {
                applied = Some(Mutation { op, pos });
                break;
            }
        }
        log.push(applied.ok_or(MutateError::Inapplicable(REDRAWS))?);
    }
    renumber(&mut cur);
    Ok((cur, log))
}

fn apply<F: Frontend>(frontend: &F, tokens: &mut Vec<Token>, op: MutationOp, rng: &mut ChaCha8Rng) -> Option<usize> {
    let g = frontend.grammar();
    let fixed: Vec<&str> = g
        .terminals()
        .filter(|s| s.class() == Some(TerminalClass::Fixed))
        .filter_map(|s| s.fixed_lexeme())
        .collect();
    let is_ident = |t: &Token| g.symbol(t.terminal).class() == Some(TerminalClass::Identifier);
    let is_fixed = |t: &Token| g.symbol(t.terminal).class() == Some(TerminalClass::Fixed);
    let target = |wanted: &dyn Fn(&Token) -> bool| -> Vec<usize> {
        (0..tokens.len()).filter(|&i| wanted(&tokens[i])).collect()
    };
    let make = |lexeme: &str| token_for(g, lexeme, 0).expect("lexeme of the grammar");
    match op {
        MutationOp::InsertFixed => {
            let pos = rng.gen_range(0..=tokens.len());
            tokens.insert(pos, make(fixed.choose(rng)?));
            Some(pos)
        }
        MutationOp::InsertIdent => {
            let pos = rng.gen_range(0..=tokens.len());
            let mut names: Vec<&str> = tokens.iter().filter(|t| is_ident(t)).map(|t| t.lexeme.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            let name = match names.choose(rng) {
                Some(n) => n.to_string(),
                None => fresh_name("fresh", Vec::<&str>::new()),
            };
            tokens.insert(pos, make(&name));
            Some(pos)
        }
        MutationOp::DeleteFixed | MutationOp::DeleteIdent => {
            let pick: &dyn Fn(&Token) -> bool = if op.on_identifiers() { &is_ident } else { &is_fixed };
            let pos = *target(pick).choose(rng)?;
            tokens.remove(pos);
            Some(pos)
        }
        MutationOp::DuplicateFixed | MutationOp::DuplicateIdent => {
            let pick: &dyn Fn(&Token) -> bool = if op.on_identifiers() { &is_ident } else { &is_fixed };
            let pos = *target(pick).choose(rng)?;
            let copy = tokens[pos].clone();
            tokens.insert(pos + 1, copy);
            Some(pos + 1)
        }
        MutationOp::ReplaceFixed => {
            let pos = *target(&is_fixed).choose(rng)?;
            let others: Vec<&str> = fixed.iter().copied().filter(|l| *l != tokens[pos].lexeme).collect();
            tokens[pos] = make(others.choose(rng)?);
            Some(pos)
        }
        MutationOp::ReplaceIdent => {
            let pos = *target(&is_ident).choose(rng)?;
            let others: Vec<String> = frontend
                .identifier_alphabet(tokens)
                .into_iter()
                .filter(|n| *n != tokens[pos].lexeme)
                .collect();
            tokens[pos] = make(others.choose(rng)?);
            Some(pos)
        }
    }
}
