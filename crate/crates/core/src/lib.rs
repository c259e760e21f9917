//! Minimal-edit repair of non-compilable programs.
//!
//! A program is turned into a weighted modification graph ([`modgraph`]),
//! saturated with grammar edges in nondecreasing edit weight
//! ([`reachability`]), and every candidate root edge is filtered by merged
//! attribute checking ([`attrcheck`]). The first root edge that carries a
//! semantically valid derivation is materialized into a fixed token sequence
//! by [`fixer`].

pub mod attrcheck;
pub mod corpus;
pub mod fixer;
pub mod grammar;
pub mod langs;
pub mod modgraph;
pub mod reachability;

pub use attrcheck::{AttributeRules, MemoTable, TerminalSource};
pub use fixer::{fix, EditOp, EditScript, FixLimits, FixResult, FixStatus};
pub use grammar::{Grammar, SymbolId};
pub use modgraph::{ModGraph, Token};
