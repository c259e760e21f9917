//! Merged attribute checking over a saturated reachability graph.
//!
//! `(edge, inherited value)` pairs are evaluated lazily: each memo entry owns
//! the prefix of distinct synthesized values produced so far and a cursor
//! into the three-level loop (expansion, left value, right value) that
//! produces the next one. Rules returning `None` prune the branch, equal
//! values are merged, and a second request for the same key replays the
//! stored prefix before resuming the cursor.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;
use std::time::Instant;

use thiserror::Error;

use crate::grammar::{Grammar, Production, SymbolId};
use crate::modgraph::EdgeKind;
use crate::reachability::{EdgeId, Expansion, ReachState};

/// What a terminal edge does to the original token stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalSource<'a> {
    /// The token is kept with this spelling.
    Original(&'a str),
    /// A new token is inserted.
    Inserted,
    /// The token spelled `previous` is replaced. `same_class` is set for a
    /// class terminal replacing a token of its own class, whose new spelling
    /// must differ from `previous`.
    Replaced { previous: &'a str, same_class: bool },
}

/// Attribute rules over a normalized grammar: one inherited and one
/// synthesized value per symbol. All methods must be pure.
pub trait AttributeRules {
    type Value: Clone + Eq + Hash + Debug;

    /// Synthesized values of a terminal edge, each with the lexeme that
    /// realizes it. An empty result prunes the edge.
    fn process_terminal(
        &self,
        terminal: SymbolId,
        source: TerminalSource<'_>,
        inherited: &Self::Value,
    ) -> Vec<(Self::Value, String)>;

    fn process_left_inherited(&self, production: &Production, inherited: &Self::Value) -> Option<Self::Value>;

    fn process_right_inherited(
        &self,
        production: &Production,
        inherited: &Self::Value,
        left: &Self::Value,
    ) -> Option<Self::Value>;

    fn process_synthesized(
        &self,
        production: &Production,
        inherited: &Self::Value,
        left: Option<&Self::Value>,
        right: Option<&Self::Value>,
    ) -> Option<Self::Value>;

    fn root_inherited(&self) -> Self::Value;

    /// Approximate heap footprint, used for the memory budget.
    fn value_bytes(&self, _value: &Self::Value) -> usize {
        std::mem::size_of::<Self::Value>()
    }
}

/// Rules written against the productions of the grammar document, with any
/// number of right-hand-side symbols. [`Binarized`] adapts them to the
/// normalized grammar.
pub trait SourceRules {
    type Value: Clone + Eq + Hash + Debug;

    fn terminal(
        &self,
        terminal: SymbolId,
        source: TerminalSource<'_>,
        inherited: &Self::Value,
    ) -> Vec<(Self::Value, String)>;

    /// Inherited value of child `child`, given the synthesized values of the
    /// children before it.
    fn inherited(
        &self,
        production: &Production,
        child: usize,
        inherited: &Self::Value,
        earlier: &[Self::Value],
    ) -> Option<Self::Value>;

    fn synthesized(
        &self,
        production: &Production,
        inherited: &Self::Value,
        children: &[Self::Value],
    ) -> Option<Self::Value>;

    fn root(&self) -> Self::Value;

    fn value_bytes(&self, _value: &Self::Value) -> usize {
        std::mem::size_of::<Self::Value>()
    }
}

/// Attribute value on the normalized grammar. Binarization nonterminals
/// inherit the parent's value plus the synthesized values of the children
/// already seen, and synthesize the list of the remaining children's values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Layered<V> {
    Plain(V),
    Partial { parent: V, done: Rc<[V]> },
    Rest(Rc<[V]>),
}

impl<V> Layered<V> {
    fn plain(&self) -> &V {
        match self {
            Layered::Plain(v) => v,
            _ => panic!("expected a plain attribute value"),
        }
    }
}

pub struct Binarized<'g, R> {
    grammar: &'g Grammar,
    rules: R,
}

impl<'g, R: SourceRules> Binarized<'g, R> {
    pub fn new(grammar: &'g Grammar, rules: R) -> Self {
        assert!(grammar.is_normalized());
        Binarized { grammar, rules }
    }

    pub fn inner(&self) -> &R {
        &self.rules
    }

    fn split<'v>(&self, production: &Production, inherited: &'v Layered<R::Value>) -> (&'v R::Value, &'v [R::Value]) {
        match inherited {
            Layered::Plain(v) if production.origin.position == 0 => (v, &[]),
            Layered::Partial { parent, done } if production.origin.position > 0 => (parent, done),
            other => panic!("inherited value {other:?} does not fit production {:?}", production.id),
        }
    }

    fn closes_source(&self, production: &Production) -> bool {
        production.origin.position + production.rhs.len() >= self.grammar.source_len(production)
    }
}

impl<'g, R: SourceRules> AttributeRules for Binarized<'g, R> {
    type Value = Layered<R::Value>;

    fn process_terminal(
        &self,
        terminal: SymbolId,
        source: TerminalSource<'_>,
        inherited: &Self::Value,
    ) -> Vec<(Self::Value, String)> {
        self.rules
            .terminal(terminal, source, inherited.plain())
            .into_iter()
            .map(|(v, s)| (Layered::Plain(v), s))
            .collect()
    }

    fn process_left_inherited(&self, production: &Production, inherited: &Self::Value) -> Option<Self::Value> {
        let (parent, done) = self.split(production, inherited);
        let src = self.grammar.source(production.origin.production);
        self.rules
            .inherited(src, production.origin.position, parent, done)
            .map(Layered::Plain)
    }

    fn process_right_inherited(
        &self,
        production: &Production,
        inherited: &Self::Value,
        left: &Self::Value,
    ) -> Option<Self::Value> {
        let (parent, done) = self.split(production, inherited);
        let mut done: Vec<R::Value> = done.to_vec();
        done.push(left.plain().clone());
        if self.closes_source(production) {
            let src = self.grammar.source(production.origin.production);
            self.rules
                .inherited(src, production.origin.position + 1, parent, &done)
                .map(Layered::Plain)
        } else {
            Some(Layered::Partial {
                parent: parent.clone(),
                done: done.into(),
            })
        }
    }

    fn process_synthesized(
        &self,
        production: &Production,
        inherited: &Self::Value,
        left: Option<&Self::Value>,
        right: Option<&Self::Value>,
    ) -> Option<Self::Value> {
        let (parent, done) = self.split(production, inherited);
        let mut children: Vec<R::Value> = Vec::with_capacity(4);
        if let Some(l) = left {
            children.push(l.plain().clone());
        }
        match right {
            Some(Layered::Rest(rest)) => children.extend(rest.iter().cloned()),
            Some(r) => children.push(r.plain().clone()),
            None => {}
        }
        if production.origin.position == 0 {
            debug_assert!(done.is_empty());
            let src = self.grammar.source(production.origin.production);
            self.rules
                .synthesized(src, parent, &children)
                .map(Layered::Plain)
        } else {
            Some(Layered::Rest(children.into()))
        }
    }

    fn root_inherited(&self) -> Self::Value {
        Layered::Plain(self.rules.root())
    }

    fn value_bytes(&self, value: &Self::Value) -> usize {
        match value {
            Layered::Plain(v) => self.rules.value_bytes(v),
            Layered::Partial { parent, done } => {
                self.rules.value_bytes(parent) + done.iter().map(|v| self.rules.value_bytes(v)).sum::<usize>()
            }
            Layered::Rest(rest) => rest.iter().map(|v| self.rules.value_bytes(v)).sum(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("memory budget exceeded ({used} > {limit} bytes)")]
    MemoryLimit { used: usize, limit: usize },
    #[error("time budget exceeded")]
    TimeLimit,
    #[error("attribute rule panicked in {production}: {message}")]
    RulePanic { production: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValId(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EntryId(u32);

#[derive(Clone, Debug)]
enum Provenance {
    Terminal { expansion: usize, lexeme: Rc<str> },
    Epsilon { expansion: usize },
    Unary { expansion: usize, child: EntryId, value: usize },
    Binary {
        expansion: usize,
        left: EntryId,
        left_value: usize,
        right: EntryId,
        right_value: usize,
    },
}

#[derive(Clone, Copy, Debug)]
enum Stage {
    Start,
    Unary { child: EntryId, next: usize },
    Left { left: EntryId, next: usize },
    Right {
        left: EntryId,
        left_index: usize,
        left_value: ValId,
        right: EntryId,
        next: usize,
    },
}

struct Entry {
    edge: EdgeId,
    inherited: ValId,
    values: Vec<ValId>,
    provenance: Vec<Provenance>,
    seen: HashSet<ValId>,
    expansion: usize,
    stage: Stage,
    done: bool,
    in_progress: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckLimits {
    pub memory_bytes: Option<usize>,
    pub deadline: Option<Instant>,
    /// Budgets are consulted every this many rule invocations.
    pub check_every: u64,
}

impl Default for CheckLimits {
    fn default() -> Self {
        CheckLimits {
            memory_bytes: None,
            deadline: None,
            check_every: 4096,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoStats {
    pub entries: usize,
    pub stored_values: usize,
    pub interned_values: usize,
    pub rule_invocations: u64,
    pub approx_bytes: usize,
}

/// Global memo for one fix job, keyed on `(edge, inherited value)`.
pub struct MemoTable<V> {
    values: Vec<V>,
    interned: HashMap<V, ValId>,
    entries: Vec<Entry>,
    index: HashMap<(EdgeId, ValId), EntryId>,
    memoize: bool,
    limits: CheckLimits,
    invocations: u64,
    value_bytes: usize,
    stored: usize,
    /// Extra bytes charged from outside (the reachability edge store).
    external_bytes: usize,
}

impl<V: Clone + Eq + Hash + Debug> Default for MemoTable<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: Clone + Eq + Hash + Debug> MemoTable<V> {
    pub fn new() -> Self {
        MemoTable {
            values: Vec::new(),
            interned: HashMap::default(),
            entries: Vec::new(),
            index: HashMap::default(),
            memoize: true,
            limits: CheckLimits::default(),
            invocations: 0,
            value_bytes: 0,
            stored: 0,
            external_bytes: 0,
        }
    }

    /// A table that never shares entries between requests. Exponential; for
    /// differential testing.
    pub fn without_memoization() -> Self {
        MemoTable {
            memoize: false,
            ..Self::new()
        }
    }

    pub fn with_limits(mut self, limits: CheckLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn set_external_bytes(&mut self, bytes: usize) {
        self.external_bytes = bytes;
    }

    pub fn value(&self, id: ValId) -> &V {
        &self.values[id.0 as usize]
    }

    pub fn approx_bytes(&self) -> usize {
        self.entries.len() * (std::mem::size_of::<Entry>() + 48)
            + self.stored * (std::mem::size_of::<ValId>() * 3 + std::mem::size_of::<Provenance>())
            + self.value_bytes
            + self.values.len() * 48
    }

    pub fn stats(&self) -> MemoStats {
        MemoStats {
            entries: self.entries.len(),
            stored_values: self.stored,
            interned_values: self.values.len(),
            rule_invocations: self.invocations,
            approx_bytes: self.approx_bytes(),
        }
    }

    fn intern<R: AttributeRules<Value = V>>(&mut self, rules: &R, v: V) -> ValId {
        if let Some(&id) = self.interned.get(&v) {
            return id;
        }
        let id = ValId(self.values.len() as u32);
        self.value_bytes += rules.value_bytes(&v);
        self.values.push(v.clone());
        self.interned.insert(v, id);
        id
    }

    fn entry_for(&mut self, edge: EdgeId, inherited: ValId) -> EntryId {
        if self.memoize {
            if let Some(&id) = self.index.get(&(edge, inherited)) {
                return id;
            }
        }
        let id = EntryId(self.entries.len() as u32);
        self.entries.push(Entry {
            edge,
            inherited,
            values: Vec::new(),
            provenance: Vec::new(),
            seen: HashSet::default(),
            expansion: 0,
            stage: Stage::Start,
            done: false,
            in_progress: false,
        });
        if self.memoize {
            self.index.insert((edge, inherited), id);
        }
        id
    }

    fn tick(&mut self) -> Result<(), CheckError> {
        self.invocations += 1;
        if self.invocations % self.limits.check_every.max(1) == 0 {
            self.check_budget()?;
        }
        Ok(())
    }

    fn check_budget(&self) -> Result<(), CheckError> {
        if let Some(limit) = self.limits.memory_bytes {
            let used = self.approx_bytes() + self.external_bytes;
            if used > limit {
                return Err(CheckError::MemoryLimit { used, limit });
            }
        }
        if let Some(deadline) = self.limits.deadline {
            if Instant::now() >= deadline {
                return Err(CheckError::TimeLimit);
            }
        }
        Ok(())
    }

    /// Starts (or resumes) the stream of synthesized values of `edge` under
    /// `inherited`.
    pub fn check_attr<R: AttributeRules<Value = V>>(&mut self, rules: &R, edge: EdgeId, inherited: V) -> CheckStream {
        let i = self.intern(rules, inherited);
        CheckStream {
            entry: self.entry_for(edge, i),
            next: 0,
        }
    }

    /// The `k`-th distinct synthesized value of an entry, computing it if
    /// needed. `None` when the stream is exhausted, or when the entry is
    /// re-entered while it is being computed (its current prefix is all a
    /// cyclic request sees).
    fn nth<R: AttributeRules<Value = V>>(
        &mut self,
        reach: &ReachState<'_>,
        rules: &R,
        entry: EntryId,
        k: usize,
    ) -> Result<Option<ValId>, CheckError> {
        loop {
            let e = &self.entries[entry.0 as usize];
            if k < e.values.len() {
                return Ok(Some(e.values[k]));
            }
            if e.done || e.in_progress {
                return Ok(None);
            }
            self.entries[entry.0 as usize].in_progress = true;
            let r = self.advance(reach, rules, entry);
            self.entries[entry.0 as usize].in_progress = false;
            r?;
        }
    }

    fn push_value(&mut self, entry: EntryId, v: ValId, prov: Provenance) -> bool {
        let e = &mut self.entries[entry.0 as usize];
        if e.seen.insert(v) {
            e.values.push(v);
            e.provenance.push(prov);
            self.stored += 1;
            true
        } else {
            false
        }
    }

    fn call<T>(&mut self, reach: &ReachState<'_>, prod: Option<&Production>, f: impl FnOnce() -> T) -> Result<T, CheckError> {
        self.tick()?;
        catch_unwind(AssertUnwindSafe(f)).map_err(|payload| {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            let production = match prod {
                Some(p) => describe_production(reach.grammar(), p),
                None => "terminal".into(),
            };
            CheckError::RulePanic { production, message }
        })
    }

    /// Runs the entry's cursor until it produces one new value or finishes.
    fn advance<R: AttributeRules<Value = V>>(
        &mut self,
        reach: &ReachState<'_>,
        rules: &R,
        entry: EntryId,
    ) -> Result<(), CheckError> {
        let g = reach.grammar();
        let (edge_id, inherited) = {
            let e = &self.entries[entry.0 as usize];
            (e.edge, e.inherited)
        };
        let edge = reach.edge(edge_id);
        loop {
            let (xi, stage) = {
                let e = &self.entries[entry.0 as usize];
                (e.expansion, e.stage)
            };
            let Some(exp) = edge.expansions.get(xi).copied() else {
                self.entries[entry.0 as usize].done = true;
                return Ok(());
            };
            let next_expansion = |me: &mut Self| {
                let e = &mut me.entries[entry.0 as usize];
                e.expansion += 1;
                e.stage = Stage::Start;
            };
            match exp {
                Expansion::Terminal { mod_edge, .. } => {
                    next_expansion(self);
                    let me = reach.graph().edge(mod_edge);
                    let tokens = reach.graph().tokens();
                    let source = match me.kind {
                        EdgeKind::Original => TerminalSource::Original(&tokens[me.token.unwrap()].lexeme),
                        EdgeKind::Insertion => TerminalSource::Inserted,
                        EdgeKind::Update => TerminalSource::Replaced {
                            previous: &tokens[me.token.unwrap()].lexeme,
                            same_class: me.requires_different_lexeme(tokens),
                        },
                        EdgeKind::Deletion => unreachable!("deletions are folded"),
                    };
                    let iv = self.values[inherited.0 as usize].clone();
                    let results = self.call(reach, None, || rules.process_terminal(edge.symbol, source, &iv))?;
                    let mut produced = false;
                    for (v, lexeme) in results {
                        let id = self.intern(rules, v);
                        produced |= self.push_value(
                            entry,
                            id,
                            Provenance::Terminal {
                                expansion: xi,
                                lexeme: lexeme.into(),
                            },
                        );
                    }
                    if produced {
                        return Ok(());
                    }
                }
                Expansion::Epsilon { production } => {
                    next_expansion(self);
                    let p = g.production(production);
                    let iv = self.values[inherited.0 as usize].clone();
                    let s = self.call(reach, Some(p), || rules.process_synthesized(p, &iv, None, None))?;
                    if let Some(s) = s {
                        let id = self.intern(rules, s);
                        if self.push_value(entry, id, Provenance::Epsilon { expansion: xi }) {
                            return Ok(());
                        }
                    }
                }
                Expansion::Unary { production, child } => {
                    let p = g.production(production);
                    match stage {
                        Stage::Start => {
                            let iv = self.values[inherited.0 as usize].clone();
                            match self.call(reach, Some(p), || rules.process_left_inherited(p, &iv))? {
                                None => next_expansion(self),
                                Some(ib) => {
                                    let ib = self.intern(rules, ib);
                                    let ce = self.entry_for(child, ib);
                                    self.entries[entry.0 as usize].stage = Stage::Unary { child: ce, next: 0 };
                                }
                            }
                        }
                        Stage::Unary { child: ce, next } => match self.nth(reach, rules, ce, next)? {
                            None => next_expansion(self),
                            Some(sb) => {
                                self.entries[entry.0 as usize].stage = Stage::Unary {
                                    child: ce,
                                    next: next + 1,
                                };
                                let iv = self.values[inherited.0 as usize].clone();
                                let sbv = self.values[sb.0 as usize].clone();
                                let s = self.call(reach, Some(p), || rules.process_synthesized(p, &iv, Some(&sbv), None))?;
                                if let Some(s) = s {
                                    let id = self.intern(rules, s);
                                    if self.push_value(
                                        entry,
                                        id,
                                        Provenance::Unary {
                                            expansion: xi,
                                            child: ce,
                                            value: next,
                                        },
                                    ) {
                                        return Ok(());
                                    }
                                }
                            }
                        },
                        _ => unreachable!(),
                    }
                }
                Expansion::Binary { production, left, right } => {
                    let p = g.production(production);
                    match stage {
                        Stage::Start => {
                            let iv = self.values[inherited.0 as usize].clone();
                            match self.call(reach, Some(p), || rules.process_left_inherited(p, &iv))? {
                                None => next_expansion(self),
                                Some(ib) => {
                                    let ib = self.intern(rules, ib);
                                    let le = self.entry_for(left, ib);
                                    self.entries[entry.0 as usize].stage = Stage::Left { left: le, next: 0 };
                                }
                            }
                        }
                        Stage::Left { left: le, next } => match self.nth(reach, rules, le, next)? {
                            None => next_expansion(self),
                            Some(sb) => {
                                let iv = self.values[inherited.0 as usize].clone();
                                let sbv = self.values[sb.0 as usize].clone();
                                match self.call(reach, Some(p), || rules.process_right_inherited(p, &iv, &sbv))? {
                                    None => {
                                        self.entries[entry.0 as usize].stage = Stage::Left { left: le, next: next + 1 };
                                    }
                                    Some(ic) => {
                                        let ic = self.intern(rules, ic);
                                        let re = self.entry_for(right, ic);
                                        self.entries[entry.0 as usize].stage = Stage::Right {
                                            left: le,
                                            left_index: next,
                                            left_value: sb,
                                            right: re,
                                            next: 0,
                                        };
                                    }
                                }
                            }
                        },
                        Stage::Right {
                            left: le,
                            left_index,
                            left_value,
                            right: re,
                            next,
                        } => match self.nth(reach, rules, re, next)? {
                            None => {
                                self.entries[entry.0 as usize].stage = Stage::Left {
                                    left: le,
                                    next: left_index + 1,
                                };
                            }
                            Some(sc) => {
                                self.entries[entry.0 as usize].stage = Stage::Right {
                                    left: le,
                                    left_index,
                                    left_value,
                                    right: re,
                                    next: next + 1,
                                };
                                let iv = self.values[inherited.0 as usize].clone();
                                let sbv = self.values[left_value.0 as usize].clone();
                                let scv = self.values[sc.0 as usize].clone();
                                let s = self.call(reach, Some(p), || {
                                    rules.process_synthesized(p, &iv, Some(&sbv), Some(&scv))
                                })?;
                                if let Some(s) = s {
                                    let id = self.intern(rules, s);
                                    if self.push_value(
                                        entry,
                                        id,
                                        Provenance::Binary {
                                            expansion: xi,
                                            left: le,
                                            left_value: left_index,
                                            right: re,
                                            right_value: next,
                                        },
                                    ) {
                                        return Ok(());
                                    }
                                }
                            }
                        },
                        _ => unreachable!(),
                    }
                }
            }
        }
    }

    /// Drains the whole stream of one key.
    pub fn collect<R: AttributeRules<Value = V>>(
        &mut self,
        reach: &ReachState<'_>,
        rules: &R,
        edge: EdgeId,
        inherited: V,
    ) -> Result<Vec<V>, CheckError> {
        let mut stream = self.check_attr(rules, edge, inherited);
        let mut out = Vec::new();
        while let Some(v) = stream.next(self, reach, rules)? {
            out.push(v.clone());
        }
        Ok(out)
    }

    fn witness_of(&self, reach: &ReachState<'_>, entry: EntryId, k: usize) -> Witness {
        let e = &self.entries[entry.0 as usize];
        let edge = reach.edge(e.edge);
        match &e.provenance[k] {
            Provenance::Terminal { expansion, lexeme } => match edge.expansions[*expansion] {
                Expansion::Terminal { mod_edge, lead, trail } => Witness::Terminal {
                    edge: e.edge,
                    mod_edge,
                    lead,
                    trail,
                    lexeme: lexeme.to_string(),
                },
                _ => unreachable!(),
            },
            Provenance::Epsilon { expansion } => Witness::Epsilon {
                edge: e.edge,
                production: edge.expansions[*expansion].production().unwrap(),
            },
            Provenance::Unary { expansion, child, value } => Witness::Unary {
                edge: e.edge,
                production: edge.expansions[*expansion].production().unwrap(),
                child: Box::new(self.witness_of(reach, *child, *value)),
            },
            Provenance::Binary {
                expansion,
                left,
                left_value,
                right,
                right_value,
            } => Witness::Binary {
                edge: e.edge,
                production: edge.expansions[*expansion].production().unwrap(),
                left: Box::new(self.witness_of(reach, *left, *left_value)),
                right: Box::new(self.witness_of(reach, *right, *right_value)),
            },
        }
    }
}

/// A resumable cursor over one memo entry.
#[derive(Clone, Copy, Debug)]
pub struct CheckStream {
    entry: EntryId,
    next: usize,
}

impl CheckStream {
    pub fn next<'m, V, R>(
        &mut self,
        memo: &'m mut MemoTable<V>,
        reach: &ReachState<'_>,
        rules: &R,
    ) -> Result<Option<&'m V>, CheckError>
    where
        V: Clone + Eq + Hash + Debug,
        R: AttributeRules<Value = V>,
    {
        match memo.nth(reach, rules, self.entry, self.next)? {
            None => Ok(None),
            Some(id) => {
                self.next += 1;
                Ok(Some(memo.value(id)))
            }
        }
    }
}

/// The derivation and attribute choices behind one synthesized value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Terminal {
        edge: EdgeId,
        mod_edge: usize,
        lead: u32,
        trail: u32,
        lexeme: String,
    },
    Epsilon {
        edge: EdgeId,
        production: crate::grammar::ProdId,
    },
    Unary {
        edge: EdgeId,
        production: crate::grammar::ProdId,
        child: Box<Witness>,
    },
    Binary {
        edge: EdgeId,
        production: crate::grammar::ProdId,
        left: Box<Witness>,
        right: Box<Witness>,
    },
}

impl Witness {
    pub fn edge(&self) -> EdgeId {
        match self {
            Witness::Terminal { edge, .. }
            | Witness::Epsilon { edge, .. }
            | Witness::Unary { edge, .. }
            | Witness::Binary { edge, .. } => *edge,
        }
    }
}

/// Checks a root edge under the rules' root inherited value and returns the
/// first synthesized value with its witness.
pub fn first_passing<R: AttributeRules>(
    reach: &ReachState<'_>,
    rules: &R,
    root: EdgeId,
    memo: &mut MemoTable<R::Value>,
) -> Result<Option<(R::Value, Witness)>, CheckError> {
    let stream = memo.check_attr(rules, root, rules.root_inherited());
    match memo.nth(reach, rules, stream.entry, 0)? {
        None => Ok(None),
        Some(v) => {
            let witness = memo.witness_of(reach, stream.entry, 0);
            Ok(Some((memo.value(v).clone(), witness)))
        }
    }
}

fn describe_production(g: &Grammar, p: &Production) -> String {
    let mut s = format!("{} ->", g.symbol(p.lhs).name);
    if p.rhs.is_empty() {
        s.push_str(" .");
    }
    for r in &p.rhs {
        s.push(' ');
        s.push_str(&g.symbol(*r).name);
    }
    s
}
