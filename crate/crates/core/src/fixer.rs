//! The repair driver.
//!
//! Root edges are pulled from the reachability engine in nondecreasing
//! weight and attribute-checked one at a time; the first one with a passing
//! derivation is turned back into a token sequence and an edit script.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::attrcheck::{first_passing, CheckError, CheckLimits, MemoTable, Witness};
use crate::grammar::SymbolId;
use crate::langs::Frontend;
use crate::modgraph::{EdgeKind, ModGraph, Token};
use crate::reachability::ReachState;

/// Edits allowed beyond the token count when no cap is given.
pub const DEFAULT_HEADROOM: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixLimits {
    /// Defaults to the token count plus [`DEFAULT_HEADROOM`].
    pub max_edits: Option<u32>,
    pub time_limit: Option<Duration>,
    pub memory_bytes: Option<usize>,
    /// Budgets are consulted every this many rule invocations.
    pub check_every: u64,
}

impl Default for FixLimits {
    fn default() -> Self {
        FixLimits {
            max_edits: None,
            time_limit: Some(Duration::from_secs(600)),
            memory_bytes: Some(15 << 30),
            check_every: 4096,
        }
    }
}

impl FixLimits {
    pub fn unlimited() -> Self {
        FixLimits {
            max_edits: None,
            time_limit: None,
            memory_bytes: None,
            check_every: 4096,
        }
    }

    pub fn with_max_edits(mut self, k: u32) -> Self {
        self.max_edits = Some(k);
        self
    }

    pub fn cap_for(&self, tokens: usize) -> u32 {
        self.max_edits.unwrap_or(tokens as u32 + DEFAULT_HEADROOM)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixStatus {
    Fixed,
    NoFixWithinCap,
    TimeLimit,
    MemoryLimit,
    InvalidInput,
    InternalError,
}

impl fmt::Display for FixStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FixStatus::Fixed => "fixed",
            FixStatus::NoFixWithinCap => "no-fix-within-cap",
            FixStatus::TimeLimit => "time-limit",
            FixStatus::MemoryLimit => "memory-limit",
            FixStatus::InvalidInput => "invalid-input",
            FixStatus::InternalError => "internal-error",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Insert,
    Delete,
    Update,
}

/// One edit. `pos` indexes the original token stream: an insertion goes
/// before token `pos` (`pos == n` appends), an update or deletion acts on
/// token `pos`. For deletions `token` is the removed lexeme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOp {
    pub pos: usize,
    pub op: Op,
    pub token: String,
    #[serde(skip)]
    pub terminal: Option<SymbolId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EditScript(pub Vec<EditOp>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplyError(pub String);

impl fmt::Display for ApplyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ApplyError {}

impl EditScript {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ops(&self) -> &[EditOp] {
        &self.0
    }

    /// Replays the script on the original tokens. Operations must be sorted
    /// by position, insertions before the update or deletion at the same
    /// position, and at most one update or deletion per token.
    pub fn apply(&self, original: &[Token]) -> Result<Vec<Token>, ApplyError> {
        let mut out = Vec::with_capacity(original.len() + self.0.len());
        let mut ops = self.0.iter().peekable();
        let new_token = |e: &EditOp| -> Result<Token, ApplyError> {
            Ok(Token {
                terminal: e
                    .terminal
                    .ok_or_else(|| ApplyError(format!("edit at {} has no terminal", e.pos)))?,
                lexeme: e.token.clone(),
                position: 0,
            })
        };
        for i in 0..=original.len() {
            let mut fate = None;
            while let Some(e) = ops.peek() {
                if e.pos < i {
                    return Err(ApplyError(format!("edit at {} is out of order", e.pos)));
                }
                if e.pos > i {
                    break;
                }
                let e = ops.next().unwrap();
                match e.op {
                    Op::Insert if fate.is_none() => out.push(new_token(e)?),
                    Op::Insert => return Err(ApplyError(format!("insertion at {i} after the token's own edit"))),
                    Op::Update | Op::Delete if i == original.len() => {
                        return Err(ApplyError(format!("edit at {i} is past the end")))
                    }
                    Op::Update | Op::Delete if fate.is_some() => {
                        return Err(ApplyError(format!("token {i} edited twice")))
                    }
                    Op::Update | Op::Delete => fate = Some(e),
                }
            }
            if i < original.len() {
                match fate {
                    None => out.push(original[i].clone()),
                    Some(e) if e.op == Op::Update => out.push(new_token(e)?),
                    Some(_) => {}
                }
            }
        }
        if let Some(e) = ops.next() {
            return Err(ApplyError(format!("edit at {} is past the end", e.pos)));
        }
        crate::langs::renumber(&mut out);
        Ok(out)
    }
}

/// Deterministic work counters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FixStats {
    pub tokens: usize,
    pub cap: u32,
    pub root_edges: u64,
    pub reach_edges: usize,
    pub reach_expansions: usize,
    pub dequeued: u64,
    pub memo_entries: usize,
    pub memo_values: usize,
    pub rule_invocations: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FixTiming {
    pub elapsed_ms: f64,
    /// CPU time of the job's own thread.
    pub cpu_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixResult {
    pub status: FixStatus,
    /// Set when `status` is `Fixed`.
    pub weight: Option<u32>,
    pub fixed: Vec<Token>,
    pub edits: EditScript,
    pub stats: FixStats,
    pub timing: FixTiming,
    pub message: Option<String>,
}

impl FixResult {
    fn failed(status: FixStatus, stats: FixStats, message: Option<String>) -> Self {
        FixResult {
            status,
            weight: None,
            fixed: Vec::new(),
            edits: EditScript::default(),
            stats,
            timing: FixTiming::default(),
            message,
        }
    }

    /// JSON report. Timing is optional because it is the only part that
    /// varies between identical runs.
    pub fn to_json(&self, with_timing: bool) -> Value {
        let mut v = json!({
            "status": self.status.to_string(),
            "weight": self.weight,
            "fixed": self.fixed.iter().map(|t| t.lexeme.as_str()).collect::<Vec<_>>(),
            "edits": self.edits,
            "stats": self.stats,
        });
        if let Some(m) = &self.message {
            v["message"] = json!(m);
        }
        if with_timing {
            v["timing"] = json!(self.timing);
        }
        v
    }
}

/// CPU time consumed by the calling thread.
pub fn thread_cpu_time() -> Duration {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid out-pointer for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return Duration::ZERO;
    }
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

const JOB_STACK: usize = 512 << 20;

/// Repairs `tokens` with the fewest token edits that make the program pass
/// the frontend's attribute rules.
pub fn fix<F: Frontend>(frontend: &F, tokens: &[Token], limits: &FixLimits) -> FixResult {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("ordfix-job".into())
            .stack_size(JOB_STACK)
            .spawn_scoped(s, || fix_on_this_thread(frontend, tokens, limits))
            .expect("spawn fix job")
            .join()
            .unwrap_or_else(|p| {
                let message = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                FixResult::failed(FixStatus::InternalError, FixStats::default(), Some(message))
            })
    })
}

/// [`fix`] without the dedicated thread; deep derivations need a large
/// stack.
pub fn fix_on_this_thread<F: Frontend>(frontend: &F, tokens: &[Token], limits: &FixLimits) -> FixResult {
    let wall = Instant::now();
    let cpu = thread_cpu_time();
    let mut result = run(frontend, tokens, limits, wall);
    result.timing = FixTiming {
        elapsed_ms: wall.elapsed().as_secs_f64() * 1e3,
        cpu_ms: (thread_cpu_time().saturating_sub(cpu)).as_secs_f64() * 1e3,
    };
    result
}

fn run<F: Frontend>(frontend: &F, tokens: &[Token], limits: &FixLimits, start: Instant) -> FixResult {
    let g = frontend.grammar();
    let cap = limits.cap_for(tokens.len());
    let mut stats = FixStats {
        tokens: tokens.len(),
        cap,
        ..FixStats::default()
    };
    let graph = match ModGraph::build(tokens, g) {
        Ok(m) => m,
        Err(e) => return FixResult::failed(FixStatus::InvalidInput, stats, Some(e.to_string())),
    };
    let mut reach = match ReachState::new(&graph, g, cap) {
        Ok(r) => r,
        Err(e) => return FixResult::failed(FixStatus::InternalError, stats, Some(e.to_string())),
    };
    let rules = frontend.rules(tokens);
    let deadline = limits.time_limit.map(|d| start + d);
    let mut memo = MemoTable::new().with_limits(CheckLimits {
        memory_bytes: limits.memory_bytes,
        deadline,
        check_every: limits.check_every,
    });

    let outcome = loop {
        let over = |r: &ReachState<'_>| -> Option<FixStatus> {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Some(FixStatus::TimeLimit);
            }
            if limits.memory_bytes.is_some_and(|m| r.approx_bytes() + memo.approx_bytes() > m) {
                return Some(FixStatus::MemoryLimit);
            }
            None
        };
        if let Some(s) = over(&reach) {
            break Err((s, None));
        }
        let mut stop = None;
        let root = reach.next_root_edge_checked(|r| {
            stop = over(r);
            stop.is_some()
        });
        let root = match root {
            Ok(Some(root)) => root,
            Ok(None) => break Err((FixStatus::NoFixWithinCap, None)),
            Err(()) => break Err((stop.unwrap_or(FixStatus::TimeLimit), None)),
        };
        stats.root_edges += 1;
        log::debug!("root edge of weight {}", reach.edge(root).weight);
        memo.set_external_bytes(reach.approx_bytes());
        match first_passing(&reach, &rules, root, &mut memo) {
            Ok(Some((_, witness))) => break Ok((root, witness)),
            Ok(None) => continue,
            Err(CheckError::TimeLimit) => break Err((FixStatus::TimeLimit, None)),
            Err(CheckError::MemoryLimit { .. }) => break Err((FixStatus::MemoryLimit, None)),
            Err(e @ CheckError::RulePanic { .. }) => break Err((FixStatus::InternalError, Some(e.to_string()))),
        }
    };

    let rs = reach.stats();
    stats.reach_edges = rs.edges;
    stats.reach_expansions = rs.expansions;
    stats.dequeued = rs.dequeued;
    let ms = memo.stats();
    stats.memo_entries = ms.entries;
    stats.memo_values = ms.stored_values;
    stats.rule_invocations = ms.rule_invocations;

    let (root, witness) = match outcome {
        Ok(found) => found,
        Err((status, message)) => return FixResult::failed(status, stats, message),
    };
    let weight = reach.edge(root).weight;
    let (fixed, edits) = match construct_result(&reach, &witness) {
        Ok(r) => r,
        Err(e) => return FixResult::failed(FixStatus::InternalError, stats, Some(e)),
    };
    if edits.len() != weight as usize {
        return FixResult::failed(
            FixStatus::InternalError,
            stats,
            Some(format!("edit script has {} edits for a root edge of weight {weight}", edits.len())),
        );
    }
    let symbols: Vec<SymbolId> = fixed.iter().map(|t| t.terminal).collect();
    if !g.derives(&symbols) {
        return FixResult::failed(FixStatus::InternalError, stats, Some("fixed program does not parse".into()));
    }
    let verdict = frontend.check_compiles(&fixed);
    if !verdict.ok {
        return FixResult::failed(
            FixStatus::InternalError,
            stats,
            Some(format!("fixed program rejected by the reference checker: {verdict}")),
        );
    }
    FixResult {
        status: FixStatus::Fixed,
        weight: Some(weight),
        fixed,
        edits,
        stats,
        timing: FixTiming::default(),
        message: None,
    }
}

/// Walks a witness left to right and emits the fixed tokens and the edits
/// that produce them.
pub fn construct_result(reach: &ReachState<'_>, witness: &Witness) -> Result<(Vec<Token>, EditScript), String> {
    struct Walk<'r, 'a> {
        reach: &'r ReachState<'a>,
        at: usize,
        out: Vec<Token>,
        edits: Vec<EditOp>,
    }
    impl Walk<'_, '_> {
        fn delete_to(&mut self, to: usize) {
            let tokens = self.reach.graph().tokens();
            while self.at < to {
                self.edits.push(EditOp {
                    pos: self.at,
                    op: Op::Delete,
                    token: tokens[self.at].lexeme.clone(),
                    terminal: None,
                });
                self.at += 1;
            }
        }

        fn emit(&mut self, terminal: SymbolId, lexeme: &str) {
            self.out.push(Token {
                terminal,
                lexeme: lexeme.to_string(),
                position: self.out.len(),
            });
        }

        fn visit(&mut self, w: &Witness) -> Result<(), String> {
            let edge = self.reach.edge(w.edge());
            let start = self.at;
            match w {
                Witness::Terminal {
                    mod_edge,
                    lead,
                    trail,
                    lexeme,
                    ..
                } => {
                    let me = self.reach.graph().edge(*mod_edge);
                    if me.from < *lead as usize || me.from - *lead as usize != self.at {
                        return Err(format!("terminal leaf does not start at vertex {}", self.at));
                    }
                    self.delete_to(me.from);
                    let symbol = me.symbol.ok_or("deletion edge in a witness")?;
                    match me.kind {
                        EdgeKind::Original => {
                            let t = &self.reach.graph().tokens()[me.from];
                            self.emit(t.terminal, &t.lexeme.clone());
                        }
                        EdgeKind::Insertion => {
                            self.edits.push(EditOp {
                                pos: me.from,
                                op: Op::Insert,
                                token: lexeme.clone(),
                                terminal: Some(symbol),
                            });
                            self.emit(symbol, lexeme);
                        }
                        EdgeKind::Update => {
                            self.edits.push(EditOp {
                                pos: me.from,
                                op: Op::Update,
                                token: lexeme.clone(),
                                terminal: Some(symbol),
                            });
                            self.emit(symbol, lexeme);
                        }
                        EdgeKind::Deletion => return Err("deletion edge in a witness".into()),
                    }
                    self.at = me.to;
                    self.delete_to(me.to + *trail as usize);
                }
                Witness::Epsilon { .. } => {
                    if edge.from != self.at {
                        return Err(format!("empty leaf does not start at vertex {}", self.at));
                    }
                    self.delete_to(edge.to);
                }
                Witness::Unary { child, .. } => self.visit(child)?,
                Witness::Binary { left, right, .. } => {
                    self.visit(left)?;
                    self.visit(right)?;
                }
            }
            if start != edge.from || self.at != edge.to {
                return Err(format!(
                    "witness for edge {:?} covers {start}..{} instead of {}..{}",
                    w.edge(),
                    self.at,
                    edge.from,
                    edge.to
                ));
            }
            Ok(())
        }
    }
    let mut walk = Walk {
        reach,
        at: 0,
        out: Vec::new(),
        edits: Vec::new(),
    };
    walk.visit(witness)?;
    if walk.at != reach.graph().last_vertex() {
        return Err("witness does not cover the input".into());
    }
    Ok((walk.out, EditScript(walk.edits)))
}
