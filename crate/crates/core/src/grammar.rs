//! Context-free grammars and their binarized normal form.
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! start S;
//! terminal ID : identifier;
//! terminal NUM : literal;
//! S -> ID '=' ID ';'
//! B -> .
//! ```
//!
//! Quoted strings in a right-hand side implicitly declare fixed-lexeme
//! terminals. `|` separates alternatives of one left-hand side.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProdId(pub u32);

impl ProdId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TerminalClass {
    /// Keyword or punctuation with exactly one spelling.
    Fixed,
    /// Matches any identifier lexeme.
    Identifier,
    /// Matches any literal lexeme of the class.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Nonterminal,
    Terminal(TerminalClass),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub id: SymbolId,
    pub name: String,
    pub kind: SymbolKind,
    /// Introduced by binarization.
    pub fresh: bool,
}

impl Symbol {
    pub fn is_terminal(&self) -> bool {
        matches!(self.kind, SymbolKind::Terminal(_))
    }

    pub fn class(&self) -> Option<TerminalClass> {
        match self.kind {
            SymbolKind::Terminal(c) => Some(c),
            SymbolKind::Nonterminal => None,
        }
    }

    /// The spelling of a fixed terminal (`'='` is stored with its quotes).
    pub fn fixed_lexeme(&self) -> Option<&str> {
        match self.kind {
            SymbolKind::Terminal(TerminalClass::Fixed) => {
                Some(self.name.trim_start_matches('\'').trim_end_matches('\''))
            }
            _ => None,
        }
    }
}

/// Where a production came from: the source production handle and the index
/// of the first source right-hand-side symbol the production covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Origin {
    pub production: ProdId,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Production {
    pub id: ProdId,
    pub lhs: SymbolId,
    pub rhs: Vec<SymbolId>,
    pub origin: Origin,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undefined symbol `{name}` at line {line}")]
    UndefinedSymbol { name: String, line: usize },
    #[error("duplicate production at line {line}")]
    DuplicateProduction { line: usize },
    #[error("no start symbol declared")]
    NoStart,
    #[error("start symbol `{0}` has no productions")]
    StartNotNonterminal(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
}

/// An immutable context-free grammar.
///
/// `sources` holds the productions as written in the grammar document; for an
/// un-normalized grammar it equals `productions`. Normalized productions point
/// back into `sources` through their [`Origin`].
#[derive(Clone, Debug)]
pub struct Grammar {
    symbols: Vec<Symbol>,
    productions: Vec<Production>,
    sources: Vec<Production>,
    start: SymbolId,
    by_lhs: Vec<Vec<ProdId>>,
    by_first: Vec<Vec<ProdId>>,
    by_second: Vec<Vec<ProdId>>,
    by_name: HashMap<String, SymbolId>,
}

impl Grammar {
    pub fn parse(text: &str) -> Result<Grammar, GrammarError> {
        parse_grammar(text)
    }

    fn build(
        symbols: Vec<Symbol>,
        productions: Vec<Production>,
        sources: Vec<Production>,
        start: SymbolId,
    ) -> Grammar {
        let n = symbols.len();
        let mut by_lhs = vec![Vec::new(); n];
        let mut by_first = vec![Vec::new(); n];
        let mut by_second = vec![Vec::new(); n];
        for p in &productions {
            by_lhs[p.lhs.index()].push(p.id);
            if let Some(first) = p.rhs.first() {
                by_first[first.index()].push(p.id);
            }
            if let Some(second) = p.rhs.get(1) {
                by_second[second.index()].push(p.id);
            }
        }
        let by_name = symbols
            .iter()
            .map(|s| (s.name.clone(), s.id))
            .collect();
        Grammar {
            symbols,
            productions,
            sources,
            start,
            by_lhs,
            by_first,
            by_second,
            by_name,
        }
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    /// Looks up a fixed terminal by its bare spelling (`=` rather than `'='`).
    pub fn fixed_terminal(&self, lexeme: &str) -> Option<SymbolId> {
        self.lookup(&format!("'{lexeme}'"))
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn production(&self, id: ProdId) -> &Production {
        &self.productions[id.index()]
    }

    pub fn sources(&self) -> &[Production] {
        &self.sources
    }

    pub fn source(&self, id: ProdId) -> &Production {
        &self.sources[id.index()]
    }

    pub fn by_lhs(&self, sym: SymbolId) -> &[ProdId] {
        &self.by_lhs[sym.index()]
    }

    pub fn by_first(&self, sym: SymbolId) -> &[ProdId] {
        &self.by_first[sym.index()]
    }

    pub fn by_second(&self, sym: SymbolId) -> &[ProdId] {
        &self.by_second[sym.index()]
    }

    /// Terminal vocabulary, class terminals counted once.
    pub fn terminals(&self) -> impl Iterator<Item = &Symbol> + '_ {
        self.symbols.iter().filter(|s| s.is_terminal())
    }

    pub fn is_normalized(&self) -> bool {
        self.productions.iter().all(|p| p.rhs.len() <= 2)
    }

    /// Binarizes every production left to right:
    /// `A -> X1 X2 ... Xk` becomes `A -> X1 A1`, `A1 -> X2 A2`, ...,
    /// `A(k-2) -> X(k-1) Xk`.
    pub fn normalize(&self) -> Grammar {
        let mut symbols = self.symbols.clone();
        let mut productions: Vec<Production> = Vec::new();
        for p in &self.productions {
            if p.rhs.len() <= 2 {
                productions.push(Production {
                    id: ProdId(productions.len() as u32),
                    ..p.clone()
                });
                continue;
            }
            let mut lhs = p.lhs;
            let k = p.rhs.len();
            for (offset, sym) in p.rhs[..k - 2].iter().enumerate() {
                let fresh = SymbolId(symbols.len() as u32);
                symbols.push(Symbol {
                    id: fresh,
                    name: format!(
                        "{}~{}.{}",
                        self.symbol(p.lhs).name,
                        p.origin.production.0,
                        p.origin.position + offset + 1
                    ),
                    kind: SymbolKind::Nonterminal,
                    fresh: true,
                });
                productions.push(Production {
                    id: ProdId(productions.len() as u32),
                    lhs,
                    rhs: vec![*sym, fresh],
                    origin: Origin {
                        production: p.origin.production,
                        position: p.origin.position + offset,
                    },
                });
                lhs = fresh;
            }
            productions.push(Production {
                id: ProdId(productions.len() as u32),
                lhs,
                rhs: p.rhs[k - 2..].to_vec(),
                origin: Origin {
                    production: p.origin.production,
                    position: p.origin.position + k - 2,
                },
            });
        }
        Grammar::build(symbols, productions, self.sources.clone(), self.start)
    }

    /// Source right-hand-side length of the production a normalized
    /// production derives from.
    pub fn source_len(&self, prod: &Production) -> usize {
        self.source(prod.origin.production).rhs.len()
    }

    /// Chart recognizer over a normalized grammar. Only terminal symbols
    /// matter; lexemes are ignored.
    pub fn derives(&self, input: &[SymbolId]) -> bool {
        assert!(self.is_normalized(), "derives requires a normalized grammar");
        let n = input.len();
        let nsym = self.symbols.len();
        let span = |i: usize, j: usize| (i * (n + 1) + j) * nsym;
        // chart[span(i, j) + s]: s derives input[i..j]
        let mut chart = vec![false; (n + 1) * (n + 1) * nsym];
        let mut found: Vec<Vec<SymbolId>> = vec![Vec::new(); (n + 1) * (n + 1)];
        let mut work = Vec::new();
        for len in 0..=n {
            for i in 0..=(n - len) {
                let j = i + len;
                let here = span(i, j);
                let mark = |chart: &mut Vec<bool>, work: &mut Vec<SymbolId>, s: SymbolId| {
                    if !chart[here + s.index()] {
                        chart[here + s.index()] = true;
                        work.push(s);
                    }
                };
                if len == 0 {
                    for p in self.productions.iter().filter(|p| p.rhs.is_empty()) {
                        mark(&mut chart, &mut work, p.lhs);
                    }
                }
                if len == 1 {
                    mark(&mut chart, &mut work, input[i]);
                }
                for m in (i + 1)..j {
                    for &b in &found[i * (n + 1) + m] {
                        for &pid in &self.by_first[b.index()] {
                            let p = self.production(pid);
                            if p.rhs.len() == 2 && chart[span(m, j) + p.rhs[1].index()] {
                                mark(&mut chart, &mut work, p.lhs);
                            }
                        }
                    }
                }
                // unary steps and splits with an empty side
                while let Some(x) = work.pop() {
                    found[i * (n + 1) + j].push(x);
                    for &pid in &self.by_first[x.index()] {
                        let p = self.production(pid);
                        let ok = match p.rhs.as_slice() {
                            [_] => true,
                            [_, c] => chart[span(j, j) + c.index()],
                            _ => false,
                        };
                        if ok {
                            mark(&mut chart, &mut work, p.lhs);
                        }
                    }
                    for &pid in &self.by_second[x.index()] {
                        let p = self.production(pid);
                        if chart[span(i, i) + p.rhs[0].index()] {
                            mark(&mut chart, &mut work, p.lhs);
                        }
                    }
                }
            }
        }
        chart[span(0, n) + self.start.index()]
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start {};", self.symbol(self.start).name)?;
        for p in &self.productions {
            write!(f, "{} ->", self.symbol(p.lhs).name)?;
            if p.rhs.is_empty() {
                write!(f, " .")?;
            }
            for s in &p.rhs {
                write!(f, " {}", self.symbol(*s).name)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Lexeme {
    Name(String),
    Quoted(String),
    Arrow,
    Colon,
    Semi,
    Dot,
    Bar,
}

fn lex_line(line: &str, lineno: usize) -> Result<Vec<(usize, Lexeme)>, GrammarError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: &str| GrammarError::Syntax {
        line: lineno,
        column: col + 1,
        message: msg.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((i, Lexeme::Arrow));
                i += 2;
            }
            ':' => {
                out.push((i, Lexeme::Colon));
                i += 1;
            }
            ';' => {
                out.push((i, Lexeme::Semi));
                i += 1;
            }
            '.' => {
                out.push((i, Lexeme::Dot));
                i += 1;
            }
            '|' => {
                out.push((i, Lexeme::Bar));
                i += 1;
            }
            '\'' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                while i < chars.len() && chars[i] != '\'' {
                    s.push(chars[i]);
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(err(start, "unterminated quoted terminal"));
                }
                if s.is_empty() {
                    return Err(err(start, "empty quoted terminal"));
                }
                i += 1;
                out.push((start, Lexeme::Quoted(s)));
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Lexeme::Name(chars[start..i].iter().collect())));
            }
            _ => return Err(err(i, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

enum RhsItem {
    Name(String, usize),
    Quoted(String),
}

fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut start: Option<(String, usize)> = None;
    let mut class_terminals: Vec<(String, TerminalClass)> = Vec::new();
    let mut rules: Vec<(String, Vec<RhsItem>, usize)> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let lexemes = lex_line(line, lineno)?;
        if lexemes.is_empty() {
            continue;
        }
        let syntax = |col: usize, msg: &str| GrammarError::Syntax {
            line: lineno,
            column: col + 1,
            message: msg.to_string(),
        };
        match &lexemes[0].1 {
            Lexeme::Name(kw) if kw == "start" && !matches!(lexemes.get(1), Some((_, Lexeme::Arrow))) => {
                match lexemes.as_slice() {
                    [_, (_, Lexeme::Name(s)), (_, Lexeme::Semi)] => {
                        start = Some((s.clone(), lineno));
                    }
                    _ => return Err(syntax(lexemes[0].0, "expected `start NAME;`")),
                }
            }
            Lexeme::Name(kw) if kw == "terminal" && !matches!(lexemes.get(1), Some((_, Lexeme::Arrow))) => {
                match lexemes.as_slice() {
                    [_, (_, Lexeme::Name(name)), (_, Lexeme::Colon), (col, Lexeme::Name(class)), (_, Lexeme::Semi)] => {
                        let class = match class.as_str() {
                            "identifier" => TerminalClass::Identifier,
                            "literal" => TerminalClass::Literal,
                            _ => {
                                return Err(syntax(*col, "terminal class must be `identifier` or `literal`"))
                            }
                        };
                        if class_terminals.iter().any(|(n, _)| n == name) {
                            return Err(GrammarError::DuplicateSymbol(name.clone()));
                        }
                        class_terminals.push((name.clone(), class));
                    }
                    _ => {
                        return Err(syntax(lexemes[0].0, "expected `terminal NAME : identifier|literal;`"))
                    }
                }
            }
            Lexeme::Name(lhs) => {
                match lexemes.get(1) {
                    Some((_, Lexeme::Arrow)) => {}
                    Some((col, _)) => return Err(syntax(*col, "expected `->`")),
                    None => return Err(syntax(line.len(), "expected `->`")),
                }
                let mut alt: Vec<RhsItem> = Vec::new();
                let mut epsilon = false;
                let mut rest = &lexemes[2..];
                // optional trailing ';'
                if let Some((_, Lexeme::Semi)) = rest.last() {
                    rest = &rest[..rest.len() - 1];
                }
                let mut finish =
                    |alt: &mut Vec<RhsItem>, epsilon: &mut bool, col: usize| -> Result<(), GrammarError> {
                        if alt.is_empty() && !*epsilon {
                            return Err(syntax(col, "empty alternative; write `.` for epsilon"));
                        }
                        rules.push((lhs.clone(), std::mem::take(alt), lineno));
                        *epsilon = false;
                        Ok(())
                    };
                let mut last_col = lexemes[1].0;
                for (col, lx) in rest {
                    last_col = *col;
                    match lx {
                        Lexeme::Name(n) => {
                            if epsilon {
                                return Err(syntax(*col, "`.` must stand alone"));
                            }
                            alt.push(RhsItem::Name(n.clone(), lineno));
                        }
                        Lexeme::Quoted(q) => {
                            if epsilon {
                                return Err(syntax(*col, "`.` must stand alone"));
                            }
                            alt.push(RhsItem::Quoted(q.clone()));
                        }
                        Lexeme::Dot => {
                            if !alt.is_empty() || epsilon {
                                return Err(syntax(*col, "`.` must stand alone"));
                            }
                            epsilon = true;
                        }
                        Lexeme::Bar => finish(&mut alt, &mut epsilon, *col)?,
                        _ => return Err(syntax(*col, "unexpected token in production")),
                    }
                }
                finish(&mut alt, &mut epsilon, last_col + 1)?;
            }
            _ => return Err(syntax(lexemes[0].0, "expected declaration or production")),
        }
    }

    let (start_name, _) = start.ok_or(GrammarError::NoStart)?;

    let mut symbols: Vec<Symbol> = Vec::new();
    let mut by_name: HashMap<String, SymbolId> = HashMap::new();
    let mut intern = |name: &str, kind: SymbolKind, symbols: &mut Vec<Symbol>| -> SymbolId {
        if let Some(id) = by_name.get(name) {
            return *id;
        }
        let id = SymbolId(symbols.len() as u32);
        symbols.push(Symbol {
            id,
            name: name.to_string(),
            kind,
            fresh: false,
        });
        by_name.insert(name.to_string(), id);
        id
    };

    // Nonterminals first, in order of first definition.
    let mut nonterminals: Vec<&str> = Vec::new();
    for (lhs, _, _) in &rules {
        if !nonterminals.contains(&lhs.as_str()) {
            nonterminals.push(lhs);
        }
    }
    for (name, _) in &class_terminals {
        if nonterminals.contains(&name.as_str()) {
            return Err(GrammarError::DuplicateSymbol(name.clone()));
        }
    }
    for nt in &nonterminals {
        intern(nt, SymbolKind::Nonterminal, &mut symbols);
    }
    for (name, class) in &class_terminals {
        intern(name, SymbolKind::Terminal(*class), &mut symbols);
    }

    let mut productions = Vec::new();
    let mut seen: HashSet<(SymbolId, Vec<SymbolId>)> = HashSet::new();
    for (lhs, items, lineno) in &rules {
        let lhs_id = intern(lhs, SymbolKind::Nonterminal, &mut symbols);
        let mut rhs = Vec::new();
        for item in items {
            let id = match item {
                RhsItem::Quoted(q) => intern(
                    &format!("'{q}'"),
                    SymbolKind::Terminal(TerminalClass::Fixed),
                    &mut symbols,
                ),
                RhsItem::Name(n, line) => match by_name_lookup(&symbols, n) {
                    Some(id) => id,
                    None => {
                        return Err(GrammarError::UndefinedSymbol {
                            name: n.clone(),
                            line: *line,
                        })
                    }
                },
            };
            rhs.push(id);
        }
        if !seen.insert((lhs_id, rhs.clone())) {
            return Err(GrammarError::DuplicateProduction { line: *lineno });
        }
        let id = ProdId(productions.len() as u32);
        productions.push(Production {
            id,
            lhs: lhs_id,
            rhs,
            origin: Origin {
                production: id,
                position: 0,
            },
        });
    }

    let start = match by_name_lookup(&symbols, &start_name) {
        Some(id) if symbols[id.index()].kind == SymbolKind::Nonterminal => id,
        _ => return Err(GrammarError::StartNotNonterminal(start_name)),
    };
    let sources = productions.clone();
    Ok(Grammar::build(symbols, productions, sources, start))
}

fn by_name_lookup(symbols: &[Symbol], name: &str) -> Option<SymbolId> {
    symbols.iter().find(|s| s.name == name).map(|s| s.id)
}
