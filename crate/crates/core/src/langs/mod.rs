//! Language frontends: lexer, grammar, attribute rules, and an independent
//! reference checker per language.

pub mod minijava;
pub mod tiny_assign;

use std::fmt;

use thiserror::Error;

use crate::attrcheck::AttributeRules;
use crate::grammar::{Grammar, SymbolId, TerminalClass};
use crate::modgraph::Token;

pub use minijava::MiniJava;
pub use tiny_assign::TinyAssign;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot lex `{found}` at {line}:{column}")]
pub struct LexError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub found: char,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("environment line {line}: {message}")]
pub struct EnvError {
    pub line: usize,
    pub message: String,
}

/// Verdict of a reference checker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub ok: bool,
    pub diagnostic: Option<String>,
    /// Index of the first token at which the input stops being a prefix of
    /// any valid program, or the token count when every prefix is viable.
    /// Checkers may report a later index than the true one, never an
    /// earlier one.
    pub dead_at: usize,
}

impl CheckOutcome {
    pub fn accept(len: usize) -> Self {
        CheckOutcome {
            ok: true,
            diagnostic: None,
            dead_at: len,
        }
    }

    pub fn reject(dead_at: usize, diagnostic: impl Into<String>) -> Self {
        CheckOutcome {
            ok: false,
            diagnostic: Some(diagnostic.into()),
            dead_at,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.ok, &self.diagnostic) {
            (true, _) => write!(f, "ok"),
            (false, Some(d)) => write!(f, "error at token {}: {d}", self.dead_at),
            (false, None) => write!(f, "error at token {}", self.dead_at),
        }
    }
}

pub trait Frontend: Sync {
    type Rules<'a>: AttributeRules
    where
        Self: 'a;

    fn name(&self) -> &'static str;

    /// The normalized grammar; token terminals refer to its symbols.
    fn grammar(&self) -> &Grammar;

    fn lex(&self, text: &str) -> Result<Vec<Token>, LexError>;

    /// Attribute rules for one job. The token stream contributes the program
    /// identifiers that selection may draw on.
    fn rules<'a>(&'a self, tokens: &[Token]) -> Self::Rules<'a>;

    fn check_compiles(&self, tokens: &[Token]) -> CheckOutcome;

    /// Every spelling an identifier-class token may take in a fix of
    /// `tokens`, in a fixed order.
    fn identifier_alphabet(&self, tokens: &[Token]) -> Vec<String>;

    fn literal_alphabet(&self) -> Vec<String> {
        vec!["0".to_string()]
    }
}

/// Longest-match lexer over the fixed lexemes of a grammar. Words that are
/// not keywords become identifier-class tokens; digit runs become
/// literal-class tokens. Whitespace and `//` line comments are skipped.
pub fn lex_with_grammar(g: &Grammar, text: &str) -> Result<Vec<Token>, LexError> {
    let mut punct: Vec<(&str, SymbolId)> = Vec::new();
    let mut ident = None;
    let mut literal = None;
    for s in g.terminals() {
        match (s.class(), s.fixed_lexeme()) {
            (Some(TerminalClass::Fixed), Some(l)) if !is_word(l) => punct.push((l, s.id)),
            (Some(TerminalClass::Identifier), _) => ident = ident.or(Some(s.id)),
            (Some(TerminalClass::Literal), _) => literal = literal.or(Some(s.id)),
            _ => {}
        }
    }
    punct.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));

    let mut out = Vec::new();
    let mut line = 1;
    let mut line_start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    let error = |i: usize, line: usize, line_start: usize| {
        let found = text[i..].chars().next().unwrap_or('\0');
        LexError {
            offset: i,
            line,
            column: text[line_start..i].chars().count() + 1,
            found,
        }
    };
    while i < text.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if text[i..].starts_with("//") {
            while i < text.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < text.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let terminal = match g.fixed_terminal(word) {
                Some(t) => t,
                None => ident.ok_or_else(|| error(start, line, line_start))?,
            };
            out.push(Token {
                terminal,
                lexeme: word.to_string(),
                position: out.len(),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < text.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let terminal = literal.ok_or_else(|| error(start, line, line_start))?;
            out.push(Token {
                terminal,
                lexeme: text[start..i].to_string(),
                position: out.len(),
            });
            continue;
        }
        match punct.iter().find(|(l, _)| text[i..].starts_with(l)) {
            Some(&(l, terminal)) => {
                out.push(Token {
                    terminal,
                    lexeme: l.to_string(),
                    position: out.len(),
                });
                i += l.len();
            }
            None => return Err(error(i, line, line_start)),
        }
    }
    Ok(out)
}

fn is_word(l: &str) -> bool {
    l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Builds a token for `lexeme` without lexing, classifying it by the
/// grammar's fixed lexemes first.
pub fn token_for(g: &Grammar, lexeme: &str, position: usize) -> Option<Token> {
    let terminal = match g.fixed_terminal(lexeme) {
        Some(t) => t,
        None => {
            let class = if lexeme.chars().all(|c| c.is_ascii_digit()) {
                TerminalClass::Literal
            } else {
                TerminalClass::Identifier
            };
            g.terminals().find(|s| s.class() == Some(class))?.id
        }
    };
    Some(Token {
        terminal,
        lexeme: lexeme.to_string(),
        position,
    })
}

/// Renumbers token positions after an edit.
pub fn renumber(tokens: &mut [Token]) {
    for (i, t) in tokens.iter_mut().enumerate() {
        t.position = i;
    }
}

/// Space-separated lexemes.
pub fn spell(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.lexeme.as_str()).collect::<Vec<_>>().join(" ")
}

/// A name built from `base` that avoids every name in `taken`.
pub fn fresh_name<'a>(base: &str, taken: impl IntoIterator<Item = &'a str> + Clone) -> String {
    let clash = |n: &str| taken.clone().into_iter().any(|t| t == n);
    if !clash(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|n| !clash(n))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_name_skips_taken() {
        assert_eq!(fresh_name("fresh", ["a", "b"]), "fresh");
        assert_eq!(fresh_name("fresh", ["fresh", "fresh1"]), "fresh2");
    }
}
