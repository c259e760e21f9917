//! A single-assignment language over two variable types.
//!
//! A program is `ID = ID ;`; it compiles when both identifiers are declared
//! in the environment with the same type. Environment lines read
//! `var x : A;`.

use std::rc::Rc;

use crate::attrcheck::{Binarized, SourceRules, TerminalSource};
use crate::grammar::{Grammar, Production, SymbolId};
use crate::langs::{fresh_name, lex_with_grammar, CheckOutcome, EnvError, Frontend, LexError};
use crate::modgraph::Token;

pub const GRAMMAR: &str = "\
start S;
terminal ID : identifier;
S -> ID '=' ID ';'
";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TinyEnv {
    /// Declaration order is kept.
    pub vars: Vec<(String, String)>,
}

impl TinyEnv {
    pub fn parse(text: &str) -> Result<TinyEnv, EnvError> {
        let mut vars: Vec<(String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split("//").next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| EnvError {
                line: idx + 1,
                message: m.to_string(),
            };
            let body = line
                .strip_prefix("var ")
                .and_then(|r| r.trim_end().strip_suffix(';'))
                .ok_or_else(|| err("expected `var NAME : TYPE;`"))?;
            let (name, ty) = body.split_once(':').ok_or_else(|| err("missing `:`"))?;
            let (name, ty) = (name.trim(), ty.trim());
            if !is_ident(name) || !is_ident(ty) {
                return Err(err("names must be identifiers"));
            }
            if vars.iter().any(|(n, _)| n == name) {
                return Err(err(&format!("`{name}` declared twice")));
            }
            vars.push((name.to_string(), ty.to_string()));
        }
        Ok(TinyEnv { vars })
    }

    pub fn type_of(&self, name: &str) -> Option<&str> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    pub fn to_text(&self) -> String {
        self.vars.iter().map(|(n, t)| format!("var {n} : {t};\n")).collect()
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub struct TinyAssign {
    env: TinyEnv,
    grammar: Grammar,
    id: SymbolId,
}

impl TinyAssign {
    pub fn new(env: TinyEnv) -> TinyAssign {
        let grammar = Grammar::parse(GRAMMAR).expect("built-in grammar").normalize();
        let id = grammar.lookup("ID").unwrap();
        TinyAssign { env, grammar, id }
    }

    pub fn env(&self) -> &TinyEnv {
        &self.env
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TinyValue {
    Unit,
    Type(Rc<str>),
}

pub struct TinyRules<'a> {
    lang: &'a TinyAssign,
}

impl SourceRules for TinyRules<'_> {
    type Value = TinyValue;

    fn terminal(&self, terminal: SymbolId, source: TerminalSource<'_>, _: &TinyValue) -> Vec<(TinyValue, String)> {
        if terminal != self.lang.id {
            let lexeme = self.lang.grammar.symbol(terminal).fixed_lexeme().unwrap();
            return vec![(TinyValue::Unit, lexeme.to_string())];
        }
        let vars = &self.lang.env.vars;
        match source {
            TerminalSource::Original(name) => match self.lang.env.type_of(name) {
                Some(t) => vec![(TinyValue::Type(t.into()), name.to_string())],
                None => vec![],
            },
            TerminalSource::Inserted | TerminalSource::Replaced { .. } => {
                let skip = match source {
                    TerminalSource::Replaced {
                        previous,
                        same_class: true,
                    } => Some(previous),
                    _ => None,
                };
                vars.iter()
                    .rev()
                    .filter(|(n, _)| Some(n.as_str()) != skip)
                    .map(|(n, t)| (TinyValue::Type(t.as_str().into()), n.clone()))
                    .collect()
            }
        }
    }

    fn inherited(&self, _: &Production, _: usize, _: &TinyValue, _: &[TinyValue]) -> Option<TinyValue> {
        Some(TinyValue::Unit)
    }

    fn synthesized(&self, _: &Production, _: &TinyValue, children: &[TinyValue]) -> Option<TinyValue> {
        match children {
            [TinyValue::Type(a), _, TinyValue::Type(b), _] => (a == b).then_some(TinyValue::Unit),
            _ => None,
        }
    }

    fn root(&self) -> TinyValue {
        TinyValue::Unit
    }
}

impl Frontend for TinyAssign {
    type Rules<'a> = Binarized<'a, TinyRules<'a>>;

    fn name(&self) -> &'static str {
        "tiny-assign"
    }

    fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    fn lex(&self, text: &str) -> Result<Vec<Token>, LexError> {
        lex_with_grammar(&self.grammar, text)
    }

    fn rules<'a>(&'a self, _tokens: &[Token]) -> Self::Rules<'a> {
        Binarized::new(&self.grammar, TinyRules { lang: self })
    }

    fn check_compiles(&self, tokens: &[Token]) -> CheckOutcome {
        // the first type error, reported only when the statement parses
        let mut semantic: Option<(usize, String)> = None;
        let shape = ["ID", "=", "ID", ";"];
        for (i, want) in shape.iter().enumerate() {
            let dead = |at: usize, msg: String, semantic: &Option<(usize, String)>| {
                CheckOutcome::reject(semantic.as_ref().map_or(at, |(s, _)| at.min(*s)), msg)
            };
            let Some(t) = tokens.get(i) else {
                return dead(tokens.len(), format!("expected `{want}` at end of input"), &semantic);
            };
            let fits = if *want == "ID" {
                t.terminal == self.id
            } else {
                t.lexeme == *want && t.terminal != self.id
            };
            if !fits {
                return dead(i, format!("expected `{want}`, found `{}`", t.lexeme), &semantic);
            }
            if semantic.is_some() || *want != "ID" {
                continue;
            }
            if self.env.type_of(&t.lexeme).is_none() {
                semantic = Some((i, format!("`{}` is not declared", t.lexeme)));
            } else if i == 2 {
                let (l, r) = (&tokens[0].lexeme, &t.lexeme);
                if self.env.type_of(l) != self.env.type_of(r) {
                    semantic = Some((2, format!("cannot assign `{r}` to `{l}`: types differ")));
                }
            }
        }
        if tokens.len() > 4 {
            let at = semantic.as_ref().map_or(4, |(s, _)| *s);
            return CheckOutcome::reject(at, "trailing tokens");
        }
        match semantic {
            Some((at, msg)) => CheckOutcome::reject(at, msg),
            None => CheckOutcome::accept(4),
        }
    }

    fn identifier_alphabet(&self, tokens: &[Token]) -> Vec<String> {
        let mut names: Vec<String> = self.env.vars.iter().rev().map(|(n, _)| n.clone()).collect();
        for t in tokens.iter().filter(|t| t.terminal == self.id) {
            if !names.contains(&t.lexeme) {
                names.push(t.lexeme.clone());
            }
        }
        let fresh = fresh_name("fresh", names.iter().map(String::as_str));
        names.push(fresh);
        names
    }
}
