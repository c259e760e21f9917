//! Reference checker: a predictive recursive-descent parser that type-checks
//! each statement as soon as it is complete.
//!
//! Syntax errors are reported at the offending token. Type errors are
//! reported at the token that completes the enclosing statement (its `;`)
//! or condition (its `)`), where the prefix can no longer be repaired by
//! appending tokens.

use super::env::{MjEnv, Resolution, Ty, INT};
use super::MiniJava;
use crate::grammar::SymbolId;
use crate::langs::CheckOutcome;
use crate::modgraph::Token;

pub(super) fn check(lang: &MiniJava, tokens: &[Token]) -> CheckOutcome {
    let mut c = Checker {
        env: lang.env(),
        toks: tokens,
        at: 0,
        id: lang.ident_terminal(),
        int: lang.literal_terminal(),
        scope: lang.env().vars.iter().map(|(n, t)| (&**n, t.clone())).collect(),
        loop_depth: 0,
        type_error: None,
    };
    match c.body() {
        Ok(()) => CheckOutcome::accept(tokens.len()),
        Err(Failure { at, message }) => CheckOutcome::reject(at, message),
    }
}

struct Failure {
    at: usize,
    message: String,
}

type Parse<T> = Result<T, Failure>;

/// How a primary expression ended, which decides the statements it can
/// start.
enum Tail {
    Field(Option<Ty>),
    Call,
    Other,
}

struct Checker<'a> {
    env: &'a MjEnv,
    toks: &'a [Token],
    at: usize,
    id: SymbolId,
    int: SymbolId,
    scope: Vec<(&'a str, Ty)>,
    loop_depth: u32,
    /// First type error inside the statement being parsed.
    type_error: Option<String>,
}

impl<'a> Checker<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.at)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.at + k)
    }

    fn is_punct(&self, t: Option<&Token>, lexeme: &str) -> bool {
        matches!(t, Some(t) if t.terminal != self.id && t.terminal != self.int && t.lexeme == lexeme)
    }

    fn is_ident(&self, t: Option<&Token>) -> bool {
        matches!(t, Some(t) if t.terminal == self.id)
    }

    fn syntax(&self, expected: &str) -> Failure {
        let message = match self.peek() {
            Some(t) => format!("expected {expected}, found `{}`", t.lexeme),
            None => format!("expected {expected} at end of input"),
        };
        Failure { at: self.at, message }
    }

    fn expect(&mut self, lexeme: &str) -> Parse<usize> {
        if self.is_punct(self.peek(), lexeme) {
            self.at += 1;
            Ok(self.at - 1)
        } else {
            Err(self.syntax(&format!("`{lexeme}`")))
        }
    }

    fn ident(&mut self) -> Parse<&'a str> {
        if self.is_ident(self.peek()) {
            self.at += 1;
            Ok(&self.toks[self.at - 1].lexeme)
        } else {
            Err(self.syntax("an identifier"))
        }
    }

    fn fail_type(&mut self, message: impl Into<String>) -> Option<Ty> {
        if self.type_error.is_none() {
            self.type_error = Some(message.into());
        }
        None
    }

    /// Reports a pending type error at token `at`.
    fn settle(&mut self, at: usize) -> Parse<()> {
        match self.type_error.take() {
            Some(message) => Err(Failure { at, message }),
            None => Ok(()),
        }
    }

    fn lookup(&self, name: &str) -> Option<&Ty> {
        self.scope.iter().rev().find(|(n, _)| *n == name).map(|(_, t)| t)
    }

    fn subtype(&self, a: &Ty, b: &Ty) -> bool {
        self.env.classes.is_subtype(a, b)
    }

    fn body(&mut self) -> Parse<()> {
        while self.peek().is_some() {
            self.stmt()?;
        }
        Ok(())
    }

    fn block(&mut self, loop_body: bool) -> Parse<()> {
        self.expect("{")?;
        let mark = self.scope.len();
        if loop_body {
            self.loop_depth += 1;
        }
        while !self.is_punct(self.peek(), "}") {
            if self.peek().is_none() {
                return Err(self.syntax("`}`"));
            }
            self.stmt()?;
        }
        self.at += 1;
        if loop_body {
            self.loop_depth -= 1;
        }
        self.scope.truncate(mark);
        Ok(())
    }

    fn condition(&mut self) -> Parse<()> {
        self.expect("(")?;
        let t = self.expr()?;
        let close = self.expect(")")?;
        if let Some(t) = t {
            if t != Ty::Bool {
                self.fail_type(format!("condition has type {t}, expected boolean"));
            }
        }
        self.settle(close)
    }

    fn stmt(&mut self) -> Parse<()> {
        debug_assert!(self.type_error.is_none());
        let t = self.peek();
        if self.is_punct(t, "if") {
            self.at += 1;
            self.condition()?;
            self.block(false)?;
            self.expect("else")?;
            return self.block(false);
        }
        if self.is_punct(t, "while") {
            self.at += 1;
            self.condition()?;
            return self.block(true);
        }
        if self.is_punct(t, "break") {
            self.at += 1;
            let end = self.expect(";")?;
            if self.loop_depth == 0 {
                self.fail_type("`break` outside a loop");
            }
            return self.settle(end);
        }
        if self.is_punct(t, "return") {
            self.at += 1;
            let v = self.expr()?;
            let end = self.expect(";")?;
            let ret = &self.env.returns;
            if *ret == Ty::Void {
                self.fail_type("`return` in a void method");
            } else if let Some(v) = v {
                if !self.subtype(&v, ret) {
                    self.fail_type(format!("cannot return {v} as {ret}"));
                }
            }
            return self.settle(end);
        }
        if self.is_ident(t) && self.is_ident(self.peek_at(1)) {
            let ty_name = self.ident()?;
            let name = self.ident()?;
            let end = self.expect(";")?;
            let ty = if ty_name == INT {
                Some(Ty::Int)
            } else if self.env.classes.has_class(ty_name) {
                Some(Ty::Class(ty_name.into()))
            } else {
                self.fail_type(format!("unknown type `{ty_name}`"))
            };
            if self.env.is_reserved(name) {
                self.fail_type(format!("`{name}` cannot name a variable"));
            } else if self.lookup(name).is_some() {
                self.fail_type(format!("`{name}` is already declared"));
            }
            self.settle(end)?;
            self.scope.push((name, ty.unwrap()));
            return Ok(());
        }
        if self.is_ident(t) && self.is_punct(self.peek_at(1), "=") {
            let name = self.ident()?;
            self.at += 1;
            let v = self.expr()?;
            let end = self.expect(";")?;
            let target = match self.lookup(name) {
                Some(t) => Some(t.clone()),
                None => self.fail_type(format!("`{name}` is not declared")),
            };
            if let (Some(v), Some(target)) = (v, target) {
                if !self.subtype(&v, &target) {
                    self.fail_type(format!("cannot assign {v} to `{name}` of type {target}"));
                }
            }
            return self.settle(end);
        }
        let starts_prim = self.is_ident(t)
            || matches!(t, Some(t) if t.terminal == self.int)
            || ["null", "(", "new"].iter().any(|l| self.is_punct(t, l));
        if !starts_prim {
            return Err(self.syntax("a statement"));
        }
        let (_, tail) = self.prim()?;
        match tail {
            Tail::Field(field) if self.is_punct(self.peek(), "=") => {
                self.at += 1;
                let v = self.expr()?;
                let end = self.expect(";")?;
                if let (Some(v), Some(f)) = (v, field) {
                    if !self.subtype(&v, &f) {
                        self.fail_type(format!("cannot assign {v} to a field of type {f}"));
                    }
                }
                self.settle(end)
            }
            Tail::Call if self.is_punct(self.peek(), ";") => {
                let end = self.expect(";")?;
                self.settle(end)
            }
            Tail::Field(_) => Err(self.syntax("`=`, `.` or `(`")),
            Tail::Call => Err(self.syntax("`;` or `.`")),
            Tail::Other => Err(self.syntax("`.`")),
        }
    }

    fn expr(&mut self) -> Parse<Option<Ty>> {
        let (a, _) = self.prim()?;
        let a = self.non_void(a);
        let op = ["==", "<", "+"].into_iter().find(|op| self.is_punct(self.peek(), op));
        let Some(op) = op else {
            return Ok(a);
        };
        self.at += 1;
        let (b, _) = self.prim()?;
        let b = self.non_void(b);
        let (Some(a), Some(b)) = (a, b) else {
            return Ok(None);
        };
        Ok(match op {
            "==" if self.env.classes.comparable(&a, &b) => Some(Ty::Bool),
            "<" if a == Ty::Int && b == Ty::Int => Some(Ty::Bool),
            "+" if a == Ty::Int && b == Ty::Int => Some(Ty::Int),
            _ => self.fail_type(format!("operator `{op}` does not apply to {a} and {b}")),
        })
    }

    fn non_void(&mut self, t: Option<Ty>) -> Option<Ty> {
        match t {
            Some(Ty::Void) => self.fail_type("a void call has no value"),
            t => t,
        }
    }

    fn args(&mut self) -> Parse<Option<Vec<Ty>>> {
        self.expect("(")?;
        let mut out = Some(Vec::new());
        if self.is_punct(self.peek(), ")") {
            self.at += 1;
            return Ok(out);
        }
        loop {
            let t = self.expr()?;
            out = match (out, t) {
                (Some(mut v), Some(t)) => {
                    v.push(t);
                    Some(v)
                }
                _ => None,
            };
            if self.is_punct(self.peek(), ",") {
                self.at += 1;
                continue;
            }
            self.expect(")")?;
            return Ok(out);
        }
    }

    fn class_of(&mut self, t: Option<Ty>) -> Option<std::sync::Arc<str>> {
        match t {
            Some(Ty::Class(c)) => Some(c),
            Some(t) => {
                self.fail_type(format!("{t} has no members"));
                None
            }
            None => None,
        }
    }

    fn prim(&mut self) -> Parse<(Option<Ty>, Tail)> {
        let t = self.peek();
        let (mut ty, mut tail) = if self.is_ident(t) {
            let name = self.ident()?;
            let ty = match self.lookup(name) {
                Some(t) => Some(t.clone()),
                None => self.fail_type(format!("`{name}` is not declared")),
            };
            (ty, Tail::Other)
        } else if matches!(t, Some(t) if t.terminal == self.int) {
            self.at += 1;
            (Some(Ty::Int), Tail::Other)
        } else if self.is_punct(t, "null") {
            self.at += 1;
            (Some(Ty::Null), Tail::Other)
        } else if self.is_punct(t, "(") {
            self.at += 1;
            let inner = self.expr()?;
            self.expect(")")?;
            (inner, Tail::Other)
        } else if self.is_punct(t, "new") {
            self.at += 1;
            let class = self.ident()?;
            let args = self.args()?;
            let ty = if !self.env.classes.has_class(class) {
                self.fail_type(format!("unknown class `{class}`"))
            } else {
                match args.map(|a| self.env.classes.resolve_ctor(class, &a)) {
                    Some(Resolution::Unique(_)) => Some(Ty::Class(class.into())),
                    Some(_) => self.fail_type(format!("no unique constructor of `{class}` applies")),
                    None => None,
                }
            };
            (ty, Tail::Call)
        } else {
            return Err(self.syntax("an expression"));
        };
        while self.is_punct(self.peek(), ".") {
            self.at += 1;
            let member = self.ident()?;
            let class = self.class_of(ty);
            if self.is_punct(self.peek(), "(") {
                let args = self.args()?;
                ty = match (class, args) {
                    (Some(c), Some(a)) => match self.env.classes.resolve_method(&c, member, &a) {
                        Resolution::Unique(sig) => Some(sig.ret.clone()),
                        Resolution::Ambiguous => self.fail_type(format!("call to `{c}.{member}` is ambiguous")),
                        Resolution::NoneApplicable => self.fail_type(format!("no method `{c}.{member}` applies")),
                    },
                    _ => None,
                };
                tail = Tail::Call;
            } else {
                ty = match class {
                    Some(c) => match self.env.classes.field(&c, member) {
                        Some(f) => Some(f.clone()),
                        None => self.fail_type(format!("`{c}` has no field `{member}`")),
                    },
                    None => None,
                };
                tail = Tail::Field(ty.clone());
            }
        }
        Ok((ty, tail))
    }
}
