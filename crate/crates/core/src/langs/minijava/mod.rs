//! A small statically typed object language.
//!
//! A program is a method body: local declarations `T x ;`, assignments,
//! field assignments, call statements, `if`/`else`, `while`, `break` and
//! `return`. Expressions are variables, the literal `0`, `null`,
//! parenthesized expressions, field access, method calls, `new C(..)`, and
//! one binary operator (`==`, `<` or `+`) at the top of an expression.
//! Types are `int`, the classes of the environment, and the internal
//! `boolean` and `void` results.

mod check;
pub mod env;
mod rules;

use std::sync::Arc;

use crate::attrcheck::Binarized;
use crate::grammar::{Grammar, SymbolId};
use crate::langs::{fresh_name, lex_with_grammar, CheckOutcome, Frontend, LexError};
use crate::modgraph::Token;

pub use env::{ClassDecl, ClassTable, MethodSig, MjEnv, Resolution, Ty};
pub use rules::{MjRules, MjValue, Scope, Sel};

pub const KEYWORDS: &[&str] = &["if", "else", "while", "break", "return", "new", "null"];

pub const GRAMMAR: &str = "\
start Body;
terminal ID : identifier;
terminal INT : literal;
Body -> Stmts
Stmts -> .
Stmts -> Stmt Stmts
Stmt -> ID ID ';'
Stmt -> ID '=' Expr ';'
Stmt -> Prim '.' ID '=' Expr ';'
Stmt -> Call ';'
Stmt -> 'if' '(' Expr ')' '{' Stmts '}' 'else' '{' Stmts '}'
Stmt -> 'while' '(' Expr ')' '{' Stmts '}'
Stmt -> 'break' ';'
Stmt -> 'return' Expr ';'
Expr -> Prim
Expr -> Prim '==' Prim
Expr -> Prim '<' Prim
Expr -> Prim '+' Prim
Prim -> ID
Prim -> INT
Prim -> 'null'
Prim -> '(' Expr ')'
Prim -> Prim '.' ID
Prim -> Call
Call -> Prim '.' ID '(' Args ')'
Call -> 'new' ID '(' Args ')'
Args -> .
Args -> ArgList
ArgList -> Expr
ArgList -> Expr ',' ArgList
";

/// Source productions of [`GRAMMAR`], in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Form {
    Body,
    StmtsEmpty,
    StmtsCons,
    Decl,
    Assign,
    FieldAssign,
    CallStmt,
    If,
    While,
    Break,
    Return,
    ExprPrim,
    ExprEq,
    ExprLt,
    ExprPlus,
    PrimVar,
    PrimInt,
    PrimNull,
    PrimParen,
    PrimField,
    PrimCall,
    CallMethod,
    CallNew,
    ArgsEmpty,
    ArgsSome,
    ArgOne,
    ArgCons,
}

const FORMS: [Form; 27] = [
    Form::Body,
    Form::StmtsEmpty,
    Form::StmtsCons,
    Form::Decl,
    Form::Assign,
    Form::FieldAssign,
    Form::CallStmt,
    Form::If,
    Form::While,
    Form::Break,
    Form::Return,
    Form::ExprPrim,
    Form::ExprEq,
    Form::ExprLt,
    Form::ExprPlus,
    Form::PrimVar,
    Form::PrimInt,
    Form::PrimNull,
    Form::PrimParen,
    Form::PrimField,
    Form::PrimCall,
    Form::CallMethod,
    Form::CallNew,
    Form::ArgsEmpty,
    Form::ArgsSome,
    Form::ArgOne,
    Form::ArgCons,
];

pub struct MiniJava {
    env: MjEnv,
    grammar: Grammar,
    id: SymbolId,
    int: SymbolId,
}

impl MiniJava {
    pub fn new(env: MjEnv) -> MiniJava {
        let grammar = Grammar::parse(GRAMMAR).expect("built-in grammar").normalize();
        assert_eq!(grammar.sources().len(), FORMS.len());
        let id = grammar.lookup("ID").unwrap();
        let int = grammar.lookup("INT").unwrap();
        MiniJava { env, grammar, id, int }
    }

    pub fn env(&self) -> &MjEnv {
        &self.env
    }

    pub(crate) fn form(&self, source: crate::grammar::ProdId) -> Form {
        FORMS[source.index()]
    }

    pub fn ident_terminal(&self) -> SymbolId {
        self.id
    }

    pub fn literal_terminal(&self) -> SymbolId {
        self.int
    }

    /// Names a declaration may bind, in a fixed order: parameters, fields,
    /// methods, program identifiers, then one fresh name.
    pub fn binder_universe(&self, tokens: &[Token]) -> Vec<Arc<str>> {
        let mut names: Vec<Arc<str>> = Vec::new();
        let add = |n: &str, names: &mut Vec<Arc<str>>| {
            if !self.env.is_reserved(n) && !names.iter().any(|x| &**x == n) {
                names.push(n.into());
            }
        };
        for (n, _) in &self.env.vars {
            add(n, &mut names);
        }
        for c in self.env.classes.classes() {
            for (f, _) in &c.fields {
                add(f, &mut names);
            }
            for m in &c.methods {
                add(&m.name, &mut names);
            }
        }
        for t in tokens.iter().filter(|t| t.terminal == self.id) {
            add(&t.lexeme, &mut names);
        }
        let classes = self.env.classes.classes().iter().map(|c| &*c.name);
        let fresh = fresh_name(
            "fresh",
            names.iter().map(|n| &**n).chain(classes).collect::<Vec<_>>(),
        );
        names.push(fresh.into());
        names
    }
}

impl Frontend for MiniJava {
    type Rules<'a> = Binarized<'a, MjRules<'a>>;

    fn name(&self) -> &'static str {
        "minijava"
    }

    fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    fn lex(&self, text: &str) -> Result<Vec<Token>, LexError> {
        lex_with_grammar(&self.grammar, text)
    }

    fn rules<'a>(&'a self, tokens: &[Token]) -> Self::Rules<'a> {
        Binarized::new(&self.grammar, MjRules::new(self, tokens))
    }

    fn check_compiles(&self, tokens: &[Token]) -> CheckOutcome {
        check::check(self, tokens)
    }

    fn identifier_alphabet(&self, tokens: &[Token]) -> Vec<String> {
        let mut out: Vec<String> = self.env.classes.classes().iter().map(|c| c.name.to_string()).collect();
        out.push(env::INT.to_string());
        out.extend(self.binder_universe(tokens).iter().map(|n| n.to_string()));
        out
    }
}
