use std::rc::Rc;
use std::sync::Arc;

use super::env::{Resolution, Ty, INT};
use super::{Form, MiniJava};
use crate::attrcheck::{SourceRules, TerminalSource};
use crate::grammar::{Production, SymbolId};
use crate::langs::Frontend;
use crate::modgraph::Token;

/// Variables in scope, in declaration order, and the number of enclosing
/// loops.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scope {
    pub vars: Vec<(Arc<str>, Ty)>,
    pub loop_depth: u32,
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<&Ty> {
        self.vars.iter().find(|(n, _)| &**n == name).map(|(_, t)| t)
    }
}

/// What an identifier position may name.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sel {
    Var(Rc<Scope>),
    Binder(Rc<Scope>),
    Type,
    New,
    Field(Arc<str>),
    Method(Arc<str>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MjValue {
    Unit,
    Scope(Rc<Scope>),
    Sel(Sel),
    Ty(Ty),
    Name(Arc<str>),
    Args(Rc<[Ty]>),
}

pub struct MjRules<'a> {
    lang: &'a MiniJava,
    universe: Vec<Arc<str>>,
}

impl<'a> MjRules<'a> {
    pub fn new(lang: &'a MiniJava, tokens: &[Token]) -> Self {
        MjRules {
            lang,
            universe: lang.binder_universe(tokens),
        }
    }

    fn candidates(&self, sel: &Sel) -> Vec<(MjValue, Arc<str>)> {
        let table = &self.lang.env().classes;
        match sel {
            Sel::Var(scope) => scope
                .vars
                .iter()
                .rev()
                .map(|(n, t)| (MjValue::Ty(t.clone()), n.clone()))
                .collect(),
            Sel::Binder(scope) => self
                .universe
                .iter()
                .filter(|n| scope.lookup(n).is_none())
                .map(|n| (MjValue::Name(n.clone()), n.clone()))
                .collect(),
            Sel::Type | Sel::New => {
                let mut out: Vec<(MjValue, Arc<str>)> = table
                    .classes()
                    .iter()
                    .map(|c| (MjValue::Ty(Ty::Class(c.name.clone())), c.name.clone()))
                    .collect();
                if *sel == Sel::Type {
                    out.push((MjValue::Ty(Ty::Int), INT.into()));
                }
                out
            }
            Sel::Field(class) => table
                .fields(class)
                .iter()
                .map(|(n, t)| (MjValue::Ty(t.clone()), n.clone()))
                .collect(),
            Sel::Method(class) => table
                .method_names(class)
                .iter()
                .map(|n| (MjValue::Name(n.clone()), n.clone()))
                .collect(),
        }
    }

    fn subtype(&self, a: &Ty, b: &Ty) -> bool {
        self.lang.env().classes.is_subtype(a, b)
    }
}

fn expr_scope(s: &Rc<Scope>) -> MjValue {
    if s.loop_depth == 0 {
        MjValue::Scope(s.clone())
    } else {
        MjValue::Scope(Rc::new(Scope {
            vars: s.vars.clone(),
            loop_depth: 0,
        }))
    }
}

fn sel_scope(s: &Rc<Scope>) -> Rc<Scope> {
    match expr_scope(s) {
        MjValue::Scope(s) => s,
        _ => unreachable!(),
    }
}

fn ty(v: &MjValue) -> Option<&Ty> {
    match v {
        MjValue::Ty(t) => Some(t),
        _ => None,
    }
}

fn class_of(v: &MjValue) -> Option<Arc<str>> {
    match v {
        MjValue::Ty(Ty::Class(c)) => Some(c.clone()),
        _ => None,
    }
}

impl SourceRules for MjRules<'_> {
    type Value = MjValue;

    fn terminal(&self, terminal: SymbolId, source: TerminalSource<'_>, inherited: &MjValue) -> Vec<(MjValue, String)> {
        if terminal == self.lang.literal_terminal() {
            let lexeme = match source {
                TerminalSource::Original(l) => l,
                TerminalSource::Replaced {
                    previous: "0",
                    same_class: true,
                } => "1",
                _ => "0",
            };
            return vec![(MjValue::Unit, lexeme.to_string())];
        }
        if terminal != self.lang.ident_terminal() {
            let lexeme = self.lang.grammar().symbol(terminal).fixed_lexeme().unwrap();
            return vec![(MjValue::Unit, lexeme.to_string())];
        }
        let MjValue::Sel(sel) = inherited else {
            return vec![];
        };
        let all = self.candidates(sel);
        match source {
            TerminalSource::Original(l) => all
                .into_iter()
                .filter(|(_, n)| &**n == l)
                .map(|(v, n)| (v, n.to_string()))
                .collect(),
            TerminalSource::Replaced {
                previous,
                same_class: true,
            } => all
                .into_iter()
                .filter(|(_, n)| &**n != previous)
                .map(|(v, n)| (v, n.to_string()))
                .collect(),
            _ => all.into_iter().map(|(v, n)| (v, n.to_string())).collect(),
        }
    }

    fn inherited(&self, production: &Production, child: usize, inherited: &MjValue, earlier: &[MjValue]) -> Option<MjValue> {
        let MjValue::Scope(scope) = inherited else {
            return None;
        };
        let form = self.lang.form(production.id);
        let sym = production.rhs[child];
        let g = self.lang.grammar();
        if g.symbol(sym).fixed_lexeme().is_some() || sym == self.lang.literal_terminal() {
            // early pruning before the rest of a statement is explored
            let ok = match (form, child) {
                (Form::If | Form::While, 3) => ty(&earlier[2]) == Some(&Ty::Bool),
                (Form::Break, 0) => scope.loop_depth > 0,
                (Form::Return, 0) => self.lang.env().returns != Ty::Void,
                _ => true,
            };
            return ok.then_some(MjValue::Unit);
        }
        let v = match (form, child) {
            (Form::Body, 0) => inherited.clone(),
            (Form::StmtsCons, 0) => inherited.clone(),
            (Form::StmtsCons, 1) => earlier[0].clone(),
            (Form::Decl, 0) => MjValue::Sel(Sel::Type),
            (Form::Decl, 1) => MjValue::Sel(Sel::Binder(sel_scope(scope))),
            (Form::Assign, 0) => MjValue::Sel(Sel::Var(sel_scope(scope))),
            (Form::FieldAssign, 2) | (Form::PrimField, 2) => MjValue::Sel(Sel::Field(class_of(&earlier[0])?)),
            (Form::CallMethod, 2) => MjValue::Sel(Sel::Method(class_of(&earlier[0])?)),
            (Form::CallNew, 1) => MjValue::Sel(Sel::New),
            (Form::PrimVar, 0) => MjValue::Sel(Sel::Var(sel_scope(scope))),
            (Form::If, 5 | 9) => MjValue::Scope(scope.clone()),
            (Form::While, 5) => MjValue::Scope(Rc::new(Scope {
                vars: scope.vars.clone(),
                loop_depth: scope.loop_depth + 1,
            })),
            _ => expr_scope(scope),
        };
        Some(v)
    }

    fn synthesized(&self, production: &Production, inherited: &MjValue, c: &[MjValue]) -> Option<MjValue> {
        let MjValue::Scope(scope) = inherited else {
            return None;
        };
        let table = &self.lang.env().classes;
        let same = || Some(MjValue::Scope(scope.clone()));
        match self.lang.form(production.id) {
            Form::Body | Form::StmtsEmpty | Form::StmtsCons => Some(MjValue::Unit),
            Form::Decl => {
                let (MjValue::Ty(t), MjValue::Name(n)) = (&c[0], &c[1]) else {
                    return None;
                };
                let mut vars = scope.vars.clone();
                vars.push((n.clone(), t.clone()));
                Some(MjValue::Scope(Rc::new(Scope {
                    vars,
                    loop_depth: scope.loop_depth,
                })))
            }
            Form::Assign => self.subtype(ty(&c[2])?, ty(&c[0])?).then(same)?,
            Form::FieldAssign => self.subtype(ty(&c[4])?, ty(&c[2])?).then(same)?,
            Form::CallStmt | Form::If | Form::While | Form::Break => same(),
            Form::Return => self.subtype(ty(&c[1])?, &self.lang.env().returns).then(same)?,
            Form::ExprPrim => {
                let t = ty(&c[0])?;
                (*t != Ty::Void).then(|| MjValue::Ty(t.clone()))
            }
            Form::ExprEq => table.comparable(ty(&c[0])?, ty(&c[2])?).then_some(MjValue::Ty(Ty::Bool)),
            Form::ExprLt => (ty(&c[0])? == &Ty::Int && ty(&c[2])? == &Ty::Int).then_some(MjValue::Ty(Ty::Bool)),
            Form::ExprPlus => (ty(&c[0])? == &Ty::Int && ty(&c[2])? == &Ty::Int).then_some(MjValue::Ty(Ty::Int)),
            Form::PrimVar | Form::PrimCall => Some(MjValue::Ty(ty(&c[0])?.clone())),
            Form::PrimInt => Some(MjValue::Ty(Ty::Int)),
            Form::PrimNull => Some(MjValue::Ty(Ty::Null)),
            Form::PrimParen => Some(MjValue::Ty(ty(&c[1])?.clone())),
            Form::PrimField => Some(MjValue::Ty(ty(&c[2])?.clone())),
            Form::CallMethod => {
                let (class, MjValue::Name(m), MjValue::Args(args)) = (class_of(&c[0])?, &c[2], &c[4]) else {
                    return None;
                };
                match table.resolve_method(&class, m, args) {
                    Resolution::Unique(sig) => Some(MjValue::Ty(sig.ret.clone())),
                    _ => None,
                }
            }
            Form::CallNew => {
                let (class, MjValue::Args(args)) = (class_of(&c[1])?, &c[3]) else {
                    return None;
                };
                match table.resolve_ctor(&class, args) {
                    Resolution::Unique(_) => Some(MjValue::Ty(Ty::Class(class))),
                    _ => None,
                }
            }
            Form::ArgsEmpty => Some(MjValue::Args(Rc::from(Vec::new()))),
            Form::ArgsSome => Some(c[0].clone()),
            Form::ArgOne => Some(MjValue::Args(Rc::from(vec![ty(&c[0])?.clone()]))),
            Form::ArgCons => {
                let MjValue::Args(rest) = &c[2] else {
                    return None;
                };
                let mut all = vec![ty(&c[0])?.clone()];
                all.extend(rest.iter().cloned());
                Some(MjValue::Args(all.into()))
            }
        }
    }

    fn root(&self) -> MjValue {
        MjValue::Scope(Rc::new(Scope {
            vars: self.lang.env().vars.clone(),
            loop_depth: 0,
        }))
    }

    fn value_bytes(&self, v: &MjValue) -> usize {
        let base = std::mem::size_of::<MjValue>();
        match v {
            MjValue::Scope(s) | MjValue::Sel(Sel::Var(s) | Sel::Binder(s)) => {
                base + 16 + s.vars.len() * std::mem::size_of::<(Arc<str>, Ty)>()
            }
            MjValue::Args(a) => base + a.len() * std::mem::size_of::<Ty>(),
            _ => base,
        }
    }
}
