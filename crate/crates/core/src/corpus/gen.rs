//! Random compilable minijava programs.
//!
//! The class table is drawn first, then the method body is derived top-down
//! from the grammar while the variable table and the expected expression
//! type are threaded through every call. A subroutine that cannot produce
//! anything fails, and the caller tries its next production.

use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rng;
use crate::langs::minijava::{ClassDecl, ClassTable, MethodSig, MiniJava, MjEnv, Resolution, Ty};
use crate::langs::Frontend;
use crate::modgraph::Token;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub seed: u64,
    pub classes: RangeInclusive<usize>,
    pub fields_per_class: RangeInclusive<usize>,
    pub methods_per_class: RangeInclusive<usize>,
    pub params_per_method: RangeInclusive<usize>,
    pub method_params: RangeInclusive<usize>,
    pub tokens: RangeInclusive<usize>,
    pub max_backtracks: u32,
    pub max_attempts: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            classes: 2..=4,
            fields_per_class: 0..=2,
            methods_per_class: 1..=2,
            params_per_method: 0..=2,
            method_params: 1..=3,
            tokens: 20..=60,
            max_backtracks: 400,
            max_attempts: 16,
        }
    }
}

impl GenParams {
    pub fn with_seed(seed: u64) -> Self {
        GenParams {
            seed,
            ..GenParams::default()
        }
    }

    pub fn with_tokens(mut self, tokens: RangeInclusive<usize>) -> Self {
        self.tokens = tokens;
        self
    }

    fn validate(&self) -> Result<(), GenError> {
        let ranges = [
            ("classes", &self.classes),
            ("fields_per_class", &self.fields_per_class),
            ("methods_per_class", &self.methods_per_class),
            ("params_per_method", &self.params_per_method),
            ("method_params", &self.method_params),
            ("tokens", &self.tokens),
        ];
        for (name, r) in ranges {
            if r.is_empty() {
                return Err(GenError::InvalidParams(format!("`{name}` is empty")));
            }
        }
        if *self.classes.start() == 0 {
            return Err(GenError::InvalidParams("at least one class is needed".into()));
        }
        if *self.classes.end() > CLASS_NAMES.len() {
            return Err(GenError::InvalidParams(format!("at most {} classes", CLASS_NAMES.len())));
        }
        if *self.tokens.start() < 3 {
            return Err(GenError::InvalidParams("token range must start at 3 or more".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("generation exhausted for seed {seed} after {attempts} attempts")]
    Exhausted { seed: u64, attempts: u32 },
}

const CLASS_NAMES: &[&str] = &["Node", "List", "Tree", "Cell", "Pair", "Box", "Item", "Queue"];

const METHOD_NAMES: &[&str] = &["get", "put", "add", "find", "size", "next", "swap", "link", "peek", "take"];

pub struct Generated {
    pub env: MjEnv,
    pub tokens: Vec<Token>,
    /// Backtracks spent by the successful attempt.
    pub backtracks: u32,
}

/// Draws a program. The same parameters always give the same program.
pub fn generate_program(p: &GenParams) -> Result<Generated, GenError> {
    p.validate()?;
    for attempt in 0..p.max_attempts {
        let mut rng = rng(p.seed, attempt as u64);
        let env = random_env(&mut rng, p);
        let lang = MiniJava::new(env.clone());
        let Some((body, backtracks)) = Body::new(&mut rng, &env, p).run() else {
            continue;
        };
        let tokens = lang.lex(&body.join(" ")).expect("generated lexemes lex");
        if lang.check_compiles(&tokens).ok {
            return Ok(Generated { env, tokens, backtracks });
        }
        log::warn!("seed {} attempt {attempt}: generated body rejected", p.seed);
    }
    Err(GenError::Exhausted {
        seed: p.seed,
        attempts: p.max_attempts,
    })
}

fn random_env(rng: &mut ChaCha8Rng, p: &GenParams) -> MjEnv {
    let count = rng.gen_range(p.classes.clone());
    let mut names: Vec<&str> = CLASS_NAMES.to_vec();
    names.shuffle(rng);
    names.truncate(count);
    let types: Vec<Ty> = std::iter::once(Ty::Int)
        .chain(names.iter().map(|n| Ty::Class((*n).into())))
        .collect();
    let mut method_names: Vec<&str> = METHOD_NAMES.to_vec();
    method_names.shuffle(rng);
    let mut next_method = 0;
    let mut next_field = 0;
    let mut classes = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let superclass = match rng.gen_range(0..=i) {
            0 => "Object",
            k => names[k - 1],
        };
        let fields = (0..rng.gen_range(p.fields_per_class.clone()))
            .map(|_| {
                next_field += 1;
                (Arc::from(format!("f{next_field}")), types.choose(rng).unwrap().clone())
            })
            .collect();
        let mut methods = Vec::new();
        for _ in 0..rng.gen_range(p.methods_per_class.clone()) {
            let name: Arc<str> = match method_names.get(next_method) {
                Some(n) => (*n).into(),
                None => format!("m{next_method}").into(),
            };
            next_method += 1;
            let params = (0..rng.gen_range(p.params_per_method.clone()))
                .map(|_| types.choose(rng).unwrap().clone())
                .collect();
            let ret = if rng.gen_bool(0.3) {
                Ty::Void
            } else {
                types.choose(rng).unwrap().clone()
            };
            methods.push(MethodSig { name, params, ret });
        }
        let ctor: Vec<Ty> = (0..rng.gen_range(0..=1)).map(|_| types.choose(rng).unwrap().clone()).collect();
        classes.push(ClassDecl {
            name: (*name).into(),
            superclass: Some(superclass.into()),
            fields,
            methods,
            ctors: vec![ctor],
        });
    }
    let classes = ClassTable::new(classes).expect("generated class table is well formed");
    let vars = (0..rng.gen_range(p.method_params.clone()))
        .map(|k| (Arc::from(format!("p{k}")), types.choose(rng).unwrap().clone()))
        .collect();
    let returns = if rng.gen_bool(0.3) {
        types.choose(rng).unwrap().clone()
    } else {
        Ty::Void
    };
    MjEnv { classes, vars, returns }
}

/// Expected type of an expression being generated.
#[derive(Clone, Debug)]
enum Want {
    /// Any value.
    Value,
    /// A subtype of the given type.
    Sub(Ty),
    /// A class-typed value below the given class, `null` excluded.
    Object(Arc<str>),
    Bool,
    /// A call usable as a statement; `void` allowed.
    Stmt,
}

#[derive(Clone, Copy, Debug)]
enum StmtForm {
    Decl,
    Assign,
    FieldAssign,
    Call,
    If,
    While,
    Break,
    Return,
}

#[derive(Clone, Copy, Debug)]
enum PrimForm {
    Var,
    Int,
    Null,
    Paren,
    Field,
    Call,
    New,
}

const MAX_EXPR_DEPTH: u32 = 3;
const MAX_BLOCK_DEPTH: u32 = 2;

struct Body<'a> {
    rng: &'a mut ChaCha8Rng,
    env: &'a MjEnv,
    params: &'a GenParams,
    scope: Vec<(Arc<str>, Ty)>,
    loop_depth: u32,
    block_depth: u32,
    locals: usize,
    backtracks: u32,
}

type Frag = Vec<String>;

fn frag(parts: &[&str]) -> Frag {
    parts.iter().map(|s| s.to_string()).collect()
}

impl<'a> Body<'a> {
    fn new(rng: &'a mut ChaCha8Rng, env: &'a MjEnv, params: &'a GenParams) -> Self {
        Body {
            rng,
            env,
            params,
            scope: env.vars.clone(),
            loop_depth: 0,
            block_depth: 0,
            locals: 0,
            backtracks: 0,
        }
    }

    fn table(&self) -> &'a ClassTable {
        &self.env.classes
    }

    fn fail<T>(&mut self) -> Option<T> {
        self.backtracks += 1;
        None
    }

    fn exhausted(&self) -> bool {
        self.backtracks > self.params.max_backtracks
    }

    fn run(mut self) -> Option<(Frag, u32)> {
        let target = self.rng.gen_range(self.params.tokens.clone());
        let max = *self.params.tokens.end();
        let mut out: Frag = Vec::new();
        while out.len() < target {
            if self.exhausted() {
                return None;
            }
            let mark = self.scope.len();
            match self.stmt() {
                Some(s) if out.len() + s.len() <= max => out.extend(s),
                Some(_) => {
                    self.scope.truncate(mark);
                    self.fail::<()>();
                }
                None => {}
            }
        }
        Some((out, self.backtracks))
    }

    fn fits(&self, t: &Ty, want: &Want) -> bool {
        match want {
            Want::Value => !matches!(t, Ty::Void),
            Want::Sub(s) => self.table().is_subtype(t, s),
            Want::Object(c) => matches!(t, Ty::Class(_)) && self.table().is_subtype(t, &Ty::Class(c.clone())),
            Want::Bool => *t == Ty::Bool,
            Want::Stmt => true,
        }
    }

    fn fresh_local(&mut self) -> Arc<str> {
        loop {
            let name = format!("v{}", self.locals);
            self.locals += 1;
            if !self.scope.iter().any(|(n, _)| &**n == name) {
                return name.into();
            }
        }
    }

    fn weighted<T: Copy>(&mut self, options: &[(T, u32)]) -> Vec<T> {
        let mut pool: Vec<(T, u32)> = options.iter().copied().filter(|(_, w)| *w > 0).collect();
        let mut order = Vec::with_capacity(pool.len());
        while !pool.is_empty() {
            let total: u32 = pool.iter().map(|(_, w)| w).sum();
            let mut pick = self.rng.gen_range(0..total);
            let k = pool
                .iter()
                .position(|(_, w)| {
                    if pick < *w {
                        return true;
                    }
                    pick -= w;
                    false
                })
                .unwrap();
            order.push(pool.remove(k).0);
        }
        order
    }

    fn stmt(&mut self) -> Option<Frag> {
        let nested = self.block_depth < MAX_BLOCK_DEPTH;
        let order = self.weighted(&[
            (StmtForm::Decl, 4),
            (StmtForm::Assign, 4),
            (StmtForm::FieldAssign, 2),
            (StmtForm::Call, 3),
            (StmtForm::If, if nested { 1 } else { 0 }),
            (StmtForm::While, if nested { 1 } else { 0 }),
            (StmtForm::Break, if self.loop_depth > 0 { 1 } else { 0 }),
            (StmtForm::Return, if self.env.returns != Ty::Void { 1 } else { 0 }),
        ]);
        for form in order {
            if self.exhausted() {
                return None;
            }
            if let Some(s) = self.stmt_form(form) {
                return Some(s);
            }
            self.backtracks += 1;
        }
        None
    }

    fn stmt_form(&mut self, form: StmtForm) -> Option<Frag> {
        match form {
            StmtForm::Decl => {
                let mut types: Vec<Ty> = std::iter::once(Ty::Int)
                    .chain(self.table().classes().iter().map(|c| Ty::Class(c.name.clone())))
                    .collect();
                types.retain(|t| !matches!(t, Ty::Class(c) if &**c == "Object"));
                let ty = types.choose(self.rng)?.clone();
                let name = self.fresh_local();
                self.scope.push((name.clone(), ty.clone()));
                Some(vec![ty.to_string(), name.to_string(), ";".into()])
            }
            StmtForm::Assign => {
                let (name, ty) = self.scope.choose(self.rng)?.clone();
                let mut out = vec![name.to_string(), "=".into()];
                out.extend(self.expr(&Want::Sub(ty), 0)?.0);
                out.push(";".into());
                Some(out)
            }
            StmtForm::FieldAssign => {
                let (class, field, ty) = self.pick_field(&Want::Stmt)?;
                let mut out = self.prim(&Want::Object(class), 1)?.0;
                out.extend([".".to_string(), field.to_string(), "=".into()]);
                out.extend(self.expr(&Want::Sub(ty), 0)?.0);
                out.push(";".into());
                Some(out)
            }
            StmtForm::Call => {
                let forms = self.weighted(&[(PrimForm::Call, 3), (PrimForm::New, 1)]);
                for f in forms {
                    if let Some((mut out, _)) = self.prim_form(f, &Want::Stmt, 0) {
                        out.push(";".into());
                        return Some(out);
                    }
                }
                None
            }
            StmtForm::If => {
                let mut out = frag(&["if", "("]);
                out.extend(self.expr(&Want::Bool, 0)?.0);
                out.push(")".into());
                out.extend(self.block(false)?);
                out.push("else".into());
                out.extend(self.block(false)?);
                Some(out)
            }
            StmtForm::While => {
                let mut out = frag(&["while", "("]);
                out.extend(self.expr(&Want::Bool, 0)?.0);
                out.push(")".into());
                out.extend(self.block(true)?);
                Some(out)
            }
            StmtForm::Break => (self.loop_depth > 0).then(|| frag(&["break", ";"])),
            StmtForm::Return => {
                let ret = self.env.returns.clone();
                if ret == Ty::Void {
                    return None;
                }
                let mut out = frag(&["return"]);
                out.extend(self.expr(&Want::Sub(ret), 0)?.0);
                out.push(";".into());
                Some(out)
            }
        }
    }

    fn block(&mut self, is_loop: bool) -> Option<Frag> {
        let mark = self.scope.len();
        self.block_depth += 1;
        if is_loop {
            self.loop_depth += 1;
        }
        let n = self.rng.gen_range(0..=2);
        let mut out = frag(&["{"]);
        let mut ok = true;
        for _ in 0..n {
            match self.stmt() {
                Some(s) => out.extend(s),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        out.push("}".into());
        self.block_depth -= 1;
        if is_loop {
            self.loop_depth -= 1;
        }
        self.scope.truncate(mark);
        ok.then_some(out)
    }

    fn expr(&mut self, want: &Want, depth: u32) -> Option<(Frag, Ty)> {
        let order = self.weighted(&[
            ("prim", if matches!(want, Want::Bool) { 0 } else { 6 }),
            ("==", 2),
            ("<", 1),
            ("+", 1),
        ]);
        for op in order {
            let r = match op {
                "prim" => self.prim(want, depth),
                "==" | "<" => self.binary(op, want, depth),
                _ => self.binary("+", want, depth),
            };
            if r.is_some() {
                return r;
            }
            self.backtracks += 1;
        }
        None
    }

    fn binary(&mut self, op: &str, want: &Want, depth: u32) -> Option<(Frag, Ty)> {
        let result = if op == "+" { Ty::Int } else { Ty::Bool };
        if !self.fits(&result, want) {
            return None;
        }
        let (left_want, right_want): (Want, Option<Want>) = match op {
            "==" => (Want::Value, None),
            _ => (Want::Sub(Ty::Int), Some(Want::Sub(Ty::Int))),
        };
        let (mut out, left) = self.prim(&left_want, depth + 1)?;
        let right_want = right_want.unwrap_or_else(|| match &left {
            Ty::Null => Want::Object("Object".into()),
            t => Want::Sub(t.clone()),
        });
        out.push(op.to_string());
        out.extend(self.prim(&right_want, depth + 1)?.0);
        Some((out, result))
    }

    fn prim(&mut self, want: &Want, depth: u32) -> Option<(Frag, Ty)> {
        let deep = depth < MAX_EXPR_DEPTH;
        let order = self.weighted(&[
            (PrimForm::Var, 8),
            (PrimForm::Int, 3),
            (PrimForm::Null, 1),
            (PrimForm::Paren, if deep { 1 } else { 0 }),
            (PrimForm::Field, if deep { 3 } else { 0 }),
            (PrimForm::Call, if deep { 3 } else { 0 }),
            (PrimForm::New, if deep { 2 } else { 0 }),
        ]);
        for form in order {
            if self.exhausted() {
                return None;
            }
            if let Some(r) = self.prim_form(form, want, depth) {
                return Some(r);
            }
            self.backtracks += 1;
        }
        None
    }

    fn prim_form(&mut self, form: PrimForm, want: &Want, depth: u32) -> Option<(Frag, Ty)> {
        let statement = matches!(want, Want::Stmt);
        if statement && !matches!(form, PrimForm::Call | PrimForm::New) {
            return None;
        }
        match form {
            PrimForm::Var => {
                let vars: Vec<(Arc<str>, Ty)> =
                    self.scope.iter().filter(|(_, t)| self.fits(t, want)).cloned().collect();
                let (n, t) = vars.choose(self.rng)?.clone();
                Some((vec![n.to_string()], t))
            }
            PrimForm::Int => self
                .fits(&Ty::Int, want)
                .then(|| (vec![self.rng.gen_range(0..10).to_string()], Ty::Int)),
            PrimForm::Null => self.fits(&Ty::Null, want).then(|| (frag(&["null"]), Ty::Null)),
            PrimForm::Paren => {
                let inner_want = match want {
                    Want::Object(_) => return None,
                    w => w.clone(),
                };
                let (inner, ty) = self.expr(&inner_want, depth + 1)?;
                let mut out = frag(&["("]);
                out.extend(inner);
                out.push(")".into());
                Some((out, ty))
            }
            PrimForm::Field => {
                let (class, field, ty) = self.pick_field(want)?;
                let (mut out, _) = self.prim(&Want::Object(class), depth + 1)?;
                out.extend([".".to_string(), field.to_string()]);
                Some((out, ty))
            }
            PrimForm::Call => {
                let mut options: Vec<(Arc<str>, MethodSig)> = Vec::new();
                for c in self.table().classes() {
                    for m in &c.methods {
                        if self.fits(&m.ret, want) {
                            options.push((c.name.clone(), m.clone()));
                        }
                    }
                }
                let (class, sig) = options.choose(self.rng)?.clone();
                let (mut out, recv) = self.prim(&Want::Object(class), depth + 1)?;
                let Ty::Class(recv) = recv else { return None };
                out.extend([".".to_string(), sig.name.to_string()]);
                let (args, tys) = self.args(&sig.params, depth)?;
                out.extend(args);
                match self.table().resolve_method(&recv, &sig.name, &tys) {
                    Resolution::Unique(m) if self.fits(&m.ret, want) => Some((out, m.ret.clone())),
                    _ => None,
                }
            }
            PrimForm::New => {
                let options: Vec<&ClassDecl> = self
                    .table()
                    .classes()
                    .iter()
                    .filter(|c| self.fits(&Ty::Class(c.name.clone()), want))
                    .collect();
                let class = *options.choose(self.rng)?;
                let ctor = class.ctors.choose(self.rng)?.clone();
                let mut out = vec!["new".to_string(), class.name.to_string()];
                let (args, tys) = self.args(&ctor, depth)?;
                out.extend(args);
                match self.table().resolve_ctor(&class.name, &tys) {
                    Resolution::Unique(_) => Some((out, Ty::Class(class.name.clone()))),
                    _ => None,
                }
            }
        }
    }

    fn args(&mut self, params: &[Ty], depth: u32) -> Option<(Frag, Vec<Ty>)> {
        let mut out = frag(&["("]);
        let mut tys = Vec::new();
        for (k, p) in params.iter().enumerate() {
            if k > 0 {
                out.push(",".into());
            }
            let (arg, ty) = self.expr(&Want::Sub(p.clone()), depth + 1)?;
            out.extend(arg);
            tys.push(ty);
        }
        out.push(")".into());
        Some((out, tys))
    }

    /// A field whose type fits `want`, with the class declaring it.
    fn pick_field(&mut self, want: &Want) -> Option<(Arc<str>, Arc<str>, Ty)> {
        let mut options = Vec::new();
        for c in self.table().classes() {
            for (f, t) in &c.fields {
                if matches!(want, Want::Stmt) || self.fits(t, want) {
                    options.push((c.name.clone(), f.clone(), t.clone()));
                }
            }
        }
        options.choose(self.rng).cloned()
    }
}
