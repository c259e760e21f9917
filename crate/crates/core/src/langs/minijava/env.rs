//! Class tables and the type relation.
//!
//! ```text
//! class Node : Object {
//!   field Node next;
//!   method Node get();
//!   method void set(Node);
//!   ctor(Node);
//! }
//! var head : Node;
//! returns Node;
//! ```
//!
//! `var` lines declare the method's parameters and `returns` its result
//! type (default `void`). A class without `ctor` lines gets a no-argument
//! constructor.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::langs::EnvError;

pub const OBJECT: &str = "Object";
pub const INT: &str = "int";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Int,
    Bool,
    Void,
    Null,
    Class(Arc<str>),
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Int => write!(f, "int"),
            Ty::Bool => write!(f, "boolean"),
            Ty::Void => write!(f, "void"),
            Ty::Null => write!(f, "null"),
            Ty::Class(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodSig {
    pub name: Arc<str>,
    pub params: Vec<Ty>,
    pub ret: Ty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: Arc<str>,
    /// `None` only for `Object`.
    pub superclass: Option<Arc<str>>,
    pub fields: Vec<(Arc<str>, Ty)>,
    pub methods: Vec<MethodSig>,
    pub ctors: Vec<Vec<Ty>>,
}

#[derive(Clone, Debug)]
struct ClassInfo {
    /// Self first, then superclasses up to `Object`.
    ancestors: Vec<usize>,
    fields: Vec<(Arc<str>, Ty)>,
    methods: Vec<MethodSig>,
    method_names: Vec<Arc<str>>,
}

#[derive(Clone, Debug)]
pub struct ClassTable {
    classes: Vec<ClassDecl>,
    by_name: HashMap<Arc<str>, usize>,
    info: Vec<ClassInfo>,
}

/// Outcome of overload resolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolution<T> {
    Unique(T),
    NoneApplicable,
    Ambiguous,
}

impl ClassTable {
    pub fn new(mut classes: Vec<ClassDecl>) -> Result<ClassTable, String> {
        if !classes.iter().any(|c| &*c.name == OBJECT) {
            classes.insert(
                0,
                ClassDecl {
                    name: OBJECT.into(),
                    superclass: None,
                    fields: vec![],
                    methods: vec![],
                    ctors: vec![],
                },
            );
        }
        let mut by_name = HashMap::new();
        for (i, c) in classes.iter_mut().enumerate() {
            if by_name.insert(c.name.clone(), i).is_some() {
                return Err(format!("class `{}` declared twice", c.name));
            }
            if &*c.name == OBJECT {
                if c.superclass.is_some() {
                    return Err("Object has no superclass".into());
                }
            } else if c.superclass.is_none() {
                c.superclass = Some(OBJECT.into());
            }
            if c.ctors.is_empty() {
                c.ctors.push(vec![]);
            }
        }
        let exists = |t: &Ty| match t {
            Ty::Class(n) => by_name.contains_key(n),
            _ => true,
        };
        for c in &classes {
            if let Some(s) = &c.superclass {
                if !by_name.contains_key(s) {
                    return Err(format!("superclass `{s}` of `{}` is not declared", c.name));
                }
            }
            let types = c
                .fields
                .iter()
                .map(|(_, t)| t)
                .chain(c.methods.iter().flat_map(|m| m.params.iter().chain([&m.ret])))
                .chain(c.ctors.iter().flatten());
            for t in types {
                if !exists(t) {
                    return Err(format!("type `{t}` used in `{}` is not declared", c.name));
                }
            }
        }
        let mut info = Vec::with_capacity(classes.len());
        for (i, c) in classes.iter().enumerate() {
            let mut ancestors = vec![i];
            let mut at = c.superclass.clone();
            while let Some(s) = at {
                let j = by_name[&s];
                if ancestors.contains(&j) {
                    return Err(format!("inheritance cycle through `{}`", c.name));
                }
                ancestors.push(j);
                at = classes[j].superclass.clone();
            }
            info.push(ancestors);
        }
        let info = info
            .into_iter()
            .map(|ancestors| {
                let mut fields: Vec<(Arc<str>, Ty)> = Vec::new();
                let mut methods: Vec<MethodSig> = Vec::new();
                for &a in &ancestors {
                    for f in &classes[a].fields {
                        if !fields.iter().any(|(n, _)| n == &f.0) {
                            fields.push(f.clone());
                        }
                    }
                    for m in &classes[a].methods {
                        if !methods.iter().any(|x| x.name == m.name && x.params == m.params) {
                            methods.push(m.clone());
                        }
                    }
                }
                let mut method_names: Vec<Arc<str>> = Vec::new();
                for m in &methods {
                    if !method_names.contains(&m.name) {
                        method_names.push(m.name.clone());
                    }
                }
                ClassInfo {
                    ancestors,
                    fields,
                    methods,
                    method_names,
                }
            })
            .collect();
        Ok(ClassTable { classes, by_name, info })
    }

    pub fn classes(&self) -> &[ClassDecl] {
        &self.classes
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.by_name.get(name).map(|&i| &self.classes[i])
    }

    pub fn has_class(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    fn info(&self, name: &str) -> Option<&ClassInfo> {
        self.by_name.get(name).map(|&i| &self.info[i])
    }

    /// Reflexive-transitive subclassing, with `null` below every class.
    pub fn is_subtype(&self, sub: &Ty, sup: &Ty) -> bool {
        match (sub, sup) {
            (Ty::Int, Ty::Int) | (Ty::Bool, Ty::Bool) | (Ty::Null, Ty::Null) => true,
            (Ty::Null, Ty::Class(_)) => true,
            (Ty::Class(a), Ty::Class(b)) => match (self.by_name.get(a), self.by_name.get(b)) {
                (Some(&i), Some(&j)) => self.info[i].ancestors.contains(&j),
                _ => false,
            },
            _ => false,
        }
    }

    /// Operands `==` accepts.
    pub fn comparable(&self, a: &Ty, b: &Ty) -> bool {
        *a != Ty::Void && *b != Ty::Void && (self.is_subtype(a, b) || self.is_subtype(b, a))
    }

    /// Field visible in `class`, inherited ones included.
    pub fn field(&self, class: &str, field: &str) -> Option<&Ty> {
        self.info(class)?.fields.iter().find(|(n, _)| &**n == field).map(|(_, t)| t)
    }

    pub fn fields(&self, class: &str) -> &[(Arc<str>, Ty)] {
        self.info(class).map_or(&[], |i| &i.fields)
    }

    pub fn method_names(&self, class: &str) -> &[Arc<str>] {
        self.info(class).map_or(&[], |i| &i.method_names)
    }

    /// Picks the most specific applicable overload of `class.name`.
    pub fn resolve_method(&self, class: &str, name: &str, args: &[Ty]) -> Resolution<&MethodSig> {
        let Some(info) = self.info(class) else {
            return Resolution::NoneApplicable;
        };
        let candidates: Vec<&MethodSig> = info
            .methods
            .iter()
            .filter(|m| &*m.name == name && self.applicable(&m.params, args))
            .collect();
        match self.most_specific(candidates.iter().map(|m| m.params.as_slice())) {
            Some(Some(k)) => Resolution::Unique(candidates[k]),
            Some(None) => Resolution::Ambiguous,
            None => Resolution::NoneApplicable,
        }
    }

    pub fn resolve_ctor(&self, class: &str, args: &[Ty]) -> Resolution<usize> {
        let Some(c) = self.class(class) else {
            return Resolution::NoneApplicable;
        };
        let candidates: Vec<usize> = (0..c.ctors.len()).filter(|&k| self.applicable(&c.ctors[k], args)).collect();
        match self.most_specific(candidates.iter().map(|&k| c.ctors[k].as_slice())) {
            Some(Some(k)) => Resolution::Unique(candidates[k]),
            Some(None) => Resolution::Ambiguous,
            None => Resolution::NoneApplicable,
        }
    }

    fn applicable(&self, params: &[Ty], args: &[Ty]) -> bool {
        params.len() == args.len() && args.iter().zip(params).all(|(a, p)| self.is_subtype(a, p))
    }

    /// `None` when empty, `Some(None)` when no candidate is more specific
    /// than all others.
    fn most_specific<'p>(&self, candidates: impl Iterator<Item = &'p [Ty]> + Clone) -> Option<Option<usize>> {
        let all: Vec<&[Ty]> = candidates.collect();
        if all.is_empty() {
            return None;
        }
        let best = (0..all.len()).find(|&i| {
            all.iter()
                .all(|other| all[i].iter().zip(other.iter()).all(|(a, b)| self.is_subtype(a, b)))
        });
        Some(best)
    }
}

#[derive(Clone, Debug)]
pub struct MjEnv {
    pub classes: ClassTable,
    /// Parameters in declaration order.
    pub vars: Vec<(Arc<str>, Ty)>,
    pub returns: Ty,
}

impl MjEnv {
    pub fn parse(text: &str) -> Result<MjEnv, EnvError> {
        EnvParser::new(text).parse()
    }

    pub fn empty() -> MjEnv {
        MjEnv {
            classes: ClassTable::new(vec![]).unwrap(),
            vars: vec![],
            returns: Ty::Void,
        }
    }

    /// Names that may not be used as variables.
    pub fn is_reserved(&self, name: &str) -> bool {
        name == INT || name == "void" || self.classes.has_class(name) || super::KEYWORDS.contains(&name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let show = |ts: &[Ty]| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ");
        for c in self.classes.classes() {
            if &*c.name == OBJECT && c.fields.is_empty() && c.methods.is_empty() && c.ctors == [vec![]] {
                continue;
            }
            match &c.superclass {
                Some(s) => out.push_str(&format!("class {} : {s} {{\n", c.name)),
                None => out.push_str(&format!("class {} {{\n", c.name)),
            }
            for (n, t) in &c.fields {
                out.push_str(&format!("  field {t} {n};\n"));
            }
            for m in &c.methods {
                out.push_str(&format!("  method {} {}({});\n", m.ret, m.name, show(&m.params)));
            }
            if c.ctors != [vec![]] {
                for p in &c.ctors {
                    out.push_str(&format!("  ctor({});\n", show(p)));
                }
            }
            out.push_str("}\n");
        }
        for (n, t) in &self.vars {
            out.push_str(&format!("var {n} : {t};\n"));
        }
        if self.returns != Ty::Void {
            out.push_str(&format!("returns {};\n", self.returns));
        }
        out
    }
}

struct EnvParser<'t> {
    tokens: Vec<(usize, &'t str)>,
    at: usize,
    last_line: usize,
}

impl<'t> EnvParser<'t> {
    fn new(text: &'t str) -> Self {
        let mut tokens = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split("//").next().unwrap();
            let mut start = None;
            for (i, c) in line.char_indices() {
                let word = c.is_ascii_alphanumeric() || c == '_';
                match (word, start) {
                    (true, None) => start = Some(i),
                    (false, Some(s)) => {
                        tokens.push((idx + 1, &line[s..i]));
                        start = None;
                    }
                    _ => {}
                }
                if !word && !c.is_whitespace() {
                    tokens.push((idx + 1, &line[i..i + c.len_utf8()]));
                }
            }
            if let Some(s) = start {
                tokens.push((idx + 1, &line[s..]));
            }
        }
        let last_line = text.lines().count().max(1);
        EnvParser {
            tokens,
            at: 0,
            last_line,
        }
    }

    fn line(&self) -> usize {
        self.tokens.get(self.at).map_or(self.last_line, |t| t.0)
    }

    fn error(&self, message: impl Into<String>) -> EnvError {
        EnvError {
            line: self.line(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&'t str> {
        self.tokens.get(self.at).map(|t| t.1)
    }

    fn next(&mut self) -> Result<&'t str, EnvError> {
        let t = self.peek().ok_or_else(|| self.error("unexpected end of environment"))?;
        self.at += 1;
        Ok(t)
    }

    fn expect(&mut self, want: &str) -> Result<(), EnvError> {
        match self.peek() {
            Some(t) if t == want => {
                self.at += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected `{want}`, found `{t}`"))),
            None => Err(self.error(format!("expected `{want}` at end of environment"))),
        }
    }

    fn name(&mut self) -> Result<Arc<str>, EnvError> {
        let t = self.next()?;
        let ok = t.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_');
        if !ok || super::KEYWORDS.contains(&t) {
            self.at -= 1;
            return Err(self.error(format!("expected a name, found `{t}`")));
        }
        Ok(t.into())
    }

    fn ty(&mut self, allow_void: bool) -> Result<Ty, EnvError> {
        let n = self.name()?;
        Ok(match &*n {
            INT => Ty::Int,
            "void" if allow_void => Ty::Void,
            "void" => {
                self.at -= 1;
                return Err(self.error("`void` is only a return type"));
            }
            _ => Ty::Class(n),
        })
    }

    fn types(&mut self) -> Result<Vec<Ty>, EnvError> {
        self.expect("(")?;
        let mut out = Vec::new();
        if self.peek() == Some(")") {
            self.at += 1;
            return Ok(out);
        }
        loop {
            out.push(self.ty(false)?);
            match self.next()? {
                "," => continue,
                ")" => return Ok(out),
                t => {
                    self.at -= 1;
                    return Err(self.error(format!("expected `,` or `)`, found `{t}`")));
                }
            }
        }
    }

    fn parse(mut self) -> Result<MjEnv, EnvError> {
        let mut classes: Vec<ClassDecl> = Vec::new();
        let mut vars: Vec<(Arc<str>, Ty, usize)> = Vec::new();
        let mut returns = None;
        let mut class_lines = Vec::new();
        while let Some(t) = self.peek() {
            let line = self.line();
            match t {
                "class" => {
                    self.at += 1;
                    let name = self.name()?;
                    let superclass = if self.peek() == Some(":") {
                        self.at += 1;
                        Some(self.name()?)
                    } else {
                        None
                    };
                    self.expect("{")?;
                    let mut decl = ClassDecl {
                        name,
                        superclass,
                        fields: vec![],
                        methods: vec![],
                        ctors: vec![],
                    };
                    loop {
                        match self.next()? {
                            "}" => break,
                            "field" => {
                                let ty = self.ty(false)?;
                                let name = self.name()?;
                                if decl.fields.iter().any(|(n, _)| *n == name) {
                                    return Err(self.error(format!("field `{name}` declared twice")));
                                }
                                self.expect(";")?;
                                decl.fields.push((name, ty));
                            }
                            "method" => {
                                let ret = self.ty(true)?;
                                let name = self.name()?;
                                let params = self.types()?;
                                self.expect(";")?;
                                if decl.methods.iter().any(|m| m.name == name && m.params == params) {
                                    return Err(self.error(format!("method `{name}` declared twice")));
                                }
                                decl.methods.push(MethodSig { name, params, ret });
                            }
                            "ctor" => {
                                let params = self.types()?;
                                self.expect(";")?;
                                decl.ctors.push(params);
                            }
                            other => {
                                self.at -= 1;
                                return Err(self.error(format!("expected `field`, `method`, `ctor` or `}}`, found `{other}`")));
                            }
                        }
                    }
                    classes.push(decl);
                    class_lines.push(line);
                }
                "var" => {
                    self.at += 1;
                    let name = self.name()?;
                    self.expect(":")?;
                    let ty = self.ty(false)?;
                    self.expect(";")?;
                    if vars.iter().any(|(n, _, _)| *n == name) {
                        return Err(EnvError {
                            line,
                            message: format!("variable `{name}` declared twice"),
                        });
                    }
                    vars.push((name, ty, line));
                }
                "returns" => {
                    self.at += 1;
                    let ty = self.ty(true)?;
                    self.expect(";")?;
                    if returns.replace(ty).is_some() {
                        return Err(EnvError {
                            line,
                            message: "return type declared twice".into(),
                        });
                    }
                }
                other => return Err(self.error(format!("expected `class`, `var` or `returns`, found `{other}`"))),
            }
        }
        let table = ClassTable::new(classes).map_err(|message| EnvError {
            line: *class_lines.last().unwrap_or(&1),
            message,
        })?;
        let mut env = MjEnv {
            classes: table,
            vars: vec![],
            returns: returns.unwrap_or(Ty::Void),
        };
        let known = |env: &MjEnv, t: &Ty| !matches!(t, Ty::Class(c) if !env.classes.has_class(c));
        if !known(&env, &env.returns) {
            return Err(EnvError {
                line: self.last_line,
                message: format!("return type `{}` is not declared", env.returns),
            });
        }
        for (name, ty, line) in vars {
            if env.is_reserved(&name) {
                return Err(EnvError {
                    line,
                    message: format!("`{name}` cannot name a variable"),
                });
            }
            if !known(&env, &ty) {
                return Err(EnvError {
                    line,
                    message: format!("type `{ty}` is not declared"),
                });
            }
            env.vars.push((name, ty));
        }
        Ok(env)
    }
}
