//! Recursive-descent parser and elaborator for pipeline source files.
//!
//! Parsing produces a small syntax tree per function. Elaboration then
//! resolves bindings in dependency order (so bindings may appear in any
//! order, and cyclic definitions are reported), binds static parameters,
//! and type-checks every application.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::frontend::ast::{FnRef, Function, Node, NodeId, NodeKind, Op, Program, Span};
use crate::frontend::lexer::{tokenize, Tok, Token};
use crate::frontend::typing::{type_apply, type_fnref};
use crate::frontend::FrontendError;
use crate::types::{DataType, Rate};
use crate::value::{wrap, Value};

#[derive(Debug, Clone)]
enum SArg {
    Int(i64, Span),
    Named(String, String, Span),
    Func(String, Vec<SArg>, Span),
}

impl SArg {
    fn span(&self) -> Span {
        match self {
            SArg::Int(_, s) | SArg::Named(_, _, s) | SArg::Func(_, _, s) => *s,
        }
    }
}

#[derive(Debug, Clone)]
enum Lit {
    Int(i128),
    Bool(bool),
    List(Vec<Lit>),
    Tuple(Vec<Lit>),
}

#[derive(Debug, Clone)]
enum Expr {
    Var(String, Span),
    Const(DataType, Lit, Span),
    Call {
        name: String,
        statics: Option<Vec<SArg>>,
        args: Vec<Expr>,
        span: Span,
    },
    Index(Box<Expr>, u32, Span),
}

#[derive(Debug, Clone)]
struct FnAst {
    name: String,
    param: String,
    input_ty: DataType,
    stmts: Vec<(String, Expr, Span)>,
    ret: Expr,
    span: Span,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn syntax(span: Span, msg: impl Into<String>) -> FrontendError {
    FrontendError::Syntax {
        span,
        msg: msg.into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FrontendError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(
                self.span(),
                format!("expected '{c}', found {}", describe(self.peek())),
            ))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), FrontendError> {
        let span = self.span();
        match self.bump().tok {
            Tok::Ident(s) => Ok((s, span)),
            other => Err(syntax(
                span,
                format!("expected identifier, found {}", describe(&other)),
            )),
        }
    }

    fn int(&mut self) -> Result<i64, FrontendError> {
        let span = self.span();
        let neg = self.eat('-');
        match self.bump().tok {
            Tok::Number(s) => {
                let v: i64 = s
                    .parse()
                    .map_err(|_| syntax(span, format!("expected integer, found {s}")))?;
                Ok(if neg { -v } else { v })
            }
            other => Err(syntax(
                span,
                format!("expected integer, found {}", describe(&other)),
            )),
        }
    }

    fn uint(&mut self) -> Result<u32, FrontendError> {
        let span = self.span();
        let v = self.int()?;
        u32::try_from(v)
            .map_err(|_| syntax(span, format!("expected non-negative integer, found {v}")))
    }

    fn program(&mut self) -> Result<Vec<FnAst>, FrontendError> {
        let mut fns = Vec::new();
        while *self.peek() != Tok::Eof {
            fns.push(self.function()?);
        }
        Ok(fns)
    }

    fn function(&mut self) -> Result<FnAst, FrontendError> {
        let (kw, span) = self.ident()?;
        if kw != "fn" {
            return Err(syntax(span, format!("expected 'fn', found {kw}")));
        }
        let (name, _) = self.ident()?;
        self.expect('(')?;
        let (param, _) = self.ident()?;
        self.expect(':')?;
        let input_ty = self.ty()?;
        self.expect(')')?;
        self.expect('{')?;
        let mut stmts = Vec::new();
        loop {
            let s = self.span();
            if matches!(self.peek(), Tok::Ident(k) if k == "return") {
                self.bump();
                let ret = self.expr()?;
                self.expect(';')?;
                self.expect('}')?;
                return Ok(FnAst {
                    name,
                    param,
                    input_ty,
                    stmts,
                    ret,
                    span,
                });
            }
            let (lhs, _) = self.ident()?;
            self.expect('=')?;
            let e = self.expr()?;
            self.expect(';')?;
            stmts.push((lhs, e, s));
        }
    }

    fn ty(&mut self) -> Result<DataType, FrontendError> {
        let span = self.span();
        let mut t = if self.eat('(') {
            let mut elems = vec![self.ty()?];
            while self.eat(',') {
                if *self.peek() == Tok::Punct(')') {
                    break;
                }
                elems.push(self.ty()?);
            }
            self.expect(')')?;
            DataType::tuple(elems)
        } else {
            let (id, span) = self.ident()?;
            scalar_type(self, &id, span)?
        };
        while self.eat('[') {
            if *self.peek() == Tok::LtEq {
                self.bump();
                let w = self.uint()?;
                self.expect(',')?;
                let h = self.uint()?;
                self.expect(']')?;
                t = DataType::sparse(t, w, h);
            } else {
                let w = self.uint()?;
                let h = if self.eat(',') { self.uint()? } else { 1 };
                self.expect(']')?;
                t = DataType::array(t, w, h);
            }
        }
        t.check().map_err(|e| FrontendError::Type {
            span,
            msg: e.to_string(),
        })?;
        Ok(t)
    }

    fn statics(&mut self) -> Result<Vec<SArg>, FrontendError> {
        self.expect('<')?;
        let mut out = Vec::new();
        if self.eat('>') {
            return Ok(out);
        }
        loop {
            out.push(self.sarg()?);
            if self.eat('>') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn sarg(&mut self) -> Result<SArg, FrontendError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(_) | Tok::Punct('-') => Ok(SArg::Int(self.int()?, span)),
            Tok::Ident(name) => {
                self.bump();
                if self.eat('=') {
                    let mut text = String::new();
                    if self.eat('-') {
                        text.push('-');
                    }
                    match self.bump().tok {
                        Tok::Number(n) => text.push_str(&n),
                        other => {
                            return Err(syntax(
                                span,
                                format!("expected number, found {}", describe(&other)),
                            ))
                        }
                    }
                    if self.eat('/') {
                        match self.bump().tok {
                            Tok::Number(n) => {
                                text.push('/');
                                text.push_str(&n);
                            }
                            other => {
                                return Err(syntax(
                                    span,
                                    format!("expected number, found {}", describe(&other)),
                                ))
                            }
                        }
                    }
                    return Ok(SArg::Named(name, text, span));
                }
                let inner = if *self.peek() == Tok::Punct('<') {
                    self.statics()?
                } else {
                    vec![]
                };
                Ok(SArg::Func(name, inner, span))
            }
            other => Err(syntax(
                span,
                format!("unexpected {} in static parameters", describe(&other)),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.primary()?;
        while *self.peek() == Tok::Punct('[') {
            let span = self.span();
            self.bump();
            let i = self.uint()?;
            self.expect(']')?;
            e = Expr::Index(Box::new(e), i, span);
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let span = self.span();
        if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        let (name, span) = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            other => {
                return Err(syntax(
                    span,
                    format!("expected expression, found {}", describe(other)),
                ))
            }
        };
        if name == "Const" {
            self.expect('(')?;
            let ty = self.ty()?;
            self.expect(',')?;
            let lit = self.lit()?;
            self.expect(')')?;
            return Ok(Expr::Const(ty, lit, span));
        }
        let statics = if *self.peek() == Tok::Punct('<') {
            Some(self.statics()?)
        } else {
            None
        };
        if *self.peek() != Tok::Punct('(') {
            if statics.is_some() {
                return Err(syntax(
                    self.span(),
                    format!("expected '(' after {name}<...>"),
                ));
            }
            return Ok(Expr::Var(name, span));
        }
        self.bump();
        let mut args = Vec::new();
        if !self.eat(')') {
            loop {
                args.push(self.expr()?);
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
        }
        Ok(Expr::Call {
            name,
            statics,
            args,
            span,
        })
    }

    fn lit(&mut self) -> Result<Lit, FrontendError> {
        let span = self.span();
        if self.eat('[') {
            let mut items = Vec::new();
            if !self.eat(']') {
                loop {
                    items.push(self.lit()?);
                    if self.eat(']') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
            return Ok(Lit::List(items));
        }
        if self.eat('(') {
            let mut items = vec![self.lit()?];
            while self.eat(',') {
                if *self.peek() == Tok::Punct(')') {
                    break;
                }
                items.push(self.lit()?);
            }
            self.expect(')')?;
            return Ok(Lit::Tuple(items));
        }
        let r = match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Lit::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Lit::Bool(false))
            }
            _ => self.int().map(|v| Lit::Int(v as i128)),
        };
        r.map_err(|e: FrontendError| match e {
            FrontendError::Syntax { msg, .. } => syntax(span, format!("bad literal: {msg}")),
            other => other,
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Number(s) => format!("number {s}"),
        Tok::Punct(c) => format!("'{c}'"),
        Tok::LtEq => "'<='".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn scalar_type(p: &mut Parser, id: &str, span: Span) -> Result<DataType, FrontendError> {
    if id == "bool" {
        return Ok(DataType::Bool);
    }
    if id == "Uint" || id == "Int" {
        p.expect('(')?;
        let bits = p.uint()?;
        p.expect(',')?;
        let exp = p.int()? as i32;
        p.expect(')')?;
        return Ok(if id == "Uint" {
            DataType::UInt { bits, exp }
        } else {
            DataType::Int { bits, exp }
        });
    }
    let (head, digits) = id.split_at(1);
    if let Ok(n) = digits.parse::<u32>() {
        match head {
            "u" => return Ok(DataType::uint(n)),
            "i" => return Ok(DataType::int(n)),
            "b" => return Ok(DataType::Bits { n }),
            _ => {}
        }
    }
    Err(syntax(span, format!("unknown type {id}")))
}

fn lit_to_value(lit: &Lit, ty: &DataType, span: Span) -> Result<Value, FrontendError> {
    let bad = |msg: String| FrontendError::Type { span, msg };
    match (lit, ty) {
        (
            Lit::Int(v),
            t @ (DataType::UInt { .. } | DataType::Int { .. } | DataType::Bits { .. }),
        ) => {
            if wrap(*v, t) != *v {
                return Err(bad(format!("constant {v} does not fit {t}")));
            }
            Ok(Value::Int(*v))
        }
        (Lit::Bool(b), DataType::Bool) => Ok(Value::Bool(*b)),
        (Lit::List(items), DataType::Array2d { elem, w, h }) => {
            if items.len() != (*w * *h) as usize {
                return Err(bad(format!(
                    "{ty} constant needs {} elements, found {}",
                    w * h,
                    items.len()
                )));
            }
            let elems = items
                .iter()
                .map(|l| lit_to_value(l, elem, span))
                .collect::<Result<_, _>>()?;
            Ok(Value::array(*w, *h, elems))
        }
        (Lit::Tuple(items), DataType::Tuple { elems }) => {
            if items.len() != elems.len() {
                return Err(bad(format!(
                    "{ty} constant needs {} fields, found {}",
                    elems.len(),
                    items.len()
                )));
            }
            let vs = items
                .iter()
                .zip(elems)
                .map(|(l, t)| lit_to_value(l, t, span))
                .collect::<Result<_, _>>()?;
            Ok(Value::Tuple(vs))
        }
        _ => Err(bad(format!("literal does not match type {ty}"))),
    }
}

// ---------------------------------------------------------------------------
// elaboration
// ---------------------------------------------------------------------------

struct Elab<'a> {
    asts: &'a BTreeMap<String, FnAst>,
    done: BTreeMap<String, Function>,
    active: BTreeSet<String>,
}

impl Elab<'_> {
    fn sigs(&self) -> BTreeMap<String, (DataType, DataType)> {
        self.done
            .iter()
            .map(|(k, f)| (k.clone(), (f.input_ty.clone(), f.output_ty().clone())))
            .collect()
    }

    fn ensure(&mut self, name: &str, span: Span) -> Result<(), FrontendError> {
        if self.done.contains_key(name) {
            return Ok(());
        }
        if self.active.contains(name) {
            return Err(FrontendError::Cycle {
                span,
                msg: format!("function {name} calls itself"),
            });
        }
        let ast = self
            .asts
            .get(name)
            .ok_or_else(|| FrontendError::UnknownOperator {
                span,
                name: name.to_string(),
            })?;
        self.active.insert(name.to_string());
        let f = FnBuilder::run(self, ast)?;
        self.active.remove(name);
        self.done.insert(name.to_string(), f);
        Ok(())
    }

    fn is_user(&self, name: &str) -> bool {
        self.asts.contains_key(name)
    }

    fn fnref(&mut self, arg: &SArg, op: &str) -> Result<FnRef, FrontendError> {
        match arg {
            SArg::Func(name, inner, span) => {
                if self.is_user(name) {
                    if !inner.is_empty() {
                        return Err(FrontendError::StaticArity {
                            span: *span,
                            op: name.clone(),
                            expected: 0,
                            found: inner.len(),
                        });
                    }
                    self.ensure(name, *span)?;
                    Ok(FnRef::User(name.clone()))
                } else {
                    Ok(FnRef::Op(self.build_op(name, Some(inner), *span)?))
                }
            }
            other => Err(FrontendError::Type {
                span: other.span(),
                msg: format!("{op} expects a function as its static parameter"),
            }),
        }
    }

    fn build_op(
        &mut self,
        name: &str,
        statics: Option<&[SArg]>,
        span: Span,
    ) -> Result<Op, FrontendError> {
        let statics = statics.unwrap_or(&[]);
        let arity = |n: usize| -> Result<(), FrontendError> {
            if statics.len() != n {
                return Err(FrontendError::StaticArity {
                    span,
                    op: name.to_string(),
                    expected: n,
                    found: statics.len(),
                });
            }
            Ok(())
        };
        let ints = |n: usize| -> Result<Vec<i64>, FrontendError> {
            arity(n)?;
            statics
                .iter()
                .map(|s| match s {
                    SArg::Int(v, _) => Ok(*v),
                    SArg::Func(id, inner, sp) if inner.is_empty() => {
                        Err(FrontendError::UnboundStatic {
                            span: *sp,
                            name: id.clone(),
                        })
                    }
                    other => Err(FrontendError::Type {
                        span: other.span(),
                        msg: format!("{name} expects integer static parameters"),
                    }),
                })
                .collect()
        };
        let uints = |n: usize| -> Result<Vec<u32>, FrontendError> {
            ints(n)?
                .into_iter()
                .map(|v| {
                    u32::try_from(v).map_err(|_| FrontendError::Type {
                        span,
                        msg: format!("{name} expects non-negative static parameters, found {v}"),
                    })
                })
                .collect()
        };
        let op = match name {
            "Map" | "Reduce" => {
                arity(1)?;
                let f = Box::new(self.fnref(&statics[0], name)?);
                if name == "Map" {
                    Op::Map(f)
                } else {
                    Op::Reduce(f)
                }
            }
            "Stencil" => {
                let v = ints(4)?;
                Op::Stencil {
                    l: v[0] as i32,
                    r: v[1] as i32,
                    b: v[2] as i32,
                    t: v[3] as i32,
                }
            }
            "Pad" | "Crop" => {
                let v = uints(4)?;
                if name == "Pad" {
                    Op::Pad {
                        l: v[0],
                        r: v[1],
                        b: v[2],
                        t: v[3],
                    }
                } else {
                    Op::Crop {
                        l: v[0],
                        r: v[1],
                        b: v[2],
                        t: v[3],
                    }
                }
            }
            "Slice" => {
                let v = uints(4)?;
                Op::Slice {
                    x: v[0],
                    y: v[1],
                    w: v[2],
                    h: v[3],
                }
            }
            "Downsample" => {
                let v = uints(2)?;
                Op::Downsample { sx: v[0], sy: v[1] }
            }
            "Broadcast" => {
                let v = uints(2)?;
                Op::Broadcast { w: v[0], h: v[1] }
            }
            "FanOut" => Op::FanOut(uints(1)?[0]),
            "Index" => Op::Index(uints(1)?[0]),
            "AddMSBs" => Op::AddMSBs(uints(1)?[0]),
            "RemoveMSBs" => Op::RemoveMSBs(uints(1)?[0]),
            "Rshift" => Op::Rshift(uints(1)?[0]),
            "Lshift" => Op::Lshift(uints(1)?[0]),
            "Filter" => {
                if statics.is_empty() || statics.len() > 2 {
                    return Err(FrontendError::StaticArity {
                        span,
                        op: name.to_string(),
                        expected: 2,
                        found: statics.len(),
                    });
                }
                let mut rate = None;
                let mut burst = None;
                for s in statics {
                    match s {
                        SArg::Named(k, v, sp) if k == "rate" => {
                            rate = Some(v.parse::<Rate>().map_err(|e| FrontendError::Type {
                                span: *sp,
                                msg: e.to_string(),
                            })?)
                        }
                        SArg::Named(k, v, sp) if k == "burst" => {
                            burst = Some(v.parse::<u64>().map_err(|_| FrontendError::Type {
                                span: *sp,
                                msg: format!("burst must be a non-negative integer, found {v}"),
                            })?)
                        }
                        other => {
                            return Err(FrontendError::Type {
                                span: other.span(),
                                msg: "Filter takes rate=p/q and burst=n".into(),
                            })
                        }
                    }
                }
                match rate {
                    Some(rate) => Op::Filter { rate, burst },
                    None => {
                        return Err(FrontendError::Type {
                            span,
                            msg: "Filter needs rate=p/q".into(),
                        })
                    }
                }
            }
            _ => {
                let op = match name {
                    "Zip" => Op::Zip,
                    "FanIn" => Op::FanIn,
                    "Add" => Op::Add,
                    "AddAsync" => Op::AddAsync,
                    "Sub" => Op::Sub,
                    "Mul" => Op::Mul,
                    "AbsDiff" => Op::AbsDiff,
                    "Max" => Op::Max,
                    "Min" => Op::Min,
                    "Gt" => Op::Gt,
                    "Lt" => Op::Lt,
                    "Ge" => Op::Ge,
                    "Le" => Op::Le,
                    "Eq" => Op::Eq,
                    "And" => Op::And,
                    "Or" => Op::Or,
                    "Not" => Op::Not,
                    "Select" => Op::Select,
                    "ToInt" => Op::ToInt,
                    "ToUint" => Op::ToUint,
                    "ArgMin" => Op::ArgMin,
                    _ => {
                        return Err(FrontendError::UnknownOperator {
                            span,
                            name: name.to_string(),
                        })
                    }
                };
                arity(0)?;
                op
            }
        };
        Ok(op)
    }
}

struct FnBuilder<'a> {
    ast: &'a FnAst,
    nodes: Vec<Node>,
    bindings: HashMap<&'a str, (&'a Expr, Span)>,
    resolved: HashMap<&'a str, NodeId>,
    resolving: BTreeSet<&'a str>,
}

impl<'a> FnBuilder<'a> {
    fn run(elab: &mut Elab<'_>, ast: &'a FnAst) -> Result<Function, FrontendError> {
        let mut b = FnBuilder {
            ast,
            nodes: vec![Node {
                kind: NodeKind::Input,
                ty: ast.input_ty.clone(),
                name: Some(ast.param.clone()),
                span: ast.span,
            }],
            bindings: HashMap::new(),
            resolved: HashMap::new(),
            resolving: BTreeSet::new(),
        };
        for (name, e, span) in &ast.stmts {
            if name == &ast.param || b.bindings.insert(name.as_str(), (e, *span)).is_some() {
                return Err(FrontendError::Semantic {
                    span: *span,
                    msg: format!("{name} is bound twice"),
                });
            }
        }
        for (name, _, span) in &ast.stmts {
            b.var(elab, name, *span)?;
        }
        let output = b.expr(elab, &ast.ret)?;
        Ok(Function {
            name: ast.name.clone(),
            param: ast.param.clone(),
            input_ty: ast.input_ty.clone(),
            nodes: b.nodes,
            output,
        })
    }

    fn push(&mut self, kind: NodeKind, ty: DataType, span: Span) -> NodeId {
        self.nodes.push(Node {
            kind,
            ty,
            name: None,
            span,
        });
        self.nodes.len() - 1
    }

    fn var(
        &mut self,
        elab: &mut Elab<'_>,
        name: &str,
        span: Span,
    ) -> Result<NodeId, FrontendError> {
        if name == self.ast.param {
            return Ok(0);
        }
        if let Some(id) = self.resolved.get(name) {
            return Ok(*id);
        }
        let (key, (e, bspan)) = match self.bindings.get_key_value(name) {
            Some((k, v)) => (*k, *v),
            None => {
                return Err(FrontendError::UnknownVariable {
                    span,
                    name: name.to_string(),
                })
            }
        };
        if !self.resolving.insert(key) {
            return Err(FrontendError::Cycle {
                span: bspan,
                msg: format!("{name} depends on itself"),
            });
        }
        let id = self.expr(elab, e)?;
        self.resolving.remove(key);
        if self.nodes[id].name.is_none() {
            self.nodes[id].name = Some(name.to_string());
        }
        self.resolved.insert(key, id);
        Ok(id)
    }

    fn expr(&mut self, elab: &mut Elab<'_>, e: &Expr) -> Result<NodeId, FrontendError> {
        match e {
            Expr::Var(n, span) => self.var(elab, n, *span),
            Expr::Const(ty, lit, span) => {
                let v = lit_to_value(lit, ty, *span)?;
                Ok(self.push(NodeKind::Const(v), ty.clone(), *span))
            }
            Expr::Index(inner, i, span) => {
                let x = self.expr(elab, inner)?;
                let op = Op::Index(*i);
                let ty = type_apply(&op, &self.nodes[x].ty, &elab.sigs())
                    .map_err(|msg| FrontendError::Type { span: *span, msg })?;
                Ok(self.push(NodeKind::Apply(op, x), ty, *span))
            }
            Expr::Call {
                name,
                statics,
                args,
                span,
            } => {
                if args.is_empty() {
                    return Err(FrontendError::Semantic {
                        span: *span,
                        msg: format!("{name} needs an argument"),
                    });
                }
                let ids = args
                    .iter()
                    .map(|a| self.expr(elab, a))
                    .collect::<Result<Vec<_>, _>>()?;
                if name == "Concat" {
                    if statics.as_ref().is_some_and(|s| !s.is_empty()) {
                        return Err(FrontendError::StaticArity {
                            span: *span,
                            op: name.clone(),
                            expected: 0,
                            found: statics.as_ref().map_or(0, Vec::len),
                        });
                    }
                    let ty =
                        DataType::tuple(ids.iter().map(|i| self.nodes[*i].ty.clone()).collect());
                    return Ok(self.push(NodeKind::Concat(ids), ty, *span));
                }
                let arg = if ids.len() == 1 {
                    ids[0]
                } else {
                    let ty =
                        DataType::tuple(ids.iter().map(|i| self.nodes[*i].ty.clone()).collect());
                    self.push(NodeKind::Concat(ids), ty, *span)
                };
                let argty = self.nodes[arg].ty.clone();
                if elab.is_user(name) {
                    if statics.as_ref().is_some_and(|s| !s.is_empty()) {
                        return Err(FrontendError::StaticArity {
                            span: *span,
                            op: name.clone(),
                            expected: 0,
                            found: statics.as_ref().map_or(0, Vec::len),
                        });
                    }
                    elab.ensure(name, *span)?;
                    let ty = type_fnref(&FnRef::User(name.clone()), &argty, &elab.sigs())
                        .map_err(|msg| FrontendError::Type { span: *span, msg })?;
                    return Ok(self.push(NodeKind::Call(name.clone(), arg), ty, *span));
                }
                let op = elab.build_op(name, statics.as_deref(), *span)?;
                let ty = type_apply(&op, &argty, &elab.sigs())
                    .map_err(|msg| FrontendError::Type { span: *span, msg })?;
                Ok(self.push(NodeKind::Apply(op, arg), ty, *span))
            }
        }
    }
}

/// Parses and elaborates a pipeline file. The function named `main` is the top level.
pub fn parse_pipeline(src: &str) -> Result<Program, FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let fns = p.program()?;
    let mut asts = BTreeMap::new();
    for f in fns {
        if asts.contains_key(&f.name) {
            return Err(FrontendError::Semantic {
                span: f.span,
                msg: format!("function {} defined twice", f.name),
            });
        }
        asts.insert(f.name.clone(), f);
    }
    if !asts.contains_key("main") {
        return Err(FrontendError::Semantic {
            span: Span { line: 1, col: 1 },
            msg: "no main function".into(),
        });
    }
    let mut elab = Elab {
        asts: &asts,
        done: BTreeMap::new(),
        active: BTreeSet::new(),
    };
    for (name, f) in &asts {
        elab.ensure(name, f.span)?;
    }
    Ok(Program {
        functions: elab.done,
        main: "main".into(),
    })
}

/// Parses a type written in pipeline syntax, e.g. `u8[8,8]` or `(u8,i9)[<=4,4]`.
pub fn parse_type(src: &str) -> Result<DataType, FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return Err(syntax(p.span(), "trailing input after type"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_types() {
        let p =
            parse_pipeline("fn main(x: u8[1936,1088]) { out = Crop<12,4,8,0>(x); return out; }")
                .unwrap();
        assert_eq!(p.main_fn().output_ty().to_string(), "u8[1920,1080]");
    }

    #[test]
    fn identity() {
        let p = parse_pipeline("fn main(x: u8[4,4]) { out = x; return out; }").unwrap();
        let f = p.main_fn();
        assert_eq!(f.nodes.len(), 1);
        assert_eq!(f.output, 0);
    }

    #[test]
    fn static_arity_error() {
        let e = parse_pipeline("fn main(x: u8[8,8]) {\n  out = Crop<12,4>(x);\n  return out; }")
            .unwrap_err();
        assert!(
            matches!(
                e,
                FrontendError::StaticArity {
                    expected: 4,
                    found: 2,
                    ..
                }
            ),
            "{e}"
        );
        assert_eq!(e.span().line, 2);
    }

    #[test]
    fn unbound_and_unknown() {
        let e = parse_pipeline("fn main(x: u8[8,8]) { return Crop<n,0,0,0>(x); }").unwrap_err();
        assert!(matches!(e, FrontendError::UnboundStatic { .. }), "{e}");
        let e = parse_pipeline("fn main(x: u8[8,8]) { return Blur(x); }").unwrap_err();
        assert!(matches!(e, FrontendError::UnknownOperator { .. }), "{e}");
        let e = parse_pipeline(
            "fn main(x: u8[8,8]) { a = Map<Rshift<1>>(b); b = Map<Rshift<1>>(a); return a; }",
        )
        .unwrap_err();
        assert!(matches!(e, FrontendError::Cycle { .. }), "{e}");
    }

    #[test]
    fn multi_arg_sugar_and_index() {
        let src = "fn main(x: u8[4,4]) { z = Zip(x, x); y = Map<Add>(z); return y; }";
        let p = parse_pipeline(src).unwrap();
        assert_eq!(p.main_fn().output_ty().to_string(), "u9[4,4]");
        let src =
            "fn f(p: (u8,u8)) { return p[1]; } fn main(x: (u8,u8)[4,4]) { return Map<f>(x); }";
        let p = parse_pipeline(src).unwrap();
        assert_eq!(p.main_fn().output_ty().to_string(), "u8[4,4]");
    }

    #[test]
    fn types_and_constants() {
        assert_eq!(
            parse_type("(u8,i9)[<=4,4]").unwrap().to_string(),
            "(u8,i9)[<=4,4]"
        );
        assert_eq!(
            parse_type("u8[3]").unwrap(),
            DataType::array(DataType::uint(8), 3, 1)
        );
        assert_eq!(parse_type("(u8,)").unwrap().to_string(), "(u8,)");
        let e = parse_pipeline("fn main(x: u8) { c = Const(u8[2,1], [1, 300]); return x; }")
            .unwrap_err();
        assert!(matches!(e, FrontendError::Type { .. }));
        let ok = parse_pipeline(
            "fn main(x: u8) { c = Const((u8,bool)[2,1], [(1,true),(2,false)]); return c; }",
        );
        assert!(ok.is_ok());
    }
}
