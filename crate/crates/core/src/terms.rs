//! Signatures, terms over a signature and a generator set, and the prefix
//! S-expression syntax used everywhere for reading and writing them.
//!
//! Syntax: a generator or constant is a bare token; an application is
//! `(symbol child ..)`. Scalar multiplication by a rational `q` is written
//! `(scale q child)`, and `(gen name)` always denotes a generator.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::rational::{fmt_q, parse_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("unknown symbol `{name}` at {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("`{name}` expects {expected} argument(s), found {found} at {pos}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("unbalanced parentheses at {pos}")]
    Unbalanced { pos: usize },
    #[error("unexpected `{token}` at {pos}")]
    Unexpected { token: String, pos: usize },
    #[error("bad scalar `{token}` at {pos}")]
    BadScalar { token: String, pos: usize },
    #[error("empty input")]
    Empty,
    #[error("generator `{0}` has no binding")]
    Unbound(String),
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("invalid generator set: {0}")]
    Generators(String),
}

/// Operation symbol. The scalar family `m_q` carries its rational index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Named(Arc<str>),
    Scale(Q),
}

impl Op {
    pub fn named(name: &str) -> Op {
        Op::Named(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        match self {
            Op::Named(n) => n,
            Op::Scale(_) => SCALE,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Named(n) => f.write_str(n),
            Op::Scale(q) => write!(f, "scale {}", fmt_q(q)),
        }
    }
}

pub const SCALE: &str = "scale";
pub const GEN: &str = "gen";

pub mod sym {
    pub const ZERO: &str = "zero";
    pub const ONE: &str = "one";
    pub const PLUS: &str = "plus";
    pub const NEG: &str = "neg";
    pub const DOT: &str = "dot";
    pub const WEDGE: &str = "wedge";
    pub const VEE: &str = "vee";
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolDecl {
    pub name: Arc<str>,
    pub arity: usize,
}

/// A type `(F, rho)`: named symbols with arities, optionally the unary scalar family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    symbols: Vec<SymbolDecl>,
    scale_family: bool,
}

fn valid_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == '(' || c == ')' || c == ';')
}

impl Signature {
    pub fn new(symbols: Vec<(&str, usize)>, scale_family: bool) -> Result<Self, TermError> {
        let mut seen = HashSet::new();
        let mut decls = Vec::with_capacity(symbols.len());
        for (name, arity) in symbols {
            if !valid_token(name) || name == GEN || name == SCALE {
                return Err(TermError::Signature(format!("bad symbol name `{name}`")));
            }
            if !seen.insert(name.to_string()) {
                return Err(TermError::Signature(format!("duplicate symbol `{name}`")));
            }
            decls.push(SymbolDecl {
                name: Arc::from(name),
                arity,
            });
        }
        if decls.is_empty() && !scale_family {
            return Err(TermError::Signature("no symbols".into()));
        }
        Ok(Signature {
            symbols: decls,
            scale_family,
        })
    }

    pub fn lattice() -> Self {
        Signature::new(vec![(sym::WEDGE, 2), (sym::VEE, 2)], false).unwrap()
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn has_scale_family(&self) -> bool {
        self.scale_family
    }

    pub fn arity_of_name(&self, name: &str) -> Option<usize> {
        if name == SCALE && self.scale_family {
            return Some(1);
        }
        self.symbols.iter().find(|s| &*s.name == name).map(|s| s.arity)
    }

    pub fn arity(&self, op: &Op) -> Option<usize> {
        match op {
            Op::Named(n) => self.symbols.iter().find(|s| s.name == *n).map(|s| s.arity),
            Op::Scale(_) => self.scale_family.then_some(1),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.iter().any(|s| &*s.name == name)
    }

    pub fn constants(&self) -> impl Iterator<Item = &SymbolDecl> {
        self.symbols.iter().filter(|s| s.arity == 0)
    }

    /// Named operations plus one `scale q` op per supplied scalar.
    pub fn ops_with_scalars(&self, scalars: &[Q]) -> Vec<(Op, usize)> {
        let mut ops: Vec<(Op, usize)> = self
            .symbols
            .iter()
            .map(|s| (Op::Named(s.name.clone()), s.arity))
            .collect();
        if self.scale_family {
            ops.extend(scalars.iter().map(|q| (Op::Scale(q.clone()), 1)));
        }
        ops
    }

    pub fn is_subsignature_of(&self, other: &Signature) -> bool {
        (!self.scale_family || other.scale_family)
            && self
                .symbols
                .iter()
                .all(|s| other.arity_of_name(&s.name) == Some(s.arity))
    }

    /// One `name arity` line per symbol; `scale 1` declares the scalar family.
    pub fn parse(text: &str) -> Result<Self, TermError> {
        let mut syms: Vec<(String, usize)> = Vec::new();
        let mut scale = false;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(name), Some(ar), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(TermError::Signature(format!("bad line `{line}`")));
            };
            let arity: usize = ar
                .parse()
                .map_err(|_| TermError::Signature(format!("bad arity in `{line}`")))?;
            if name == SCALE {
                if arity != 1 {
                    return Err(TermError::Signature("scale family must be unary".into()));
                }
                scale = true;
            } else {
                syms.push((name.to_string(), arity));
            }
        }
        Signature::new(syms.iter().map(|(n, a)| (n.as_str(), *a)).collect(), scale)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.symbols {
            out.push_str(&format!("{} {}\n", s.name, s.arity));
        }
        if self.scale_family {
            out.push_str("scale 1\n");
        }
        out
    }
}

/// A finite non-empty set of generator tokens disjoint from the signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    ids: Vec<Arc<str>>,
}

impl GeneratorSet {
    pub fn new<S: AsRef<str>>(ids: &[S], sig: &Signature) -> Result<Self, TermError> {
        if ids.is_empty() {
            return Err(TermError::Generators("empty".into()));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for id in ids {
            let id = id.as_ref();
            if !valid_token(id) || id == GEN || id == SCALE {
                return Err(TermError::Generators(format!("bad token `{id}`")));
            }
            if sig.contains(id) {
                return Err(TermError::Generators(format!("`{id}` is a signature symbol")));
            }
            if !seen.insert(id) {
                return Err(TermError::Generators(format!("duplicate `{id}`")));
            }
            out.push(Arc::from(id));
        }
        Ok(GeneratorSet { ids: out })
    }

    /// The variable pool `v1..vk`.
    pub fn variables(k: usize) -> Self {
        GeneratorSet {
            ids: (1..=k).map(|i| Arc::from(format!("v{i}").as_str())).collect(),
        }
    }

    pub fn ids(&self) -> &[Arc<str>] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.iter().any(|g| &**g == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|g| &**g == id)
    }
}

#[derive(Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Gen(Arc<str>),
    Apply(Op, Vec<Term>),
}

/// Immutable term tree with structural equality and hashing.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(Arc<Node>);

impl Term {
    pub fn gen(name: &str) -> Term {
        Term(Arc::new(Node::Gen(Arc::from(name))))
    }

    pub fn gen_arc(name: Arc<str>) -> Term {
        Term(Arc::new(Node::Gen(name)))
    }

    pub fn apply(op: Op, children: Vec<Term>) -> Term {
        Term(Arc::new(Node::Apply(op, children)))
    }

    pub fn op(name: &str, children: Vec<Term>) -> Term {
        Term::apply(Op::named(name), children)
    }

    pub fn constant(name: &str) -> Term {
        Term::op(name, Vec::new())
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn as_gen(&self) -> Option<&str> {
        match &*self.0 {
            Node::Gen(g) => Some(g),
            Node::Apply(..) => None,
        }
    }

    pub fn children(&self) -> &[Term] {
        match &*self.0 {
            Node::Gen(_) => &[],
            Node::Apply(_, c) => c,
        }
    }

    pub fn head(&self) -> Option<&Op> {
        match &*self.0 {
            Node::Gen(_) => None,
            Node::Apply(op, _) => Some(op),
        }
    }

    /// Zero for generators and constants, otherwise one more than the tallest child.
    pub fn height(&self) -> usize {
        match &*self.0 {
            Node::Gen(_) => 0,
            Node::Apply(_, c) => c.iter().map(|t| t.height() + 1).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Term::size).sum::<usize>()
    }

    /// Generators in order of first occurrence.
    pub fn generators(&self) -> Vec<Arc<str>> {
        fn walk(t: &Term, seen: &mut HashSet<Arc<str>>, out: &mut Vec<Arc<str>>) {
            match &*t.0 {
                Node::Gen(g) => {
                    if seen.insert(g.clone()) {
                        out.push(g.clone());
                    }
                }
                Node::Apply(_, c) => c.iter().for_each(|t| walk(t, seen, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut HashSet::new(), &mut out);
        out
    }

    /// Distinct subterms, children before parents.
    pub fn subterms(&self) -> Vec<Term> {
        fn walk(t: &Term, seen: &mut HashSet<Term>, out: &mut Vec<Term>) {
            if seen.contains(t) {
                return;
            }
            for c in t.children() {
                walk(c, seen, out);
            }
            seen.insert(t.clone());
            out.push(t.clone());
        }
        let mut out = Vec::new();
        walk(self, &mut HashSet::new(), &mut out);
        out
    }

    pub fn ops(&self) -> Vec<Op> {
        let mut out: Vec<Op> = Vec::new();
        for t in self.subterms() {
            if let Some(op) = t.head() {
                if !out.contains(op) {
                    out.push(op.clone());
                }
            }
        }
        out
    }

    pub fn check(&self, sig: &Signature) -> Result<(), TermError> {
        match &*self.0 {
            Node::Gen(_) => Ok(()),
            Node::Apply(op, c) => {
                let expected = sig.arity(op).ok_or_else(|| TermError::UnknownSymbol {
                    name: op.name().to_string(),
                    pos: 0,
                })?;
                if expected != c.len() {
                    return Err(TermError::Arity {
                        name: op.name().to_string(),
                        expected,
                        found: c.len(),
                        pos: 0,
                    });
                }
                c.iter().try_for_each(|t| t.check(sig))
            }
        }
    }

    /// Simultaneous replacement of generators.
    pub fn substitute(&self, binding: &HashMap<Arc<str>, Term>) -> Result<Term, TermError> {
        match &*self.0 {
            Node::Gen(g) => binding
                .get(g)
                .cloned()
                .ok_or_else(|| TermError::Unbound(g.to_string())),
            Node::Apply(op, c) => Ok(Term::apply(
                op.clone(),
                c.iter()
                    .map(|t| t.substitute(binding))
                    .collect::<Result<_, _>>()?,
            )),
        }
    }

    /// Like [`Term::substitute`] but leaves unbound generators in place.
    pub fn substitute_partial(&self, binding: &HashMap<Arc<str>, Term>) -> Term {
        match &*self.0 {
            Node::Gen(g) => binding.get(g).cloned().unwrap_or_else(|| self.clone()),
            Node::Apply(op, c) => Term::apply(
                op.clone(),
                c.iter().map(|t| t.substitute_partial(binding)).collect(),
            ),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Gen(g) => {
                if g.starts_with(|c: char| c.is_ascii_digit() || c == '-') {
                    write!(f, "(gen {g})")
                } else {
                    f.write_str(g)
                }
            }
            Node::Apply(op, c) if c.is_empty() => write!(f, "{op}"),
            Node::Apply(op, c) => {
                write!(f, "({op}")?;
                for t in c {
                    write!(f, " {t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Shorthands for building terms in the ordered-algebra signatures.
pub mod build {
    use super::*;

    pub fn v(name: &str) -> Term {
        Term::gen(name)
    }
    pub fn zero() -> Term {
        Term::constant(sym::ZERO)
    }
    pub fn one() -> Term {
        Term::constant(sym::ONE)
    }
    pub fn plus(a: Term, b: Term) -> Term {
        Term::op(sym::PLUS, vec![a, b])
    }
    pub fn neg(a: Term) -> Term {
        Term::op(sym::NEG, vec![a])
    }
    pub fn minus(a: Term, b: Term) -> Term {
        plus(a, neg(b))
    }
    pub fn scale(q: Q, a: Term) -> Term {
        Term::apply(Op::Scale(q), vec![a])
    }
    pub fn dot(a: Term, b: Term) -> Term {
        Term::op(sym::DOT, vec![a, b])
    }
    pub fn wedge(a: Term, b: Term) -> Term {
        Term::op(sym::WEDGE, vec![a, b])
    }
    pub fn vee(a: Term, b: Term) -> Term {
        Term::op(sym::VEE, vec![a, b])
    }
    pub fn abs(a: Term) -> Term {
        vee(a.clone(), neg(a))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(usize),
    Close(usize),
    Atom(String, usize),
}

fn tokenize(src: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                out.push(Tok::Open(i));
                chars.next();
            }
            ')' => {
                out.push(Tok::Close(i));
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let start = i;
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push(Tok::Atom(s, start));
            }
        }
    }
    out
}

enum GenMode<'a> {
    Strict(&'a GeneratorSet),
    Open,
}

struct Parser<'a> {
    toks: Vec<Tok>,
    at: usize,
    sig: &'a Signature,
    mode: GenMode<'a>,
    len: usize,
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        match self.toks.get(self.at) {
            Some(Tok::Open(p)) | Some(Tok::Close(p)) | Some(Tok::Atom(_, p)) => *p,
            None => self.len,
        }
    }

    fn generator(&self, name: &str, pos: usize) -> Result<Term, TermError> {
        match self.mode {
            GenMode::Open => {
                if !valid_token(name) || name == SCALE || name == GEN {
                    return Err(TermError::Unexpected {
                        token: name.to_string(),
                        pos,
                    });
                }
                Ok(Term::gen(name))
            }
            GenMode::Strict(gens) if gens.contains(name) => Ok(Term::gen(name)),
            GenMode::Strict(_) => Err(TermError::UnknownSymbol {
                name: name.to_string(),
                pos,
            }),
        }
    }

    fn atom(&self, name: &str, pos: usize) -> Result<Term, TermError> {
        match self.sig.arity_of_name(name) {
            Some(0) if name != SCALE => Ok(Term::constant(name)),
            Some(expected) => Err(TermError::Arity {
                name: name.to_string(),
                expected,
                found: 0,
                pos,
            }),
            None => self.generator(name, pos),
        }
    }

    fn term(&mut self) -> Result<Term, TermError> {
        let pos = self.pos();
        match self.toks.get(self.at).cloned() {
            None => Err(if self.at == 0 {
                TermError::Empty
            } else {
                TermError::Unbalanced { pos }
            }),
            Some(Tok::Close(p)) => Err(TermError::Unbalanced { pos: p }),
            Some(Tok::Atom(name, p)) => {
                self.at += 1;
                self.atom(&name, p)
            }
            Some(Tok::Open(_)) => {
                self.at += 1;
                let (head, hpos) = match self.toks.get(self.at).cloned() {
                    Some(Tok::Atom(h, p)) => (h, p),
                    Some(Tok::Open(p)) => {
                        return Err(TermError::Unexpected {
                            token: "(".into(),
                            pos: p,
                        })
                    }
                    Some(Tok::Close(p)) => {
                        return Err(TermError::Unexpected {
                            token: ")".into(),
                            pos: p,
                        })
                    }
                    None => return Err(TermError::Unbalanced { pos }),
                };
                self.at += 1;
                let t = if head == GEN {
                    let name = match self.toks.get(self.at).cloned() {
                        Some(Tok::Atom(n, _)) => n,
                        _ => {
                            return Err(TermError::Arity {
                                name: GEN.into(),
                                expected: 1,
                                found: 0,
                                pos: hpos,
                            })
                        }
                    };
                    self.at += 1;
                    self.generator(&name, hpos)?
                } else if head == SCALE {
                    if !self.sig.has_scale_family() {
                        return Err(TermError::UnknownSymbol { name: head, pos: hpos });
                    }
                    let qpos = self.pos();
                    let q = match self.toks.get(self.at).cloned() {
                        Some(Tok::Atom(s, _)) => parse_q(&s).ok_or(TermError::BadScalar {
                            token: s,
                            pos: qpos,
                        })?,
                        _ => {
                            return Err(TermError::BadScalar {
                                token: String::new(),
                                pos: qpos,
                            })
                        }
                    };
                    self.at += 1;
                    let args = self.args()?;
                    if args.len() != 1 {
                        return Err(TermError::Arity {
                            name: SCALE.into(),
                            expected: 1,
                            found: args.len(),
                            pos: hpos,
                        });
                    }
                    return Ok(Term::apply(Op::Scale(q), args));
                } else {
                    let expected = self
                        .sig
                        .arity_of_name(&head)
                        .ok_or_else(|| TermError::UnknownSymbol {
                            name: head.clone(),
                            pos: hpos,
                        })?;
                    let args = self.args()?;
                    if args.len() != expected {
                        return Err(TermError::Arity {
                            name: head,
                            expected,
                            found: args.len(),
                            pos: hpos,
                        });
                    }
                    return Ok(Term::op(&head, args));
                };
                match self.toks.get(self.at) {
                    Some(Tok::Close(_)) => {
                        self.at += 1;
                        Ok(t)
                    }
                    Some(Tok::Atom(_, p)) | Some(Tok::Open(p)) => Err(TermError::Arity {
                        name: GEN.into(),
                        expected: 1,
                        found: 2,
                        pos: *p,
                    }),
                    None => Err(TermError::Unbalanced { pos: self.len }),
                }
            }
        }
    }

    /// Children up to and including the closing parenthesis.
    fn args(&mut self) -> Result<Vec<Term>, TermError> {
        let mut args = Vec::new();
        loop {
            match self.toks.get(self.at) {
                Some(Tok::Close(_)) => {
                    self.at += 1;
                    return Ok(args);
                }
                None => return Err(TermError::Unbalanced { pos: self.len }),
                _ => args.push(self.term()?),
            }
        }
    }

    fn finish(mut self) -> Result<Term, TermError> {
        let t = self.term()?;
        if let Some(tok) = self.toks.get(self.at) {
            return Err(match tok {
                Tok::Close(p) => TermError::Unbalanced { pos: *p },
                Tok::Open(p) => TermError::Unexpected {
                    token: "(".into(),
                    pos: *p,
                },
                Tok::Atom(a, p) => TermError::Unexpected {
                    token: a.clone(),
                    pos: *p,
                },
            });
        }
        Ok(t)
    }
}

/// Parses a term whose generators must come from `gens`.
pub fn parse_term(src: &str, sig: &Signature, gens: &GeneratorSet) -> Result<Term, TermError> {
    Parser {
        toks: tokenize(src),
        at: 0,
        sig,
        mode: GenMode::Strict(gens),
        len: src.len(),
    }
    .finish()
}

/// Parses a term, treating every non-symbol token as a generator.
pub fn parse_term_open(src: &str, sig: &Signature) -> Result<Term, TermError> {
    Parser {
        toks: tokenize(src),
        at: 0,
        sig,
        mode: GenMode::Open,
        len: src.len(),
    }
    .finish()
}

/// An equation `lhs ≈ rhs` whose generators are read as variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Identity {
    pub label: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl Identity {
    pub fn new(label: impl Into<String>, lhs: Term, rhs: Term) -> Self {
        Identity {
            label: label.into(),
            lhs,
            rhs,
        }
    }

    /// `lhs = rhs` in term syntax, generators read as variables.
    pub fn parse(label: impl Into<String>, src: &str, sig: &Signature) -> Result<Self, TermError> {
        let (l, r) = split_equation(src).ok_or_else(|| TermError::Unexpected {
            token: src.to_string(),
            pos: 0,
        })?;
        Ok(Identity::new(
            label,
            parse_term_open(l, sig)?,
            parse_term_open(r, sig)?,
        ))
    }

    /// Variables in order of first occurrence, left side first.
    pub fn variables(&self) -> Vec<Arc<str>> {
        let mut vars = self.lhs.generators();
        for g in self.rhs.generators() {
            if !vars.contains(&g) {
                vars.push(g);
            }
        }
        vars
    }

    pub fn check(&self, sig: &Signature) -> Result<(), TermError> {
        self.lhs.check(sig)?;
        self.rhs.check(sig)
    }

    pub fn flipped(&self) -> Identity {
        Identity::new(self.label.clone(), self.rhs.clone(), self.lhs.clone())
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

fn split_equation(src: &str) -> Option<(&str, &str)> {
    let idx = src.find('=')?;
    let (l, r) = (&src[..idx], &src[idx + 1..]);
    if r.contains('=') {
        return None;
    }
    Some((l.trim(), r.trim()))
}

/// Identity file: one `lhs = rhs` per line, `#` comments, optional `label:` prefix.
pub fn parse_identities(text: &str, sig: &Signature) -> Result<Vec<Identity>, TermError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (label, body) = match line.split_once(':') {
            Some((l, b)) if !l.contains('(') => (l.trim().to_string(), b),
            _ => (format!("line {}", n + 1), line),
        };
        out.push(Identity::parse(label, body, sig)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monoid() -> Signature {
        Signature::new(vec![("f0", 0), ("f1", 1), ("f2", 2)], false).unwrap()
    }

    fn xyz(sig: &Signature) -> GeneratorSet {
        GeneratorSet::new(&["x", "y", "z"], sig).unwrap()
    }

    #[test]
    fn parses_application_and_generator() {
        let sig = Signature::lattice();
        let g = xyz(&sig);
        let t = parse_term("(vee x y)", &sig, &g).unwrap();
        assert_eq!(t, build::vee(Term::gen("x"), Term::gen("y")));
        assert_eq!(parse_term("x", &sig, &g).unwrap(), Term::gen("x"));
        assert_eq!(parse_term("(gen x)", &sig, &g).unwrap(), Term::gen("x"));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let sig = Signature::lattice();
        let g = xyz(&sig);
        assert_eq!(
            parse_term("(vee x)", &sig, &g),
            Err(TermError::Arity {
                name: "vee".into(),
                expected: 2,
                found: 1,
                pos: 1
            })
        );
        assert!(matches!(
            parse_term("(meet x y)", &sig, &g),
            Err(TermError::UnknownSymbol { pos: 1, .. })
        ));
        assert!(matches!(
            parse_term("(vee x y", &sig, &g),
            Err(TermError::Unbalanced { .. })
        ));
        assert!(matches!(
            parse_term("(vee x y))", &sig, &g),
            Err(TermError::Unbalanced { pos: 9 })
        ));
        assert!(matches!(
            parse_term("(vee x w)", &sig, &g),
            Err(TermError::UnknownSymbol { pos: 7, .. })
        ));
        assert_eq!(parse_term("  ", &sig, &g), Err(TermError::Empty));
    }

    #[test]
    fn heights() {
        let sig = monoid();
        let g = xyz(&sig);
        assert_eq!(Term::gen("x").height(), 0);
        assert_eq!(parse_term("f0", &sig, &g).unwrap().height(), 0);
        let t = parse_term("(f2 (f1 x) (f2 y x))", &sig, &g).unwrap();
        assert_eq!(t.height(), 2);
    }

    #[test]
    fn substitution_examples() {
        let sig = Signature::new(
            vec![(sym::ZERO, 0), (sym::PLUS, 2), (sym::WEDGE, 2), (sym::VEE, 2)],
            false,
        )
        .unwrap();
        let id = |s: &str| parse_term_open(s, &sig).unwrap();
        let bind = |pairs: &[(&str, Term)]| {
            pairs
                .iter()
                .map(|(k, v)| (Arc::from(*k), v.clone()))
                .collect::<HashMap<_, _>>()
        };
        let x = Term::gen("x");
        assert_eq!(
            id("(vee v1 v2)")
                .substitute(&bind(&[("v1", x.clone()), ("v2", x.clone())]))
                .unwrap(),
            id("(vee x x)")
        );
        let xy = id("(wedge x y)");
        assert_eq!(id("v1").substitute(&bind(&[("v1", xy.clone())])).unwrap(), xy);
        let t = id("(vee (wedge x y) z)");
        let s = id("(plus v1 v2)")
            .substitute(&bind(&[("v1", build::zero()), ("v2", t.clone())]))
            .unwrap();
        assert_eq!(s, build::plus(build::zero(), t.clone()));
        assert_eq!(s.height(), t.height() + 1);
        assert_eq!(
            id("(vee v1 v3)").substitute(&bind(&[("v1", x)])),
            Err(TermError::Unbound("v3".into()))
        );
    }

    #[test]
    fn scale_terms_round_trip() {
        let sig = Signature::new(vec![(sym::PLUS, 2)], true).unwrap();
        let t = parse_term_open("(scale -3/7 (plus a (scale 2 b)))", &sig).unwrap();
        assert_eq!(parse_term_open(&t.to_string(), &sig).unwrap(), t);
        assert!(parse_term_open("(scale x a)", &sig).is_err());
        assert!(parse_term_open("(scale 1 a)", &Signature::lattice()).is_err());
    }

    #[test]
    fn signature_file_round_trip() {
        let sig = Signature::parse("zero 0\nplus 2\n# comment\nscale 1\n").unwrap();
        assert!(sig.has_scale_family());
        assert_eq!(Signature::parse(&sig.to_text()).unwrap(), sig);
        assert!(Signature::parse("").is_err());
        assert!(Signature::parse("a 1\na 2").is_err());
    }

    #[test]
    fn generator_set_is_disjoint_from_symbols() {
        let sig = Signature::lattice();
        assert!(GeneratorSet::new(&["vee"], &sig).is_err());
        assert!(GeneratorSet::new::<&str>(&[], &sig).is_err());
        assert!(GeneratorSet::new(&["x", "x"], &sig).is_err());
    }
}
