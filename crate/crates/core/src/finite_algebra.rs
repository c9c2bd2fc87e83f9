//! Finite abstract algebras: homomorphisms, kernels, congruence generation,
//! quotients, products, generated subalgebras and identity satisfaction.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::partition::{Partition, UnionFind};
use crate::term_algebra::{eval_with, EvalError, Structure};
use crate::terms::{Identity, Op, Signature, TermError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("finite algebras cannot interpret the scalar family")]
    ScaleFamily,
    #[error("carrier must be non-empty")]
    EmptyCarrier,
    #[error("table for `{symbol}` has {found} entries, expected {expected}")]
    TableSize {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("table for `{symbol}` has out-of-range entry {value} at {index}")]
    OutOfRange {
        symbol: String,
        index: usize,
        value: usize,
    },
    #[error("map is not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("signatures differ")]
    SignatureMismatch,
    #[error("size bound exceeded: {needed} > {bound}")]
    BoundExceeded { needed: u128, bound: u128 },
    #[error("product of an empty family")]
    EmptyProduct,
    #[error("relation is not a congruence: {0}")]
    NotCongruence(String),
    #[error("({0}, {1}) is in the congruence but not in the kernel")]
    NotInKernel(usize, usize),
    #[error("element {0} outside the carrier")]
    Element(usize),
    #[error("identity mentions an operation the algebra lacks: {0}")]
    Eval(#[from] EvalError),
    #[error("algebra file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Carrier `{0, .., size-1}` with one total table per signature symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    sig: Signature,
    size: usize,
    tables: Vec<Vec<usize>>,
}

fn pow(n: usize, k: usize) -> usize {
    n.pow(k as u32)
}

impl FiniteAlgebra {
    pub fn new(sig: Signature, size: usize, tables: Vec<Vec<usize>>) -> Result<Self, AlgebraError> {
        if sig.has_scale_family() {
            return Err(AlgebraError::ScaleFamily);
        }
        if size == 0 {
            return Err(AlgebraError::EmptyCarrier);
        }
        if tables.len() != sig.symbols().len() {
            return Err(AlgebraError::SignatureMismatch);
        }
        for (decl, table) in sig.symbols().iter().zip(&tables) {
            let expected = pow(size, decl.arity);
            if table.len() != expected {
                return Err(AlgebraError::TableSize {
                    symbol: decl.name.to_string(),
                    expected,
                    found: table.len(),
                });
            }
            if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| v >= size) {
                return Err(AlgebraError::OutOfRange {
                    symbol: decl.name.to_string(),
                    index,
                    value,
                });
            }
        }
        Ok(FiniteAlgebra { sig, size, tables })
    }

    /// Tabulates `f(symbol_index, args)`.
    pub fn from_fn(
        sig: Signature,
        size: usize,
        f: impl Fn(usize, &[usize]) -> usize,
    ) -> Result<Self, AlgebraError> {
        let tables = sig
            .symbols()
            .iter()
            .enumerate()
            .map(|(s, decl)| {
                let mut table = Vec::with_capacity(pow(size, decl.arity));
                let mut args = vec![0usize; decl.arity];
                loop {
                    table.push(f(s, &args));
                    if !crate::term_algebra::advance(&mut args, size) {
                        break;
                    }
                }
                table
            })
            .collect();
        FiniteAlgebra::new(sig, size, tables)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self, symbol: usize) -> &[usize] {
        &self.tables[symbol]
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.sig.symbols().iter().position(|s| &*s.name == name)
    }

    fn offset(&self, args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &a| acc * self.size + a)
    }

    pub fn apply_index(&self, symbol: usize, args: &[usize]) -> usize {
        self.tables[symbol][self.offset(args)]
    }

    /// `op(name, args)`; panics on unknown symbols.
    pub fn op(&self, name: &str, args: &[usize]) -> usize {
        let s = self.symbol_index(name).expect("unknown symbol");
        self.apply_index(s, args)
    }

    /// Checks operation compatibility of a partition of the carrier.
    pub fn check_congruence(&self, p: &Partition) -> Result<(), AlgebraError> {
        if p.len() != self.size {
            return Err(AlgebraError::NotCongruence("wrong carrier size".into()));
        }
        for (s, decl) in self.sig.symbols().iter().enumerate() {
            let k = decl.arity;
            if k == 0 {
                continue;
            }
            let mut args = vec![0usize; k];
            loop {
                for i in 0..k {
                    let orig = args[i];
                    for b in 0..self.size {
                        if b != orig && p.related(b, orig) {
                            let lhs = self.apply_index(s, &args);
                            args[i] = b;
                            let rhs = self.apply_index(s, &args);
                            args[i] = orig;
                            if !p.related(lhs, rhs) {
                                return Err(AlgebraError::NotCongruence(format!(
                                    "`{}` separates related tuples at position {i}: {lhs} vs {rhs}",
                                    decl.name
                                )));
                            }
                        }
                    }
                }
                if !crate::term_algebra::advance(&mut args, self.size) {
                    break;
                }
            }
        }
        Ok(())
    }

    /// Algebra file text; see [`parse_algebra`].
    pub fn to_text(&self) -> String {
        let mut out = format!("size {}\n", self.size);
        for (decl, table) in self.sig.symbols().iter().zip(&self.tables) {
            let _ = writeln!(out, "op {} {}", decl.name, decl.arity);
            let row = if decl.arity == 0 { 1 } else { self.size };
            for chunk in table.chunks(row) {
                let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }
}

impl Structure for FiniteAlgebra {
    type Elem = usize;

    fn apply(&self, op: &Op, args: &[usize]) -> Result<usize, EvalError> {
        let Op::Named(name) = op else {
            return Err(EvalError::Unsupported(op.to_string()));
        };
        let s = self
            .symbol_index(name)
            .ok_or_else(|| EvalError::Unsupported(op.to_string()))?;
        if self.sig.symbols()[s].arity != args.len() {
            return Err(EvalError::Arity {
                op: op.to_string(),
                found: args.len(),
            });
        }
        Ok(self.apply_index(s, args))
    }

    fn elem_eq(&self, a: &usize, b: &usize) -> bool {
        a == b
    }

    fn carrier(&self) -> Option<Vec<usize>> {
        Some((0..self.size).collect())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(0..self.size)
    }

    fn show(&self, a: &usize) -> String {
        a.to_string()
    }
}

/// Parses the algebra file format:
///
/// ```text
/// size 4
/// op plus 2
/// 0 1 2 3
/// 1 2 3 0
/// 2 3 0 1
/// 3 0 1 2
/// op zero 0
/// 0
/// ```
///
/// Each `op name arity` header is followed by `size^arity` entries in
/// row-major order (last argument varies fastest); line breaks inside a table
/// are free. `#` starts a comment.
pub fn parse_algebra(text: &str) -> Result<FiniteAlgebra, AlgebraError> {
    let mut size: Option<usize> = None;
    let mut decls: Vec<(String, usize)> = Vec::new();
    let mut tables: Vec<Vec<usize>> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| AlgebraError::Parse { line: line_no, msg };
        let mut words = line.split_whitespace();
        match words.next() {
            Some("size") => {
                if size.is_some() {
                    return Err(err("duplicate size".into()));
                }
                let v = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| err("bad size".into()))?;
                size = Some(v);
            }
            Some("op") => {
                let name = words.next().ok_or_else(|| err("missing name".into()))?;
                let arity = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| err("bad arity".into()))?;
                decls.push((name.to_string(), arity));
                tables.push(Vec::new());
            }
            Some(_) => {
                let table = tables
                    .last_mut()
                    .ok_or_else(|| err("table entries before any `op` header".into()))?;
                for w in line.split_whitespace() {
                    table.push(w.parse().map_err(|_| err(format!("bad entry `{w}`")))?);
                }
            }
            None => {}
        }
    }
    let size = size.ok_or(AlgebraError::Parse {
        line: 0,
        msg: "missing `size` line".into(),
    })?;
    let sig = Signature::new(decls.iter().map(|(n, a)| (n.as_str(), *a)).collect(), false)?;
    FiniteAlgebra::new(sig, size, tables)
}

/// A homomorphism between finite algebras, verified exhaustively on construction.
#[derive(Clone, Debug)]
pub struct FiniteHom {
    dom: Arc<FiniteAlgebra>,
    cod: Arc<FiniteAlgebra>,
    map: Vec<usize>,
}

impl FiniteHom {
    pub fn new(
        dom: Arc<FiniteAlgebra>,
        cod: Arc<FiniteAlgebra>,
        map: Vec<usize>,
    ) -> Result<Self, AlgebraError> {
        if dom.sig != cod.sig {
            return Err(AlgebraError::SignatureMismatch);
        }
        if map.len() != dom.size {
            return Err(AlgebraError::NotHomomorphism(format!(
                "map has {} entries for a carrier of {}",
                map.len(),
                dom.size
            )));
        }
        if let Some(&bad) = map.iter().find(|&&v| v >= cod.size) {
            return Err(AlgebraError::Element(bad));
        }
        for (s, decl) in dom.sig.symbols().iter().enumerate() {
            let mut args = vec![0usize; decl.arity];
            loop {
                let image_args: Vec<usize> = args.iter().map(|&a| map[a]).collect();
                let lhs = map[dom.apply_index(s, &args)];
                let rhs = cod.apply_index(s, &image_args);
                if lhs != rhs {
                    return Err(AlgebraError::NotHomomorphism(format!(
                        "h({}{:?}) = {lhs} but {}(h..) = {rhs}",
                        decl.name, args, decl.name
                    )));
                }
                if !crate::term_algebra::advance(&mut args, dom.size) {
                    break;
                }
            }
        }
        Ok(FiniteHom { dom, cod, map })
    }

    pub fn identity(a: Arc<FiniteAlgebra>) -> Self {
        let map = (0..a.size).collect();
        FiniteHom {
            dom: a.clone(),
            cod: a,
            map,
        }
    }

    pub fn dom(&self) -> &FiniteAlgebra {
        &self.dom
    }

    pub fn cod(&self) -> &FiniteAlgebra {
        &self.cod
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_injective(&self) -> bool {
        let set: BTreeSet<_> = self.map.iter().collect();
        set.len() == self.map.len()
    }
}

/// A congruence, represented by its partition of the carrier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CongruenceRelation(pub Partition);

impl CongruenceRelation {
    pub fn discrete(n: usize) -> Self {
        CongruenceRelation(Partition::discrete(n))
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.0.related(x, y)
    }

    pub fn contained_in(&self, other: &CongruenceRelation) -> bool {
        self.0.refines(&other.0)
    }
}

pub fn kernel(h: &FiniteHom) -> CongruenceRelation {
    CongruenceRelation(Partition::from_labels(&h.map))
}

/// Least congruence of `a` containing `pairs`.
pub fn generate_congruence(
    a: &FiniteAlgebra,
    pairs: &[(usize, usize)],
) -> Result<CongruenceRelation, AlgebraError> {
    let mut uf = UnionFind::new(a.size);
    for &(x, y) in pairs {
        if x >= a.size || y >= a.size {
            return Err(AlgebraError::Element(x.max(y)));
        }
        uf.union(x, y);
    }
    // Changing one argument within its block must keep the image in one block;
    // single-position changes suffice by transitivity.
    loop {
        let mut changed = false;
        for (s, decl) in a.sig.symbols().iter().enumerate() {
            let k = decl.arity;
            if k == 0 {
                continue;
            }
            let mut args = vec![0usize; k];
            loop {
                let base = a.apply_index(s, &args);
                for i in 0..k {
                    let orig = args[i];
                    let root = uf.find(orig);
                    for b in orig + 1..a.size {
                        if uf.find(b) == root {
                            args[i] = b;
                            let other = a.apply_index(s, &args);
                            changed |= uf.union(base, other);
                        }
                    }
                    args[i] = orig;
                }
                if !crate::term_algebra::advance(&mut args, a.size) {
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(CongruenceRelation(uf.to_partition()))
}

/// `A/θ` (elements numbered by block order) and the canonical map `q_θ`.
pub fn quotient(
    a: &FiniteAlgebra,
    theta: &CongruenceRelation,
) -> Result<(FiniteAlgebra, FiniteHom), AlgebraError> {
    a.check_congruence(&theta.0)?;
    let block_of = theta.0.block_indices();
    let blocks = theta.0.blocks();
    let quotient = FiniteAlgebra::from_fn(a.sig.clone(), blocks.len(), |s, args| {
        let reps: Vec<usize> = args.iter().map(|&b| blocks[b][0]).collect();
        block_of[a.apply_index(s, &reps)]
    })?;
    let q = FiniteHom::new(Arc::new(a.clone()), Arc::new(quotient.clone()), block_of)?;
    Ok((quotient, q))
}

/// The unique `h̄: A/θ → B` with `h = h̄ ∘ q_θ`, provided `θ ⊆ ker h`.
pub fn factor_hom(h: &FiniteHom, theta: &CongruenceRelation) -> Result<FiniteHom, AlgebraError> {
    for x in 0..h.dom.size {
        let r = theta.0.rep(x);
        if h.map[x] != h.map[r] {
            return Err(AlgebraError::NotInKernel(r, x));
        }
    }
    let (quot, _) = quotient(&h.dom, theta)?;
    let map = theta.0.blocks().iter().map(|b| h.map[b[0]]).collect();
    FiniteHom::new(Arc::new(quot), h.cod.clone(), map)
}

/// Coordinatewise product with mixed-radix elements (first factor most
/// significant) and the projection homomorphisms.
pub fn product(
    algebras: &[FiniteAlgebra],
    max_size: usize,
) -> Result<(FiniteAlgebra, Vec<FiniteHom>), AlgebraError> {
    let first = algebras.first().ok_or(AlgebraError::EmptyProduct)?;
    if algebras.iter().any(|a| a.sig != first.sig) {
        return Err(AlgebraError::SignatureMismatch);
    }
    let needed: u128 = algebras.iter().map(|a| a.size as u128).product();
    if needed > max_size as u128 {
        return Err(AlgebraError::BoundExceeded {
            needed,
            bound: max_size as u128,
        });
    }
    let size = needed as usize;
    let sizes: Vec<usize> = algebras.iter().map(|a| a.size).collect();
    let decode = |mut e: usize| -> Vec<usize> {
        let mut coords = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            coords[i] = e % sizes[i];
            e /= sizes[i];
        }
        coords
    };
    let encode = |coords: &[usize]| coords.iter().zip(&sizes).fold(0, |acc, (c, s)| acc * s + c);
    let prod = FiniteAlgebra::from_fn(first.sig.clone(), size, |s, args| {
        let decoded: Vec<Vec<usize>> = args.iter().map(|&a| decode(a)).collect();
        let coords: Vec<usize> = algebras
            .iter()
            .enumerate()
            .map(|(i, alg)| {
                let comp: Vec<usize> = decoded.iter().map(|d| d[i]).collect();
                alg.apply_index(s, &comp)
            })
            .collect();
        encode(&coords)
    })?;
    let shared = Arc::new(prod.clone());
    let projections = algebras
        .iter()
        .enumerate()
        .map(|(i, alg)| {
            let map = (0..size).map(|e| decode(e)[i]).collect();
            FiniteHom::new(shared.clone(), Arc::new(alg.clone()), map)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((prod, projections))
}

/// Least subset containing `seeds` and the constants, closed under all operations.
pub fn generated_subalgebra(a: &FiniteAlgebra, seeds: &[usize]) -> Result<Vec<usize>, AlgebraError> {
    let mut inside = vec![false; a.size];
    for &s in seeds {
        if s >= a.size {
            return Err(AlgebraError::Element(s));
        }
        inside[s] = true;
    }
    loop {
        let members: Vec<usize> = (0..a.size).filter(|&i| inside[i]).collect();
        let mut changed = false;
        for (s, decl) in a.sig.symbols().iter().enumerate() {
            if decl.arity == 0 {
                let c = a.apply_index(s, &[]);
                changed |= !std::mem::replace(&mut inside[c], true);
                continue;
            }
            if members.is_empty() {
                continue;
            }
            let mut idx = vec![0usize; decl.arity];
            loop {
                let args: Vec<usize> = idx.iter().map(|&i| members[i]).collect();
                let v = a.apply_index(s, &args);
                changed |= !std::mem::replace(&mut inside[v], true);
                if !crate::term_algebra::advance(&mut idx, members.len()) {
                    break;
                }
            }
        }
        if !changed {
            return Ok((0..a.size).filter(|&i| inside[i]).collect());
        }
    }
}

/// How satisfaction checks enumerate assignments.
#[derive(Clone, Copy, Debug)]
pub struct SatOptions {
    /// Maximum number of assignments evaluated.
    pub budget: u64,
    /// Above budget: sample uniformly (true) or fail (false).
    pub sample_when_over: bool,
    pub seed: u64,
}

impl Default for SatOptions {
    fn default() -> Self {
        SatOptions {
            budget: 1_000_000,
            sample_when_over: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SatVerdict {
    pub holds: bool,
    /// False when the assignment space was sampled rather than exhausted.
    pub exhaustive: bool,
    pub checked: u64,
    pub counterexample: Option<Vec<(String, usize)>>,
}

/// Visits assignments `vars -> carrier` exhaustively or by sampling; stops
/// when `visit` returns false.
fn sweep(
    n: usize,
    k: usize,
    opts: &SatOptions,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> Result<(bool, u64, bool), AlgebraError> {
    let space = (n as u128).pow(k as u32);
    if space <= opts.budget as u128 {
        let mut idx = vec![0usize; k];
        let mut count = 0;
        loop {
            count += 1;
            if !visit(&idx) {
                return Ok((false, count, true));
            }
            if !crate::term_algebra::advance(&mut idx, n) {
                return Ok((true, count, true));
            }
        }
    }
    if !opts.sample_when_over {
        return Err(AlgebraError::BoundExceeded {
            needed: space,
            bound: opts.budget as u128,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut idx = vec![0usize; k];
    for count in 1..=opts.budget {
        idx.iter_mut().for_each(|i| *i = rng.gen_range(0..n));
        if !visit(&idx) {
            return Ok((false, count, false));
        }
    }
    Ok((true, opts.budget, false))
}

fn holds_at(
    a: &FiniteAlgebra,
    ident: &Identity,
    lookup: &HashMap<Arc<str>, usize>,
) -> Result<bool, EvalError> {
    let l = eval_with(&ident.lhs, a, &|g| lookup.get(g).copied())?;
    let r = eval_with(&ident.rhs, a, &|g| lookup.get(g).copied())?;
    Ok(l == r)
}

/// Does every assignment make both sides equal? Returns a violating
/// assignment on failure.
pub fn satisfies(a: &FiniteAlgebra, ident: &Identity, opts: &SatOptions) -> Result<SatVerdict, AlgebraError> {
    satisfies_quasi(a, &[], ident, opts)
}

/// Does every assignment satisfying all premises satisfy the conclusion?
pub fn satisfies_quasi(
    a: &FiniteAlgebra,
    premises: &[Identity],
    conclusion: &Identity,
    opts: &SatOptions,
) -> Result<SatVerdict, AlgebraError> {
    for id in premises.iter().chain(std::iter::once(conclusion)) {
        id.check(&a.sig)
            .map_err(|e| AlgebraError::Eval(EvalError::Unsupported(e.to_string())))?;
    }
    let mut vars: Vec<Arc<str>> = Vec::new();
    for id in premises.iter().chain(std::iter::once(conclusion)) {
        for v in id.variables() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    let mut failure: Option<Vec<(String, usize)>> = None;
    let mut error: Option<EvalError> = None;
    let mut lookup: HashMap<Arc<str>, usize> = HashMap::new();
    let (holds, checked, exhaustive) = sweep(a.size, vars.len(), opts, |idx| {
        for (v, &x) in vars.iter().zip(idx) {
            lookup.insert(v.clone(), x);
        }
        let result = (|| {
            for p in premises {
                if !holds_at(a, p, &lookup)? {
                    return Ok(true);
                }
            }
            holds_at(a, conclusion, &lookup)
        })();
        match result {
            Ok(true) => true,
            Ok(false) => {
                failure = Some(vars.iter().map(|v| v.to_string()).zip(idx.iter().copied()).collect());
                false
            }
            Err(e) => {
                error = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = error {
        return Err(e.into());
    }
    Ok(SatVerdict {
        holds,
        exhaustive,
        checked,
        counterexample: failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::sym;

    fn z4() -> FiniteAlgebra {
        let sig = Signature::new(vec![(sym::PLUS, 2), (sym::ZERO, 0)], false).unwrap();
        FiniteAlgebra::from_fn(sig, 4, |s, args| if s == 0 { (args[0] + args[1]) % 4 } else { 0 }).unwrap()
    }

    fn z2() -> FiniteAlgebra {
        let sig = Signature::new(vec![(sym::PLUS, 2), (sym::ZERO, 0)], false).unwrap();
        FiniteAlgebra::from_fn(sig, 2, |s, args| if s == 0 { (args[0] + args[1]) % 2 } else { 0 }).unwrap()
    }

    fn blocks(c: &CongruenceRelation) -> Vec<Vec<usize>> {
        c.partition().blocks()
    }

    #[test]
    fn kernels() {
        let a = Arc::new(z4());
        let id = FiniteHom::identity(a.clone());
        assert_eq!(kernel(&id), CongruenceRelation::discrete(4));
        let h = FiniteHom::new(a.clone(), Arc::new(z2()), vec![0, 1, 0, 1]).unwrap();
        assert_eq!(blocks(&kernel(&h)), vec![vec![0, 2], vec![1, 3]]);
        assert!(FiniteHom::new(a, Arc::new(z2()), vec![0, 1, 1, 0]).is_err());
    }

    #[test]
    fn kernel_of_collapse_is_everything() {
        let a = Arc::new(z4());
        let sig = a.signature().clone();
        let one = Arc::new(FiniteAlgebra::from_fn(sig, 1, |_, _| 0).unwrap());
        let h = FiniteHom::new(a, one, vec![0; 4]).unwrap();
        assert_eq!(kernel(&h).partition(), &Partition::full(4));
    }

    #[test]
    fn congruence_generation() {
        let a = z4();
        assert_eq!(generate_congruence(&a, &[]).unwrap(), CongruenceRelation::discrete(4));
        assert_eq!(
            blocks(&generate_congruence(&a, &[(0, 2)]).unwrap()),
            vec![vec![0, 2], vec![1, 3]]
        );
        assert_eq!(
            generate_congruence(&a, &[(0, 1)]).unwrap().partition(),
            &Partition::full(4)
        );
        assert!(generate_congruence(&a, &[(0, 9)]).is_err());
    }

    #[test]
    fn quotients() {
        let a = z4();
        let (q, hom) = quotient(&a, &CongruenceRelation::discrete(4)).unwrap();
        assert_eq!(q, a);
        assert_eq!(hom.map(), &[0, 1, 2, 3]);
        let (q, _) = quotient(&a, &CongruenceRelation(Partition::full(4))).unwrap();
        assert_eq!(q.size(), 1);
        let theta = generate_congruence(&a, &[(0, 2)]).unwrap();
        let (q, hom) = quotient(&a, &theta).unwrap();
        assert_eq!(q, z2());
        assert_eq!(kernel(&hom), theta);
        let bad = CongruenceRelation(Partition::from_blocks(4, &[vec![0, 1]]).unwrap());
        assert!(matches!(quotient(&a, &bad), Err(AlgebraError::NotCongruence(_))));
    }

    #[test]
    fn factoring() {
        let a = Arc::new(z4());
        let h = FiniteHom::new(a.clone(), Arc::new(z2()), vec![0, 1, 0, 1]).unwrap();
        let bar = factor_hom(&h, &CongruenceRelation::discrete(4)).unwrap();
        assert_eq!(bar.map(), h.map());
        let bar = factor_hom(&h, &kernel(&h)).unwrap();
        assert!(bar.is_injective());
        assert_eq!(bar.map(), &[0, 1]);
        let theta = generate_congruence(&a, &[(0, 1)]).unwrap();
        assert_eq!(factor_hom(&h, &theta).unwrap_err(), AlgebraError::NotInKernel(0, 1));
    }

    fn chain2() -> FiniteAlgebra {
        FiniteAlgebra::from_fn(Signature::lattice(), 2, |s, a| {
            if s == 0 {
                a[0].min(a[1])
            } else {
                a[0].max(a[1])
            }
        })
        .unwrap()
    }

    #[test]
    fn products() {
        let (sq, proj) = product(&[chain2(), chain2()], 100).unwrap();
        assert_eq!(sq.size(), 4);
        assert_eq!(proj.len(), 2);
        // (0,1) ^ (1,0) = (0,0); (0,1) v (1,0) = (1,1)
        assert_eq!(sq.op(sym::WEDGE, &[1, 2]), 0);
        assert_eq!(sq.op(sym::VEE, &[1, 2]), 3);
        let (single, _) = product(&[chain2()], 100).unwrap();
        assert_eq!(single, chain2());
        assert_eq!(product(&[], 100).unwrap_err(), AlgebraError::EmptyProduct);
        assert!(matches!(
            product(&[chain2(), chain2(), chain2()], 4),
            Err(AlgebraError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn subalgebras() {
        let a = z4();
        assert_eq!(generated_subalgebra(&a, &[0, 1, 2, 3]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(generated_subalgebra(&a, &[1]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(generated_subalgebra(&a, &[2]).unwrap(), vec![0, 2]);
        assert_eq!(generated_subalgebra(&a, &[]).unwrap(), vec![0]);
    }

    #[test]
    fn satisfaction_with_counterexample() {
        let sig = Signature::lattice();
        let dist = Identity::parse(
            "dist",
            "(wedge v1 (vee v2 v3)) = (vee (wedge v1 v2) (wedge v1 v3))",
            &sig,
        )
        .unwrap();
        let v = satisfies(&chain2(), &dist, &SatOptions::default()).unwrap();
        assert!(v.holds && v.exhaustive);
        assert_eq!(v.checked, 8);
        let refl = Identity::parse("refl", "v1 = v1", &sig).unwrap();
        assert!(satisfies(&chain2(), &refl, &SatOptions::default()).unwrap().holds);
        let comm = Identity::parse("x", "(wedge v1 v2) = v1", &sig).unwrap();
        let v = satisfies(&chain2(), &comm, &SatOptions::default()).unwrap();
        assert!(!v.holds);
        assert_eq!(
            v.counterexample,
            Some(vec![("v1".to_string(), 1), ("v2".to_string(), 0)])
        );
    }

    #[test]
    fn sampling_is_flagged() {
        let sig = Signature::lattice();
        let comm = Identity::parse("c", "(wedge v1 v2) = (wedge v2 v1)", &sig).unwrap();
        let opts = SatOptions {
            budget: 3,
            sample_when_over: true,
            seed: 7,
        };
        let v = satisfies(&chain2(), &comm, &opts).unwrap();
        assert!(v.holds && !v.exhaustive);
        let strict = SatOptions {
            sample_when_over: false,
            ..opts
        };
        assert!(matches!(
            satisfies(&chain2(), &comm, &strict),
            Err(AlgebraError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn quasi_identities() {
        let sig = Signature::new(vec![(sym::WEDGE, 2), (sym::DOT, 2), (sym::ZERO, 0)], false).unwrap();
        // 2-chain with meet as product
        let a = FiniteAlgebra::from_fn(sig.clone(), 2, |s, x| match s {
            0 | 1 => x[0].min(x[1]),
            _ => 0,
        })
        .unwrap();
        let prem = Identity::parse("p", "(wedge v1 v2) = zero", &sig).unwrap();
        let concl = Identity::parse("c", "(wedge (dot v1 v3) v2) = zero", &sig).unwrap();
        assert!(satisfies_quasi(&a, &[prem], &concl, &SatOptions::default()).unwrap().holds);
        assert!(satisfies_quasi(&a, std::slice::from_ref(&concl), &concl, &SatOptions::default()).unwrap().holds);
    }

    #[test]
    fn file_round_trip() {
        let a = z4();
        let text = a.to_text();
        assert_eq!(parse_algebra(&text).unwrap(), a);
        assert!(parse_algebra("size 2\nop vee 2\n0 1 1").is_err());
        assert!(parse_algebra("op vee 2\n0 1 1 1").is_err());
        assert!(parse_algebra("size 2\n0 1").is_err());
    }

    #[test]
    fn one_point_algebras_are_allowed() {
        let a = FiniteAlgebra::from_fn(Signature::lattice(), 1, |_, _| 0).unwrap();
        let any = Identity::parse("x", "v1 = (vee v1 v2)", &Signature::lattice()).unwrap();
        assert!(satisfies(&a, &any, &SatOptions::default()).unwrap().holds);
    }
}
