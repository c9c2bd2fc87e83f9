//! The term algebra `T(S)`, evaluation of terms in arbitrary structures (the
//! unique homomorphic extension of a generator assignment), substitution
//! instances of identities, and congruence saturation on finite term universes.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::partition::{Partition, UnionFind};
use crate::rational::Q;
use crate::terms::{GeneratorSet, Identity, Node, Op, Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("generator `{0}` has no value")]
    Unbound(String),
    #[error("operation `{0}` is not interpreted in this structure")]
    Unsupported(String),
    #[error("`{op}` applied to {found} argument(s)")]
    Arity { op: String, found: usize },
    #[error("evaluation exceeded a size limit: {0}")]
    Limit(String),
}

/// Anything terms can be evaluated in: a set with constants and operations.
pub trait Structure {
    type Elem: Clone + fmt::Debug;

    fn apply(&self, op: &Op, args: &[Self::Elem]) -> Result<Self::Elem, EvalError>;

    fn elem_eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;

    /// The whole carrier when it is finite.
    fn carrier(&self) -> Option<Vec<Self::Elem>> {
        None
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Elem;

    fn show(&self, a: &Self::Elem) -> String {
        format!("{a:?}")
    }
}

/// Evaluates `t` with generator values supplied by `lookup`.
pub fn eval_with<S: Structure + ?Sized>(
    t: &Term,
    target: &S,
    lookup: &dyn Fn(&str) -> Option<S::Elem>,
) -> Result<S::Elem, EvalError> {
    match t.node() {
        Node::Gen(g) => lookup(g).ok_or_else(|| EvalError::Unbound(g.to_string())),
        Node::Apply(op, children) => {
            let args = children
                .iter()
                .map(|c| eval_with(c, target, lookup))
                .collect::<Result<Vec<_>, _>>()?;
            target.apply(op, &args)
        }
    }
}

/// A target structure together with an assignment of its elements to generators.
pub struct Evaluation<'a, S: Structure + ?Sized> {
    pub target: &'a S,
    pub assignment: HashMap<Arc<str>, S::Elem>,
}

impl<'a, S: Structure + ?Sized> Evaluation<'a, S> {
    pub fn new(target: &'a S) -> Self {
        Evaluation {
            target,
            assignment: HashMap::new(),
        }
    }

    pub fn with(mut self, gen: &str, value: S::Elem) -> Self {
        self.assignment.insert(Arc::from(gen), value);
        self
    }

    pub fn assign(&mut self, gen: &str, value: S::Elem) {
        self.assignment.insert(Arc::from(gen), value);
    }
}

/// The homomorphic extension of the assignment, applied to `t`.
pub fn evaluate<S: Structure + ?Sized>(t: &Term, ev: &Evaluation<'_, S>) -> Result<S::Elem, EvalError> {
    eval_with(t, ev.target, &|g| ev.assignment.get(g).cloned())
}

/// Checks `h(f(t1..tk)) = f(h(t1)..h(tk))` at every application node of every sample.
pub fn is_homomorphic_on<S: Structure + ?Sized>(samples: &[Term], ev: &Evaluation<'_, S>) -> bool {
    for s in samples {
        for t in s.subterms() {
            let Some(op) = t.head() else { continue };
            let whole = match evaluate(&t, ev) {
                Ok(v) => v,
                Err(_) => return false,
            };
            let parts: Result<Vec<_>, _> = t.children().iter().map(|c| evaluate(c, ev)).collect();
            let Ok(parts) = parts else { return false };
            match ev.target.apply(op, &parts) {
                Ok(v) if ev.target.elem_eq(&v, &whole) => {}
                _ => return false,
            }
        }
    }
    true
}

/// `T(S)` as a structure: operations build terms.
#[derive(Clone, Debug)]
pub struct TermAlgebra {
    pub sig: Signature,
    pub gens: GeneratorSet,
}

impl TermAlgebra {
    pub fn new(sig: Signature, gens: GeneratorSet) -> Self {
        TermAlgebra { sig, gens }
    }
}

impl Structure for TermAlgebra {
    type Elem = Term;

    fn apply(&self, op: &Op, args: &[Term]) -> Result<Term, EvalError> {
        match self.sig.arity(op) {
            None => Err(EvalError::Unsupported(op.to_string())),
            Some(k) if k != args.len() => Err(EvalError::Arity {
                op: op.to_string(),
                found: args.len(),
            }),
            Some(_) => Ok(Term::apply(op.clone(), args.to_vec())),
        }
    }

    fn elem_eq(&self, a: &Term, b: &Term) -> bool {
        a == b
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Term {
        let ids = self.gens.ids();
        Term::gen_arc(ids[rng.gen_range(0..ids.len())].clone())
    }

    fn show(&self, a: &Term) -> String {
        a.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetError {
    #[error("budget exceeded: {what} would reach {needed}, cap is {cap}")]
    Exceeded {
        what: &'static str,
        needed: u128,
        cap: usize,
    },
}

/// All terms of height at most `height` over `gens`, scalar ops taken from `scalars`.
/// Ordered by height, then by construction order.
pub fn terms_up_to_height(
    sig: &Signature,
    gens: &GeneratorSet,
    height: usize,
    scalars: &[Q],
    cap: usize,
) -> Result<Vec<Term>, BudgetError> {
    let ops = sig.ops_with_scalars(scalars);
    let mut all: Vec<Term> = gens.ids().iter().map(|g| Term::gen_arc(g.clone())).collect();
    all.extend(
        ops.iter()
            .filter(|(_, k)| *k == 0)
            .map(|(op, _)| Term::apply(op.clone(), vec![])),
    );
    let mut seen: HashSet<Term> = all.iter().cloned().collect();
    let mut level_start = 0;
    for h in 1..=height {
        let prev_len = all.len();
        let prev: Vec<Term> = all.clone();
        for (op, k) in ops.iter().filter(|(_, k)| *k > 0) {
            let k = *k;
            // tuples over `prev` with at least one entry from the newest level
            let n = prev.len();
            let total = (n as u128).pow(k as u32);
            if total > cap as u128 * 16 {
                return Err(BudgetError::Exceeded {
                    what: "term universe",
                    needed: total,
                    cap,
                });
            }
            let mut idx = vec![0usize; k];
            loop {
                if idx.iter().any(|&i| i >= level_start) {
                    let t = Term::apply(op.clone(), idx.iter().map(|&i| prev[i].clone()).collect());
                    debug_assert_eq!(t.height(), h);
                    if seen.insert(t.clone()) {
                        all.push(t);
                        if all.len() > cap {
                            return Err(BudgetError::Exceeded {
                                what: "term universe",
                                needed: all.len() as u128,
                                cap,
                            });
                        }
                    }
                }
                if !advance(&mut idx, n) {
                    break;
                }
            }
        }
        level_start = prev_len;
    }
    Ok(all)
}

/// Every substitution instance of every identity, variables replaced by
/// terms of height at most `height_bound` over `gens`.
pub fn instance_pairs(
    sigma: &[Identity],
    sig: &Signature,
    gens: &GeneratorSet,
    height_bound: usize,
    scalars: &[Q],
    cap: usize,
) -> Result<Vec<(Term, Term)>, BudgetError> {
    let pool = terms_up_to_height(sig, gens, height_bound, scalars, cap)?;
    let mut needed: u128 = 0;
    for id in sigma {
        needed += (pool.len() as u128).pow(id.variables().len() as u32);
    }
    if needed > cap as u128 {
        return Err(BudgetError::Exceeded {
            what: "instance pairs",
            needed,
            cap,
        });
    }
    let mut out = Vec::with_capacity(needed as usize);
    for id in sigma {
        let vars = id.variables();
        let k = vars.len();
        let mut idx = vec![0usize; k];
        loop {
            let binding: HashMap<Arc<str>, Term> = vars
                .iter()
                .zip(&idx)
                .map(|(v, &i)| (v.clone(), pool[i].clone()))
                .collect();
            out.push((
                id.lhs.substitute_partial(&binding),
                id.rhs.substitute_partial(&binding),
            ));
            if !advance(&mut idx, pool.len()) {
                break;
            }
        }
    }
    Ok(out)
}

/// Odometer increment; false once every tuple has been visited.
pub(crate) fn advance(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Least equivalence on `universe` containing the pairs (both sides in the
/// universe) and closed under: componentwise related children imply related
/// parents, whenever both parents lie in the universe.
pub fn saturate(pairs: &[(Term, Term)], universe: &[Term]) -> Partition {
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut nodes: Vec<(Option<Op>, Vec<usize>, Option<Arc<str>>)> = Vec::new();
    fn intern(
        t: &Term,
        index: &mut HashMap<Term, usize>,
        nodes: &mut Vec<(Option<Op>, Vec<usize>, Option<Arc<str>>)>,
    ) -> usize {
        if let Some(&i) = index.get(t) {
            return i;
        }
        let entry = match t.node() {
            Node::Gen(g) => (None, vec![], Some(g.clone())),
            Node::Apply(op, c) => (
                Some(op.clone()),
                c.iter().map(|c| intern(c, index, nodes)).collect(),
                None,
            ),
        };
        let id = nodes.len();
        nodes.push(entry);
        index.insert(t.clone(), id);
        id
    }
    let ids: Vec<usize> = universe.iter().map(|t| intern(t, &mut index, &mut nodes)).collect();
    let member: HashSet<usize> = ids.iter().copied().collect();
    let mut uf = UnionFind::new(nodes.len());
    for (a, b) in pairs {
        if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
            if member.contains(&i) && member.contains(&j) {
                uf.union(i, j);
            }
        }
    }
    loop {
        let mut changed = false;
        let mut sigs: HashMap<(Op, Vec<usize>), usize> = HashMap::new();
        for &i in &ids {
            let (Some(op), children, _) = &nodes[i] else { continue };
            let key = (op.clone(), children.iter().map(|&c| uf.find(c)).collect::<Vec<_>>());
            match sigs.get(&key) {
                Some(&j) => changed |= uf.union(i, j),
                None => {
                    sigs.insert(key, i);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let labels: Vec<usize> = ids.iter().map(|&i| uf.find(i)).collect();
    Partition::from_labels(&labels)
}

/// Adds every subterm of the given terms, children before parents.
pub fn subterm_closure<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Vec<Term> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for t in terms {
        for s in t.subterms() {
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::parse_term_open;

    /// `(Z/7, +, 0)` with symbols f0 (zero) and f2 (plus).
    struct Z7;

    impl Structure for Z7 {
        type Elem = u32;
        fn apply(&self, op: &Op, args: &[u32]) -> Result<u32, EvalError> {
            match (op.name(), args) {
                ("f0", []) => Ok(0),
                ("f2", [a, b]) => Ok((a + b) % 7),
                _ => Err(EvalError::Unsupported(op.to_string())),
            }
        }
        fn elem_eq(&self, a: &u32, b: &u32) -> bool {
            a == b
        }
        fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
            rng.gen_range(0..7)
        }
    }

    fn monoid() -> Signature {
        Signature::new(vec![("f0", 0), ("f2", 2)], false).unwrap()
    }

    #[test]
    fn evaluates_in_z7() {
        let sig = monoid();
        let t = parse_term_open("(f2 s1 (f2 s2 s1))", &sig).unwrap();
        let ev = Evaluation::new(&Z7).with("s1", 2).with("s2", 3);
        assert_eq!(evaluate(&t, &ev), Ok(0));
        assert_eq!(evaluate(&parse_term_open("f0", &sig).unwrap(), &ev), Ok(0));
        assert_eq!(evaluate(&Term::gen("s2"), &ev), Ok(3));
        assert_eq!(
            evaluate(&Term::gen("s9"), &ev),
            Err(EvalError::Unbound("s9".into()))
        );
        assert!(is_homomorphic_on(&[t], &ev));
        assert!(is_homomorphic_on(&[], &ev));
    }

    #[test]
    fn term_algebra_evaluation_is_substitution() {
        let sig = monoid();
        let gens = GeneratorSet::new(&["a", "b"], &sig).unwrap();
        let ta = TermAlgebra::new(sig.clone(), gens);
        let t = parse_term_open("(f2 x (f2 y f0))", &sig).unwrap();
        let a = parse_term_open("(f2 a b)", &sig).unwrap();
        let ev = Evaluation::new(&ta).with("x", a.clone()).with("y", Term::gen("b"));
        let binding: HashMap<Arc<str>, Term> =
            [(Arc::from("x"), a), (Arc::from("y"), Term::gen("b"))].into_iter().collect();
        assert_eq!(evaluate(&t, &ev).unwrap(), t.substitute(&binding).unwrap());
    }

    #[test]
    fn enumerates_lattice_terms() {
        let sig = Signature::lattice();
        let gens = GeneratorSet::new(&["x"], &sig).unwrap();
        let h1 = terms_up_to_height(&sig, &gens, 1, &[], 1000).unwrap();
        // x, x^x, xvx
        assert_eq!(h1.len(), 3);
        let h2 = terms_up_to_height(&sig, &gens, 2, &[], 1000).unwrap();
        // 3 + 2*(3*3 - 1*1)
        assert_eq!(h2.len(), 19);
        assert!(terms_up_to_height(&sig, &gens, 4, &[], 1000).is_err());
    }

    #[test]
    fn instance_pairs_single_substitution() {
        let sig = Signature::lattice();
        let gens = GeneratorSet::new(&["x"], &sig).unwrap();
        let id = Identity::parse("idem", "(vee v1 v1) = v1", &sig).unwrap();
        let pairs = instance_pairs(&[id], &sig, &gens, 0, &[], 100).unwrap();
        assert_eq!(
            pairs,
            vec![(parse_term_open("(vee x x)", &sig).unwrap(), Term::gen("x"))]
        );
        let refl = Identity::parse("refl", "v1 = v1", &sig).unwrap();
        let pairs = instance_pairs(&[refl], &sig, &gens, 2, &[], 1000).unwrap();
        assert!(pairs.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn saturate_joins_idempotent_chain() {
        let sig = Signature::lattice();
        let gens = GeneratorSet::new(&["x"], &sig).unwrap();
        let universe = terms_up_to_height(&sig, &gens, 2, &[], 1000).unwrap();
        let idem = Identity::parse("idem", "(vee v1 v1) = v1", &sig).unwrap();
        let pairs = instance_pairs(&[idem], &sig, &gens, 0, &[], 100).unwrap();
        let p = saturate(&pairs, &universe);
        let pos = |s: &str| {
            let t = parse_term_open(s, &sig).unwrap();
            universe.iter().position(|u| *u == t).unwrap()
        };
        assert!(p.related(pos("x"), pos("(vee x x)")));
        assert!(p.related(pos("x"), pos("(vee (vee x x) x)")));
        assert!(!p.related(pos("x"), pos("(wedge x x)")));
        assert_eq!(saturate(&[], &universe), Partition::discrete(universe.len()));
    }

    #[test]
    fn saturate_ignores_pairs_outside_universe() {
        let sig = Signature::lattice();
        let x = Term::gen("x");
        let y = Term::gen("y");
        let xy = parse_term_open("(vee x y)", &sig).unwrap();
        let p = saturate(&[(x.clone(), xy)], &[x, y]);
        assert_eq!(p, Partition::discrete(2));
    }
}
