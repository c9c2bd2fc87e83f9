//! Word problems for free lattices (Whitman) and free distributive lattices
//! (join-of-meets antichains), the characteristic-vector embedding of a finite
//! distributive lattice, and the collapse of `j` on non-distributive lattices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fvl_model::{fvl_eq, FvlError, MinMaxForm};
use crate::terms::{build, sym, Node, Op, Term};
use crate::theories::{LatticePoset, TheoryError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("`{0}` is not a lattice term (only wedge, vee and generators)")]
    NotLatticeTerm(String),
    #[error("lattice is not distributive: a={a}, b={b}, c={c}")]
    NotDistributive { a: usize, b: usize, c: usize },
    #[error(transparent)]
    Poset(#[from] TheoryError),
}

/// A term built from generators, `wedge` and `vee` only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatTerm(Term);

impl LatTerm {
    pub fn new(t: Term) -> Result<Self, LatticeError> {
        fn ok(t: &Term) -> bool {
            match t.node() {
                Node::Gen(_) => true,
                Node::Apply(Op::Named(n), args) if (&**n == sym::WEDGE || &**n == sym::VEE) && args.len() == 2 => {
                    args.iter().all(ok)
                }
                _ => false,
            }
        }
        if ok(&t) {
            Ok(LatTerm(t))
        } else {
            Err(LatticeError::NotLatticeTerm(t.to_string()))
        }
    }

    pub fn term(&self) -> &Term {
        &self.0
    }
}

impl fmt::Display for LatTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum LNode {
    Gen(usize),
    Meet(usize, usize),
    Join(usize, usize),
}

/// Hash-consed lattice terms with a memo table for Whitman's test.
#[derive(Default)]
pub struct Whitman {
    nodes: Vec<LNode>,
    ids: HashMap<LNode, usize>,
    gens: HashMap<Arc<str>, usize>,
    memo: HashMap<(usize, usize), bool>,
}

impl Whitman {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, t: &Term) -> usize {
        let node = match t.node() {
            Node::Gen(g) => {
                let next = self.gens.len();
                LNode::Gen(*self.gens.entry(g.clone()).or_insert(next))
            }
            Node::Apply(op, args) => {
                let (a, b) = (self.intern(&args[0]), self.intern(&args[1]));
                if op.name() == sym::WEDGE {
                    LNode::Meet(a, b)
                } else {
                    LNode::Join(a, b)
                }
            }
        };
        if let Some(&id) = self.ids.get(&node) {
            return id;
        }
        self.nodes.push(node);
        self.ids.insert(node, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn le(&mut self, s: usize, t: usize) -> bool {
        if s == t {
            return true;
        }
        if let Some(&r) = self.memo.get(&(s, t)) {
            return r;
        }
        let r = match (self.nodes[s], self.nodes[t]) {
            (LNode::Join(a, b), _) => self.le(a, t) && self.le(b, t),
            (_, LNode::Meet(a, b)) => self.le(s, a) && self.le(s, b),
            (LNode::Gen(x), LNode::Gen(y)) => x == y,
            (LNode::Gen(_), LNode::Join(a, b)) => self.le(s, a) || self.le(s, b),
            (LNode::Meet(a, b), LNode::Gen(_)) => self.le(a, t) || self.le(b, t),
            (LNode::Meet(a, b), LNode::Join(c, d)) => {
                self.le(a, t) || self.le(b, t) || self.le(s, c) || self.le(s, d)
            }
        };
        self.memo.insert((s, t), r);
        r
    }

    pub fn leq(&mut self, t1: &LatTerm, t2: &LatTerm) -> bool {
        let (a, b) = (self.intern(&t1.0), self.intern(&t2.0));
        self.le(a, b)
    }

    pub fn eq(&mut self, t1: &LatTerm, t2: &LatTerm) -> bool {
        self.leq(t1, t2) && self.leq(t2, t1)
    }
}

pub fn free_lattice_leq(t1: &LatTerm, t2: &LatTerm) -> bool {
    Whitman::new().leq(t1, t2)
}

pub fn free_lattice_eq(t1: &LatTerm, t2: &LatTerm) -> bool {
    Whitman::new().eq(t1, t2)
}

/// Join of meets of generator sets, no set containing another.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DlatNormalForm(BTreeSet<BTreeSet<Arc<str>>>);

impl DlatNormalForm {
    pub fn generator(g: Arc<str>) -> Self {
        DlatNormalForm(BTreeSet::from([BTreeSet::from([g])]))
    }

    fn prune(sets: BTreeSet<BTreeSet<Arc<str>>>) -> Self {
        let kept = sets
            .iter()
            .filter(|s| !sets.iter().any(|o| o != *s && o.is_subset(s)))
            .cloned()
            .collect();
        DlatNormalForm(kept)
    }

    pub fn join(&self, o: &Self) -> Self {
        Self::prune(self.0.union(&o.0).cloned().collect())
    }

    pub fn meet(&self, o: &Self) -> Self {
        let mut sets = BTreeSet::new();
        for a in &self.0 {
            for b in &o.0 {
                sets.insert(a.union(b).cloned().collect());
            }
        }
        Self::prune(sets)
    }

    pub fn sets(&self) -> &BTreeSet<BTreeSet<Arc<str>>> {
        &self.0
    }

    pub fn to_term(&self) -> LatTerm {
        let meets = self.0.iter().map(|s| {
            let mut it = s.iter().map(|g| Term::gen_arc(g.clone()));
            let first = it.next().expect("nonempty set");
            it.fold(first, build::wedge)
        });
        let mut meets = meets.collect::<Vec<_>>().into_iter();
        let first = meets.next().expect("nonempty antichain");
        LatTerm(meets.fold(first, build::vee))
    }
}

impl fmt::Display for DlatNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets: Vec<String> = self
            .0
            .iter()
            .map(|s| format!("{{{}}}", s.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{{{}}}", sets.join(","))
    }
}

pub fn dlat_normal_form(t: &LatTerm) -> DlatNormalForm {
    let mut names = t.0.generators();
    names.sort();
    names.dedup();
    if names.len() <= 64 {
        // the same computation on bit sets, converted back at the end
        let masks = dlat_masks(&t.0, &names);
        return DlatNormalForm(
            masks
                .into_iter()
                .map(|m| (0..names.len()).filter(|i| m >> i & 1 == 1).map(|i| names[i].clone()).collect())
                .collect(),
        );
    }
    fn go(t: &Term) -> DlatNormalForm {
        match t.node() {
            Node::Gen(g) => DlatNormalForm::generator(g.clone()),
            Node::Apply(op, args) => {
                let (a, b) = (go(&args[0]), go(&args[1]));
                if op.name() == sym::WEDGE {
                    a.meet(&b)
                } else {
                    a.join(&b)
                }
            }
        }
    }
    go(&t.0)
}

fn dlat_masks(t: &Term, names: &[Arc<str>]) -> Vec<u64> {
    match t.node() {
        Node::Gen(g) => vec![1 << names.binary_search(g).expect("collected generator")],
        Node::Apply(op, args) => {
            let (a, b) = (dlat_masks(&args[0], names), dlat_masks(&args[1], names));
            let mut sets = if op.name() == sym::WEDGE {
                a.iter().flat_map(|x| b.iter().map(move |y| x | y)).collect()
            } else {
                let mut u = a;
                u.extend(b);
                u
            };
            sets.sort_unstable();
            sets.dedup();
            sets.iter()
                .copied()
                .filter(|&s| !sets.iter().any(|&o| o != s && o & s == o))
                .collect()
        }
    }
}

fn require_lattice(l: &LatticePoset) -> Result<(), LatticeError> {
    for x in 0..l.size() {
        for y in 0..l.size() {
            l.meet(x, y).ok_or(TheoryError::NoMeet(x, y))?;
            l.join(x, y).ok_or(TheoryError::NoJoin(x, y))?;
        }
    }
    Ok(())
}

/// A triple with `a /\ (b \/ c) != (a /\ b) \/ (a /\ c)`. In a lattice the
/// two distributive laws are equivalent, so this decides distributivity.
pub fn distributivity_failure(l: &LatticePoset) -> Result<Option<(usize, usize, usize)>, LatticeError> {
    require_lattice(l)?;
    let (m, j) = (|x, y| l.meet(x, y).unwrap(), |x, y| l.join(x, y).unwrap());
    let n = l.size();
    for a in 0..n {
        for b in 0..n {
            for c in b + 1..n {
                if m(a, j(b, c)) != j(m(a, b), m(a, c)) {
                    return Ok(Some((a, b, c)));
                }
            }
        }
    }
    Ok(None)
}

/// Characteristic vectors `x -> [p <= x]` over the join-irreducibles `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirkhoffEmbedding {
    pub join_irreducibles: Vec<usize>,
    pub vectors: Vec<Vec<u8>>,
}

pub fn join_irreducibles(l: &LatticePoset) -> Vec<usize> {
    let n = l.size();
    let lt = |x: usize, y: usize| x != y && l.le(x, y);
    (0..n)
        .filter(|&x| {
            let covers = (0..n)
                .filter(|&y| lt(y, x) && !(0..n).any(|z| lt(y, z) && lt(z, x)))
                .count();
            covers == 1
        })
        .collect()
}

pub fn birkhoff_embed(l: &LatticePoset) -> Result<BirkhoffEmbedding, LatticeError> {
    if let Some((a, b, c)) = distributivity_failure(l)? {
        return Err(LatticeError::NotDistributive { a, b, c });
    }
    let ji = join_irreducibles(l);
    let vectors = (0..l.size())
        .map(|x| ji.iter().map(|&p| u8::from(l.le(p, x))).collect())
        .collect();
    Ok(BirkhoffEmbedding {
        join_irreducibles: ji,
        vectors,
    })
}

/// Two distinct elements identified by `j` in the free vector lattice over a
/// non-distributive lattice, with the chain of equalities that does it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collapse {
    pub x: usize,
    pub y: usize,
    pub triple: (usize, usize, usize),
    pub steps: Vec<String>,
    /// Whether `u /\ (v \/ w) = (u /\ v) \/ (u /\ w)` was confirmed in the
    /// free vector lattice on three generators.
    pub distributivity_certified: bool,
}

/// Distributivity of the free vector lattice on three generators, decided in
/// the function model.
pub fn vl_distributivity_certified() -> Result<bool, FvlError> {
    let (u, v, w) = (MinMaxForm::var(3, 0), MinMaxForm::var(3, 1), MinMaxForm::var(3, 2));
    let lhs = u.meet(&v.join(&w)?)?;
    let rhs = u.meet(&v)?.join(&u.meet(&w)?)?;
    let dual_l = u.join(&v.meet(&w)?)?;
    let dual_r = u.join(&v)?.meet(&u.join(&w)?)?;
    Ok(fvl_eq(&lhs, &rhs)? && fvl_eq(&dual_l, &dual_r)?)
}

pub fn collapse_witness(l: &LatticePoset) -> Result<Option<Collapse>, LatticeError> {
    let Some((a, b, c)) = distributivity_failure(l)? else {
        return Ok(None);
    };
    let (m, j) = (|x, y| l.meet(x, y).unwrap(), |x, y| l.join(x, y).unwrap());
    let nm = |i: usize| l.names()[i].clone();
    let (x, y) = (m(a, j(b, c)), j(m(a, b), m(a, c)));
    let (na, nb, nc) = (nm(a), nm(b), nm(c));
    let steps = vec![
        format!("j({}) = j({na} /\\ ({nb} \\/ {nc}))  [{} = {na} /\\ {}]", nm(x), nm(x), nm(j(b, c))),
        format!("      = j({na}) /\\ (j({nb}) \\/ j({nc}))  [j preserves /\\ and \\/]"),
        format!("      = (j({na}) /\\ j({nb})) \\/ (j({na}) /\\ j({nc}))  [distributivity in vector lattices]"),
        format!(
            "      = j(({na} /\\ {nb}) \\/ ({na} /\\ {nc})) = j({})  [j preserves /\\ and \\/]",
            nm(y)
        ),
    ];
    let certified = vl_distributivity_certified().unwrap_or(false);
    Ok(Some(Collapse {
        x,
        y,
        triple: (a, b, c),
        steps,
        distributivity_certified: certified,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{parse_term_open, Signature};
    use crate::theories::presets;

    fn lt(s: &str) -> LatTerm {
        LatTerm::new(parse_term_open(s, &Signature::lattice()).unwrap()).unwrap()
    }

    #[test]
    fn whitman_examples() {
        assert!(free_lattice_leq(&lt("x"), &lt("(vee x y)")));
        let d1 = lt("(vee (wedge x y) (wedge x z))");
        let d2 = lt("(wedge x (vee y z))");
        assert!(free_lattice_leq(&d1, &d2));
        assert!(!free_lattice_leq(&d2, &d1));
        assert!(!free_lattice_leq(&lt("x"), &lt("y")));
        assert!(free_lattice_eq(&lt("(wedge x (vee x y))"), &lt("x")));
        assert!(free_lattice_eq(&lt("(vee x y)"), &lt("(vee y x)")));
        assert!(!free_lattice_eq(&lt("x"), &lt("(vee x y)")));
    }

    #[test]
    fn rejects_non_lattice_terms() {
        let sig = crate::theories::TheoryName::Vl.signature();
        assert!(LatTerm::new(parse_term_open("(plus x y)", &sig).unwrap()).is_err());
    }

    #[test]
    fn normal_forms() {
        assert_eq!(dlat_normal_form(&lt("(wedge x (vee y z))")).to_string(), "{{x,y},{x,z}}");
        assert_eq!(dlat_normal_form(&lt("(vee x (wedge x y))")).to_string(), "{{x}}");
        let nf = dlat_normal_form(&lt("(wedge (vee x y) (vee x z))"));
        assert_eq!(dlat_normal_form(&nf.to_term()), nf);
    }

    #[test]
    fn embeddings() {
        let e = birkhoff_embed(&presets::chain(2)).unwrap();
        assert_eq!(e.vectors, vec![vec![0], vec![1]]);
        let e = birkhoff_embed(&presets::boolean4()).unwrap();
        assert_eq!(e.join_irreducibles, vec![1, 2]);
        assert_eq!(e.vectors, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert!(matches!(
            birkhoff_embed(&presets::m3()),
            Err(LatticeError::NotDistributive { .. })
        ));
    }

    #[test]
    fn collapses() {
        let m3 = presets::m3();
        let c = collapse_witness(&m3).unwrap().unwrap();
        assert_eq!((m3.names()[c.x].as_str(), m3.names()[c.y].as_str()), ("a", "bot"));
        assert_eq!(c.steps.len(), 4);
        assert!(c.distributivity_certified);
        let n5 = presets::n5();
        let c = collapse_witness(&n5).unwrap().unwrap();
        assert_ne!(c.x, c.y);
        assert!(collapse_witness(&presets::boolean4()).unwrap().is_none());
        assert!(collapse_witness(&presets::chain(4)).unwrap().is_none());
    }
}
