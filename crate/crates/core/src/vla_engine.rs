//! Free objects between the categories Set, Lat, VS, VL, VLA, VLA1, VLA1P as
//! presentations (generators plus relation pairs over the target theory),
//! and a semi-decision procedure for equality of terms in them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::egraph::{ClassId, EGraph, Rule, RunLimits, RunStats};
use crate::fvl_model::{eq_witness, fvl_eq, FvlError, MinMaxForm};
use crate::lattice_engine::{birkhoff_embed, LatticeError};
use crate::models::{self, TableVla};
use crate::rational::{default_probes, fmt_q, q, random_q, Q};
use crate::term_algebra::{eval_with, Structure};
use crate::terms::{build, parse_term, sym, GeneratorSet, Identity, Node, Op, Signature, Term, TermError};
use crate::theories::{theory, LatticePoset, TheoryName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VlaError {
    #[error("no free object from {base} to {target}")]
    InvalidPair { base: String, target: String },
    #[error("{base} base needs {expected} presentation")]
    Presentation { base: String, expected: &'static str },
    #[error("structure is not a vector lattice algebra: {0}")]
    NotVla(String),
    #[error("cannot compose: {0}")]
    Compose(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BaseKind {
    Set,
    Lat,
    Vs,
    Vl,
    Vla,
    Vla1,
}

impl BaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaseKind::Set => "Set",
            BaseKind::Lat => "Lat",
            BaseKind::Vs => "VS",
            BaseKind::Vl => "VL",
            BaseKind::Vla => "VLA",
            BaseKind::Vla1 => "VLA1",
        }
    }

    /// Position in the chain Set < VS < VL < VLA < VLA1 < VLA1P.
    fn rank(self) -> Option<u8> {
        match self {
            BaseKind::Set => Some(0),
            BaseKind::Vs => Some(1),
            BaseKind::Vl => Some(2),
            BaseKind::Vla => Some(3),
            BaseKind::Vla1 => Some(4),
            BaseKind::Lat => None,
        }
    }

    pub fn of_theory(t: TheoryName) -> Option<BaseKind> {
        match t {
            TheoryName::Vs => Some(BaseKind::Vs),
            TheoryName::Vl => Some(BaseKind::Vl),
            TheoryName::Vla => Some(BaseKind::Vla),
            TheoryName::Vla1 => Some(BaseKind::Vla1),
            TheoryName::Lat => Some(BaseKind::Lat),
            _ => None,
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "set" => Ok(BaseKind::Set),
            "lat" => Ok(BaseKind::Lat),
            "vs" => Ok(BaseKind::Vs),
            "vl" => Ok(BaseKind::Vl),
            "vla" => Ok(BaseKind::Vla),
            "vla1" => Ok(BaseKind::Vla1),
            _ => Err(format!("unknown base `{s}` (set, lat, vs, vl, vla, vla1)")),
        }
    }
}

fn target_rank(t: TheoryName) -> Option<u8> {
    match t {
        TheoryName::Vs => Some(1),
        TheoryName::Vl => Some(2),
        TheoryName::Vla => Some(3),
        TheoryName::Vla1 => Some(4),
        TheoryName::Vla1p => Some(5),
        _ => None,
    }
}

/// A finite description of the base object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasePresentation {
    /// The free base object on these names (for Set: the set itself).
    FreeOver(Vec<String>),
    /// A finite lattice.
    Lattice(LatticePoset),
    /// `Q^d`: as a vector space, or with the coordinatewise order.
    Space(usize),
    /// A finite-dimensional algebra on `Q^d` with coordinatewise order.
    Algebra(TableVla),
}

/// `lhs = rhs` imposed in the free object; `lhs - rhs` generates the bi-ideal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub label: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl Relation {
    fn new(label: impl Into<String>, lhs: Term, rhs: Term) -> Self {
        Relation {
            label: label.into(),
            lhs,
            rhs,
        }
    }

    pub fn element(&self) -> Term {
        build::minus(self.lhs.clone(), self.rhs.clone())
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} = {}", self.label, self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug)]
pub struct FreeObjectHandle {
    pub base: BaseKind,
    pub target: TheoryName,
    pub presentation: BasePresentation,
    pub generators: GeneratorSet,
    pub relations: Vec<Relation>,
}

fn basis_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("e{i}")).collect()
}

/// `sum_i v_i e_i` over the given generator names.
pub fn linear_term(v: &[Q], names: &[String]) -> Term {
    let mut parts = v.iter().zip(names).filter(|(c, _)| !c.is_zero()).map(|(c, n)| {
        let g = Term::gen(n);
        if c.is_one() {
            g
        } else {
            build::scale(c.clone(), g)
        }
    });
    match parts.next() {
        None => build::zero(),
        Some(first) => parts.fold(first, build::plus),
    }
}

/// Exact check that structure constants give a vector lattice algebra for
/// the coordinatewise order: associative on the basis, positive constants,
/// and a two-sided identity if one is declared.
pub fn check_table_vla(a: &TableVla) -> Result<(), VlaError> {
    let d = a.dim();
    if !a.has_positive_product() {
        return Err(VlaError::NotVla("negative structure constant".into()));
    }
    for i in 0..d {
        for j in 0..d {
            let ij = a.product_of_basis(i, j);
            for k in 0..d {
                let jk = a.product_of_basis(j, k);
                if a.mul(&ij, &a.basis(k)) != a.mul(&a.basis(i), &jk) {
                    return Err(VlaError::NotVla(format!("not associative on e{} e{} e{}", i + 1, j + 1, k + 1)));
                }
            }
        }
    }
    if let Some(u) = a.unit() {
        for i in 0..d {
            let e = a.basis(i);
            if a.mul(u, &e) != e || a.mul(&e, u) != e {
                return Err(VlaError::NotVla(format!("declared unit fails on e{}", i + 1)));
            }
        }
    }
    Ok(())
}

pub fn make_free(base: BaseKind, target: TheoryName, presentation: BasePresentation) -> Result<FreeObjectHandle, VlaError> {
    let invalid = || VlaError::InvalidPair {
        base: base.to_string(),
        target: target.to_string(),
    };
    let t = target_rank(target).ok_or_else(invalid)?;
    match base.rank() {
        Some(b) if b < t => {}
        None if t >= 2 => {}
        _ => return Err(invalid()),
    }
    let sig = target.signature();
    let mut relations = Vec::new();
    let names: Vec<String> = match (&presentation, base) {
        (BasePresentation::FreeOver(names), BaseKind::Set | BaseKind::Vs | BaseKind::Vl | BaseKind::Vla | BaseKind::Vla1) => {
            // j commutes with the base operations by construction
            names.clone()
        }
        (BasePresentation::Lattice(l), BaseKind::Lat) => {
            let n = l.size();
            let names = l.names().to_vec();
            let g = |i: usize| Term::gen(&names[i]);
            for x in 0..n {
                for y in 0..n {
                    let m = l.meet(x, y).ok_or(crate::theories::TheoryError::NoMeet(x, y)).map_err(LatticeError::from)?;
                    relations.push(Relation::new(
                        format!("meet {} {}", names[x], names[y]),
                        g(m),
                        build::wedge(g(x), g(y)),
                    ));
                }
            }
            for x in 0..n {
                for y in 0..n {
                    let j = l.join(x, y).ok_or(crate::theories::TheoryError::NoJoin(x, y)).map_err(LatticeError::from)?;
                    relations.push(Relation::new(
                        format!("join {} {}", names[x], names[y]),
                        g(j),
                        build::vee(g(x), g(y)),
                    ));
                }
            }
            names
        }
        (BasePresentation::Space(d), BaseKind::Vs) => basis_names(*d),
        (BasePresentation::Space(d), BaseKind::Vl) => {
            let names = basis_names(*d);
            relations.extend(coordinatewise_relations(&names));
            names
        }
        (BasePresentation::Algebra(a), BaseKind::Vla | BaseKind::Vla1) => {
            check_table_vla(a)?;
            let names = basis_names(a.dim());
            relations.extend(coordinatewise_relations(&names));
            for i in 0..a.dim() {
                for k in 0..a.dim() {
                    relations.push(Relation::new(
                        format!("product {} {}", names[i], names[k]),
                        linear_term(&a.product_of_basis(i, k), &names),
                        build::dot(Term::gen(&names[i]), Term::gen(&names[k])),
                    ));
                }
            }
            if base == BaseKind::Vla1 {
                let u = a.unit().ok_or(VlaError::Presentation {
                    base: base.to_string(),
                    expected: "an algebra with identity",
                })?;
                relations.push(Relation::new("identity", linear_term(u, &names), build::one()));
            }
            names
        }
        _ => {
            return Err(VlaError::Presentation {
                base: base.to_string(),
                expected: match base {
                    BaseKind::Set => "a list of names",
                    BaseKind::Lat => "a finite lattice",
                    BaseKind::Vs | BaseKind::Vl => "names or a dimension",
                    BaseKind::Vla | BaseKind::Vla1 => "names or structure constants",
                },
            })
        }
    };
    if target == TheoryName::Vla1p {
        relations.push(positive_identity_relation());
    }
    let generators = GeneratorSet::new(&names, &sig)?;
    Ok(FreeObjectHandle {
        base,
        target,
        presentation,
        generators,
        relations,
    })
}

fn positive_identity_relation() -> Relation {
    Relation::new("|1| = 1", build::abs(build::one()), build::one())
}

/// `j(x \/ y) = j(x) \/ j(y)` on the generating set `{0, e_1, .., e_d}` of
/// `Q^d`: the basis vectors are positive and pairwise disjoint.
fn coordinatewise_relations(names: &[String]) -> Vec<Relation> {
    let mut out = Vec::new();
    for (i, a) in names.iter().enumerate() {
        out.push(Relation::new(
            format!("join 0 {a}"),
            Term::gen(a),
            build::vee(build::zero(), Term::gen(a)),
        ));
        for b in &names[i + 1..] {
            out.push(Relation::new(
                format!("join {a} {b}"),
                build::plus(Term::gen(a), Term::gen(b)),
                build::vee(Term::gen(a), Term::gen(b)),
            ));
        }
    }
    out
}

impl FreeObjectHandle {
    pub fn signature(&self) -> Signature {
        self.target.signature()
    }

    pub fn parse_term(&self, src: &str) -> Result<Term, VlaError> {
        Ok(parse_term(src, &self.signature(), &self.generators)?)
    }

    /// `j` of a named base element (set element, lattice element, basis vector).
    pub fn j(&self, name: &str) -> Option<Term> {
        self.generators.contains(name).then(|| Term::gen(name))
    }

    /// `j` of a vector of a `Q^d` base.
    pub fn j_vector(&self, v: &[Q]) -> Option<Term> {
        let names: Vec<String> = self.generators.ids().iter().map(|s| s.to_string()).collect();
        (v.len() == names.len()).then(|| linear_term(v, &names))
    }

    fn names(&self) -> Vec<String> {
        self.generators.ids().iter().map(|s| s.to_string()).collect()
    }
}

/// `F_{B->C}(F_{A->B}(O))` presented over the generators of the inner object.
pub fn compose(inner: &FreeObjectHandle, outer: &FreeObjectHandle) -> Result<FreeObjectHandle, VlaError> {
    if BaseKind::of_theory(inner.target) != Some(outer.base) {
        return Err(VlaError::Compose(format!(
            "inner target {} is not the outer base {}",
            inner.target, outer.base
        )));
    }
    match &outer.presentation {
        BasePresentation::FreeOver(names) if *names == inner.names() => {}
        _ => {
            return Err(VlaError::Compose(
                "outer object must be free over the inner object's generators".into(),
            ))
        }
    }
    let mut relations = inner.relations.clone();
    for r in &outer.relations {
        if !relations.iter().any(|x| x.lhs == r.lhs && x.rhs == r.rhs) {
            relations.push(r.clone());
        }
    }
    Ok(FreeObjectHandle {
        base: inner.base,
        target: outer.target,
        presentation: inner.presentation.clone(),
        generators: GeneratorSet::new(&inner.names(), &outer.target.signature())?,
        relations,
    })
}

/// `Q (+) A` with product `(l, a)(m, b) = (lm, lb + ma + ab)`, direct-sum
/// order and identity `(1, 0)`.
pub fn unitise(a: &TableVla) -> Result<TableVla, VlaError> {
    check_table_vla(a)?;
    let d = a.dim();
    let mut u = TableVla::new(format!("Q + {}", a.name), d + 1).expect("positive dimension");
    let lift = |v: &[Q]| {
        let mut w = vec![Q::zero(); d + 1];
        w[1..].clone_from_slice(v);
        w
    };
    let mut f0 = vec![Q::zero(); d + 1];
    f0[0] = Q::one();
    u.set_product(0, 0, &f0).unwrap();
    for i in 0..d {
        let e = lift(&a.basis(i));
        u.set_product(0, i + 1, &e).unwrap();
        u.set_product(i + 1, 0, &e).unwrap();
        for j in 0..d {
            u.set_product(i + 1, j + 1, &lift(&a.product_of_basis(i, j))).unwrap();
        }
    }
    u.set_unit(f0).unwrap();
    Ok(u)
}

/// `a -> (0, a)`.
pub fn unitisation_inclusion(a: &[Q]) -> Vec<Q> {
    let mut w = vec![Q::zero()];
    w.extend_from_slice(a);
    w
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FProbeOutcome {
    /// No violation among the triples tried (evidence only).
    Pass { checked: usize },
    Fail {
        x: String,
        y: String,
        z: String,
        /// Which of `(xz) /\ y`, `(zx) /\ y` is nonzero.
        failing: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FProbeReport {
    pub structure: String,
    pub outcome: FProbeOutcome,
}

/// Searches for `x /\ y = 0`, `z >= 0` with `(xz) /\ y != 0` or
/// `(zx) /\ y != 0`: basis vectors and their pairwise sums first, then
/// random positive elements with disjoint supports.
pub fn f_algebra_probe(a: &TableVla, samples: usize, seed: u64) -> FProbeReport {
    let d = a.dim();
    let zero = a.zero();
    let mut cands: Vec<Vec<Q>> = (0..d).map(|i| a.basis(i)).collect();
    if let Some(u) = a.unit() {
        if a.is_positive(u) {
            cands.push(u.to_vec());
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            cands.push(a.add(&a.basis(i), &a.basis(j)));
        }
    }
    let mut checked = 0usize;
    let mut test = |x: &[Q], y: &[Q], z: &[Q]| -> Option<FProbeOutcome> {
        if a.meet(x, y) != zero {
            return None;
        }
        checked += 1;
        let xz = a.meet(&a.mul(x, z), y);
        let zx = a.meet(&a.mul(z, x), y);
        let failing = if xz != zero {
            "(xz) /\\ y"
        } else if zx != zero {
            "(zx) /\\ y"
        } else {
            return None;
        };
        Some(FProbeOutcome::Fail {
            x: a.show_vec(x),
            y: a.show_vec(y),
            z: a.show_vec(z),
            failing: failing.into(),
        })
    };
    for x in &cands {
        for y in &cands {
            for z in &cands {
                if let Some(f) = test(x, y, z) {
                    return FProbeReport {
                        structure: a.name.clone(),
                        outcome: f,
                    };
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = |rng: &mut ChaCha8Rng| random_q(rng, 3, 2).abs();
    for _ in 0..samples {
        let mut x = vec![Q::zero(); d];
        let mut y = vec![Q::zero(); d];
        for i in 0..d {
            match rng.gen_range(0..3) {
                0 => x[i] = pos(&mut rng),
                1 => y[i] = pos(&mut rng),
                _ => {}
            }
        }
        let z: Vec<Q> = (0..d).map(|_| pos(&mut rng)).collect();
        if let Some(f) = test(&x, &y, &z) {
            return FProbeReport {
                structure: a.name.clone(),
                outcome: f,
            };
        }
    }
    FProbeReport {
        structure: a.name.clone(),
        outcome: FProbeOutcome::Pass { checked },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessKind {
    Rationals,
    Coordinatewise(usize),
    ZeroProduct(usize),
    Matrices(usize),
    Unitisation(Box<WitnessKind>),
    /// Characteristic vectors of a distributive base lattice.
    CharacteristicVectors(usize),
    /// A point separating the two terms in the vector lattice function model,
    /// read in `Q` (or its unitisation) with the zero product.
    FunctionModelPoint,
    /// The base algebra itself, or its unitisation.
    BaseAlgebra,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessKind::Rationals => write!(f, "Q"),
            WitnessKind::Coordinatewise(d) => write!(f, "Q^{d} coordinatewise"),
            WitnessKind::ZeroProduct(d) => write!(f, "Q^{d} zero product"),
            WitnessKind::Matrices(k) => write!(f, "{k}x{k} matrices, entrywise order"),
            WitnessKind::Unitisation(k) => write!(f, "unitisation of {k}"),
            WitnessKind::CharacteristicVectors(d) => write!(f, "characteristic vectors in Q^{d}"),
            WitnessKind::FunctionModelPoint => write!(f, "function-model point"),
            WitnessKind::BaseAlgebra => write!(f, "base algebra"),
        }
    }
}

/// An evaluation into a concrete algebra that satisfies every relation of the
/// handle exactly but sends the two terms to different values.
#[derive(Clone, Debug)]
pub struct Witness {
    pub kind: WitnessKind,
    pub structure: TableVla,
    pub assignment: Vec<(Arc<str>, Vec<Q>)>,
    pub lhs: Vec<Q>,
    pub rhs: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixWitness {
    pub k: usize,
    pub entries: Vec<(String, Vec<Vec<Q>>)>,
}

impl fmt::Display for MatrixWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (g, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let rows: Vec<String> = m
                .iter()
                .map(|r| format!("[{}]", r.iter().map(fmt_q).collect::<Vec<_>>().join(", ")))
                .collect();
            write!(f, "{g} = [{}]", rows.join(", "))?;
        }
        Ok(())
    }
}

impl Witness {
    fn eval(&self, t: &Term) -> Option<Vec<Q>> {
        let map: HashMap<&str, &Vec<Q>> = self.assignment.iter().map(|(g, v)| (&**g, v)).collect();
        eval_with(t, &self.structure, &|g: &str| map.get(g).map(|v| (*v).clone())).ok()
    }

    /// Re-checks the witness from scratch: relations hold, terms differ.
    pub fn verify(&self, h: &FreeObjectHandle, t1: &Term, t2: &Term) -> bool {
        let relations_hold = h.relations.iter().all(|r| match (self.eval(&r.lhs), self.eval(&r.rhs)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        });
        relations_hold
            && match (self.eval(t1), self.eval(t2)) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            }
    }

    pub fn matrices(&self) -> Option<MatrixWitness> {
        let WitnessKind::Matrices(k) = self.kind else { return None };
        Some(MatrixWitness {
            k,
            entries: self
                .assignment
                .iter()
                .map(|(g, v)| (g.to_string(), v.chunks(k).map(|r| r.to_vec()).collect()))
                .collect(),
        })
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in {}: ", self.kind)?;
        let parts: Vec<String> = self
            .assignment
            .iter()
            .map(|(g, v)| format!("{g} = {}", self.structure.show_vec(v)))
            .collect();
        write!(
            f,
            "{}; values {} vs {}",
            parts.join(", "),
            self.structure.show_vec(&self.lhs),
            self.structure.show_vec(&self.rhs)
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub height_budget: usize,
    pub rounds: usize,
    pub nodes: usize,
    pub classes: usize,
    pub saturated: bool,
    pub hit_node_cap: bool,
    pub separation_trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProofMethod {
    Syntactic,
    /// Both sides are vector lattice expressions in the same atoms and agree
    /// in the free vector lattice.
    LatticeLinearIdentity,
    Saturation,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Proved { method: ProofMethod, stats: SearchStats },
    Separated(Box<Witness>),
    Unknown(SearchStats),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Proved { .. } => "PROVED",
            Verdict::Separated(_) => "SEPARATED",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved { .. })
    }

    pub fn is_separated(&self) -> bool {
        matches!(self, Verdict::Separated(_))
    }
}

#[derive(Clone, Debug)]
pub struct ProveOptions {
    /// Rewriting never creates classes whose smallest term is taller than this.
    pub height: usize,
    pub max_nodes: usize,
    pub max_rounds: usize,
    pub max_matches: usize,
    /// Random evaluations per witness structure.
    pub trials: usize,
    pub seed: u64,
    /// With more than one job, separation runs beside saturation.
    pub jobs: usize,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions {
            height: 3,
            max_nodes: 30_000,
            max_rounds: 6,
            max_matches: 2_000,
            trials: 60,
            seed: 0,
            jobs: 1,
        }
    }
}

/// Vector lattice identities used as extra rewrites; each is checked in the
/// function model before use.
const LEMMAS: &[(&str, &str, &str)] = &[
    ("dist-meet", "(wedge v1 (vee v2 v3))", "(vee (wedge v1 v2) (wedge v1 v3))"),
    ("dist-meet-r", "(wedge (vee v2 v3) v1)", "(vee (wedge v2 v1) (wedge v3 v1))"),
    ("dist-join", "(vee v1 (wedge v2 v3))", "(wedge (vee v1 v2) (vee v1 v3))"),
    ("dist-join-r", "(vee (wedge v2 v3) v1)", "(wedge (vee v2 v1) (vee v3 v1))"),
    ("neg-join", "(neg (vee v1 v2))", "(wedge (neg v1) (neg v2))"),
    ("neg-meet", "(neg (wedge v1 v2))", "(vee (neg v1) (neg v2))"),
    ("neg-neg", "(neg (neg v1))", "v1"),
    ("neg-zero", "(neg zero)", "zero"),
    ("neg-plus", "(neg (plus v1 v2))", "(plus (neg v1) (neg v2))"),
    ("plus-join", "(plus v1 (vee v2 v3))", "(vee (plus v1 v2) (plus v1 v3))"),
];

fn certified_lemmas() -> &'static [Identity] {
    static CELL: OnceLock<Vec<Identity>> = OnceLock::new();
    CELL.get_or_init(|| {
        let sig = TheoryName::Vl.signature();
        let gens: Vec<Arc<str>> = vec!["v1".into(), "v2".into(), "v3".into()];
        LEMMAS
            .iter()
            .filter_map(|(label, l, r)| {
                let id = Identity::parse(*label, &format!("{l} = {r}"), &sig).ok()?;
                let a = MinMaxForm::from_term(&id.lhs, &gens, false).ok()?;
                let b = MinMaxForm::from_term(&id.rhs, &gens, false).ok()?;
                fvl_eq(&a, &b).ok()?.then_some(id)
            })
            .collect()
    })
}

fn collect_scalars(t: &Term, out: &mut BTreeSet<Q>) {
    if let Node::Apply(op, args) = t.node() {
        if let Op::Scale(s) = op {
            out.insert(s.clone());
        }
        for a in args {
            collect_scalars(a, out);
        }
    }
}

fn rules_for(target: TheoryName, extra_scalars: &BTreeSet<Q>) -> Vec<Rule> {
    let sig = target.signature();
    let mut probes = default_probes();
    for s in extra_scalars {
        if !probes.contains(s) {
            probes.push(s.clone());
        }
    }
    let mut rules: Vec<Rule> = certified_lemmas()
        .iter()
        .filter(|id| id.check(&sig).is_ok())
        .flat_map(Rule::from_identity)
        .collect();
    for id in theory(target).identities(&probes) {
        rules.extend(Rule::from_identity(&id));
    }
    rules
}

const LATTICE_LINEAR: &[&str] = &[sym::ZERO, sym::PLUS, sym::NEG, sym::WEDGE, sym::VEE];

/// Reads `t` as a vector lattice expression whose atoms are the maximal
/// subterms headed by anything else, atoms identified by `atom`.
fn as_form(t: &Term, atom: &mut dyn FnMut(&Term) -> usize, n: usize) -> Result<MinMaxForm, FvlError> {
    match t.node() {
        Node::Apply(Op::Scale(s), args) => as_form(&args[0], atom, n)?.scale(s),
        Node::Apply(Op::Named(name), args) if LATTICE_LINEAR.contains(&&**name) => {
            let a: Vec<MinMaxForm> = args.iter().map(|c| as_form(c, atom, n)).collect::<Result<_, _>>()?;
            match &**name {
                sym::ZERO => Ok(MinMaxForm::zero(n)),
                sym::PLUS => a[0].add(&a[1]),
                sym::NEG => a[0].neg(),
                sym::WEDGE => a[0].meet(&a[1]),
                _ => a[0].join(&a[1]),
            }
        }
        _ => Ok(MinMaxForm::var(n, atom(t))),
    }
}

fn atoms_of(t: &Term, out: &mut Vec<Term>) {
    match t.node() {
        Node::Apply(Op::Scale(_), args) => atoms_of(&args[0], out),
        Node::Apply(Op::Named(name), args) if LATTICE_LINEAR.contains(&&**name) => {
            for a in args {
                atoms_of(a, out);
            }
        }
        _ => out.push(t.clone()),
    }
}

/// Equal as vector lattice expressions in atoms grouped by `key`?
fn lattice_linear_equal<K: Eq + std::hash::Hash + Clone>(t1: &Term, t2: &Term, key: impl Fn(&Term) -> K) -> bool {
    let mut atoms = Vec::new();
    atoms_of(t1, &mut atoms);
    atoms_of(t2, &mut atoms);
    let mut index: HashMap<K, usize> = HashMap::new();
    for a in &atoms {
        let k = key(a);
        let next = index.len();
        index.entry(k).or_insert(next);
    }
    let n = index.len();
    let mut atom = |t: &Term| index[&key(t)];
    match (as_form(t1, &mut atom, n), as_form(t2, &mut atom, n)) {
        (Ok(a), Ok(b)) => fvl_eq(&a, &b).unwrap_or(false),
        _ => false,
    }
}

fn check_terms(h: &FreeObjectHandle, ts: &[&Term]) -> Result<(), VlaError> {
    let sig = h.signature();
    for t in ts {
        t.check(&sig)?;
        for g in t.generators() {
            if !h.generators.contains(&g) {
                return Err(TermError::Generators(format!("`{g}` is not a generator of this free object")).into());
            }
        }
    }
    Ok(())
}

/// Equality of `t1` and `t2` in the free object of `h`.
///
/// PROVED comes from rewriting with the target theory's identities (and a
/// few certified vector lattice lemmas) in an e-graph seeded with the
/// relations; SEPARATED from an evaluation into a concrete algebra of the
/// target variety satisfying every relation exactly.
pub fn prove_equal(h: &FreeObjectHandle, t1: &Term, t2: &Term, opts: &ProveOptions) -> Result<Verdict, VlaError> {
    check_terms(h, &[t1, t2])?;
    let base_stats = SearchStats {
        height_budget: opts.height,
        ..SearchStats::default()
    };
    if t1 == t2 {
        return Ok(Verdict::Proved {
            method: ProofMethod::Syntactic,
            stats: base_stats,
        });
    }
    if lattice_linear_equal(t1, t2, |t| t.clone()) {
        return Ok(Verdict::Proved {
            method: ProofMethod::LatticeLinearIdentity,
            stats: base_stats,
        });
    }
    let stop = AtomicBool::new(false);
    let (sep, sat) = if opts.jobs > 1 {
        std::thread::scope(|s| {
            let sep = s.spawn(|| {
                let r = separate(h, t1, t2, opts, &stop);
                if r.0.is_some() {
                    stop.store(true, Ordering::Relaxed);
                }
                r
            });
            let sat = saturate_goal(h, t1, t2, opts, &stop);
            if sat.0.is_some() {
                stop.store(true, Ordering::Relaxed);
            }
            (sep.join().expect("separation worker panicked"), sat)
        })
    } else {
        let sep = separate(h, t1, t2, opts, &stop);
        if let (Some(w), _) = sep {
            return Ok(Verdict::Separated(Box::new(w)));
        }
        (sep, saturate_goal(h, t1, t2, opts, &stop))
    };
    let (witness, trials) = sep;
    let (method, run) = sat;
    let stats = SearchStats {
        height_budget: opts.height,
        rounds: run.rounds,
        nodes: run.nodes,
        classes: run.classes,
        saturated: run.saturated,
        hit_node_cap: run.hit_node_cap,
        separation_trials: trials,
    };
    Ok(match (method, witness) {
        (Some(method), _) => Verdict::Proved { method, stats },
        (None, Some(w)) => Verdict::Separated(Box::new(w)),
        (None, None) => Verdict::Unknown(stats),
    })
}

/// The proving side alone: `Some` only when rewriting closes the goal.
pub fn try_prove(
    h: &FreeObjectHandle,
    t1: &Term,
    t2: &Term,
    opts: &ProveOptions,
) -> Result<(Option<ProofMethod>, SearchStats), VlaError> {
    check_terms(h, &[t1, t2])?;
    let (method, run) = saturate_goal(h, t1, t2, opts, &AtomicBool::new(false));
    Ok((
        method,
        SearchStats {
            height_budget: opts.height,
            rounds: run.rounds,
            nodes: run.nodes,
            classes: run.classes,
            saturated: run.saturated,
            hit_node_cap: run.hit_node_cap,
            separation_trials: 0,
        },
    ))
}

/// The separating side alone.
pub fn try_separate(h: &FreeObjectHandle, t1: &Term, t2: &Term, opts: &ProveOptions) -> Result<Option<Witness>, VlaError> {
    check_terms(h, &[t1, t2])?;
    Ok(separate(h, t1, t2, opts, &AtomicBool::new(false)).0)
}

fn saturate_goal(
    h: &FreeObjectHandle,
    t1: &Term,
    t2: &Term,
    opts: &ProveOptions,
    stop: &AtomicBool,
) -> (Option<ProofMethod>, RunStats) {
    let mut scalars = BTreeSet::new();
    for t in [t1, t2].into_iter().chain(h.relations.iter().flat_map(|r| [&r.lhs, &r.rhs])) {
        collect_scalars(t, &mut scalars);
    }
    let rules = rules_for(h.target, &scalars);
    let mut g = EGraph::new();
    let (c1, c2) = (g.add_term(t1), g.add_term(t2));
    for r in &h.relations {
        let (a, b) = (g.add_term(&r.lhs), g.add_term(&r.rhs));
        g.union(a, b);
    }
    g.rebuild();
    let limits = RunLimits {
        height: opts.height,
        max_nodes: opts.max_nodes,
        max_rounds: opts.max_rounds,
        max_matches: opts.max_matches,
    };
    let mut method = None;
    let goal = |g: &EGraph, method: &mut Option<ProofMethod>| -> bool {
        if g.find(c1) == g.find(c2) {
            *method = Some(ProofMethod::Saturation);
            return true;
        }
        let class = |t: &Term| -> ClassId { g.lookup_term(t).map(|c| g.find(c)).unwrap_or(usize::MAX) };
        if lattice_linear_equal(t1, t2, class) {
            *method = Some(ProofMethod::Saturation);
            return true;
        }
        false
    };
    let stats = g.run(&rules, &limits, |g| stop.load(Ordering::Relaxed) || goal(g, &mut method));
    if method.is_none() {
        goal(&g, &mut method);
    }
    (method, stats)
}

/// Candidate evaluation: a structure and values for every generator.
struct Candidate {
    kind: WitnessKind,
    structure: Arc<TableVla>,
    values: Vec<Vec<Q>>,
}

fn library(target: TheoryName) -> Vec<(WitnessKind, Arc<TableVla>)> {
    let mut out: Vec<(WitnessKind, Arc<TableVla>)> = vec![(WitnessKind::Rationals, Arc::new(models::rationals()))];
    for d in 2..=4 {
        out.push((WitnessKind::Coordinatewise(d), Arc::new(models::coordinatewise(d))));
    }
    if matches!(target, TheoryName::Vs | TheoryName::Vl) {
        return out;
    }
    if target == TheoryName::Vla {
        for d in 1..=2 {
            out.push((WitnessKind::ZeroProduct(d), Arc::new(models::zero_product(d))));
        }
    }
    for k in 2..=3 {
        out.push((WitnessKind::Matrices(k), Arc::new(models::matrices(k))));
    }
    for (kind, inner) in [
        (WitnessKind::ZeroProduct(1), models::zero_product(1)),
        (WitnessKind::ZeroProduct(2), models::zero_product(2)),
        (WitnessKind::Matrices(2), models::matrices(2)),
    ] {
        let u = unitise(&inner).expect("library algebras are valid");
        out.push((WitnessKind::Unitisation(Box::new(kind)), Arc::new(u)));
    }
    out
}

/// All lattice homomorphisms `L -> {0, 1}`, as indicator vectors.
fn two_valued_homs(l: &LatticePoset) -> Vec<Vec<bool>> {
    let n = l.size();
    if n > 16 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let f = |x: usize| mask >> x & 1 == 1;
        let ok = (0..n).all(|x| {
            (0..n).all(|y| {
                let (m, j) = (l.meet(x, y).unwrap(), l.join(x, y).unwrap());
                f(m) == (f(x) && f(y)) && f(j) == (f(x) || f(y))
            })
        });
        if ok {
            out.push((0..n).map(f).collect());
        }
    }
    out
}

fn candidates(h: &FreeObjectHandle, t1: &Term, t2: &Term, opts: &ProveOptions) -> Vec<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5_eed0_f5ea);
    let names = h.names();
    let n = names.len();
    let lib = library(h.target);
    let mut out = Vec::new();

    match &h.presentation {
        BasePresentation::Lattice(l) => {
            if let Ok(e) = birkhoff_embed(l) {
                let d = e.join_irreducibles.len().max(1);
                let s = Arc::new(models::coordinatewise(d));
                let values: Vec<Vec<Q>> = e
                    .vectors
                    .iter()
                    .map(|v| (0..d).map(|i| q(v.get(i).copied().unwrap_or(0) as i64)).collect())
                    .collect();
                out.push(Candidate {
                    kind: WitnessKind::CharacteristicVectors(d),
                    structure: s,
                    values,
                });
            }
            let homs = two_valued_homs(l);
            if !homs.is_empty() {
                for (kind, s) in &lib {
                    for _ in 0..opts.trials {
                        let d = s.dim();
                        let coords: Vec<&Vec<bool>> = (0..d).map(|_| homs.choose(&mut rng).unwrap()).collect();
                        let scale: Vec<(Q, Q)> = (0..d)
                            .map(|_| (q(rng.gen_range(1..=3)), q(rng.gen_range(-2..=2))))
                            .collect();
                        let values = (0..n)
                            .map(|x| {
                                (0..d)
                                    .map(|i| {
                                        let (a, b) = &scale[i];
                                        if coords[i][x] {
                                            a + b
                                        } else {
                                            b.clone()
                                        }
                                    })
                                    .collect()
                            })
                            .collect();
                        out.push(Candidate {
                            kind: kind.clone(),
                            structure: s.clone(),
                            values,
                        });
                    }
                }
            }
            return out;
        }
        BasePresentation::Algebra(a) => {
            let own = Arc::new(a.clone());
            out.push(Candidate {
                kind: WitnessKind::BaseAlgebra,
                structure: own,
                values: (0..n).map(|i| a.basis(i)).collect(),
            });
            if let Ok(u) = unitise(a) {
                out.push(Candidate {
                    kind: WitnessKind::Unitisation(Box::new(WitnessKind::BaseAlgebra)),
                    structure: Arc::new(u),
                    values: (0..n).map(|i| unitisation_inclusion(&a.basis(i))).collect(),
                });
            }
            return out;
        }
        BasePresentation::Space(_) if h.base == BaseKind::Vl => {
            for (kind, s) in &lib {
                for _ in 0..opts.trials {
                    let d = s.dim();
                    let mut slots: Vec<usize> = (0..d).collect();
                    slots.shuffle(&mut rng);
                    let values = (0..n)
                        .map(|i| {
                            let mut v = vec![Q::zero(); d];
                            if let Some(&slot) = slots.get(i) {
                                v[slot] = q(rng.gen_range(1..=3));
                            }
                            v
                        })
                        .collect();
                    out.push(Candidate {
                        kind: kind.clone(),
                        structure: s.clone(),
                        values,
                    });
                }
            }
            return out;
        }
        _ => {}
    }

    // free generators: a function-model point first, then structured and random values
    if !contains_one(t1) && !contains_one(t2) {
        let gens: Vec<Arc<str>> = h.generators.ids().to_vec();
        if let (Ok(a), Ok(b)) = (
            MinMaxForm::from_term(t1, &gens, true),
            MinMaxForm::from_term(t2, &gens, true),
        ) {
            if let Ok(Some(p)) = eq_witness(&a, &b) {
                let unital = matches!(h.target, TheoryName::Vla1 | TheoryName::Vla1p);
                let (structure, values) = if unital {
                    let u = unitise(&models::zero_product(1)).expect("valid");
                    (u, p.iter().map(|x| vec![Q::zero(), x.clone()]).collect())
                } else {
                    (models::zero_product(1), p.iter().map(|x| vec![x.clone()]).collect())
                };
                out.push(Candidate {
                    kind: WitnessKind::FunctionModelPoint,
                    structure: Arc::new(structure),
                    values,
                });
            }
        }
    }
    for (kind, s) in &lib {
        if matches!(kind, WitnessKind::Matrices(_)) && n > 0 {
            let mut pool: Vec<Vec<Q>> = (0..s.dim()).map(|i| s.basis(i)).collect();
            if let Some(u) = s.unit() {
                pool.push(u.to_vec());
            }
            let mut idx = vec![0usize; n];
            for _ in 0..opts.trials.max(64) {
                out.push(Candidate {
                    kind: kind.clone(),
                    structure: s.clone(),
                    values: idx.iter().map(|&i| pool[i].clone()).collect(),
                });
                if !crate::term_algebra::advance(&mut idx, pool.len()) {
                    break;
                }
            }
        }
        for _ in 0..opts.trials {
            out.push(Candidate {
                kind: kind.clone(),
                structure: s.clone(),
                values: (0..n).map(|_| s.sample(&mut rng)).collect(),
            });
        }
    }
    out
}

fn contains_one(t: &Term) -> bool {
    match t.node() {
        Node::Gen(_) => false,
        Node::Apply(op, args) => op.name() == sym::ONE || args.iter().any(contains_one),
    }
}

fn separate(
    h: &FreeObjectHandle,
    t1: &Term,
    t2: &Term,
    opts: &ProveOptions,
    stop: &AtomicBool,
) -> (Option<Witness>, usize) {
    let mut trials = 0;
    for c in candidates(h, t1, t2, opts) {
        if stop.load(Ordering::Relaxed) {
            break;
        }
        trials += 1;
        let w = Witness {
            kind: c.kind,
            structure: (*c.structure).clone(),
            assignment: h.generators.ids().iter().cloned().zip(c.values).collect(),
            lhs: Vec::new(),
            rhs: Vec::new(),
        };
        let (Some(a), Some(b)) = (w.eval(t1), w.eval(t2)) else {
            continue;
        };
        if a == b {
            continue;
        }
        let respects = h.relations.iter().all(|r| match (w.eval(&r.lhs), w.eval(&r.rhs)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        });
        if respects {
            return (Some(Witness { lhs: a, rhs: b, ..w }), trials);
        }
    }
    (None, trials)
}

/// Named handles for the command line and tests.
pub mod presets {
    use super::*;

    pub fn lattice(name: &str, target: TheoryName) -> Option<Result<FreeObjectHandle, VlaError>> {
        let l = crate::theories::presets::by_name(name)?;
        Some(make_free(BaseKind::Lat, target, BasePresentation::Lattice(l)))
    }

    pub fn algebra(name: &str) -> Option<TableVla> {
        models::by_name(name)
    }
}
