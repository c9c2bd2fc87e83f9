//! Built-in equational theories (lattices through unital vector lattice
//! algebras with positive identity) and the conversion between ordered and
//! algebraic lattices.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::finite_algebra::{satisfies, AlgebraError, FiniteAlgebra, SatOptions};
use crate::rational::{default_probes, fmt_q, Q};
use crate::term_algebra::{eval_with, EvalError, Structure};
use crate::terms::{sym, Identity, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("elements {0} and {1} have no meet")]
    NoMeet(usize, usize),
    #[error("elements {0} and {1} have no join")]
    NoJoin(usize, usize),
    #[error("not a partial order: {0}")]
    NotPartialOrder(String),
    #[error("identity {label} fails at {witness:?}")]
    IdentityFails {
        label: String,
        witness: Vec<(String, usize)>,
    },
    #[error("structure does not interpret the theory's signature: {0}")]
    SignatureMismatch(String),
    #[error("poset file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TheoryName {
    Lat,
    Dlat,
    Vs,
    Vl,
    Vla,
    Vla1,
    Vla1p,
}

impl TheoryName {
    pub const ALL: [TheoryName; 7] = [
        TheoryName::Lat,
        TheoryName::Dlat,
        TheoryName::Vs,
        TheoryName::Vl,
        TheoryName::Vla,
        TheoryName::Vla1,
        TheoryName::Vla1p,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoryName::Lat => "LAT",
            TheoryName::Dlat => "DLAT",
            TheoryName::Vs => "VS",
            TheoryName::Vl => "VL",
            TheoryName::Vla => "VLA",
            TheoryName::Vla1 => "VLA1",
            TheoryName::Vla1p => "VLA1P",
        }
    }

    pub fn signature(self) -> Signature {
        use sym::*;
        let mut syms = match self {
            TheoryName::Lat | TheoryName::Dlat => return Signature::lattice(),
            _ => vec![(ZERO, 0), (PLUS, 2), (NEG, 1)],
        };
        if self >= TheoryName::Vl {
            syms.extend([(WEDGE, 2), (VEE, 2)]);
        }
        if self >= TheoryName::Vla {
            syms.push((DOT, 2));
        }
        if self >= TheoryName::Vla1 {
            syms.push((ONE, 0));
        }
        Signature::new(syms, true).unwrap()
    }
}

impl fmt::Display for TheoryName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoryName {
    type Err = TheoryError;
    fn from_str(s: &str) -> Result<Self, TheoryError> {
        TheoryName::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| TheoryError::UnknownTheory(s.to_string()))
    }
}

/// One numbered item of a theory: one or more equations, possibly a schema
/// over one or two scalars written `{a}`, `{b}`, `{a+b}`, `{ab}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub label: &'static str,
    pub scalar_params: usize,
    /// Scalar schema only required for nonnegative scalars.
    pub nonneg_only: bool,
    equations: Vec<(&'static str, &'static str)>,
}

impl Clause {
    fn plain(label: &'static str, equations: Vec<(&'static str, &'static str)>) -> Self {
        Clause {
            label,
            scalar_params: 0,
            nonneg_only: false,
            equations,
        }
    }

    fn scalar(label: &'static str, params: usize, equations: Vec<(&'static str, &'static str)>) -> Self {
        Clause {
            label,
            scalar_params: params,
            nonneg_only: false,
            equations,
        }
    }

    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    /// Concrete identities, scalar schemas instantiated over `probes`.
    pub fn instances(&self, sig: &Signature, probes: &[Q]) -> Vec<Identity> {
        let usable: Vec<&Q> = probes
            .iter()
            .filter(|q| !self.nonneg_only || !q.is_negative())
            .collect();
        let choices: Vec<Vec<&Q>> = match self.scalar_params {
            0 => vec![vec![]],
            1 => usable.iter().map(|a| vec![*a]).collect(),
            _ => usable
                .iter()
                .flat_map(|a| usable.iter().map(move |b| vec![*a, *b]))
                .collect(),
        };
        let mut out = Vec::new();
        for choice in choices {
            for (i, (l, r)) in self.equations.iter().enumerate() {
                let fill = |s: &str| -> String {
                    let mut s = s.to_string();
                    if let [a, b] = choice[..] {
                        s = s.replace("{a+b}", &fmt_q(&(a + b)));
                        s = s.replace("{ab}", &fmt_q(&(a * b)));
                        s = s.replace("{b}", &fmt_q(b));
                    }
                    if let Some(a) = choice.first() {
                        s = s.replace("{a}", &fmt_q(a));
                    }
                    s
                };
                let mut label = self.label.to_string();
                if self.equations.len() > 1 {
                    label.push((b'a' + i as u8) as char);
                }
                if !choice.is_empty() {
                    let vals: Vec<String> = choice.iter().map(|q| fmt_q(q)).collect();
                    label.push_str(&format!("[{}]", vals.join(",")));
                }
                let lhs = crate::terms::parse_term_open(&fill(l), sig).expect("built-in identity");
                let rhs = crate::terms::parse_term_open(&fill(r), sig).expect("built-in identity");
                out.push(Identity::new(label, lhs, rhs));
            }
        }
        out
    }
}

fn lattice_clauses() -> Vec<Clause> {
    vec![
        Clause::plain("meet-assoc", vec![("(wedge v1 (wedge v2 v3))", "(wedge (wedge v1 v2) v3)")]),
        Clause::plain("join-assoc", vec![("(vee v1 (vee v2 v3))", "(vee (vee v1 v2) v3)")]),
        Clause::plain("meet-idem", vec![("(wedge v1 v1)", "v1")]),
        Clause::plain("join-idem", vec![("(vee v1 v1)", "v1")]),
        Clause::plain("meet-comm", vec![("(wedge v1 v2)", "(wedge v2 v1)")]),
        Clause::plain("join-comm", vec![("(vee v1 v2)", "(vee v2 v1)")]),
        Clause::plain("meet-absorb", vec![("(wedge v1 (vee v1 v2))", "v1")]),
        Clause::plain("join-absorb", vec![("(vee v1 (wedge v1 v2))", "v1")]),
    ]
}

fn distributive_clauses() -> Vec<Clause> {
    vec![
        Clause::plain(
            "meet-dist",
            vec![("(wedge v1 (vee v2 v3))", "(vee (wedge v1 v2) (wedge v1 v3))")],
        ),
        Clause::plain(
            "join-dist",
            vec![("(vee v1 (wedge v2 v3))", "(wedge (vee v1 v2) (vee v1 v3))")],
        ),
    ]
}

/// Items (1)-(20) of the unital vector lattice algebra axiomatisation.
fn vla1_clauses() -> Vec<Clause> {
    let mut nineteen = Clause::scalar(
        "(19)",
        1,
        vec![("(scale {a} (wedge zero v1))", "(wedge zero (scale {a} v1))")],
    );
    nineteen.nonneg_only = true;
    vec![
        Clause::plain("(1)", vec![("(plus (plus v1 v2) v3)", "(plus v1 (plus v2 v3))")]),
        Clause::plain("(2)", vec![("(plus v1 zero)", "v1")]),
        Clause::plain("(3)", vec![("(plus v1 (neg v1))", "zero")]),
        Clause::plain("(4)", vec![("(plus v1 v2)", "(plus v2 v1)")]),
        Clause::scalar(
            "(5)",
            1,
            vec![("(scale {a} (plus v1 v2))", "(plus (scale {a} v1) (scale {a} v2))")],
        ),
        Clause::scalar("(6)", 2, vec![("(scale {a+b} v1)", "(plus (scale {a} v1) (scale {b} v1))")]),
        Clause::scalar("(7)", 2, vec![("(scale {ab} v1)", "(scale {a} (scale {b} v1))")]),
        Clause::plain("(8)", vec![("(scale 1 v1)", "v1")]),
        Clause::plain("(9)", vec![("(dot (dot v1 v2) v3)", "(dot v1 (dot v2 v3))")]),
        Clause::plain("(10)", vec![("(dot v1 (plus v2 v3))", "(plus (dot v1 v2) (dot v1 v3))")]),
        Clause::plain("(11)", vec![("(dot (plus v1 v2) v3)", "(plus (dot v1 v3) (dot v2 v3))")]),
        Clause::scalar(
            "(12)",
            1,
            vec![
                ("(scale {a} (dot v1 v2))", "(dot (scale {a} v1) v2)"),
                ("(scale {a} (dot v1 v2))", "(dot v1 (scale {a} v2))"),
            ],
        ),
        Clause::plain("(13)", vec![("(dot one v1)", "v1"), ("(dot v1 one)", "v1")]),
        Clause::plain(
            "(14)",
            vec![
                ("(wedge v1 (wedge v2 v3))", "(wedge (wedge v1 v2) v3)"),
                ("(vee v1 (vee v2 v3))", "(vee (vee v1 v2) v3)"),
            ],
        ),
        Clause::plain("(15)", vec![("(wedge v1 v1)", "v1"), ("(vee v1 v1)", "v1")]),
        Clause::plain(
            "(16)",
            vec![("(wedge v1 v2)", "(wedge v2 v1)"), ("(vee v1 v2)", "(vee v2 v1)")],
        ),
        Clause::plain(
            "(17)",
            vec![("(wedge v1 (vee v1 v2))", "v1"), ("(vee v1 (wedge v1 v2))", "v1")],
        ),
        Clause::plain(
            "(18)",
            vec![("(plus v1 (wedge v2 v3))", "(wedge (plus v1 v2) (plus v1 v3))")],
        ),
        nineteen,
        Clause::plain(
            "(20)",
            vec![(
                "(wedge zero (dot (wedge v1 (neg v1)) (wedge v2 (neg v2))))",
                "zero",
            )],
        ),
    ]
}

fn positive_identity_clause() -> Clause {
    Clause::plain("(pos)", vec![("(wedge zero one)", "zero")])
}

#[derive(Clone, Debug)]
pub struct Theory {
    pub name: TheoryName,
    pub sig: Signature,
    pub clauses: Vec<Clause>,
}

/// The clause list of a built-in theory.
pub fn theory(name: TheoryName) -> Theory {
    let keep = |labels: &[u32]| -> Vec<Clause> {
        vla1_clauses()
            .into_iter()
            .filter(|c| {
                let n: u32 = c.label.trim_matches(|ch| ch == '(' || ch == ')').parse().unwrap();
                labels.contains(&n)
            })
            .collect()
    };
    let clauses = match name {
        TheoryName::Lat => lattice_clauses(),
        TheoryName::Dlat => {
            let mut c = lattice_clauses();
            c.extend(distributive_clauses());
            c
        }
        TheoryName::Vs => keep(&[1, 2, 3, 4, 5, 6, 7, 8]),
        TheoryName::Vl => keep(&[1, 2, 3, 4, 5, 6, 7, 8, 14, 15, 16, 17, 18, 19]),
        TheoryName::Vla => keep(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 14, 15, 16, 17, 18, 19, 20]),
        TheoryName::Vla1 => vla1_clauses(),
        TheoryName::Vla1p => {
            let mut c = vla1_clauses();
            c.push(positive_identity_clause());
            c
        }
    };
    Theory {
        name,
        sig: name.signature(),
        clauses,
    }
}

impl Theory {
    pub fn clause(&self, label: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.label == label)
    }

    pub fn identity_count(&self) -> usize {
        self.clauses.iter().map(Clause::equation_count).sum()
    }

    /// All concrete identities, scalar schemas instantiated over `probes`.
    pub fn identities(&self, probes: &[Q]) -> Vec<Identity> {
        self.clauses
            .iter()
            .flat_map(|c| c.instances(&self.sig, probes))
            .collect()
    }

    /// Is every clause of `self` literally a clause of `other`?
    pub fn contained_in(&self, other: &Theory) -> bool {
        self.clauses.iter().all(|c| other.clauses.contains(c))
    }
}

/// A finite poset given by its order matrix, with element names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePoset {
    n: usize,
    leq: Vec<bool>,
    names: Vec<String>,
}

impl LatticePoset {
    pub fn new(n: usize, leq: Vec<bool>) -> Result<Self, TheoryError> {
        let names = (0..n).map(|i| format!("e{i}")).collect();
        Self::with_names(names, leq)
    }

    pub fn with_names(names: Vec<String>, leq: Vec<bool>) -> Result<Self, TheoryError> {
        let n = names.len();
        if n == 0 {
            return Err(TheoryError::NotPartialOrder("empty".into()));
        }
        if leq.len() != n * n {
            return Err(TheoryError::NotPartialOrder("matrix has wrong size".into()));
        }
        let p = LatticePoset { n, leq, names };
        for x in 0..n {
            if !p.le(x, x) {
                return Err(TheoryError::NotPartialOrder(format!("{x} not reflexive")));
            }
            for y in 0..n {
                if x != y && p.le(x, y) && p.le(y, x) {
                    return Err(TheoryError::NotPartialOrder(format!("{x} and {y} antisymmetry")));
                }
                for z in 0..n {
                    if p.le(x, y) && p.le(y, z) && !p.le(x, z) {
                        return Err(TheoryError::NotPartialOrder(format!("{x} {y} {z} transitivity")));
                    }
                }
            }
        }
        Ok(p)
    }

    /// Reflexive-transitive closure of the given strict relations.
    pub fn from_relations(names: Vec<String>, below: &[(usize, usize)]) -> Result<Self, TheoryError> {
        let n = names.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in below {
            if a >= n || b >= n {
                return Err(TheoryError::NotPartialOrder(format!("element out of range in {a} < {b}")));
            }
            leq[a * n + b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i * n + k] && leq[k * n + j] {
                        leq[i * n + j] = true;
                    }
                }
            }
        }
        Self::with_names(names, leq)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn le(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.n + y]
    }

    pub fn meet(&self, x: usize, y: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.n).filter(|&z| self.le(z, x) && self.le(z, y)).collect();
        lower.iter().copied().find(|&m| lower.iter().all(|&z| self.le(z, m)))
    }

    pub fn join(&self, x: usize, y: usize) -> Option<usize> {
        let upper: Vec<usize> = (0..self.n).filter(|&z| self.le(x, z) && self.le(y, z)).collect();
        upper.iter().copied().find(|&j| upper.iter().all(|&z| self.le(j, z)))
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.n).find(|&b| (0..self.n).all(|x| self.le(b, x)))
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.n).find(|&t| (0..self.n).all(|x| self.le(x, t)))
    }

    /// Poset file: `elements a b c ..` then lines `x < y` (chains `x < y < z` allowed).
    pub fn parse(text: &str) -> Result<Self, TheoryError> {
        let mut names: Option<Vec<String>> = None;
        let mut below = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| TheoryError::Parse { line: n + 1, msg };
            if let Some(rest) = line.strip_prefix("elements") {
                names = Some(rest.split_whitespace().map(String::from).collect());
                continue;
            }
            let names = names.as_ref().ok_or_else(|| err("relation before `elements`".into()))?;
            let chain: Vec<&str> = line.split("<=").flat_map(|p| p.split('<')).map(str::trim).collect();
            if chain.len() < 2 {
                return Err(err(format!("expected `x < y`, got `{line}`")));
            }
            let idx = chain
                .iter()
                .map(|c| {
                    names
                        .iter()
                        .position(|n| n == c)
                        .ok_or_else(|| err(format!("unknown element `{c}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            below.extend(idx.windows(2).map(|w| (w[0], w[1])));
        }
        let names = names.ok_or(TheoryError::Parse {
            line: 0,
            msg: "missing `elements` line".into(),
        })?;
        Self::from_relations(names, &below)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("elements {}\n", self.names.join(" "));
        for x in 0..self.n {
            for y in 0..self.n {
                if x != y && self.le(x, y) {
                    out.push_str(&format!("{} < {}\n", self.names[x], self.names[y]));
                }
            }
        }
        out
    }
}

/// Meet and join tables computed from the order.
pub fn order_to_ops(l: &LatticePoset) -> Result<FiniteAlgebra, TheoryError> {
    let n = l.n;
    let mut meet = vec![0; n * n];
    let mut join = vec![0; n * n];
    for x in 0..n {
        for y in 0..n {
            meet[x * n + y] = l.meet(x, y).ok_or(TheoryError::NoMeet(x, y))?;
            join[x * n + y] = l.join(x, y).ok_or(TheoryError::NoJoin(x, y))?;
        }
    }
    Ok(FiniteAlgebra::new(Signature::lattice(), n, vec![meet, join])?)
}

/// `x <= y` iff `x ^ y = x`, after checking the eight lattice identities.
pub fn ops_to_order(a: &FiniteAlgebra) -> Result<LatticePoset, TheoryError> {
    let (Some(w), Some(v)) = (a.symbol_index(sym::WEDGE), a.symbol_index(sym::VEE)) else {
        return Err(TheoryError::SignatureMismatch("needs wedge and vee".into()));
    };
    let lat = theory(TheoryName::Lat);
    for id in lat.identities(&[]) {
        let verdict = satisfies(a, &id, &SatOptions::default())?;
        if !verdict.holds {
            return Err(TheoryError::IdentityFails {
                label: id.label,
                witness: verdict.counterexample.unwrap_or_default(),
            });
        }
    }
    let n = a.size();
    let mut leq = vec![false; n * n];
    for x in 0..n {
        for y in 0..n {
            leq[x * n + y] = a.apply_index(w, &[x, y]) == x;
        }
    }
    let poset = LatticePoset::new(n, leq)?;
    for x in 0..n {
        for y in 0..n {
            if poset.meet(x, y) != Some(a.apply_index(w, &[x, y])) {
                return Err(TheoryError::NoMeet(x, y));
            }
            if poset.join(x, y) != Some(a.apply_index(v, &[x, y])) {
                return Err(TheoryError::NoJoin(x, y));
            }
        }
    }
    Ok(poset)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClauseVerdict {
    pub label: String,
    pub holds: bool,
    pub mode: CheckMode,
    /// Scalar-indexed clause checked only on the probe set.
    pub on_probe_set: bool,
    pub instances: usize,
    pub checks: u64,
    pub witness: Option<ClauseWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClauseWitness {
    pub identity: String,
    pub assignment: Vec<(String, String)>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryReport {
    pub theory: TheoryName,
    pub verdicts: Vec<ClauseVerdict>,
}

impl TheoryReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }

    pub fn exhaustive(&self) -> bool {
        self.verdicts.iter().all(|v| v.mode == CheckMode::Exhaustive)
    }
}

impl fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.verdicts {
            let mode = match v.mode {
                CheckMode::Exhaustive => "exhaustive",
                CheckMode::Sampled => "sampled",
            };
            let probe = if v.on_probe_set { " checked on probe set" } else { "" };
            write!(
                f,
                "{} {} {} ({} instance(s), {} check(s){})",
                self.theory,
                v.label,
                if v.holds { "PASS" } else { "FAIL" },
                v.instances,
                v.checks,
                probe
            )?;
            write!(f, " [{mode}]")?;
            if let Some(w) = &v.witness {
                let asg: Vec<String> = w.assignment.iter().map(|(k, x)| format!("{k}={x}")).collect();
                write!(f, " witness {} at {}: {} != {}", w.identity, asg.join(" "), w.lhs, w.rhs)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub probes: Vec<Q>,
    /// Random assignments per identity when not exhaustive.
    pub samples: u64,
    /// Exhaustive when the assignment space is at most this large.
    pub exhaustive_budget: u64,
    pub seed: u64,
    /// Worker threads for per-clause checks.
    pub jobs: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            probes: default_probes(),
            samples: 1000,
            exhaustive_budget: 1_000_000,
            seed: 0,
            jobs: 1,
        }
    }
}

fn check_clause<S: Structure + Sync>(
    structure: &S,
    sig: &Signature,
    clause: &Clause,
    opts: &CheckOptions,
    clause_index: usize,
) -> Result<ClauseVerdict, TheoryError>
where
    S::Elem: Send + Sync,
{
    let instances = clause.instances(sig, &opts.probes);
    check_instances(structure, clause.label, clause.scalar_params > 0, &instances, opts, clause_index)
}

fn check_instances<S: Structure + Sync>(
    structure: &S,
    label: &str,
    on_probe_set: bool,
    instances: &[Identity],
    opts: &CheckOptions,
    clause_index: usize,
) -> Result<ClauseVerdict, TheoryError>
where
    S::Elem: Send + Sync,
{
    let verdict = |instances: usize, mode, checks, witness: Option<ClauseWitness>| ClauseVerdict {
        label: label.to_string(),
        holds: witness.is_none(),
        mode,
        on_probe_set,
        instances,
        checks,
        witness,
    };
    let carrier = structure.carrier();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((clause_index as u64 + 1) << 32));
    let mut mode = CheckMode::Exhaustive;
    let mut checks = 0u64;
    for id in instances {
        let vars = id.variables();
        let k = vars.len();
        let space = carrier.as_ref().map(|c| (c.len() as u128).pow(k as u32));
        let exhaustive = matches!(space, Some(s) if s <= opts.exhaustive_budget as u128);
        let mut values: HashMap<Arc<str>, S::Elem> = HashMap::new();
        let test = |values: &HashMap<Arc<str>, S::Elem>| -> Result<Option<ClauseWitness>, TheoryError> {
            let lookup = |g: &str| values.get(g).cloned();
            let map_err = |e: EvalError| TheoryError::SignatureMismatch(e.to_string());
            let l = eval_with(&id.lhs, structure, &lookup).map_err(map_err)?;
            let r = eval_with(&id.rhs, structure, &lookup).map_err(map_err)?;
            if structure.elem_eq(&l, &r) {
                return Ok(None);
            }
            Ok(Some(ClauseWitness {
                identity: format!("{} {}", id.label, id),
                assignment: vars
                    .iter()
                    .map(|v| (v.to_string(), structure.show(&values[v])))
                    .collect(),
                lhs: structure.show(&l),
                rhs: structure.show(&r),
            }))
        };
        if exhaustive {
            let carrier = carrier.as_ref().unwrap();
            let mut idx = vec![0usize; k];
            loop {
                for (v, &i) in vars.iter().zip(&idx) {
                    values.insert(v.clone(), carrier[i].clone());
                }
                checks += 1;
                if let Some(w) = test(&values)? {
                    return Ok(verdict(instances.len(), mode, checks, Some(w)));
                }
                if !crate::term_algebra::advance(&mut idx, carrier.len()) {
                    break;
                }
            }
        } else {
            mode = CheckMode::Sampled;
            for _ in 0..opts.samples {
                for v in &vars {
                    values.insert(v.clone(), structure.sample(&mut rng));
                }
                checks += 1;
                if let Some(w) = test(&values)? {
                    return Ok(verdict(instances.len(), mode, checks, Some(w)));
                }
            }
        }
    }
    Ok(verdict(instances.len(), mode, checks, None))
}

/// Verdicts for free-standing identities (e.g. read from a file), one each.
pub fn check_identities<S: Structure + Sync>(
    structure: &S,
    ids: &[Identity],
    opts: &CheckOptions,
) -> Result<Vec<ClauseVerdict>, TheoryError>
where
    S::Elem: Send + Sync,
{
    ids.iter()
        .enumerate()
        .map(|(i, id)| check_instances(structure, &id.label, false, std::slice::from_ref(id), opts, i))
        .collect()
}

/// Per-clause verdicts of `th` on `structure`: exhaustive when the carrier is
/// finite and small enough, otherwise sampled and flagged as such.
pub fn check_theory<S: Structure + Sync>(
    structure: &S,
    th: &Theory,
    opts: &CheckOptions,
) -> Result<TheoryReport, TheoryError>
where
    S::Elem: Send + Sync,
{
    let jobs = opts.jobs.max(1).min(th.clauses.len().max(1));
    let mut verdicts: Vec<Option<Result<ClauseVerdict, TheoryError>>> = vec![None; th.clauses.len()];
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..jobs)
            .map(|j| (j..th.clauses.len()).step_by(jobs).collect())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idxs| {
                scope.spawn(move || {
                    idxs.into_iter()
                        .map(|i| (i, check_clause(structure, &th.sig, &th.clauses[i], opts, i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("clause worker panicked") {
                verdicts[i] = Some(r);
            }
        }
    });
    let verdicts = verdicts
        .into_iter()
        .map(|v| v.expect("every clause checked"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TheoryReport {
        theory: th.name,
        verdicts,
    })
}

/// Named small lattices.
pub mod presets {
    use super::LatticePoset;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    pub fn chain(n: usize) -> LatticePoset {
        let rel: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        LatticePoset::from_relations((0..n).map(|i| format!("c{i}")).collect(), &rel).unwrap()
    }

    /// The diamond: `bot < a, b, c < top`.
    pub fn m3() -> LatticePoset {
        LatticePoset::from_relations(
            names(&["bot", "a", "b", "c", "top"]),
            &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)],
        )
        .unwrap()
    }

    /// The pentagon: `bot < a < c < top`, `bot < b < top`.
    pub fn n5() -> LatticePoset {
        LatticePoset::from_relations(
            names(&["bot", "a", "b", "c", "top"]),
            &[(0, 1), (1, 3), (3, 4), (0, 2), (2, 4)],
        )
        .unwrap()
    }

    /// Four-element Boolean lattice `bot < a, b < top`.
    pub fn boolean4() -> LatticePoset {
        LatticePoset::from_relations(
            names(&["bot", "a", "b", "top"]),
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        .unwrap()
    }

    pub fn by_name(name: &str) -> Option<LatticePoset> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "m3" => Some(m3()),
            "n5" => Some(n5()),
            "bool4" | "boolean4" | "b2" => Some(boolean4()),
            _ => {
                let n: usize = lower.strip_prefix("chain")?.parse().ok()?;
                (n >= 1).then(|| chain(n))
            }
        }
    }
}
