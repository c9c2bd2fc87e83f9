//! The free vector lattice over `n` generators as positively homogeneous
//! piecewise linear functions on `Q^n`, kept as joins of meets of linear
//! forms. Order and equality are decided exactly.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fourier_motzkin::{strict_feasible, FmError, DEFAULT_CAP};
use crate::partition::Partition;
use crate::rational::{fmt_q, frac, q, Q};
use crate::term_algebra::{EvalError, Structure};
use crate::terms::{sym, Node, Op, Term};

/// Total linear pieces a form may carry after simplification.
pub const MAX_PIECES: usize = 4096;
/// Above this many pieces, redundant clauses are pruned semantically.
const REDUCE_AT: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FvlError {
    #[error("forms over {left} and {right} generators")]
    Mismatch { left: usize, right: usize },
    #[error("form has {found} linear pieces (cap {cap})")]
    Pieces { found: usize, cap: usize },
    #[error(transparent)]
    Elimination(#[from] FmError),
    #[error("point {0} lies outside the unit cube or has the wrong length")]
    OutsideCube(usize),
    #[error("cannot interpret term: {0}")]
    Term(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinForm(pub Vec<Q>);

impl LinForm {
    pub fn zero(n: usize) -> Self {
        LinForm(vec![Q::zero(); n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut c = vec![Q::zero(); n];
        c[i] = Q::one();
        LinForm(c)
    }

    pub fn eval(&self, p: &[Q]) -> Q {
        self.0.iter().zip(p).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, o: &LinForm) -> LinForm {
        LinForm(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &LinForm) -> LinForm {
        LinForm(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> LinForm {
        LinForm(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, s: &Q) -> LinForm {
        LinForm(self.0.iter().map(|a| a * s).collect())
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
        let mut first = true;
        for (c, name) in self.0.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{}*{name}", fmt_q(&mag))?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `max_i min_j l_ij`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MinMaxForm {
    n: usize,
    clauses: Vec<Vec<LinForm>>,
}

impl MinMaxForm {
    pub fn new(n: usize, clauses: Vec<Vec<LinForm>>) -> Result<Self, FvlError> {
        if clauses.is_empty() || clauses.iter().any(Vec::is_empty) {
            return Err(FvlError::Term("empty clause list".into()));
        }
        if let Some(bad) = clauses.iter().flatten().find(|l| l.0.len() != n) {
            return Err(FvlError::Mismatch {
                left: n,
                right: bad.0.len(),
            });
        }
        Ok(Self::tidy(n, clauses))
    }

    pub fn linear(l: LinForm) -> Self {
        MinMaxForm {
            n: l.0.len(),
            clauses: vec![vec![l]],
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::linear(LinForm::zero(n))
    }

    pub fn var(n: usize, i: usize) -> Self {
        Self::linear(LinForm::var(n, i))
    }

    pub fn generators(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[Vec<LinForm>] {
        &self.clauses
    }

    pub fn pieces(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    pub fn eval(&self, p: &[Q]) -> Q {
        self.clauses
            .iter()
            .map(|c| c.iter().map(|l| l.eval(p)).min().expect("nonempty clause"))
            .max()
            .expect("nonempty form")
    }

    /// Sorts, removes duplicate pieces and clauses absorbed by a subset clause.
    fn tidy(n: usize, clauses: Vec<Vec<LinForm>>) -> Self {
        let mut cs: Vec<Vec<LinForm>> = clauses
            .into_iter()
            .map(|mut c| {
                c.sort();
                c.dedup();
                c
            })
            .collect();
        cs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        cs.dedup();
        let mut kept: Vec<Vec<LinForm>> = Vec::with_capacity(cs.len());
        for c in cs {
            // meet over a superset lies below the meet over the subset
            let absorbed = kept.iter().any(|k| k.iter().all(|l| c.binary_search(l).is_ok()));
            if !absorbed {
                kept.push(c);
            }
        }
        kept.sort();
        MinMaxForm { n, clauses: kept }
    }

    fn finish(n: usize, clauses: Vec<Vec<LinForm>>) -> Result<Self, FvlError> {
        let f = Self::tidy(n, clauses);
        let f = if f.pieces() > REDUCE_AT { f.reduce()? } else { f };
        if f.pieces() > MAX_PIECES {
            return Err(FvlError::Pieces {
                found: f.pieces(),
                cap: MAX_PIECES,
            });
        }
        Ok(f)
    }

    /// Drops pieces that are nowhere the strict minimum of their clause, then
    /// clauses lying below the join of the remaining ones.
    pub fn reduce(&self) -> Result<Self, FvlError> {
        let mut trimmed = Vec::with_capacity(self.clauses.len());
        for c in &self.clauses {
            let mut c = c.clone();
            let mut i = 0;
            while i < c.len() && c.len() > 1 {
                let system: Vec<Vec<Q>> = c
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, o)| o.sub(&c[i]).0)
                    .collect();
                if strict_feasible(&system, self.n, DEFAULT_CAP)?.is_none() {
                    c.remove(i);
                } else {
                    i += 1;
                }
            }
            trimmed.push(c);
        }
        let mut clauses = Self::tidy(self.n, trimmed).clauses;
        let mut i = 0;
        while i < clauses.len() && clauses.len() > 1 {
            let single = MinMaxForm {
                n: self.n,
                clauses: vec![clauses[i].clone()],
            };
            let mut others = clauses.clone();
            others.remove(i);
            let rest = MinMaxForm {
                n: self.n,
                clauses: others,
            };
            if leq_witness(&single, &rest)?.is_none() {
                clauses.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(MinMaxForm { n: self.n, clauses })
    }

    fn same_n(&self, o: &MinMaxForm) -> Result<(), FvlError> {
        if self.n != o.n {
            return Err(FvlError::Mismatch {
                left: self.n,
                right: o.n,
            });
        }
        Ok(())
    }

    pub fn join(&self, o: &MinMaxForm) -> Result<Self, FvlError> {
        self.same_n(o)?;
        let clauses = self.clauses.iter().chain(&o.clauses).cloned().collect();
        Self::finish(self.n, clauses)
    }

    /// Pairwise clause unions; distributivity keeps the result in min-max shape.
    pub fn meet(&self, o: &MinMaxForm) -> Result<Self, FvlError> {
        self.same_n(o)?;
        let mut clauses = Vec::with_capacity(self.clauses.len() * o.clauses.len());
        for a in &self.clauses {
            for b in &o.clauses {
                clauses.push(a.iter().chain(b).cloned().collect());
            }
        }
        Self::finish(self.n, clauses)
    }

    pub fn add(&self, o: &MinMaxForm) -> Result<Self, FvlError> {
        self.same_n(o)?;
        let mut clauses = Vec::new();
        for a in &self.clauses {
            for b in &o.clauses {
                let mut c = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        c.push(x.add(y));
                    }
                }
                clauses.push(c);
            }
        }
        Self::finish(self.n, clauses)
    }

    /// `-(max_i min_j l_ij) = min_i max_j (-l_ij)`, multiplied out one clause
    /// at a time so that intermediate results get reduced.
    pub fn neg(&self) -> Result<Self, FvlError> {
        let mut acc: Option<MinMaxForm> = None;
        for c in &self.clauses {
            let flipped = Self::tidy(self.n, c.iter().map(|l| vec![l.neg()]).collect());
            acc = Some(match acc {
                None => flipped,
                Some(f) => f.meet(&flipped)?,
            });
        }
        Ok(acc.expect("nonempty form"))
    }

    pub fn scale(&self, s: &Q) -> Result<Self, FvlError> {
        if s.is_negative() {
            return self.neg()?.scale(&-s);
        }
        if s.is_zero() {
            return Ok(Self::zero(self.n));
        }
        let clauses = self
            .clauses
            .iter()
            .map(|c| c.iter().map(|l| l.scale(s)).collect())
            .collect();
        Ok(Self::tidy(self.n, clauses))
    }

    pub fn sub(&self, o: &MinMaxForm) -> Result<Self, FvlError> {
        self.add(&o.neg()?)
    }

    pub fn abs(&self) -> Result<Self, FvlError> {
        self.join(&self.neg()?)
    }

    /// Interprets a term over the vector lattice operations, generator
    /// `gens[i]` going to the i-th coordinate. With `zero_product`, `dot`
    /// is read as the zero multiplication.
    pub fn from_term(t: &Term, gens: &[Arc<str>], zero_product: bool) -> Result<Self, FvlError> {
        let n = gens.len();
        match t.node() {
            Node::Gen(g) => gens
                .iter()
                .position(|x| x == g)
                .map(|i| Self::var(n, i))
                .ok_or_else(|| FvlError::Term(format!("generator `{g}` not in the generator list"))),
            Node::Apply(op, args) => {
                let a: Vec<MinMaxForm> = args
                    .iter()
                    .map(|c| Self::from_term(c, gens, zero_product))
                    .collect::<Result<_, _>>()?;
                apply_op(n, op, &a, zero_product).map_err(|e| match e {
                    ApplyError::Fvl(e) => e,
                    ApplyError::Eval(e) => FvlError::Term(e.to_string()),
                })
            }
        }
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        FormDisplay { form: self, names }
    }

    pub fn default_names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

enum ApplyError {
    Fvl(FvlError),
    Eval(EvalError),
}

fn apply_op(n: usize, op: &Op, a: &[MinMaxForm], zero_product: bool) -> Result<MinMaxForm, ApplyError> {
    let arity = |k: usize| {
        if a.len() == k {
            Ok(())
        } else {
            Err(ApplyError::Eval(EvalError::Arity {
                op: op.to_string(),
                found: a.len(),
            }))
        }
    };
    let fvl = ApplyError::Fvl;
    match op {
        Op::Scale(s) => {
            arity(1)?;
            a[0].scale(s).map_err(fvl)
        }
        Op::Named(name) => match &**name {
            sym::ZERO => arity(0).map(|_| MinMaxForm::zero(n)),
            sym::PLUS => arity(2).and_then(|_| a[0].add(&a[1]).map_err(fvl)),
            sym::NEG => arity(1).and_then(|_| a[0].neg().map_err(fvl)),
            sym::WEDGE => arity(2).and_then(|_| a[0].meet(&a[1]).map_err(fvl)),
            sym::VEE => arity(2).and_then(|_| a[0].join(&a[1]).map_err(fvl)),
            sym::DOT if zero_product => arity(2).map(|_| MinMaxForm::zero(n)),
            other => Err(ApplyError::Eval(EvalError::Unsupported(other.to_string()))),
        },
    }
}

struct FormDisplay<'a> {
    form: &'a MinMaxForm,
    names: &'a [String],
}

impl fmt::Display for FormDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs = &self.form.clauses;
        let clause = |f: &mut fmt::Formatter<'_>, c: &[LinForm]| -> fmt::Result {
            if c.len() == 1 {
                return c[0].write(f, self.names);
            }
            write!(f, "min(")?;
            for (i, l) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                l.write(f, self.names)?;
            }
            write!(f, ")")
        };
        if cs.len() == 1 {
            return clause(f, &cs[0]);
        }
        write!(f, "max(")?;
        for (i, c) in cs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            clause(f, c)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MinMaxForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = Self::default_names(self.n);
        FormDisplay { form: self, names: &names }.fmt(f)
    }
}

/// A point `p` with `a(p) > b(p)`, or `None` when `a <= b` everywhere.
///
/// The witnesses form an open set, so it is enough to look inside open cells
/// covering the space up to boundaries. Each clause of `a` is split into the
/// cells where one piece `a_j` is its minimum. Inside a cell the search keeps
/// a cone and an interior point: if the point is a witness it is returned;
/// otherwise some clause `B` of `b` lies above `a_j` there, and the cone is cut
/// into the disjoint parts "first piece of `B` below `a_j`", "second piece
/// below, first above", ...; the part with every piece above cannot hold a
/// witness and is dropped.
pub fn leq_witness(a: &MinMaxForm, b: &MinMaxForm) -> Result<Option<Vec<Q>>, FvlError> {
    a.same_n(b)?;
    for clause in &a.clauses {
        for aj in clause {
            let mut system: Vec<Vec<Q>> = clause
                .iter()
                .filter(|&ai| ai != aj)
                .map(|ai| ai.sub(aj).0)
                .collect();
            if let Some(p) = search(aj, b, &mut system, a.n)? {
                return Ok(Some(p));
            }
        }
    }
    Ok(None)
}

fn search(a: &LinForm, b: &MinMaxForm, system: &mut Vec<Vec<Q>>, n: usize) -> Result<Option<Vec<Q>>, FvlError> {
    let Some(p) = strict_feasible(system, n, DEFAULT_CAP)? else {
        return Ok(None);
    };
    let top = a.eval(&p);
    let open = b
        .clauses
        .iter()
        .filter(|c| c.iter().all(|l| l.eval(&p) >= top))
        .min_by_key(|c| c.len());
    let Some(open) = open else {
        return Ok(Some(p));
    };
    let before = system.len();
    for piece in open {
        // a piece equal to `a` is never below it and always (weakly) above
        if piece == a {
            continue;
        }
        system.push(a.sub(piece).0);
        let found = search(a, b, system, n)?;
        system.pop();
        if found.is_some() {
            system.truncate(before);
            return Ok(found);
        }
        system.push(piece.sub(a).0);
    }
    system.truncate(before);
    Ok(None)
}

pub fn fvl_leq(a: &MinMaxForm, b: &MinMaxForm) -> Result<bool, FvlError> {
    Ok(leq_witness(a, b)?.is_none())
}

/// A point where the forms differ, if any.
pub fn eq_witness(a: &MinMaxForm, b: &MinMaxForm) -> Result<Option<Vec<Q>>, FvlError> {
    if a == b {
        return Ok(None);
    }
    if let Some(p) = leq_witness(a, b)? {
        return Ok(Some(p));
    }
    leq_witness(b, a)
}

pub fn fvl_eq(a: &MinMaxForm, b: &MinMaxForm) -> Result<bool, FvlError> {
    Ok(eq_witness(a, b)?.is_none())
}

/// Random form with small coefficients and at most `max_pieces` pieces.
pub fn random_form(rng: &mut ChaCha8Rng, n: usize, max_pieces: usize) -> MinMaxForm {
    let total = rng.gen_range(1..=max_pieces.max(1));
    let clause_count = rng.gen_range(1..=total);
    let mut clauses: Vec<Vec<LinForm>> = vec![Vec::new(); clause_count];
    for i in 0..total {
        let slot = if i < clause_count { i } else { rng.gen_range(0..clause_count) };
        let coeffs = (0..n)
            .map(|_| match rng.gen_range(0..10) {
                0 => frac(1, 2),
                1 => frac(-1, 2),
                _ => q(rng.gen_range(-2..=2)),
            })
            .collect();
        clauses[slot].push(LinForm(coeffs));
    }
    MinMaxForm::tidy(n, clauses)
}

/// The free vector lattice on `n` generators as a structure (products read
/// as zero when `zero_product` is set).
#[derive(Clone, Debug)]
pub struct FreeVectorLattice {
    pub n: usize,
    pub zero_product: bool,
    pub sample_pieces: usize,
}

impl FreeVectorLattice {
    pub fn new(n: usize) -> Self {
        FreeVectorLattice {
            n,
            zero_product: false,
            sample_pieces: 3,
        }
    }
}

impl Structure for FreeVectorLattice {
    type Elem = MinMaxForm;

    fn apply(&self, op: &Op, args: &[MinMaxForm]) -> Result<MinMaxForm, EvalError> {
        apply_op(self.n, op, args, self.zero_product).map_err(|e| match e {
            ApplyError::Fvl(e) => EvalError::Limit(e.to_string()),
            ApplyError::Eval(e) => e,
        })
    }

    fn elem_eq(&self, a: &MinMaxForm, b: &MinMaxForm) -> bool {
        fvl_eq(a, b).unwrap_or(false)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> MinMaxForm {
        random_form(rng, self.n, self.sample_pieces)
    }

    fn show(&self, a: &MinMaxForm) -> String {
        a.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeminormEstimate {
    pub value: Q,
    pub witnesses: Vec<Vec<Q>>,
    /// Index of a witness attaining `value`.
    pub best: Option<usize>,
}

fn check_points(points: &[Vec<Q>], n: usize) -> Result<(), FvlError> {
    for (i, p) in points.iter().enumerate() {
        if p.len() != n || p.iter().any(|x| x.abs() > Q::one()) {
            return Err(FvlError::OutsideCube(i));
        }
    }
    Ok(())
}

/// `max |a(p)|` over points of the unit cube: evaluation at such a point is a
/// lattice homomorphism to `Q` that is contractive on the generators.
pub fn rho_lower_bound(a: &MinMaxForm, points: &[Vec<Q>]) -> Result<SeminormEstimate, FvlError> {
    check_points(points, a.n)?;
    let mut value = Q::zero();
    let mut best = None;
    for (i, p) in points.iter().enumerate() {
        let v = a.eval(p).abs();
        if best.is_none() || v > value {
            value = v;
            best = Some(i);
        }
    }
    Ok(SeminormEstimate {
        value,
        witnesses: points.to_vec(),
        best,
    })
}

/// `sigma(a) = max_p |a(p)|` over a finite point set.
pub fn sigma(a: &MinMaxForm, points: &[Vec<Q>]) -> Q {
    points.iter().map(|p| a.eval(p).abs()).max().unwrap_or_else(Q::zero)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeminormChecks {
    pub triangle: usize,
    pub homogeneity: usize,
    pub monotone: usize,
    pub violations: Vec<String>,
}

impl SeminormChecks {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct KernelQuotient {
    pub partition: Partition,
    pub checks: SeminormChecks,
}

/// Groups elements with `sigma(a - b) = 0` and tests the lattice seminorm
/// axioms of `sigma` on the inputs.
pub fn kernel_quotient(elements: &[MinMaxForm], points: &[Vec<Q>]) -> Result<KernelQuotient, FvlError> {
    let Some(first) = elements.first() else {
        return Ok(KernelQuotient {
            partition: Partition::discrete(0),
            checks: SeminormChecks::default(),
        });
    };
    let n = first.n;
    check_points(points, n)?;
    for e in elements {
        first.same_n(e)?;
    }
    // sigma(a - b) = 0 iff a and b agree at every point
    let profiles: Vec<Vec<Q>> = elements
        .iter()
        .map(|e| points.iter().map(|p| e.eval(p)).collect())
        .collect();
    let partition = Partition::from_labels(&profiles);

    let mut checks = SeminormChecks::default();
    let scalars = [q(0), q(2), q(-3), frac(1, 2), frac(-3, 7)];
    let cap = elements.len().min(12);
    for (i, a) in elements.iter().enumerate().take(cap) {
        let sa = sigma(a, points);
        for s in &scalars {
            checks.homogeneity += 1;
            if sigma(&a.scale(s)?, points) != s.abs() * &sa {
                checks.violations.push(format!("sigma({s} * e{i}) != |{s}| sigma(e{i})"));
            }
        }
        let abs_a = a.abs()?;
        for (k, b) in elements.iter().enumerate().take(cap) {
            let sb = sigma(b, points);
            checks.triangle += 1;
            if sigma(&a.add(b)?, points) > &sa + &sb {
                checks.violations.push(format!("sigma(e{i} + e{k}) > sigma(e{i}) + sigma(e{k})"));
            }
            if fvl_leq(&abs_a, &b.abs()?)? {
                checks.monotone += 1;
                if sa > sb {
                    checks.violations.push(format!("|e{i}| <= |e{k}| but sigma(e{i}) > sigma(e{k})"));
                }
            }
        }
    }
    Ok(KernelQuotient { partition, checks })
}
