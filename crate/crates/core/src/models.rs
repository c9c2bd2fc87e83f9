//! Finite-dimensional rational vector lattice algebras given by structure
//! constants, with the coordinatewise order. The field of rationals, `Q^d`
//! with coordinatewise product and `k x k` matrices with the entrywise order
//! are all instances.

use std::fmt::Write as _;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rational::{fmt_q, max_q, min_q, parse_q, q, Q};
use crate::term_algebra::{EvalError, Structure};
use crate::terms::{sym, Op};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("basis index {0} out of range")]
    Index(usize),
    #[error("vector has {found} entries, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("structure file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// `Q^d` with the coordinatewise lattice order and the bilinear product
/// `e_i e_j = sum_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableVla {
    pub name: String,
    dim: usize,
    /// Sparse structure constants, `mult[i * dim + j]` lists `(k, c)`.
    mult: Vec<Vec<(usize, Q)>>,
    unit: Option<Vec<Q>>,
    /// Row length for matrix-style display.
    display_cols: Option<usize>,
}

impl TableVla {
    pub fn new(name: impl Into<String>, dim: usize) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        Ok(TableVla {
            name: name.into(),
            dim,
            mult: vec![Vec::new(); dim * dim],
            unit: None,
            display_cols: None,
        })
    }

    pub fn set_product(&mut self, i: usize, j: usize, value: &[Q]) -> Result<(), ModelError> {
        if i >= self.dim || j >= self.dim {
            return Err(ModelError::Index(i.max(j)));
        }
        self.check_len(value)?;
        self.mult[i * self.dim + j] = value
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, c.clone()))
            .collect();
        Ok(())
    }

    pub fn set_unit(&mut self, unit: Vec<Q>) -> Result<(), ModelError> {
        self.check_len(&unit)?;
        self.unit = Some(unit);
        Ok(())
    }

    fn check_len(&self, v: &[Q]) -> Result<(), ModelError> {
        if v.len() != self.dim {
            return Err(ModelError::Length {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> Option<&[Q]> {
        self.unit.as_deref()
    }

    pub fn product_of_basis(&self, i: usize, j: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim];
        for (k, c) in &self.mult[i * self.dim + j] {
            out[*k] = c.clone();
        }
        out
    }

    pub fn basis(&self, i: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim];
        v[i] = Q::one();
        v
    }

    pub fn zero(&self) -> Vec<Q> {
        vec![Q::zero(); self.dim]
    }

    pub fn mul(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x * y;
                for (k, c) in &self.mult[i * self.dim + j] {
                    out[*k] += &xy * c;
                }
            }
        }
        out
    }

    pub fn add(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn neg(&self, a: &[Q]) -> Vec<Q> {
        a.iter().map(|x| -x).collect()
    }

    pub fn scale(&self, s: &Q, a: &[Q]) -> Vec<Q> {
        a.iter().map(|x| s * x).collect()
    }

    pub fn meet(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        a.iter().zip(b).map(|(x, y)| min_q(x, y)).collect()
    }

    pub fn join(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        a.iter().zip(b).map(|(x, y)| max_q(x, y)).collect()
    }

    pub fn is_positive(&self, a: &[Q]) -> bool {
        a.iter().all(|x| *x >= Q::zero())
    }

    /// Is every structure constant nonnegative (products of positives positive)?
    pub fn has_positive_product(&self) -> bool {
        self.mult.iter().flatten().all(|(_, c)| *c >= Q::zero())
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.mult[i * self.dim + j] == self.mult[j * self.dim + i]))
    }

    /// Structure file text; see [`parse_table_vla`].
    pub fn to_text(&self) -> String {
        let mut out = format!("vla {}\nname {}\n", self.dim, self.name);
        if let Some(c) = self.display_cols {
            let _ = writeln!(out, "cols {c}");
        }
        if let Some(u) = &self.unit {
            let _ = writeln!(out, "unit {}", join_q(u));
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                if !self.mult[i * self.dim + j].is_empty() {
                    let _ = writeln!(out, "prod {i} {j} : {}", join_q(&self.product_of_basis(i, j)));
                }
            }
        }
        out
    }

    pub fn show_vec(&self, a: &[Q]) -> String {
        match self.display_cols {
            Some(c) if c > 0 && a.len().is_multiple_of(c) && a.len() > c => {
                let rows: Vec<String> = a.chunks(c).map(|r| format!("[{}]", join_q_sep(r, ", "))).collect();
                format!("[{}]", rows.join(", "))
            }
            _ => format!("[{}]", join_q_sep(a, ", ")),
        }
    }
}

fn join_q(v: &[Q]) -> String {
    join_q_sep(v, " ")
}

fn join_q_sep(v: &[Q], sep: &str) -> String {
    v.iter().map(fmt_q).collect::<Vec<_>>().join(sep)
}

impl Structure for TableVla {
    type Elem = Vec<Q>;

    fn apply(&self, op: &Op, args: &[Vec<Q>]) -> Result<Vec<Q>, EvalError> {
        let arity_err = || EvalError::Arity {
            op: op.to_string(),
            found: args.len(),
        };
        match op {
            Op::Scale(s) => match args {
                [a] => Ok(self.scale(s, a)),
                _ => Err(arity_err()),
            },
            Op::Named(name) => match (&**name, args) {
                (sym::ZERO, []) => Ok(self.zero()),
                (sym::ONE, []) => self
                    .unit
                    .clone()
                    .ok_or_else(|| EvalError::Unsupported(sym::ONE.into())),
                (sym::PLUS, [a, b]) => Ok(self.add(a, b)),
                (sym::NEG, [a]) => Ok(self.neg(a)),
                (sym::DOT, [a, b]) => Ok(self.mul(a, b)),
                (sym::WEDGE, [a, b]) => Ok(self.meet(a, b)),
                (sym::VEE, [a, b]) => Ok(self.join(a, b)),
                (sym::ZERO | sym::ONE | sym::PLUS | sym::NEG | sym::DOT | sym::WEDGE | sym::VEE, _) => {
                    Err(arity_err())
                }
                _ => Err(EvalError::Unsupported(name.to_string())),
            },
        }
    }

    fn elem_eq(&self, a: &Vec<Q>, b: &Vec<Q>) -> bool {
        a == b
    }

    /// Small entries with frequent zeros so lattice operations are exercised.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<Q> {
        (0..self.dim)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    Q::zero()
                } else {
                    crate::rational::random_q(rng, 4, 3)
                }
            })
            .collect()
    }

    fn show(&self, a: &Vec<Q>) -> String {
        self.show_vec(a)
    }
}

/// The rational field with its usual order and product.
pub fn rationals() -> TableVla {
    let mut t = TableVla::new("Q", 1).unwrap();
    t.set_product(0, 0, &[q(1)]).unwrap();
    t.set_unit(vec![q(1)]).unwrap();
    t
}

/// `Q^d` with the zero product (no identity element).
pub fn zero_product(d: usize) -> TableVla {
    TableVla::new(format!("Q^{d} zero product"), d).unwrap()
}

/// `Q^d` with coordinatewise product and identity `(1, .., 1)`.
pub fn coordinatewise(d: usize) -> TableVla {
    let mut t = TableVla::new(format!("Q^{d} coordinatewise"), d).unwrap();
    for i in 0..d {
        let e = t.basis(i);
        t.set_product(i, i, &e).unwrap();
    }
    t.set_unit(vec![q(1); d]).unwrap();
    t
}

/// `k x k` rational matrices, entrywise order, matrix product, identity matrix.
/// Basis `E_ij` sits at index `i * k + j`.
pub fn matrices(k: usize) -> TableVla {
    let d = k * k;
    let mut t = TableVla::new(format!("M{k}(Q) entrywise"), d).unwrap();
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                let e = t.basis(i * k + l);
                t.set_product(i * k + j, j * k + l, &e).unwrap();
            }
        }
    }
    let mut unit = vec![Q::zero(); d];
    for i in 0..k {
        unit[i * k + i] = Q::one();
    }
    t.set_unit(unit).unwrap();
    t.display_cols = Some(k);
    t
}

/// The matrix unit `E_ij` (0-based) of `matrices(k)`.
pub fn matrix_unit(k: usize, i: usize, j: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); k * k];
    v[i * k + j] = Q::one();
    v
}

pub fn by_name(name: &str) -> Option<TableVla> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "q" | "rationals" => Some(rationals()),
        "m2" | "m2_entrywise" => Some(matrices(2)),
        "m3" | "m3_entrywise" => Some(matrices(3)),
        _ => {
            if let Some(d) = lower.strip_prefix("coord") {
                return d.parse().ok().filter(|&d| d > 0).map(coordinatewise);
            }
            if let Some(d) = lower.strip_prefix("zero") {
                return d.parse().ok().filter(|&d| d > 0).map(zero_product);
            }
            None
        }
    }
}

/// Structure file:
///
/// ```text
/// vla 4                 # dimension
/// name M2 entrywise     # optional
/// cols 2                # optional, matrix-style display
/// unit 1 0 0 1          # optional identity element
/// prod 0 1 : 0 1 0 0    # e_0 e_1 = e_1; unlisted products are zero
/// ```
pub fn parse_table_vla(text: &str) -> Result<TableVla, ModelError> {
    let mut table: Option<TableVla> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| ModelError::Parse { line: n + 1, msg };
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let vector = |s: &str| -> Result<Vec<Q>, ModelError> {
            s.split_whitespace()
                .map(|w| parse_q(w).ok_or_else(|| err(format!("bad rational `{w}`"))))
                .collect()
        };
        if key == "vla" {
            let d: usize = rest.parse().map_err(|_| err("bad dimension".into()))?;
            table = Some(TableVla::new(format!("Q^{d}"), d)?);
            continue;
        }
        let t = table.as_mut().ok_or_else(|| err("expected `vla d` first".into()))?;
        match key {
            "name" => t.name = rest.to_string(),
            "cols" => t.display_cols = Some(rest.parse().map_err(|_| err("bad cols".into()))?),
            "unit" => {
                let u = vector(rest)?;
                t.set_unit(u).map_err(|e| err(e.to_string()))?;
            }
            "prod" => {
                let (idx, val) = rest.split_once(':').ok_or_else(|| err("expected `prod i j : vector`".into()))?;
                let ij: Vec<usize> = idx
                    .split_whitespace()
                    .map(|w| w.parse().map_err(|_| err(format!("bad index `{w}`"))))
                    .collect::<Result<_, _>>()?;
                let [i, j] = ij[..] else {
                    return Err(err("expected two indices".into()));
                };
                let v = vector(val)?;
                t.set_product(i, j, &v).map_err(|e| err(e.to_string()))?;
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    table.ok_or(ModelError::Parse {
        line: 0,
        msg: "missing `vla d` line".into(),
    })
}
