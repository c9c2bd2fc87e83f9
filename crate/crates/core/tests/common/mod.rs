//! Independent oracles shared by the integration tests. Nothing here calls
//! the library code it is used to check.
#![allow(dead_code)]

use std::collections::HashMap;

use latfree_core::finite_algebra::FiniteAlgebra;
use latfree_core::rational::Q;
use latfree_core::terms::{Node, Op, Term};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Plain recursive evaluation straight from the operation tables.
pub fn naive_eval(a: &FiniteAlgebra, t: &Term, env: &HashMap<String, usize>) -> usize {
    match t.node() {
        Node::Gen(g) => env[&**g],
        Node::Apply(op, args) => {
            let vals: Vec<usize> = args.iter().map(|c| naive_eval(a, c, env)).collect();
            let s = a.symbol_index(op.name()).expect("symbol in signature");
            let mut idx = 0;
            for v in &vals {
                idx = idx * a.size() + v;
            }
            a.table(s)[idx]
        }
    }
}

/// Random term over the given symbols (name, arity) and generators.
pub fn random_term(rng: &mut ChaCha8Rng, symbols: &[(String, usize)], gens: &[&str], height: usize) -> Term {
    let leaves: Vec<&(String, usize)> = symbols.iter().filter(|s| s.1 == 0).collect();
    let inner: Vec<&(String, usize)> = symbols.iter().filter(|s| s.1 > 0).collect();
    if height == 0 || inner.is_empty() || rng.gen_bool(0.25) {
        if !leaves.is_empty() && rng.gen_bool(0.2) {
            let s = leaves[rng.gen_range(0..leaves.len())];
            return Term::op(&s.0, vec![]);
        }
        return Term::gen(gens[rng.gen_range(0..gens.len())]);
    }
    let s = inner[rng.gen_range(0..inner.len())];
    let kids = (0..s.1).map(|_| random_term(rng, symbols, gens, height - 1)).collect();
    Term::op(&s.0, kids)
}

/// All set partitions of `0..n` as block labels (restricted growth strings).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur.push(b);
            go(i + 1, n, cur, if b == max { max + 1 } else { max }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Is the labelling compatible with every operation of `a`?
pub fn is_congruence(a: &FiniteAlgebra, labels: &[usize]) -> bool {
    let n = a.size();
    for s in 0..a.signature().symbols().len() {
        let k = a.signature().symbols()[s].arity;
        let table = a.table(s);
        let total = n.pow(k as u32);
        for i in 0..total {
            for j in 0..total {
                let (mut x, mut y) = (i, j);
                let mut related = true;
                for _ in 0..k {
                    if labels[x % n] != labels[y % n] {
                        related = false;
                        break;
                    }
                    x /= n;
                    y /= n;
                }
                if related && labels[table[i]] != labels[table[j]] {
                    return false;
                }
            }
        }
    }
    true
}

pub fn all_congruences(a: &FiniteAlgebra) -> Vec<Vec<usize>> {
    set_partitions(a.size())
        .into_iter()
        .filter(|p| is_congruence(a, p))
        .collect()
}

/// Posets on `0..n` whose order extends the natural order of the labels;
/// every finite poset is isomorphic to at least one of them.
pub fn naturally_labelled_posets(n: usize) -> Vec<Vec<bool>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut le = vec![false; n * n];
        for i in 0..n {
            le[i * n + i] = true;
        }
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                le[i * n + j] = true;
            }
        }
        let transitive = (0..n).all(|x| {
            (0..n).all(|y| (0..n).all(|z| !(le[x * n + y] && le[y * n + z]) || le[x * n + z]))
        });
        if transitive {
            out.push(le);
        }
    }
    out
}

/// Least upper bound by brute force.
pub fn lub(le: &[bool], n: usize, x: usize, y: usize) -> Option<usize> {
    let ub: Vec<usize> = (0..n).filter(|&u| le[x * n + u] && le[y * n + u]).collect();
    ub.iter().copied().find(|&u| ub.iter().all(|&v| le[u * n + v]))
}

pub fn glb(le: &[bool], n: usize, x: usize, y: usize) -> Option<usize> {
    let lb: Vec<usize> = (0..n).filter(|&l| le[l * n + x] && le[l * n + y]).collect();
    lb.iter().copied().find(|&l| lb.iter().all(|&v| le[v * n + l]))
}

pub fn is_lattice(le: &[bool], n: usize) -> bool {
    (0..n).all(|x| (0..n).all(|y| lub(le, n, x, y).is_some() && glb(le, n, x, y).is_some()))
}

/// Lexicographically least relabelling: an isomorphism invariant.
pub fn canonical(le: &[bool], n: usize) -> Vec<bool> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<bool>> = None;
    loop {
        let mut img = vec![false; n * n];
        for x in 0..n {
            for y in 0..n {
                img[perm[x] * n + perm[y]] = le[x * n + y];
            }
        }
        if best.as_ref().is_none_or(|b| img < *b) {
            best = Some(img);
        }
        // next permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else { break };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    best.unwrap()
}

/// One representative per isomorphism class of lattices with `n` elements.
pub fn lattices_up_to_iso(n: usize) -> Vec<Vec<bool>> {
    let mut seen = std::collections::HashSet::new();
    naturally_labelled_posets(n)
        .into_iter()
        .filter(|le| is_lattice(le, n))
        .filter(|le| seen.insert(canonical(le, n)))
        .collect()
}

/// Evaluates a `wedge`/`vee` term in the lattice given by its order matrix.
pub fn lattice_eval(le: &[bool], n: usize, t: &Term, env: &HashMap<String, usize>) -> usize {
    match t.node() {
        Node::Gen(g) => env[&**g],
        Node::Apply(op, args) => {
            let (a, b) = (lattice_eval(le, n, &args[0], env), lattice_eval(le, n, &args[1], env));
            match op.name() {
                "wedge" => glb(le, n, a, b).unwrap(),
                "vee" => lub(le, n, a, b).unwrap(),
                other => panic!("not a lattice symbol: {other}"),
            }
        }
    }
}

pub fn random_lattice_term(rng: &mut ChaCha8Rng, gens: &[&str], height: usize) -> Term {
    if height == 0 || rng.gen_bool(0.3) {
        return Term::gen(gens[rng.gen_range(0..gens.len())]);
    }
    let a = random_lattice_term(rng, gens, height - 1);
    let b = random_lattice_term(rng, gens, height - 1);
    Term::op(if rng.gen_bool(0.5) { "wedge" } else { "vee" }, vec![a, b])
}

/// `k x k` rational matrices with entrywise order and the usual product.
pub type Mat = Vec<Vec<Q>>;

pub fn mat_zero(k: usize) -> Mat {
    vec![vec![Q::zero(); k]; k]
}

pub fn mat_one(k: usize) -> Mat {
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let k = a.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).map(|l| &a[i][l] * &b[l][j]).fold(Q::zero(), |s, x| s + x))
                .collect()
        })
        .collect()
}

fn entrywise(a: &Mat, b: &Mat, f: impl Fn(&Q, &Q) -> Q) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| f(x, y)).collect())
        .collect()
}

/// Evaluates a vector lattice algebra term in `k x k` matrices.
pub fn mat_eval(t: &Term, k: usize, env: &HashMap<String, Mat>) -> Mat {
    match t.node() {
        Node::Gen(g) => env[&**g].clone(),
        Node::Apply(op, args) => {
            let v: Vec<Mat> = args.iter().map(|c| mat_eval(c, k, env)).collect();
            match op {
                Op::Scale(s) => v[0].iter().map(|r| r.iter().map(|x| s * x).collect()).collect(),
                Op::Named(name) => match &**name {
                    "zero" => mat_zero(k),
                    "one" => mat_one(k),
                    "plus" => entrywise(&v[0], &v[1], |x, y| x + y),
                    "neg" => v[0].iter().map(|r| r.iter().map(|x| -x).collect()).collect(),
                    "dot" => mat_mul(&v[0], &v[1]),
                    "wedge" => entrywise(&v[0], &v[1], |x, y| if x < y { x.clone() } else { y.clone() }),
                    "vee" => entrywise(&v[0], &v[1], |x, y| if x > y { x.clone() } else { y.clone() }),
                    other => panic!("unknown symbol {other}"),
                },
            }
        }
    }
}

/// Evaluates a term in `Q^d` with coordinatewise operations (products
/// coordinatewise too).
pub fn coord_eval(t: &Term, env: &HashMap<String, Vec<Q>>, d: usize) -> Vec<Q> {
    match t.node() {
        Node::Gen(g) => env[&**g].clone(),
        Node::Apply(op, args) => {
            let v: Vec<Vec<Q>> = args.iter().map(|c| coord_eval(c, env, d)).collect();
            let zip = |f: &dyn Fn(&Q, &Q) -> Q| v[0].iter().zip(&v[1]).map(|(x, y)| f(x, y)).collect();
            match op {
                Op::Scale(s) => v[0].iter().map(|x| s * x).collect(),
                Op::Named(name) => match &**name {
                    "zero" => vec![Q::zero(); d],
                    "one" => vec![Q::one(); d],
                    "plus" => zip(&|x, y| x + y),
                    "neg" => v[0].iter().map(|x| -x).collect(),
                    "dot" => zip(&|x, y| x * y),
                    "wedge" => zip(&|x, y| if x < y { x.clone() } else { y.clone() }),
                    "vee" => zip(&|x, y| if x > y { x.clone() } else { y.clone() }),
                    other => panic!("unknown symbol {other}"),
                },
            }
        }
    }
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}
