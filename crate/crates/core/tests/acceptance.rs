//! The acceptance suite: each criterion runs against independent oracles
//! and prints one PASS/FAIL line.

mod common;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use latfree_core::finite_algebra::{
    generate_congruence, kernel, quotient, satisfies, CongruenceRelation, FiniteAlgebra, SatOptions,
};
use latfree_core::fvl_model::{
    eq_witness, fvl_eq, kernel_quotient, random_form, rho_lower_bound, sigma, FreeVectorLattice, MinMaxForm,
};
use latfree_core::lattice_engine::{
    distributivity_failure, dlat_normal_form, free_lattice_eq, LatTerm,
};
use latfree_core::models::{matrices, matrix_unit};
use latfree_core::partition::Partition;
use latfree_core::rational::{default_probes, frac, q, Q};
use latfree_core::term_algebra::{eval_with, evaluate, is_homomorphic_on, terms_up_to_height, Evaluation};
use latfree_core::terms::{build, GeneratorSet, Identity, Signature, Term};
use latfree_core::theories::{
    check_identities, check_theory, ops_to_order, order_to_ops, presets, theory, CheckOptions, LatticePoset, TheoryName,
};
use latfree_core::vla_engine::{
    compose, f_algebra_probe, make_free, prove_equal, BaseKind, BasePresentation, FProbeOutcome, ProveOptions, Verdict,
    WitnessKind,
};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

fn random_algebra(rng: &mut ChaCha8Rng) -> (FiniteAlgebra, Vec<(String, usize)>) {
    let count = rng.gen_range(1..=3);
    let mut symbols: Vec<(String, usize)> = (0..count).map(|i| (format!("f{i}"), rng.gen_range(0..=3))).collect();
    if symbols.iter().all(|s| s.1 == 0) {
        symbols[0].1 = 2;
    }
    let size: usize = rng.gen_range(1..=4);
    let sig = Signature::new(symbols.iter().map(|(n, a)| (n.as_str(), *a)).collect(), false).unwrap();
    let tables = symbols
        .iter()
        .map(|(_, a)| (0..size.pow(*a as u32)).map(|_| rng.gen_range(0..size)).collect())
        .collect();
    (FiniteAlgebra::new(sig, size, tables).unwrap(), symbols)
}

fn term_algebra_freeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gens = ["x", "y", "z"];
    let mut nodes = 0;
    for trial in 0..200 {
        let (a, symbols) = random_algebra(&mut rng);
        let env: HashMap<String, usize> = gens.iter().map(|g| (g.to_string(), rng.gen_range(0..a.size()))).collect();
        let mut ev = Evaluation::new(&a);
        for (g, v) in &env {
            ev.assign(g, *v);
        }
        let terms: Vec<Term> = (0..5).map(|_| random_term(&mut rng, &symbols, &gens, 6)).collect();
        ensure(is_homomorphic_on(&terms, &ev), || format!("trial {trial}: evaluation is not homomorphic"))?;
        for t in &terms {
            nodes += t.size();
            let got = evaluate(t, &ev).map_err(|e| e.to_string())?;
            let want = naive_eval(&a, t, &env);
            ensure(got == want, || format!("trial {trial}: {t} evaluates to {got}, naive {want}"))?;
        }
    }
    Ok(format!("200 triples, {nodes} term nodes"))
}

// ---------------------------------------------------------------- 2

fn small_binary_algebras() -> Vec<FiniteAlgebra> {
    let sig = Signature::new(vec![("f", 2)], false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut out = Vec::new();
    for n in 1..=4usize {
        let reps = if n == 1 { 1 } else { 3 };
        for _ in 0..reps {
            let table = (0..n * n).map(|_| rng.gen_range(0..n)).collect();
            out.push(FiniteAlgebra::new(sig.clone(), n, vec![table]).unwrap());
        }
    }
    let z4 = (0..16).map(|i| (i / 4 + i % 4) % 4).collect();
    out.push(FiniteAlgebra::new(sig, 4, vec![z4]).unwrap());
    out
}

fn same_relation(p: &Partition, labels: &[usize]) -> bool {
    let n = labels.len();
    (0..n).all(|x| (0..n).all(|y| p.related(x, y) == (labels[x] == labels[y])))
}

fn congruence_oracle() -> Outcome {
    let mut generated = 0;
    let mut kernels = 0;
    for (ai, a) in small_binary_algebras().iter().enumerate() {
        let n = a.size();
        let congs = all_congruences(a);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
        let mut gen_sets: Vec<Vec<(usize, usize)>> = vec![vec![]];
        gen_sets.extend(pairs.iter().map(|&p| vec![p]));
        for &p in &pairs {
            for &r in &pairs {
                gen_sets.push(vec![p, r]);
            }
        }
        for gs in &gen_sets {
            // least congruence containing the generators: intersection of all that do
            let containing: Vec<&Vec<usize>> = congs.iter().filter(|c| gs.iter().all(|&(x, y)| c[x] == c[y])).collect();
            let least: Vec<Vec<bool>> = (0..n)
                .map(|x| (0..n).map(|y| containing.iter().all(|c| c[x] == c[y])).collect())
                .collect();
            let got = generate_congruence(a, gs).map_err(|e| e.to_string())?;
            for x in 0..n {
                for y in 0..n {
                    ensure(got.related(x, y) == least[x][y], || {
                        format!("algebra {ai}, generators {gs:?}: ({x},{y}) disagrees with brute force")
                    })?;
                }
            }
            generated += 1;
        }
        for c in &congs {
            let theta = CongruenceRelation(Partition::from_labels(c));
            let (_, hom) = quotient(a, &theta).map_err(|e| e.to_string())?;
            let k = kernel(&hom);
            ensure(same_relation(k.partition(), c), || format!("algebra {ai}: kernel of quotient by {c:?} differs"))?;
            kernels += 1;
        }
    }
    Ok(format!("{generated} generated congruences, {kernels} kernel round trips"))
}

// ---------------------------------------------------------------- 3

fn forced_identities() -> Outcome {
    let sig = Signature::new(vec![("f", 2)], false).unwrap();
    let fixed = ["(f x y) = (f y x)", "(f x x) = x", "(f x y) = x", "(f (f x y) y) = (f x y)", "(f x (f x y)) = (f x y)"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let symbols = vec![("f".to_string(), 2)];
    let mut instances = 0;
    let mut holding = 0;
    for a in small_binary_algebras() {
        let n = a.size();
        for c in all_congruences(&a) {
            let theta = CongruenceRelation(Partition::from_labels(&c));
            let (qa, _) = quotient(&a, &theta).map_err(|e| e.to_string())?;
            let mut ids: Vec<Identity> = fixed.iter().map(|s| Identity::parse("fixed", s, &sig).unwrap()).collect();
            ids.push(Identity::new(
                "random",
                random_term(&mut rng, &symbols, &["x", "y"], 2),
                random_term(&mut rng, &symbols, &["x", "y"], 2),
            ));
            for id in ids {
                let verdict = satisfies(&qa, &id, &SatOptions::default()).map_err(|e| e.to_string())?;
                let mut all_in_theta = true;
                for x in 0..n {
                    for y in 0..n {
                        let env: HashMap<String, usize> = [("x".to_string(), x), ("y".to_string(), y)].into();
                        all_in_theta &= c[naive_eval(&a, &id.lhs, &env)] == c[naive_eval(&a, &id.rhs, &env)];
                    }
                }
                ensure(verdict.holds == all_in_theta, || {
                    format!("{id} on a size-{n} algebra modulo {c:?}: quotient says {}, instances say {all_in_theta}", verdict.holds)
                })?;
                instances += 1;
                holding += usize::from(all_in_theta);
            }
        }
    }
    ensure(instances >= 50, || format!("only {instances} instances"))?;
    Ok(format!("{instances} instances, {holding} holding"))
}

// ---------------------------------------------------------------- 4

fn lattice_round_trip() -> Outcome {
    let lat = theory(TheoryName::Lat);
    let ids = lat.identities(&[]);
    ensure(ids.len() == 8, || format!("LAT has {} identities", ids.len()))?;
    let mut lattices = 0;
    let mut non_lattices = 0;
    for n in 1..=5usize {
        for le in naturally_labelled_posets(n) {
            let p = LatticePoset::new(n, le.clone()).map_err(|e| e.to_string())?;
            if !is_lattice(&le, n) {
                ensure(order_to_ops(&p).is_err(), || format!("non-lattice {le:?} converted"))?;
                non_lattices += 1;
                continue;
            }
            let a = order_to_ops(&p).map_err(|e| e.to_string())?;
            let back = ops_to_order(&a).map_err(|e| e.to_string())?;
            for x in 0..n {
                for y in 0..n {
                    ensure(back.le(x, y) == le[x * n + y], || format!("round trip changed the order of {le:?}"))?;
                }
            }
            for id in &ids {
                let vars = id.variables();
                let total = n.pow(vars.len() as u32);
                for code in 0..total {
                    let mut c = code;
                    let env: HashMap<String, usize> = vars
                        .iter()
                        .map(|v| {
                            let x = c % n;
                            c /= n;
                            (v.to_string(), x)
                        })
                        .collect();
                    ensure(naive_eval(&a, &id.lhs, &env) == naive_eval(&a, &id.rhs, &env), || {
                        format!("{} fails in converted {le:?}", id.label)
                    })?;
                }
            }
            lattices += 1;
        }
    }
    let counts: Vec<usize> = (1..=5).map(|n| lattices_up_to_iso(n).len()).collect();
    ensure(counts == [1, 1, 1, 2, 5], || format!("lattices up to isomorphism: {counts:?}"))?;
    Ok(format!(
        "{lattices} labelled lattices ({counts:?} up to isomorphism), {non_lattices} non-lattices rejected"
    ))
}

// ---------------------------------------------------------------- 5

fn vla1p_membership() -> Outcome {
    let m2 = matrices(2);
    let th = theory(TheoryName::Vla1p);
    let opts = CheckOptions {
        samples: 1000,
        seed: 5,
        ..CheckOptions::default()
    };
    let report = check_theory(&m2, &th, &opts).map_err(|e| e.to_string())?;
    ensure(report.verdicts.len() == 21, || format!("{} clauses", report.verdicts.len()))?;
    for v in &report.verdicts {
        ensure(v.holds, || format!("clause {} fails: {:?}", v.label, v.witness))?;
    }
    let pos = Identity::parse("pos", "(wedge zero one) = zero", &th.sig).unwrap();
    let pv = check_identities(&m2, &[pos], &opts).map_err(|e| e.to_string())?;
    ensure(pv[0].holds, || "0 /\\ 1 = 0 fails".into())?;

    let probe = f_algebra_probe(&m2, 1000, 5);
    let FProbeOutcome::Fail { x, y, z, .. } = &probe.outcome else {
        return Err("f-algebra condition not refuted".into());
    };
    let (e11, e12) = (m2.show_vec(&matrix_unit(2, 0, 0)), m2.show_vec(&matrix_unit(2, 0, 1)));
    ensure((x, y, z) == (&e11, &e12, &e12), || format!("witness {x}, {y}, {z}"))?;
    // independent re-check with plain matrices
    let mk = |i: usize, j: usize| {
        let mut m = mat_zero(2);
        m[i][j] = q(1);
        m
    };
    let (xm, ym, zm) = (mk(0, 0), mk(0, 1), mk(0, 1));
    let meet = |a: &Mat, b: &Mat| -> Mat {
        a.iter()
            .zip(b)
            .map(|(r, s)| r.iter().zip(s).map(|(u, v)| u.min(v).clone()).collect())
            .collect()
    };
    ensure(meet(&xm, &ym) == mat_zero(2), || "x /\\ y != 0".into())?;
    ensure(zm.iter().flatten().all(|e| !e.is_negative()), || "z not positive".into())?;
    ensure(meet(&mat_mul(&xm, &zm), &ym) != mat_zero(2), || "(xz) /\\ y = 0".into())?;
    let checks: u64 = report.verdicts.iter().map(|v| v.checks).sum();
    Ok(format!("21 clauses, {checks} sampled checks, witness x = E11, y = z = E12"))
}

// ---------------------------------------------------------------- 6

fn free_distributive_count() -> Outcome {
    let sig = Signature::lattice();
    let gens = GeneratorSet::new(&["x", "y", "z"], &sig).unwrap();
    let low = terms_up_to_height(&sig, &gens, 2, &[], 10_000).map_err(|e| e.to_string())?;
    let mut forms: HashSet<BTreeSet<BTreeSet<Arc<str>>>> = HashSet::new();
    let mut count = 0usize;
    for t in &low {
        forms.insert(dlat_normal_form(&LatTerm::new(t.clone()).unwrap()).sets().clone());
        count += 1;
    }
    // height exactly 3: at least one child of height 2
    for a in &low {
        for b in &low {
            if a.height() < 2 && b.height() < 2 {
                continue;
            }
            for op in ["wedge", "vee"] {
                let t = Term::op(op, vec![a.clone(), b.clone()]);
                forms.insert(dlat_normal_form(&LatTerm::new(t).unwrap()).sets().clone());
                count += 1;
            }
        }
    }
    // oracle: nonempty antichains of nonempty subsets of {x, y, z}
    let subsets: Vec<BTreeSet<Arc<str>>> = (1u32..8)
        .map(|m| ["x", "y", "z"].iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, g)| Arc::from(*g)).collect())
        .collect();
    let mut antichains: HashSet<BTreeSet<BTreeSet<Arc<str>>>> = HashSet::new();
    for fam in 1u32..(1 << subsets.len()) {
        let members: Vec<&BTreeSet<Arc<str>>> = (0..subsets.len()).filter(|i| fam >> i & 1 == 1).map(|i| &subsets[i]).collect();
        let anti = members.iter().all(|a| members.iter().all(|b| a == b || !a.is_subset(b)));
        if anti {
            antichains.insert(members.into_iter().cloned().collect());
        }
    }
    ensure(antichains.len() == 18, || format!("antichain oracle found {}", antichains.len()))?;
    ensure(forms.len() == 18, || format!("{} normal forms", forms.len()))?;
    ensure(forms == antichains, || "normal forms differ from the antichains".into())?;
    Ok(format!("{count} terms, 18 classes, antichain oracle agrees"))
}

// ---------------------------------------------------------------- 7

fn swap_somewhere(rng: &mut ChaCha8Rng, t: &Term) -> Term {
    match t.node() {
        latfree_core::terms::Node::Gen(_) => t.clone(),
        latfree_core::terms::Node::Apply(op, args) => {
            let (a, b) = (swap_somewhere(rng, &args[0]), swap_somewhere(rng, &args[1]));
            let kids = if rng.gen_bool(0.5) { vec![b, a] } else { vec![a, b] };
            Term::apply(op.clone(), kids)
        }
    }
}

fn whitman_soundness() -> Outcome {
    let lattices: Vec<(usize, Vec<bool>)> = (1..=5).flat_map(|n| lattices_up_to_iso(n).into_iter().map(move |l| (n, l))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let all_gens = ["x", "y", "z"];
    let mut equal = 0;
    for i in 0..500 {
        let k = rng.gen_range(1..=3);
        let gens = &all_gens[..k];
        let t1 = random_lattice_term(&mut rng, gens, 3);
        let t2 = if rng.gen_bool(0.4) {
            swap_somewhere(&mut rng, &t1)
        } else {
            random_lattice_term(&mut rng, gens, 3)
        };
        let (l1, l2) = (LatTerm::new(t1.clone()).unwrap(), LatTerm::new(t2.clone()).unwrap());
        if !free_lattice_eq(&l1, &l2) {
            continue;
        }
        equal += 1;
        for (n, le) in &lattices {
            for code in 0..n.pow(k as u32) {
                let mut c = code;
                let env: HashMap<String, usize> = gens
                    .iter()
                    .map(|g| {
                        let x = c % n;
                        c /= n;
                        (g.to_string(), x)
                    })
                    .collect();
                ensure(lattice_eval(le, *n, &t1, &env) == lattice_eval(le, *n, &t2, &env), || {
                    format!("pair {i}: {t1} = {t2} claimed but differs in a {n}-element lattice")
                })?;
            }
        }
    }
    let lhs = build::wedge(Term::gen("x"), build::vee(Term::gen("y"), Term::gen("z")));
    let rhs = build::vee(
        build::wedge(Term::gen("x"), Term::gen("y")),
        build::wedge(Term::gen("x"), Term::gen("z")),
    );
    ensure(!free_lattice_eq(&LatTerm::new(lhs.clone()).unwrap(), &LatTerm::new(rhs.clone()).unwrap()), || {
        "distributivity accepted".into()
    })?;
    let m3 = presets::m3();
    let (a, b, c) = distributivity_failure(&m3).map_err(|e| e.to_string())?.ok_or("M3 reported distributive")?;
    let n = m3.size();
    let le: Vec<bool> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| m3.le(x, y)).collect();
    let env: HashMap<String, usize> = [("x".to_string(), a), ("y".to_string(), b), ("z".to_string(), c)].into();
    let (vl, vr) = (lattice_eval(&le, n, &lhs, &env), lattice_eval(&le, n, &rhs, &env));
    ensure(vl != vr, || "M3 witness does not separate".into())?;
    Ok(format!(
        "{equal}/500 pairs equal, all sound on {} lattices; M3 witness ({}, {}, {}) gives {} vs {}",
        lattices.len(),
        m3.names()[a],
        m3.names()[b],
        m3.names()[c],
        m3.names()[vl],
        m3.names()[vr]
    ))
}

// ---------------------------------------------------------------- 8

fn lcm(a: i128, b: i128) -> i128 {
    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn to_i128(x: &Q) -> i128 {
    i128::try_from(x.to_integer()).expect("small integer")
}

/// The form's clauses with every coefficient multiplied by `scale`.
fn integer_clauses(f: &MinMaxForm, scale: i128) -> Vec<Vec<Vec<i128>>> {
    f.clauses()
        .iter()
        .map(|c| {
            c.iter()
                .map(|l| l.0.iter().map(|x| to_i128(&(x * Q::from_integer(scale.into())))).collect())
                .collect()
        })
        .collect()
}

fn denominators(f: &MinMaxForm) -> i128 {
    f.clauses().iter().flatten().flat_map(|l| l.0.iter()).fold(1, |acc, x| lcm(acc, to_i128(&Q::from_integer(x.denom().clone()))))
}

/// max over clauses of min over pieces, at an integer point.
fn eval_int(cl: &[Vec<Vec<i128>>], p: &[i128]) -> i128 {
    cl.iter()
        .map(|c| c.iter().map(|l| l.iter().zip(p).map(|(a, b)| a * b).sum::<i128>()).min().unwrap())
        .max()
        .unwrap()
}

fn eval_q(f: &MinMaxForm, p: &[Q]) -> Q {
    f.clauses()
        .iter()
        .map(|c| {
            c.iter()
                .map(|l| l.0.iter().zip(p).map(|(a, b)| a * b).fold(Q::zero(), |s, x| s + x))
                .min()
                .unwrap()
        })
        .max()
        .unwrap()
}

fn fvl_sampling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut proved, mut refuted, mut sampled_diff) = (0, 0, 0);
    for i in 0..300 {
        let n = rng.gen_range(1..=3);
        let a = random_form(&mut rng, n, 8);
        let c = random_form(&mut rng, n, 8);
        // a quarter absorption instances, an eighth translation round trips
        let equal_by_construction = i % 4 < 2 || i % 8 == 2;
        let b = match i % 8 {
            0 | 4 => a.join(&a.meet(&c).unwrap()).unwrap(),
            1 | 5 => a.meet(&a.join(&c).unwrap()).unwrap(),
            2 => {
                let small = random_form(&mut rng, n, 3);
                a.add(&small).unwrap().sub(&small).unwrap()
            }
            _ => random_form(&mut rng, n, 8),
        };
        let verdict = fvl_eq(&a, &b).map_err(|e| e.to_string())?;
        let scale = lcm(denominators(&a), denominators(&b));
        let (ia, ib) = (integer_clauses(&a, scale), integer_clauses(&b, scale));
        let mut differs = false;
        for _ in 0..10_000 {
            // a random rational point, cleared of denominators (the forms are homogeneous)
            let pts: Vec<(i128, i128)> = (0..n).map(|_| (rng.gen_range(-20..=20), rng.gen_range(1..=6))).collect();
            let d = pts.iter().fold(1, |acc, &(_, den)| lcm(acc, den));
            let p: Vec<i128> = pts.iter().map(|&(num, den)| num * (d / den)).collect();
            if eval_int(&ia, &p) != eval_int(&ib, &p) {
                differs = true;
                break;
            }
        }
        ensure(!(verdict && differs), || format!("pair {i}: proved equal but differs at a sample"))?;
        if differs {
            sampled_diff += 1;
        }
        if verdict {
            proved += 1;
        } else {
            let w = eq_witness(&a, &b).map_err(|e| e.to_string())?.ok_or("no witness for a false verdict")?;
            ensure(eval_q(&a, &w) != eval_q(&b, &w), || format!("pair {i}: witness does not separate"))?;
            refuted += 1;
        }
        if equal_by_construction {
            ensure(verdict, || format!("pair {i}: identity instance not proved"))?;
        }
    }
    // every identity of VL, instantiated on random forms
    let vl = theory(TheoryName::Vl);
    let fvl = FreeVectorLattice::new(3);
    let mut instances = 0;
    for id in vl.identities(&default_probes()) {
        for _ in 0..2 {
            let vals: HashMap<String, MinMaxForm> =
                ["v1", "v2", "v3"].iter().map(|v| (v.to_string(), random_form(&mut rng, 3, 3))).collect();
            let lookup = |g: &str| vals.get(g).cloned();
            let l = eval_with(&id.lhs, &fvl, &lookup).map_err(|e| e.to_string())?;
            let r = eval_with(&id.rhs, &fvl, &lookup).map_err(|e| e.to_string())?;
            ensure(fvl_eq(&l, &r).map_err(|e| e.to_string())?, || format!("{} {id} not proved", id.label))?;
            instances += 1;
        }
    }
    Ok(format!(
        "{proved} proved equal, {refuted} refuted ({sampled_diff} seen by sampling); {instances} VL identity instances proved"
    ))
}

// ---------------------------------------------------------------- 9

fn sigma_oracle(f: &MinMaxForm, pts: &[Vec<Q>]) -> Q {
    pts.iter().map(|p| eval_q(f, p).abs()).max().unwrap()
}

fn seminorm_pipeline() -> Outcome {
    let x1 = MinMaxForm::var(3, 0);
    let pts = vec![
        vec![q(1), q(0), q(0)],
        vec![q(0), q(1), q(0)],
        vec![q(1), q(1), q(1)],
        vec![q(-1), frac(1, 2), q(0)],
    ];
    let est = rho_lower_bound(&x1, &pts).map_err(|e| e.to_string())?;
    ensure(est.value == q(1), || format!("lower bound {}", est.value))?;
    ensure(est.best.map(|i| &est.witnesses[i]) == Some(&pts[0]), || "witness is not (1,0,0)".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cube: Vec<Vec<Q>> = (0..12)
        .map(|_| (0..2).map(|_| frac(rng.gen_range(-6..=6), 6)).collect())
        .collect();
    for i in 0..100 {
        let (a, b, c) = (random_form(&mut rng, 2, 4), random_form(&mut rng, 2, 4), random_form(&mut rng, 2, 4));
        let s = |f: &MinMaxForm| sigma_oracle(f, &cube);
        ensure(sigma(&a, &cube) == s(&a), || format!("triple {i}: sigma differs from the oracle"))?;
        ensure(s(&a.add(&b).unwrap()) <= s(&a) + s(&b), || format!("triple {i}: triangle"))?;
        let lambda = frac(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        ensure(s(&a.scale(&lambda).unwrap()) == lambda.abs() * s(&a), || format!("triple {i}: homogeneity"))?;
        // |a| <= |a| \/ |c| forces sigma(a) <= sigma(|a| \/ |c|)
        let dom = a.abs().unwrap().join(&c.abs().unwrap()).unwrap();
        ensure(s(&a) <= s(&dom), || format!("triple {i}: monotonicity"))?;
        ensure(s(&a.abs().unwrap()) == s(&a), || format!("triple {i}: sigma(|a|) != sigma(a)"))?;
        let kq = kernel_quotient(&[a, b, c], &cube).map_err(|e| e.to_string())?;
        ensure(kq.checks.holds(), || format!("triple {i}: {:?}", kq.checks.violations))?;
    }
    let x2 = MinMaxForm::var(2, 1);
    let elems = [x2.clone(), x2.scale(&q(2)).unwrap(), MinMaxForm::var(2, 0)];
    let kq = kernel_quotient(&elems, &[vec![q(1), q(0)]]).map_err(|e| e.to_string())?;
    ensure(kq.partition.related(0, 1) && !kq.partition.related(0, 2), || "x2 and 2x2 not grouped".into())?;
    Ok("rho lower bound 1 at (1,0,0); 100 triples satisfy the seminorm axioms; x2 ~ 2x2".into())
}

// ---------------------------------------------------------------- 10

fn collapse() -> Outcome {
    let opts = ProveOptions::default();
    let h = make_free(BaseKind::Lat, TheoryName::Vl, BasePresentation::Lattice(presets::m3())).map_err(|e| e.to_string())?;
    let v = prove_equal(&h, &Term::gen("a"), &Term::gen("bot"), &opts).map_err(|e| e.to_string())?;
    let Verdict::Proved { stats, method } = &v else {
        return Err(format!("M3: j(a) vs j(bot) is {}", v.label()));
    };
    ensure(stats.height_budget <= 3, || "height budget above 3".into())?;

    let b4 = presets::boolean4();
    let hb = make_free(BaseKind::Lat, TheoryName::Vl, BasePresentation::Lattice(b4.clone())).map_err(|e| e.to_string())?;
    let n = b4.size();
    // join-irreducibles by brute force: exactly one lower cover
    let lt = |x: usize, y: usize| x != y && b4.le(x, y);
    let ji: Vec<usize> = (0..n)
        .filter(|&x| (0..n).filter(|&y| lt(y, x) && !(0..n).any(|z| lt(y, z) && lt(z, x))).count() == 1)
        .collect();
    let mut pairs = 0;
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let (tx, ty) = (Term::gen(&b4.names()[x]), Term::gen(&b4.names()[y]));
            let v = prove_equal(&hb, &tx, &ty, &opts).map_err(|e| e.to_string())?;
            let Verdict::Separated(w) = &v else {
                return Err(format!("boolean4: {} vs {} is {}", b4.names()[x], b4.names()[y], v.label()));
            };
            ensure(w.kind == WitnessKind::CharacteristicVectors(ji.len()), || format!("witness kind {}", w.kind))?;
            // the witness must be the characteristic vectors themselves
            for (g, val) in &w.assignment {
                let e = b4.index_of(g).unwrap();
                let want: Vec<Q> = ji.iter().map(|&p| q(i64::from(b4.le(p, e)))).collect();
                ensure(*val == want, || format!("{g} sent to {val:?}"))?;
            }
            let env: HashMap<String, Vec<Q>> = w.assignment.iter().map(|(g, v)| (g.to_string(), v.clone())).collect();
            for r in &hb.relations {
                ensure(coord_eval(&r.lhs, &env, ji.len()) == coord_eval(&r.rhs, &env, ji.len()), || {
                    format!("relation {r} violated")
                })?;
            }
            ensure(coord_eval(&tx, &env, ji.len()) != coord_eval(&ty, &env, ji.len()), || "not separated".into())?;
            pairs += 1;
        }
    }
    Ok(format!("M3 collapse PROVED by {method:?}; {pairs} boolean4 pairs SEPARATED"))
}

// ---------------------------------------------------------------- 11

fn noncommutativity() -> Outcome {
    let h = make_free(BaseKind::Set, TheoryName::Vla1, BasePresentation::FreeOver(vec!["a".into(), "b".into()]))
        .map_err(|e| e.to_string())?;
    let (a, b) = (Term::gen("a"), Term::gen("b"));
    let (ab, ba) = (build::dot(a.clone(), b.clone()), build::dot(b, a));
    let v = prove_equal(&h, &ab, &ba, &ProveOptions::default()).map_err(|e| e.to_string())?;
    let Verdict::Separated(w) = &v else {
        return Err(format!("verdict {}", v.label()));
    };
    let mw = w.matrices().ok_or("witness is not a matrix witness")?;
    let k = mw.k;
    let env: HashMap<String, Mat> = mw.entries.iter().cloned().collect();
    for r in &h.relations {
        let d = mat_eval(&r.element(), k, &env);
        ensure(d == mat_zero(k), || format!("relation {r} not mapped to 0"))?;
    }
    ensure(mat_eval(&ab, k, &env) != mat_eval(&ba, k, &env), || "matrices commute".into())?;
    Ok(format!("SEPARATED in {k}x{k} matrices: {mw}"))
}

// ---------------------------------------------------------------- 12

fn lattice_linear_suite() -> Vec<(Term, Term)> {
    let (a, b) = (Term::gen("a"), Term::gen("b"));
    use build::*;
    let mut out = vec![
        (vee(a.clone(), b.clone()), vee(b.clone(), a.clone())),
        (wedge(a.clone(), vee(a.clone(), b.clone())), a.clone()),
        (plus(vee(a.clone(), b.clone()), wedge(a.clone(), b.clone())), plus(a.clone(), b.clone())),
        (vee(a.clone(), neg(a.clone())), abs(a.clone())),
        (neg(vee(a.clone(), b.clone())), wedge(neg(a.clone()), neg(b.clone()))),
        (scale(q(2), vee(a.clone(), b.clone())), vee(scale(q(2), a.clone()), scale(q(2), b.clone()))),
        (scale(q(-1), vee(a.clone(), b.clone())), vee(neg(a.clone()), neg(b.clone()))),
        (vee(a.clone(), b.clone()), a.clone()),
        (plus(a.clone(), b.clone()), vee(a.clone(), b.clone())),
        (vee(a.clone(), zero()), plus(a.clone(), vee(neg(a.clone()), zero()))),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    fn rand_ll(rng: &mut ChaCha8Rng, h: usize) -> Term {
        let (a, b) = (Term::gen("a"), Term::gen("b"));
        if h == 0 || rng.gen_bool(0.25) {
            return match rng.gen_range(0..5) {
                0 => zero(),
                1 | 2 => a,
                _ => b,
            };
        }
        match rng.gen_range(0..5) {
            0 => plus(rand_ll(rng, h - 1), rand_ll(rng, h - 1)),
            1 => neg(rand_ll(rng, h - 1)),
            2 => scale(frac(rng.gen_range(-3..=3), rng.gen_range(1..=2)), rand_ll(rng, h - 1)),
            3 => wedge(rand_ll(rng, h - 1), rand_ll(rng, h - 1)),
            _ => vee(rand_ll(rng, h - 1), rand_ll(rng, h - 1)),
        }
    }
    while out.len() < 50 {
        let t = rand_ll(&mut rng, 3);
        let u = if rng.gen_bool(0.5) {
            // an equal term: x = (x \/ y) + (x /\ y) - y
            let y = rand_ll(&mut rng, 1);
            minus(plus(vee(t.clone(), y.clone()), wedge(t.clone(), y.clone())), y)
        } else {
            rand_ll(&mut rng, 3)
        };
        out.push((t, u));
    }
    out
}

fn composition_coherence() -> Outcome {
    let names = vec!["a".to_string(), "b".to_string()];
    let free = |base, target| make_free(base, target, BasePresentation::FreeOver(names.clone())).map_err(|e| e.to_string());
    let inner = free(BaseKind::Set, TheoryName::Vl)?;
    let outer = free(BaseKind::Vl, TheoryName::Vla1)?;
    let composite = compose(&inner, &outer).map_err(|e| e.to_string())?;
    let direct = free(BaseKind::Set, TheoryName::Vla1)?;
    let opts = ProveOptions::default();
    let mut tally: HashMap<&'static str, usize> = HashMap::new();
    for (i, (t1, t2)) in lattice_linear_suite().iter().enumerate() {
        let vc = prove_equal(&composite, t1, t2, &opts).map_err(|e| e.to_string())?;
        let vd = prove_equal(&direct, t1, t2, &opts).map_err(|e| e.to_string())?;
        ensure(vc.label() == vd.label(), || {
            format!("pair {i} ({t1} vs {t2}): composite {} but direct {}", vc.label(), vd.label())
        })?;
        *tally.entry(vc.label()).or_default() += 1;
    }
    let mut parts: Vec<String> = tally.iter().map(|(k, v)| format!("{v} {k}")).collect();
    parts.sort();
    Ok(format!("50 pairs agree: {}", parts.join(", ")))
}

// ----------------------------------------------------------------

#[test]
fn acceptance() {
    let criteria: Vec<(&str, u64, fn() -> Outcome)> = vec![
        ("1 term algebra freeness", 5, term_algebra_freeness),
        ("2 congruence/quotient oracle", 30, congruence_oracle),
        ("3 forced identities", 30, forced_identities),
        ("4 lattice conversion round trip", 60, lattice_round_trip),
        ("5 VLA1P membership of 2x2 matrices", 10, vla1p_membership),
        ("6 free distributive lattice on 3 generators", 10, free_distributive_count),
        ("7 Whitman soundness", 60, whitman_soundness),
        ("8 FVL decision vs sampling", 120, fvl_sampling),
        ("9 seminorm pipeline", 5, seminorm_pipeline),
        ("10 collapse", 60, collapse),
        ("11 noncommutativity separation", 10, noncommutativity),
        ("12 composition coherence", 60, composition_coherence),
    ];
    // straight to stderr so the verdicts show up even when output is captured
    let report = |line: String| {
        let _ = writeln!(std::io::stderr(), "{line}");
    };
    let mut failures = Vec::new();
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let over = took > Duration::from_secs(limit);
        match (&result, over) {
            (Ok(detail), false) => report(format!("PASS {name} ({:.2}s): {detail}", took.as_secs_f64())),
            (Ok(detail), true) => {
                report(format!("FAIL {name} ({:.2}s > {limit}s): {detail}", took.as_secs_f64()));
                failures.push(name);
            }
            (Err(e), _) => {
                report(format!("FAIL {name} ({:.2}s): {e}", took.as_secs_f64()));
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed: {failures:?}");
}
