use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};

use latfree_core::finite_algebra::{generate_congruence, quotient, satisfies_quasi, FiniteAlgebra, SatOptions, SatVerdict};
use latfree_core::fvl_model::{eq_witness, leq_witness, rho_lower_bound, FvlError, MinMaxForm};
use latfree_core::lattice_engine::{birkhoff_embed, collapse_witness, dlat_normal_form, Collapse, LatTerm, LatticeError, Whitman};
use latfree_core::models::TableVla;
use latfree_core::rational::{fmt_q, parse_q, Q};
use latfree_core::term_algebra::{instance_pairs, saturate, terms_up_to_height, BudgetError};
use latfree_core::terms::{parse_term, parse_term_open, parse_identities, GeneratorSet, Identity, Signature, Term};
use latfree_core::theories::{check_identities, check_theory, theory, CheckMode, CheckOptions, ClauseVerdict, LatticePoset, TheoryName, TheoryReport};
use latfree_core::vla_engine::{
    compose, f_algebra_probe, make_free, prove_equal, BaseKind, BasePresentation, FProbeOutcome, FreeObjectHandle, ProveOptions, Verdict,
};

use crate::input::{self, Loaded};
use crate::{CheckArgs, Cli, Command, DlatOp, FreeAction, FreeArgs, FvlOp, LatOp, QuotientArgs, SatArgs, SaturateArgs};

pub const EXIT_POSITIVE: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    NotFound(String),
    /// A search or elimination ran out of budget before deciding.
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Input(_) => 65,
            CliError::NotFound(_) => 66,
            CliError::Budget(_) => EXIT_UNKNOWN,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Input(m) => write!(f, "{m}"),
            CliError::NotFound(p) => write!(f, "{p}: no such file"),
            CliError::Budget(m) => write!(f, "UNKNOWN: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn input_err(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn fvl_err(e: FvlError) -> CliError {
    match e {
        FvlError::Pieces { .. } | FvlError::Elimination(_) => CliError::Budget(e.to_string()),
        FvlError::Term(_) => CliError::Input(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn budget_err(e: BudgetError) -> CliError {
    CliError::Budget(e.to_string())
}

/// What a command prints, in both renderings, and its exit status.
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Check(a) => check(cli, a),
        Command::Sat(a) => sat(cli, a),
        Command::Lat { op } => lat(op),
        Command::Dlat { op } => dlat(op),
        Command::Fvl { op } => fvl(op),
        Command::Free(a) => free(cli, a),
        Command::Quotient(a) => quotient_cmd(a),
        Command::Saturate(a) => saturate_cmd(a),
    }
}

fn theory_name(s: &str) -> Result<TheoryName, CliError> {
    s.parse().map_err(|e: latfree_core::theories::TheoryError| CliError::Usage(e.to_string()))
}

fn qs(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

fn show_point(v: &[Q]) -> String {
    format!("({})", qs(v).join(", "))
}

// ---- check ----

fn check(cli: &Cli, a: &CheckArgs) -> Result<Outcome, CliError> {
    let name = theory_name(&a.theory)?;
    let loaded = input::structure(a.algebra.as_deref(), a.preset.as_deref())?;
    let opts = CheckOptions {
        samples: a.samples,
        seed: cli.seed,
        jobs: cli.jobs,
        ..CheckOptions::default()
    };
    let th = theory(name);
    let report = match &a.identities {
        Some(path) => {
            let sig = match &loaded {
                Loaded::Finite(f) => f.signature().clone(),
                Loaded::Table(_) => TheoryName::Vla1.signature(),
            };
            let ids = parse_identities(&input::read_file(path)?, &sig).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            let verdicts = match &loaded {
                Loaded::Finite(f) => check_identities(f, &ids, &opts),
                Loaded::Table(t) => check_identities(t, &ids, &opts),
            }
            .map_err(input_err)?;
            TheoryReport { theory: name, verdicts }
        }
        None => match &loaded {
            Loaded::Finite(f) => check_theory(f, &th, &opts),
            Loaded::Table(t) => check_theory(t, &th, &opts),
        }
        .map_err(input_err)?,
    };
    let holds = report.all_hold();
    let mut text = report.to_string();
    let summary = summary_line(&report.verdicts, name);
    text.push_str(&summary);
    text.push('\n');
    Ok(Outcome {
        json: json!({
            "theory": name.as_str(),
            "holds": holds,
            "exhaustive": report.exhaustive(),
            "verdicts": report.verdicts,
        }),
        text,
        code: if holds { EXIT_POSITIVE } else { EXIT_NEGATIVE },
    })
}

fn summary_line(verdicts: &[ClauseVerdict], name: TheoryName) -> String {
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.holds).map(|v| v.label.as_str()).collect();
    let sampled = verdicts.iter().any(|v| v.mode == CheckMode::Sampled);
    if failed.is_empty() {
        format!(
            "{name}: all {} verdict(s) PASS{}",
            verdicts.len(),
            if sampled { " (sampled)" } else { "" }
        )
    } else {
        format!("{name}: FAIL on {}", failed.join(", "))
    }
}

// ---- sat ----

fn sat_json(v: &SatVerdict, a: &FiniteAlgebra) -> Value {
    json!({
        "holds": v.holds,
        "exhaustive": v.exhaustive,
        "checked": v.checked,
        "counterexample": v.counterexample.as_ref().map(|c| c.iter().map(|(k, x)| json!({"var": k, "value": x})).collect::<Vec<_>>()),
        "size": a.size(),
    })
}

fn sat_text(label: &str, v: &SatVerdict) -> String {
    let mode = if v.exhaustive { "exhaustive" } else { "sampled" };
    let mut s = format!(
        "{label}: {} ({} assignment(s), {mode})",
        if v.holds { "HOLDS" } else { "FAILS" },
        v.checked
    );
    if let Some(c) = &v.counterexample {
        let parts: Vec<String> = c.iter().map(|(k, x)| format!("{k}={x}")).collect();
        let _ = write!(s, " counterexample {}", parts.join(" "));
    }
    s.push('\n');
    s
}

fn parse_quasi(src: &str, sig: &Signature) -> Result<(Vec<Identity>, Identity), CliError> {
    let (prem, concl) = src
        .split_once("=>")
        .ok_or_else(|| CliError::Usage("quasi-identity must read `p1 = q1 ; .. => l = r`".into()))?;
    let premises = prem
        .split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .enumerate()
        .map(|(i, p)| Identity::parse(format!("premise {}", i + 1), p, sig))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input_err)?;
    let conclusion = Identity::parse("conclusion", concl.trim(), sig).map_err(input_err)?;
    Ok((premises, conclusion))
}

fn sat(cli: &Cli, a: &SatArgs) -> Result<Outcome, CliError> {
    let loaded = input::structure(a.algebra.as_deref(), a.preset.as_deref())?;
    let opts = SatOptions {
        budget: a.budget,
        sample_when_over: true,
        seed: cli.seed,
    };
    match loaded {
        Loaded::Finite(alg) => sat_finite(&alg, a, &opts),
        Loaded::Table(t) => sat_table(cli, &t, a),
    }
}

fn sat_finite(alg: &FiniteAlgebra, a: &SatArgs, opts: &SatOptions) -> Result<Outcome, CliError> {
    let sig = alg.signature();
    let mut goals: Vec<(String, Vec<Identity>, Identity)> = Vec::new();
    if let Some(src) = &a.identity {
        goals.push((src.clone(), vec![], Identity::parse("identity", src, sig).map_err(input_err)?));
    } else if let Some(src) = &a.quasi {
        let (p, c) = parse_quasi(src, sig)?;
        goals.push((src.clone(), p, c));
    } else if a.f_algebra {
        for s in ["wedge", "dot", "zero"] {
            if !sig.contains(s) {
                return Err(CliError::Usage(format!("the f-algebra condition needs `{s}`")));
            }
        }
        let premises = "(wedge x y) = zero ; (wedge z zero) = zero";
        for concl in ["(wedge (dot x z) y) = zero", "(wedge (dot z x) y) = zero"] {
            let (p, c) = parse_quasi(&format!("{premises} => {concl}"), sig)?;
            goals.push((format!("{premises} => {concl}"), p, c));
        }
    } else {
        return Err(CliError::Usage("give --identity, --quasi or --f-algebra".into()));
    }
    let mut text = String::new();
    let mut results = Vec::new();
    let mut holds = true;
    for (label, premises, conclusion) in &goals {
        let v = satisfies_quasi(alg, premises, conclusion, opts).map_err(input_err)?;
        text.push_str(&sat_text(label, &v));
        holds &= v.holds;
        let mut j = sat_json(&v, alg);
        j["goal"] = json!(label);
        results.push(j);
    }
    Ok(Outcome {
        text,
        json: json!({ "holds": holds, "results": results }),
        code: if holds { EXIT_POSITIVE } else { EXIT_NEGATIVE },
    })
}

fn sat_table(cli: &Cli, t: &TableVla, a: &SatArgs) -> Result<Outcome, CliError> {
    if a.f_algebra {
        let samples = a.budget.min(20_000) as usize;
        let report = f_algebra_probe(t, samples, cli.seed);
        let (text, code) = match &report.outcome {
            FProbeOutcome::Pass { checked } => (
                format!(
                    "f-algebra condition in {}: no violation among {checked} triple(s) (sampled, not a proof)\n",
                    report.structure
                ),
                EXIT_POSITIVE,
            ),
            FProbeOutcome::Fail { x, y, z, failing } => (
                format!(
                    "f-algebra condition in {}: FAILS at x = {x}, y = {y}, z = {z}: {failing} != 0\n",
                    report.structure
                ),
                EXIT_NEGATIVE,
            ),
        };
        return Ok(Outcome {
            text,
            json: serde_json::to_value(&report).expect("serialisable"),
            code,
        });
    }
    let Some(src) = &a.identity else {
        return Err(CliError::Usage(
            "on vector lattice algebras use --identity or --f-algebra".into(),
        ));
    };
    let sig = TheoryName::Vla1.signature();
    let id = Identity::parse("identity", src, &sig).map_err(input_err)?;
    let opts = CheckOptions {
        samples: a.budget.min(100_000),
        seed: cli.seed,
        ..CheckOptions::default()
    };
    let v = check_identities(t, std::slice::from_ref(&id), &opts)
        .map_err(input_err)?
        .remove(0);
    let mut text = format!(
        "{src}: {} ({} assignment(s), sampled)",
        if v.holds { "HOLDS" } else { "FAILS" },
        v.checks
    );
    if let Some(w) = &v.witness {
        let asg: Vec<String> = w.assignment.iter().map(|(k, x)| format!("{k}={x}")).collect();
        let _ = write!(text, " counterexample {}: {} != {}", asg.join(" "), w.lhs, w.rhs);
    }
    text.push('\n');
    Ok(Outcome {
        text,
        code: if v.holds { EXIT_POSITIVE } else { EXIT_NEGATIVE },
        json: serde_json::to_value(&v).expect("serialisable"),
    })
}

// ---- lat / dlat ----

fn lat_term(src: &str) -> Result<LatTerm, CliError> {
    let t = parse_term_open(src, &Signature::lattice()).map_err(input_err)?;
    LatTerm::new(t).map_err(input_err)
}

fn verdict_outcome(relation: &str, t1: &str, t2: &str, holds: bool) -> Outcome {
    Outcome {
        text: format!("{t1} {relation} {t2}: {}\n", if holds { "true" } else { "false" }),
        json: json!({ "relation": relation, "lhs": t1, "rhs": t2, "holds": holds }),
        code: if holds { EXIT_POSITIVE } else { EXIT_NEGATIVE },
    }
}

fn lat(op: &LatOp) -> Result<Outcome, CliError> {
    match op {
        LatOp::Eq { t1, t2 } | LatOp::Leq { t1, t2 } => {
            let (a, b) = (lat_term(t1)?, lat_term(t2)?);
            let mut w = Whitman::new();
            let (rel, holds) = match op {
                LatOp::Eq { .. } => ("=", w.eq(&a, &b)),
                _ => ("<=", w.leq(&a, &b)),
            };
            Ok(verdict_outcome(rel, &a.to_string(), &b.to_string(), holds))
        }
        LatOp::Collapse { poset } => {
            let l = input::poset(poset)?;
            match collapse_witness(&l).map_err(input_err)? {
                Some(c) => Ok(collapse_outcome(&l, &c)),
                None => Ok(Outcome {
                    text: "distributive: j is injective (no collapse)\n".into(),
                    json: json!({ "collapse": Value::Null, "distributive": true }),
                    code: EXIT_NEGATIVE,
                }),
            }
        }
        LatOp::Embed { poset } => {
            let l = input::poset(poset)?;
            match birkhoff_embed(&l) {
                Ok(e) => {
                    let names = l.names();
                    let ji: Vec<&str> = e.join_irreducibles.iter().map(|&p| names[p].as_str()).collect();
                    let mut text = format!("join-irreducibles: {}\n", ji.join(" "));
                    for (x, v) in e.vectors.iter().enumerate() {
                        let cells: Vec<String> = v.iter().map(u8::to_string).collect();
                        let _ = writeln!(text, "{} -> ({})", names[x], cells.join(", "));
                    }
                    let vectors: Vec<Value> = e
                        .vectors
                        .iter()
                        .enumerate()
                        .map(|(x, v)| json!({ "element": names[x], "vector": v }))
                        .collect();
                    Ok(Outcome {
                        text,
                        json: json!({ "join_irreducibles": ji, "vectors": vectors }),
                        code: EXIT_POSITIVE,
                    })
                }
                Err(LatticeError::NotDistributive { a, b, c }) => {
                    let n = |i: usize| l.names()[i].clone();
                    Ok(Outcome {
                        text: format!("not distributive at ({}, {}, {})\n", n(a), n(b), n(c)),
                        json: json!({ "distributive": false, "triple": [n(a), n(b), n(c)] }),
                        code: EXIT_NEGATIVE,
                    })
                }
                Err(e) => Err(input_err(e)),
            }
        }
    }
}

fn collapse_outcome(l: &LatticePoset, c: &Collapse) -> Outcome {
    let n = |i: usize| l.names()[i].clone();
    let (a, b, cc) = c.triple;
    let mut text = format!(
        "j({}) = j({}) in the free vector lattice; distributivity fails at ({}, {}, {})\n",
        n(c.x),
        n(c.y),
        n(a),
        n(b),
        n(cc)
    );
    for s in &c.steps {
        let _ = writeln!(text, "  {s}");
    }
    let _ = writeln!(
        text,
        "vector lattice distributivity certified: {}",
        c.distributivity_certified
    );
    Outcome {
        text,
        json: json!({
            "x": n(c.x),
            "y": n(c.y),
            "triple": [n(a), n(b), n(cc)],
            "steps": c.steps,
            "distributivity_certified": c.distributivity_certified,
        }),
        code: EXIT_POSITIVE,
    }
}

fn dlat(op: &DlatOp) -> Result<Outcome, CliError> {
    match op {
        DlatOp::Nf { term } => {
            let t = lat_term(term)?;
            let nf = dlat_normal_form(&t);
            let sets: Vec<Vec<String>> = nf
                .sets()
                .iter()
                .map(|s| s.iter().map(|g| g.to_string()).collect())
                .collect();
            Ok(Outcome {
                text: format!("{nf}\n{}\n", nf.to_term()),
                json: json!({ "normal_form": sets, "term": nf.to_term().to_string() }),
                code: EXIT_POSITIVE,
            })
        }
        DlatOp::Eq { t1, t2 } => {
            let (a, b) = (lat_term(t1)?, lat_term(t2)?);
            let holds = dlat_normal_form(&a) == dlat_normal_form(&b);
            Ok(verdict_outcome("=", &a.to_string(), &b.to_string(), holds))
        }
    }
}

// ---- fvl ----

/// Generators must be `x1 .. xn`; `n` is the largest index used.
fn fvl_forms(exprs: &[String]) -> Result<(Vec<MinMaxForm>, usize), CliError> {
    let sig = TheoryName::Vl.signature();
    let terms: Vec<Term> = exprs
        .iter()
        .map(|s| parse_term_open(s, &sig).map_err(input_err))
        .collect::<Result<_, _>>()?;
    let mut n = 1;
    for t in &terms {
        for g in t.generators() {
            let k: usize = g
                .strip_prefix('x')
                .and_then(|d| d.parse().ok())
                .filter(|&k| k > 0)
                .ok_or_else(|| CliError::Input(format!("generator `{g}` is not of the form x1, x2, ..")))?;
            n = n.max(k);
        }
    }
    let gens: Vec<Arc<str>> = (1..=n).map(|i| Arc::from(format!("x{i}"))).collect();
    let forms = terms
        .iter()
        .map(|t| MinMaxForm::from_term(t, &gens, false).map_err(fvl_err))
        .collect::<Result<_, _>>()?;
    Ok((forms, n))
}

fn fvl(op: &FvlOp) -> Result<Outcome, CliError> {
    match op {
        FvlOp::Eq { exprs } | FvlOp::Leq { exprs } => {
            let exprs = input::expressions(exprs, 2)?;
            let (forms, n) = fvl_forms(&exprs)?;
            let (rel, witness) = match op {
                FvlOp::Eq { .. } => ("=", eq_witness(&forms[0], &forms[1]).map_err(fvl_err)?),
                _ => ("<=", leq_witness(&forms[0], &forms[1]).map_err(fvl_err)?),
            };
            let holds = witness.is_none();
            let mut out = verdict_outcome(rel, &forms[0].to_string(), &forms[1].to_string(), holds);
            out.json["generators"] = json!(n);
            if let Some(p) = witness {
                let (va, vb) = (forms[0].eval(&p), forms[1].eval(&p));
                let _ = writeln!(
                    out.text,
                    "witness point {}: {} vs {}",
                    show_point(&p),
                    fmt_q(&va),
                    fmt_q(&vb)
                );
                out.json["witness"] = json!({ "point": qs(&p), "lhs": fmt_q(&va), "rhs": fmt_q(&vb) });
            }
            Ok(out)
        }
        FvlOp::Rho { expr, points } => {
            let exprs = input::expressions(std::slice::from_ref(expr), 1)?;
            let (forms, n) = fvl_forms(&exprs)?;
            let pts = input::points(points)?;
            if let Some(p) = pts.iter().find(|p| p.len() != n) {
                return Err(CliError::Input(format!(
                    "point {} has {} coordinates, the expression uses {n} generator(s)",
                    show_point(p),
                    p.len()
                )));
            }
            let est = rho_lower_bound(&forms[0], &pts).map_err(fvl_err)?;
            let best = est.best.map(|i| &est.witnesses[i]);
            let mut text = format!("rho({}) >= {}", forms[0], fmt_q(&est.value));
            if let Some(p) = best {
                let _ = write!(text, " witnessed at {}", show_point(p));
            }
            text.push('\n');
            Ok(Outcome {
                text,
                json: json!({
                    "form": forms[0].to_string(),
                    "lower_bound": fmt_q(&est.value),
                    "witness": best.map(|p| qs(p)),
                    "points": est.witnesses.len(),
                }),
                code: EXIT_POSITIVE,
            })
        }
    }
}

// ---- free ----

fn presentation(base: BaseKind, a: &FreeArgs) -> Result<BasePresentation, CliError> {
    if let Some(names) = &a.names {
        return Ok(BasePresentation::FreeOver(names.clone()));
    }
    if let Some(d) = a.dim {
        return Ok(BasePresentation::Space(d));
    }
    if let Some(p) = &a.poset {
        return Ok(BasePresentation::Lattice(input::poset(p)?));
    }
    if let Some(path) = &a.algebra {
        return match input::load_structure(path)? {
            Loaded::Table(t) => Ok(BasePresentation::Algebra(t)),
            Loaded::Finite(_) => Err(CliError::Usage(format!("{path}: expected a `vla d` structure file"))),
        };
    }
    if let Some(name) = &a.preset {
        if base == BaseKind::Lat {
            return Ok(BasePresentation::Lattice(input::poset(name)?));
        }
        return match input::preset_structure(name)? {
            Loaded::Table(t) => Ok(BasePresentation::Algebra(t)),
            Loaded::Finite(_) => Err(CliError::Usage(format!("preset `{name}` is a lattice; use --base lat"))),
        };
    }
    Err(CliError::Usage(
        "give one of --names, --dim, --poset, --algebra or --preset".into(),
    ))
}

fn handle(a: &FreeArgs) -> Result<FreeObjectHandle, CliError> {
    let base: BaseKind = a.base.parse().map_err(CliError::Usage)?;
    let target = theory_name(&a.target)?;
    let pres = presentation(base, a)?;
    let usage = |e: latfree_core::vla_engine::VlaError| CliError::Usage(e.to_string());
    match &a.via {
        None => make_free(base, target, pres).map_err(usage),
        Some(via) => {
            let via = theory_name(via)?;
            let inner = make_free(base, via, pres).map_err(usage)?;
            let mid = BaseKind::of_theory(via)
                .ok_or_else(|| CliError::Usage(format!("{via} cannot serve as a base")))?;
            let names: Vec<String> = inner.generators.ids().iter().map(|g| g.to_string()).collect();
            let outer = make_free(mid, target, BasePresentation::FreeOver(names)).map_err(usage)?;
            compose(&inner, &outer).map_err(usage)
        }
    }
}

fn free(cli: &Cli, a: &FreeArgs) -> Result<Outcome, CliError> {
    let h = handle(a)?;
    let gens: Vec<String> = h.generators.ids().iter().map(|g| g.to_string()).collect();
    match &a.action {
        FreeAction::Relations => {
            let mut text = format!(
                "free {} over {} base; generators {}\n",
                h.target,
                h.base,
                gens.join(" ")
            );
            for r in &h.relations {
                let _ = writeln!(text, "  {r}");
            }
            let rels: Vec<String> = h.relations.iter().map(|r| r.to_string()).collect();
            Ok(Outcome {
                text,
                json: json!({ "base": h.base.as_str(), "target": h.target.as_str(), "generators": gens, "relations": rels }),
                code: EXIT_POSITIVE,
            })
        }
        FreeAction::Prove { t1, t2 } => {
            let sig = h.signature();
            let parse = |s: &str| parse_term(s, &sig, &h.generators).map_err(input_err);
            let (x, y) = (parse(t1)?, parse(t2)?);
            let opts = ProveOptions {
                height: a.height,
                max_nodes: a.max_nodes,
                trials: a.trials,
                seed: cli.seed,
                jobs: cli.jobs,
                ..ProveOptions::default()
            };
            let v = prove_equal(&h, &x, &y, &opts).map_err(input_err)?;
            Ok(verdict_report(&h, &x, &y, &v))
        }
    }
}

fn verdict_report(h: &FreeObjectHandle, x: &Term, y: &Term, v: &Verdict) -> Outcome {
    let mut text = format!("{} = {} in free {} over {}: {}\n", x, y, h.target, h.base, v.label());
    let mut j = json!({ "lhs": x.to_string(), "rhs": y.to_string(), "verdict": v.label() });
    let code = match v {
        Verdict::Proved { method, stats } => {
            let _ = writeln!(
                text,
                "method {method:?}; height budget {}, {} round(s), {} node(s)",
                stats.height_budget, stats.rounds, stats.nodes
            );
            j["method"] = json!(method);
            j["stats"] = json!(stats);
            EXIT_POSITIVE
        }
        Verdict::Separated(w) => {
            let verified = w.verify(h, x, y);
            let _ = writeln!(text, "witness {w}");
            if let Some(m) = w.matrices() {
                let _ = writeln!(text, "matrices {m}");
            }
            let _ = writeln!(text, "witness re-checked: {verified}");
            let assignment: Vec<Value> = w
                .assignment
                .iter()
                .map(|(g, v)| json!({ "generator": g.to_string(), "value": qs(v) }))
                .collect();
            j["witness"] = json!({
                "structure": w.kind.to_string(),
                "assignment": assignment,
                "lhs": qs(&w.lhs),
                "rhs": qs(&w.rhs),
                "verified": verified,
            });
            EXIT_NEGATIVE
        }
        Verdict::Unknown(stats) => {
            let _ = writeln!(
                text,
                "height budget {}: {} round(s), {} node(s), {} class(es), saturated {}, node cap hit {}, {} separation trial(s)",
                stats.height_budget,
                stats.rounds,
                stats.nodes,
                stats.classes,
                stats.saturated,
                stats.hit_node_cap,
                stats.separation_trials
            );
            j["stats"] = json!(stats);
            EXIT_UNKNOWN
        }
    };
    Outcome { text, json: j, code }
}

// ---- quotient ----

fn quotient_cmd(a: &QuotientArgs) -> Result<Outcome, CliError> {
    let Loaded::Finite(alg) = input::load_structure(&a.algebra)? else {
        return Err(CliError::Usage("quotient needs a finite algebra table".into()));
    };
    let pairs = a
        .pairs
        .iter()
        .map(|p| {
            let (x, y) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("pair `{p}` must read `a=b`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad element `{s}`")))
            };
            Ok((parse(x)?, parse(y)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let theta = generate_congruence(&alg, &pairs).map_err(input_err)?;
    let (q, hom) = quotient(&alg, &theta).map_err(input_err)?;
    let blocks = theta.partition().blocks();
    let shown: Vec<String> = blocks
        .iter()
        .map(|b| format!("{{{}}}", b.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    let text = format!(
        "congruence: {} block(s) {}\nquotient map: {:?}\n{}",
        blocks.len(),
        shown.join(" "),
        hom.map(),
        q.to_text()
    );
    Ok(Outcome {
        text,
        json: json!({ "blocks": blocks, "map": hom.map(), "quotient": q.to_text() }),
        code: EXIT_POSITIVE,
    })
}

// ---- saturate ----

fn saturate_cmd(a: &SaturateArgs) -> Result<Outcome, CliError> {
    let name = theory_name(&a.theory)?;
    let th = theory(name);
    let scalars = a
        .scalars
        .iter()
        .map(|s| parse_q(s).ok_or_else(|| CliError::Usage(format!("bad scalar `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if a.gens.is_empty() {
        return Err(CliError::Usage("give --gens".into()));
    }
    let gens = GeneratorSet::new(&a.gens, &th.sig).map_err(|e| CliError::Usage(e.to_string()))?;
    let universe = terms_up_to_height(&th.sig, &gens, a.height, &scalars, a.cap).map_err(budget_err)?;
    let ids = th.identities(&scalars);
    let mut pairs = instance_pairs(&ids, &th.sig, &gens, a.height.saturating_sub(1), &scalars, a.cap).map_err(budget_err)?;
    let ground = |src: &str| -> Result<(Term, Term), CliError> {
        let (l, r) = src
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("`{src}` must read `t1 = t2`")))?;
        let p = |s: &str| parse_term(s.trim(), &th.sig, &gens).map_err(input_err);
        Ok((p(l)?, p(r)?))
    };
    for p in &a.pairs {
        pairs.push(ground(p)?);
    }
    let part = saturate(&pairs, &universe);
    let mut text = format!(
        "{}: {} term(s) of height <= {}, {} instance pair(s), {} class(es)\n",
        name,
        universe.len(),
        a.height,
        pairs.len(),
        part.block_count()
    );
    let mut j = json!({
        "theory": name.as_str(),
        "universe": universe.len(),
        "pairs": pairs.len(),
        "classes": part.block_count(),
    });
    let mut code = EXIT_POSITIVE;
    if let Some(query) = &a.query {
        let (l, r) = ground(query)?;
        let pos = |t: &Term| universe.iter().position(|u| u == t);
        let derived = match (pos(&l), pos(&r)) {
            (Some(i), Some(k)) => part.related(i, k),
            _ => {
                return Err(CliError::Usage(format!(
                    "query terms must have height <= {}",
                    a.height
                )))
            }
        };
        let _ = writeln!(
            text,
            "{l} = {r}: {}",
            if derived { "derived" } else { "not derived within this universe" }
        );
        j["derived"] = json!(derived);
        code = if derived { EXIT_POSITIVE } else { EXIT_UNKNOWN };
    }
    Ok(Outcome { text, json: j, code })
}
