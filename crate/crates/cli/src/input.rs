//! Reading structures, posets, expressions and points from files or presets.

use std::io::ErrorKind;
use std::path::Path;

use latfree_core::finite_algebra::{parse_algebra, FiniteAlgebra};
use latfree_core::models::{self, parse_table_vla, TableVla};
use latfree_core::rational::{parse_q, Q};
use latfree_core::theories::{order_to_ops, presets, LatticePoset};

use crate::commands::CliError;

pub fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => CliError::NotFound(path.to_string()),
        _ => CliError::Input(format!("{path}: {e}")),
    })
}

pub enum Loaded {
    Finite(FiniteAlgebra),
    Table(TableVla),
}

fn first_word(text: &str) -> Option<&str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
}

pub fn load_structure(path: &str) -> Result<Loaded, CliError> {
    let text = read_file(path)?;
    if first_word(&text) == Some("vla") {
        parse_table_vla(&text)
            .map(Loaded::Table)
            .map_err(|e| CliError::Input(format!("{path}: {e}")))
    } else {
        parse_algebra(&text)
            .map(Loaded::Finite)
            .map_err(|e| CliError::Input(format!("{path}: {e}")))
    }
}

pub fn preset_structure(name: &str) -> Result<Loaded, CliError> {
    // lattice names win: `M3` is the diamond, `m3_entrywise` the matrices
    if let Some(l) = presets::by_name(name) {
        return order_to_ops(&l)
            .map(Loaded::Finite)
            .map_err(|e| CliError::Input(e.to_string()));
    }
    if let Some(t) = models::by_name(name) {
        return Ok(Loaded::Table(t));
    }
    Err(CliError::Usage(format!("unknown preset `{name}`")))
}

pub fn structure(algebra: Option<&str>, preset: Option<&str>) -> Result<Loaded, CliError> {
    match (algebra, preset) {
        (Some(path), _) => load_structure(path),
        (None, Some(name)) => preset_structure(name),
        (None, None) => Err(CliError::Usage("give --algebra FILE or --preset NAME".into())),
    }
}

/// A poset file, or the name of a built-in lattice when no such file exists.
pub fn poset(arg: &str) -> Result<LatticePoset, CliError> {
    if Path::new(arg).exists() {
        let text = read_file(arg)?;
        return LatticePoset::parse(&text).map_err(|e| CliError::Input(format!("{arg}: {e}")));
    }
    presets::by_name(arg).ok_or_else(|| CliError::NotFound(arg.to_string()))
}

/// Splits text into parenthesis-balanced expressions; a line break ends an
/// expression only when its parentheses are closed.
pub fn split_expressions(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut depth: i64 = 0;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        depth += line.chars().filter(|&c| c == '(').count() as i64;
        depth -= line.chars().filter(|&c| c == ')').count() as i64;
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(line);
        if depth <= 0 {
            out.push(std::mem::take(&mut current));
            depth = 0;
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// One file holding the expressions, or the expressions inline.
pub fn expressions(args: &[String], want: usize) -> Result<Vec<String>, CliError> {
    let exprs = match args {
        [one] if !one.trim_start().starts_with('(') => split_expressions(&read_file(one)?),
        _ => args.to_vec(),
    };
    if exprs.len() != want {
        return Err(CliError::Usage(format!(
            "expected {want} expression(s), found {}",
            exprs.len()
        )));
    }
    Ok(exprs)
}

/// One rational vector per line, entries separated by spaces or commas.
pub fn points(path: &str) -> Result<Vec<Vec<Q>>, CliError> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let p = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|w| !w.is_empty())
            .map(|w| parse_q(w).ok_or_else(|| CliError::Input(format!("{path} line {}: bad rational `{w}`", n + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(p);
    }
    Ok(out)
}
