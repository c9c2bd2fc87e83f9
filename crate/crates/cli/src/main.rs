mod commands;
mod input;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;

#[derive(Parser, Debug)]
#[command(name = "latfree", version, about = "Free lattices, free vector lattices and free vector lattice algebras")]
pub struct Cli {
    /// Seed for every randomised search and sampler.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a structure against every identity of a theory.
    Check(CheckArgs),
    /// Decide an identity or quasi-identity in a finite algebra.
    Sat(SatArgs),
    /// Free lattice word problem and finite lattice tools.
    Lat {
        #[command(subcommand)]
        op: LatOp,
    },
    /// Free distributive lattice normal forms.
    Dlat {
        #[command(subcommand)]
        op: DlatOp,
    },
    /// Free vector lattice decisions in the function model.
    Fvl {
        #[command(subcommand)]
        op: FvlOp,
    },
    /// Equality in a free object over a base structure.
    Free(FreeArgs),
    /// Congruence generated by pairs, and the quotient algebra.
    Quotient(QuotientArgs),
    /// Bounded equational saturation over a term universe.
    Saturate(SaturateArgs),
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub theory: String,
    /// Finite algebra table or `vla d` structure file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub algebra: Option<String>,
    /// Built-in structure: a lattice (M3, N5, boolean4, chainN) or q, m2, m3_entrywise, coordN, zeroN.
    #[arg(long)]
    pub preset: Option<String>,
    /// Check these identities (one `label: lhs = rhs` per line) instead of the theory.
    #[arg(long)]
    pub identities: Option<String>,
    /// Random assignments per identity when exhaustive checking is out of reach.
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
}

#[derive(Args, Debug)]
pub struct SatArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub algebra: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    /// `lhs = rhs`
    #[arg(long, group = "goal")]
    pub identity: Option<String>,
    /// `p1 = q1 ; p2 = q2 => l = r`
    #[arg(long, group = "goal")]
    pub quasi: Option<String>,
    /// The f-algebra quasi-identity: x /\ y = 0, z >= 0 imply (xz) /\ y = (zx) /\ y = 0.
    #[arg(long = "f-algebra", group = "goal")]
    pub f_algebra: bool,
    /// Assignments evaluated before switching to sampling.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
}

#[derive(Subcommand, Debug)]
pub enum LatOp {
    /// t1 = t2 in the free lattice.
    Eq { t1: String, t2: String },
    /// t1 <= t2 in the free lattice.
    Leq { t1: String, t2: String },
    /// Two elements identified in the free vector lattice over a finite lattice.
    Collapse { poset: String },
    /// Characteristic vectors of a finite distributive lattice.
    Embed { poset: String },
}

#[derive(Subcommand, Debug)]
pub enum DlatOp {
    /// Normal form as an antichain of generator sets.
    Nf { term: String },
    /// t1 = t2 in the free distributive lattice.
    Eq { t1: String, t2: String },
}

#[derive(Subcommand, Debug)]
pub enum FvlOp {
    /// Equality; a file with two expressions, or two inline expressions.
    Eq { exprs: Vec<String> },
    /// Order; a file with two expressions, or two inline expressions.
    Leq { exprs: Vec<String> },
    /// Lower bound for the seminorm from finitely many points of the unit cube.
    Rho { expr: String, points: String },
}

#[derive(Args, Debug)]
pub struct FreeArgs {
    /// set, lat, vs, vl, vla, vla1
    #[arg(long)]
    pub base: String,
    /// VL, VLA, VLA1 or VLA1P
    #[arg(long)]
    pub target: String,
    /// Go through this intermediate target and compose.
    #[arg(long)]
    pub via: Option<String>,
    /// Lattice preset (chain2..chainN, M3, N5, boolean4) or algebra preset (q, m2, m3_entrywise, coordN, ...).
    #[arg(long)]
    pub preset: Option<String>,
    /// Comma-separated generator names of a free base.
    #[arg(long, value_delimiter = ',')]
    pub names: Option<Vec<String>>,
    /// Dimension of a space base.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Poset file for a lattice base.
    #[arg(long)]
    pub poset: Option<String>,
    /// `vla d` structure file for an algebra base.
    #[arg(long)]
    pub algebra: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub height: usize,
    #[arg(long, default_value_t = 30_000)]
    pub max_nodes: usize,
    #[arg(long, default_value_t = 60)]
    pub trials: usize,
    #[command(subcommand)]
    pub action: FreeAction,
}

#[derive(Subcommand, Debug)]
pub enum FreeAction {
    /// PROVED, SEPARATED or UNKNOWN for t1 = t2.
    Prove { t1: String, t2: String },
    /// List generators and defining relations.
    Relations,
}

#[derive(Args, Debug)]
pub struct QuotientArgs {
    #[arg(long)]
    pub algebra: String,
    /// Generating pairs `a=b`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SaturateArgs {
    #[arg(long)]
    pub theory: String,
    #[arg(long, value_delimiter = ',')]
    pub gens: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub height: usize,
    /// Scalars for the scale family, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub scalars: Vec<String>,
    /// Extra generating pairs `t1 = t2` (repeatable).
    #[arg(long = "pair")]
    pub pairs: Vec<String>,
    /// Is `t1 = t2` derived?
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long, default_value_t = 200_000)]
    pub cap: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(Outcome { text, json, code }) => {
            let rendered = if cli.json {
                serde_json::to_string_pretty(&json).expect("json output") + "\n"
            } else {
                text
            };
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = std::io::stdout().lock().write_all(rendered.as_bytes());
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("latfree: {e}");
            ExitCode::from(e.code())
        }
    }
}
