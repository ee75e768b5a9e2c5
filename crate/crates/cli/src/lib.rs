//! Command-line driver for `qctree-core`: file formats, seeded experiment
//! pipelines and JSON/CSV reports.
//!
//! Exit codes: `0` when every invariant in the report holds, `2` when one
//! fails, `3` for unreadable input or invalid arguments.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod commands;
pub mod formats;
pub mod report;

pub use report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug, Serialize)]
#[command(name = "qctree", version, about = "Quasiarcs, martingale calculus and Lipschitz gluing on dyadic trees")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid resolution K.
    #[arg(long, global = true)]
    pub resolution: Option<u32>,
    /// Report path; relative paths resolve against QCTREE_OUT_DIR. Printed to stdout when omitted.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Leave the timestamp out of the report.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Float arithmetic with tolerance instead of exact rationals.
    #[arg(long, global = true)]
    pub float: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Diameter trees and quasiarc metrics.
    #[command(subcommand)]
    Arc(ArcCmd),
    /// Dyadic atoms of the filtration.
    #[command(subcommand)]
    Filtration(FiltrationCmd),
    /// Martingale differences and integrals.
    #[command(subcommand)]
    Mart(MartCmd),
    /// Glued trees and their decompositions.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Lipschitz and light gluing, ℓ^p embeddings.
    #[command(subcommand)]
    Glue(GlueCmd),
    /// Finite L¹ isomorphisms.
    #[command(subcommand)]
    L1iso(L1Cmd),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum ArcKind {
    Euclidean,
    EuclideanRaw,
    Snowflake,
    Random,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArcCmd {
    /// Generate a diameter tree file.
    Gen {
        #[arg(long, value_enum)]
        kind: ArcKind,
        #[arg(long, default_value_t = 2)]
        period: u32,
        #[arg(long, default_value_t = 0.5)]
        p_halve: f64,
        /// Tree file to write; printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance between two grid points.
    Dist {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Metric axioms, edge-distance identity and bounded turning.
    Check {
        #[arg(long)]
        tree: PathBuf,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiltrationCmd {
    /// Atoms of level n, with the per-level measure table.
    Atoms {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        n: u32,
        /// Same as --report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MartCmd {
    /// Martingale difference sequence of a function.
    D {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        f: PathBuf,
        /// Sequence file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integral of a martingale difference sequence.
    I {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        seq: PathBuf,
        /// Function file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random round trips I∘D and D∘I.
    Roundtrip {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Separating witness for a pair of grid points.
    Witness {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Witness function file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum PlanKind {
    Star,
    Chain,
    Random,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeCmd {
    /// Generate a glue plan.
    Gen {
        #[arg(long, value_enum)]
        kind: PlanKind,
        /// Number of arcs.
        #[arg(long, default_value_t = 3)]
        arcs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DEBV pieces.
    Debv {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Full arc decomposition with its validation and constants.
    Decompose {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum DecompKind {
    /// One piece per arc of the plan.
    Arcs,
    /// DEBV pieces split into arcs.
    DebvArcs,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum LightMap {
    /// Distance to the piece's branch point.
    Distance,
    /// The same distance wrapped onto a circle.
    Circle,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlueCmd {
    /// Random piece families glued by Ψ.
    Psi {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum, default_value_t = DecompKind::Arcs)]
        decomp: DecompKind,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Measured lightness of glued per-piece maps.
    Light {
        #[arg(long)]
        plan: PathBuf,
        /// Comma-separated radii; defaults to mesh·2^j for j = 1..=5.
        #[arg(long)]
        r_grid: Option<String>,
        #[arg(long, value_enum, default_value_t = LightMap::Distance)]
        map: LightMap,
        /// Circle length as a fraction of the tree diameter.
        #[arg(long, default_value = "1/3")]
        fold: String,
    },
    /// Glued embedding into an ℓ^p sum of ℓ^∞ blocks.
    Embed {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum L1Cmd {
    /// Operator norms and distortions on random finite measure spaces.
    Bench {
        /// Comma-separated atom counts.
        #[arg(long, default_value = "4,8,16")]
        sizes: String,
        /// Blocks for the atomless model.
        #[arg(long, default_value_t = 3)]
        blocks: usize,
    },
}

impl Common {
    pub fn require_seed(&self) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None => bail!("this command is randomized and needs --seed"),
        }
    }

    pub fn exact_only(&self) -> Result<()> {
        if self.float {
            bail!("this command runs in exact arithmetic only; drop --float");
        }
        Ok(())
    }
}

/// Parse `args`, run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let path = match &cli.command {
                Command::Filtration(FiltrationCmd::Atoms { out: Some(p), .. }) => Some(p.as_path()),
                _ => cli.common.report.as_deref(),
            };
            if let Err(e) = report.emit(path, !cli.common.no_timestamp) {
                eprintln!("error: {e:#}");
                return EXIT_INPUT;
            }
            for i in report.invariants.iter().filter(|i| !i.pass) {
                eprintln!("FAIL {}: {}", i.name, i.detail);
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

/// Run the parsed command and assemble its report.
pub fn execute(cli: &Cli) -> Result<Report> {
    let config = serde_json::to_value(cli)?;
    let c = &cli.common;
    match &cli.command {
        Command::Arc(cmd) => commands::arc::run(c, cmd, config),
        Command::Filtration(cmd) => commands::filtration::run(c, cmd, config),
        Command::Mart(cmd) => commands::mart::run(c, cmd, config),
        Command::Tree(cmd) => commands::tree::run(c, cmd, config),
        Command::Glue(cmd) => commands::glue::run(c, cmd, config),
        Command::L1iso(cmd) => commands::l1iso::run(c, cmd, config),
    }
}
