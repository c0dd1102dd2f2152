//! `framespace`: build tunnel and proliferative frame-spaces from JSON and
//! check the equivalence and spectral claims on them.
//!
//! Exit codes: 0 success, 1 a check failed, 2 parse error, 3 invalid input,
//! 4 numerical failure, 5 oracle bound exceeded, 6 internal inconsistency.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use framespace::io::render_json;
use framespace::Error;

#[derive(Parser, Debug)]
#[command(
    name = "framespace",
    version,
    about = "Finite frame-space builder and equivalence checker"
)]
struct Cli {
    /// Human-readable output instead of compact JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Seed for randomized generators; embedded in reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print per-phase timings to stderr.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Tunnel,
    Prolif,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a frame-space: frame, points, raw and closed metric.
    Build {
        input: PathBuf,
        /// Expected input kind; detected from the file when omitted.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// List the points (foci) of the generated frame.
    Points { input: PathBuf },
    /// Emit the raw and closed metric tables.
    Metric { input: PathBuf },
    /// Emit the Laplacian of a tunnel system or proliferative base.
    Laplacian {
        input: PathBuf,
        /// Substructure relation file `{"pairs": [["U", "T"], ...]}`.
        #[arg(long)]
        substructure: Option<PathBuf>,
    },
    /// Spectra of both Laplacians side by side.
    Spectrum {
        input: PathBuf,
        #[arg(long)]
        substructure: Option<PathBuf>,
    },
    /// Round-trip, conjugation and spectrum checks for one instance.
    CheckEquivalence {
        input: PathBuf,
        #[arg(long)]
        substructure: Option<PathBuf>,
        /// Replace the proliferative Laplacian with a matrix file.
        #[arg(long)]
        laplacian: Option<PathBuf>,
    },
    /// Check a morphism file `{"source", "target", "map"}` in both categories.
    CheckMorphism { input: PathBuf },
    /// Generate model instances.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
    /// Compare a brute-force oracle with the fast path.
    Oracle {
        #[arg(value_enum)]
        which: OracleKind,
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// Tunnel system from a weighted graph file.
    Graph {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphVariant::Stars)]
        variant: GraphVariant,
        /// Accept zero-weight edges (they fuse points).
        #[arg(long)]
        allow_zero: bool,
    },
    /// Tunnel system of grid intervals at resolution n.
    Interval {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = IntervalVariant::Hull)]
        variant: IntervalVariant,
    },
    /// Tunnel system of regular elements of a weighted frame.
    Locale {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
    /// A seeded random instance.
    Random {
        #[arg(long, value_enum, default_value_t = RandomKind::Tunnel)]
        kind: RandomKind,
        /// Largest carrier size.
        #[arg(long, default_value_t = 6)]
        max: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphVariant {
    Stars,
    Edges,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IntervalVariant {
    Hull,
    Intersection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RandomKind {
    Tunnel,
    Base,
    Graded,
    Graph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Points,
    ShortestPath,
    Nilpotent,
}

/// What a command produced: the JSON payload, an optional text rendering
/// for `--pretty`, and whether every check passed.
pub struct Output {
    pub json: serde_json::Value,
    pub text: Option<String>,
    pub ok: bool,
    pub timings: String,
}

impl Output {
    pub fn data(json: serde_json::Value) -> Self {
        Self {
            json,
            text: None,
            ok: true,
            timings: String::new(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        Error::InvalidInput(_) => 3,
        Error::NumericalFailure { .. } => 4,
        Error::OracleBoundExceeded(_) => 5,
        Error::InternalInconsistency(_) => 6,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = commands::run(&cli);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(out) => {
            match (&out.text, cli.pretty) {
                (Some(text), true) => print!("{text}"),
                _ => println!("{}", render_json(&out.json, cli.pretty)),
            }
            if cli.timings {
                eprint!("{}", out.timings);
                eprintln!("total: {elapsed:.3} ms");
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            if let Error::NumericalFailure { partial, .. } = &e {
                let partial: Vec<_> = partial
                    .iter()
                    .map(|&(re, im)| serde_json::json!({"re": re, "im": im}))
                    .collect();
                println!(
                    "{}",
                    render_json(
                        &serde_json::json!({"error": e.to_string(), "partial": partial}),
                        cli.pretty
                    )
                );
            }
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
