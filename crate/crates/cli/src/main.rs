//! `msr`: build, encode, fail, repair and audit centralized MSR codes.
//!
//! Node indices are 1-based everywhere. Exit status: 0 on success, 1 on a
//! validation error, 2 on an integrity or optimality failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use msr_core::{Family, Pattern};

#[derive(Debug, Parser)]
#[command(name = "msr", version, about = "Centralized MSR array codes: build, encode, fail, repair, audit")]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CodeArgs {
    /// c1, c2, c3, c4 or hadamard.
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Failed-node count paired with every --d value.
    #[arg(long, default_value_t = 1)]
    h: usize,
    /// Repair degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    d: Vec<usize>,
    /// Further patterns as h:d, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pattern)]
    patterns: Vec<Pattern>,
    /// Every pattern the family supports at this (n, k).
    #[arg(long)]
    all_patterns: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ClusterArgs {
    /// Cluster directory.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Path to the cluster's manifest.json.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Seed for everything random; falls back to MSR_SEED.
    #[arg(long, env = "MSR_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive and print a code's parameters and repair bounds.
    Params(CodeArgs),
    /// Encode a file (or seeded random data) into a new cluster directory.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        /// Directory to create the cluster in.
        #[arg(long)]
        out: PathBuf,
        /// Payload file, stored one byte per symbol.
        #[arg(long, conflicts_with = "synthetic")]
        input: Option<PathBuf>,
        /// Store seeded random symbols instead of a file.
        #[arg(long)]
        synthetic: bool,
        #[arg(long, default_value_t = 1)]
        stripes: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Erase the shards of the given nodes.
    Fail {
        #[command(flatten)]
        cluster: ClusterArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<usize>,
    },
    /// Rebuild failed nodes from helpers at the cut-set bound.
    Repair {
        #[command(flatten)]
        cluster: ClusterArgs,
        /// Failed nodes to rebuild.
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        helpers: Vec<usize>,
        /// Expected failed-node count; defaults to the number of --nodes.
        #[arg(long)]
        h: Option<usize>,
        /// Expected helper count; defaults to the number of --helpers.
        #[arg(long)]
        d: Option<usize>,
        /// Write the repair report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check node digests and decode the stored content.
    Verify {
        #[command(flatten)]
        cluster: ClusterArgs,
    },
    /// Rebuild random stripes from random k-subsets of alive nodes.
    VerifyMds {
        #[command(flatten)]
        cluster: ClusterArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Write the stored payload back out.
    Extract {
        #[command(flatten)]
        cluster: ClusterArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare sub-packetization across constructions for one pattern.
    Table {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
    },
    /// Encode, repair and reconstruct small codes of every family in memory.
    Selftest {
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Run a JSON scenario file.
    Scenario {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the scenario's cluster.
        #[arg(long)]
        workdir: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_pattern(s: &str) -> Result<Pattern, String> {
    let (h, d) = s.split_once(':').ok_or_else(|| format!("expected h:d, got {s:?}"))?;
    let h = h.trim().parse().map_err(|e| format!("bad h in {s:?}: {e}"))?;
    let d = d.trim().parse().map_err(|e| format!("bad d in {s:?}: {e}"))?;
    Ok(Pattern::new(h, d))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
