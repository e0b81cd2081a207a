//! `torusiso`: bounds, oracle checks, partition audits, machine comparisons
//! and benchmark simulation for torus networks.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse or usage error, 3 domain
//! error, 4 oracle budget exhausted, 5 reference-table mismatch.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use torusiso::report::{BandwidthUnit, Format};

#[derive(Parser, Debug)]
#[command(
    name = "torusiso",
    version,
    about = "Edge-isoperimetric analysis of torus networks and Blue Gene/Q partitions"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    pub format: OutputFormat,
    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lower bound on the perimeter of a cuboid of t vertices.
    Bound(BoundArgs),
    /// Exhaustive minimum perimeter over all vertex sets of size t.
    Oracle(OracleArgs),
    /// List the partition geometries a machine admits.
    Geometries(GeometriesArgs),
    /// Audit an allocation policy against the best geometry per size.
    Audit(AuditArgs),
    /// Best geometry per size across several machines.
    Compare(CompareArgs),
    /// Flow model of the furthest-node pairing benchmark.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct ShapeArgs {
    /// Torus dimension lengths, e.g. 16,4,4,4,2.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub dims: Vec<u32>,
    /// Set size.
    #[arg(long)]
    pub t: u64,
    /// Edges between the two vertices of a length-2 ring: 1 (simple graph)
    /// or 2 (two physical links).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub length2_multiplicity: u32,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Maximum number of subsets to examine.
    #[arg(long, default_value_t = torusiso::oracle::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Enumerate every subset instead of fixing vertex 0 in the set.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Args, Debug)]
pub struct BandwidthArgs {
    /// Report bandwidth in GB/s instead of link units.
    #[arg(long)]
    pub gbps: bool,
}

impl BandwidthArgs {
    pub fn unit(&self) -> BandwidthUnit {
        if self.gbps {
            BandwidthUnit::Gbps
        } else {
            BandwidthUnit::Links
        }
    }
}

#[derive(Args, Debug)]
pub struct SizeArgs {
    /// Partition sizes in midplanes.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "nodes")]
    pub sizes: Vec<u64>,
    /// Partition sizes in nodes (multiples of 512).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub nodes: Vec<u64>,
}

#[derive(Args, Debug)]
pub struct GeometriesArgs {
    /// Builtin machine name or machine file.
    #[arg(long, default_value = "mira")]
    pub machine: String,
    #[command(flatten)]
    pub sizes: SizeArgs,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Builtin machine name or machine file.
    #[arg(long, default_value = "mira")]
    pub machine: String,
    /// Builtin policy (`mira-2017`, `any`) or policy file.
    #[arg(long, default_value = "any")]
    pub policy: String,
    #[command(flatten)]
    pub sizes: SizeArgs,
    /// Audit every realizable size, not only those the policy lists.
    #[arg(long, conflicts_with_all = ["sizes", "nodes"])]
    pub all_sizes: bool,
    /// Compare the audit against the embedded reference tables.
    #[arg(long, alias = "check-golden")]
    pub check_paper: bool,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Builtin machine names or machine files.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "juqueen,juqueen-54,juqueen-48")]
    pub machines: Vec<String>,
    #[command(flatten)]
    pub sizes: SizeArgs,
    /// Compare against the embedded JUQUEEN-family reference table.
    #[arg(long, alias = "check-golden")]
    pub check_paper: bool,
    #[command(flatten)]
    pub bandwidth: BandwidthArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Partition geometries to simulate, e.g. 4x1x1x1,2x2x1x1.
    #[arg(long, value_delimiter = ',', num_args = 1.., required_unless_present = "size")]
    pub geometry: Vec<String>,
    /// Simulate the worst and best geometry of this many midplanes instead.
    #[arg(long, conflicts_with = "geometry")]
    pub size: Option<u64>,
    /// Machine for `--size`, and the default link rate.
    #[arg(long, default_value = "mira")]
    pub machine: String,
    #[arg(long, default_value_t = torusiso::sim::DEFAULT_ROUNDS)]
    pub rounds: u32,
    #[arg(long, default_value_t = torusiso::sim::DEFAULT_WARMUP_ROUNDS)]
    pub warmup: u32,
    /// Message size in GB.
    #[arg(long, default_value_t = torusiso::sim::DEFAULT_MESSAGE_GB)]
    pub message_gb: f64,
    /// Link rate in GB/s per direction; defaults to the machine's.
    #[arg(long)]
    pub link_gbps: Option<f64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    pub workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("torusiso: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
