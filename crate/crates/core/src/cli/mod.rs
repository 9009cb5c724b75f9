//! The `camm` command-line front end.
//!
//! Exit codes: [`EXIT_OK`], [`EXIT_FAILURE`] for I/O and other errors,
//! [`EXIT_USAGE`] for argument and spec-file errors, [`EXIT_INFEASIBLE`] when
//! no configuration satisfies the constraints, and [`EXIT_VERIFY`] when a
//! simulation or structure check fails.

mod commands;
pub mod csv_rows;

use crate::analytic::ProblemSize;
use crate::error::Error;
use crate::hardware::{Layout, TileConfig};
use crate::tiler::SearchBounds;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "camm",
    version,
    about = "Tiling model, design-space exploration and schedule simulation for matrix multiplication accelerators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one tile configuration.
    Analyze(AnalyzeArgs),
    /// Pick parameters with the greedy procedure.
    Optimize(OptimizeArgs),
    /// Enumerate and rank all feasible configurations.
    Sweep(SweepArgs),
    /// Memory-block utilization and intensity against memory tile size.
    SweepMemory(SweepMemoryArgs),
    /// Run the tiled schedule on concrete matrices.
    Simulate(SimulateArgs),
    /// Build and check the module graph.
    Layout(LayoutArgs),
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Hardware/data-type description (TOML).
    #[arg(long)]
    pub spec: PathBuf,
    /// Data type name defined in `--spec`.
    #[arg(long)]
    pub dtype: String,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Upper bound applied to every tile extent.
    #[arg(long)]
    pub max_extent: Option<u64>,
    #[arg(long)]
    pub max_y_c: Option<u64>,
    #[arg(long)]
    pub max_x_p: Option<u64>,
    #[arg(long)]
    pub max_y_p: Option<u64>,
    #[arg(long)]
    pub max_x_t: Option<u64>,
    #[arg(long)]
    pub max_y_t: Option<u64>,
    #[arg(long)]
    pub max_x_b: Option<u64>,
    #[arg(long)]
    pub max_y_b: Option<u64>,
    /// Fix the compute units per PE.
    #[arg(long = "y-c")]
    pub fixed_y_c: Option<u64>,
    /// Fix the number of PEs.
    #[arg(long = "pes")]
    pub fixed_pes: Option<u64>,
}

impl BoundArgs {
    pub fn to_bounds(&self, layout: Layout, frequency_hz: f64) -> SearchBounds {
        let mut b = SearchBounds::unbounded(layout, frequency_hz);
        if let Some(m) = self.max_extent {
            b = b.with_all_max(m);
        }
        let set = |slot: &mut u64, v: Option<u64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut b.max_y_c, self.max_y_c);
        set(&mut b.max_x_p, self.max_x_p);
        set(&mut b.max_y_p, self.max_y_p);
        set(&mut b.max_x_t, self.max_x_t);
        set(&mut b.max_y_t, self.max_y_t);
        set(&mut b.max_x_b, self.max_x_b);
        set(&mut b.max_y_b, self.max_y_b);
        b.fixed_y_c = self.fixed_y_c;
        b.fixed_pes = self.fixed_pes;
        b
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Tile extents `x_c,y_c,x_p,y_p,x_t,y_t,x_b,y_b`.
    #[arg(long)]
    pub config: TileConfig,
    /// Problem size `m,n,k` (or a single value for a cube).
    #[arg(long)]
    pub problem: ProblemSize,
    #[arg(long)]
    pub layout: Option<Layout>,
    /// Memory port width in bits; by default the narrowest feasible one.
    #[arg(long)]
    pub port_width: Option<u32>,
    /// Clock frequency for time and bandwidth figures.
    #[arg(long)]
    pub frequency: Option<f64>,
    /// Also report the bandwidth needed at this throughput (op/s).
    #[arg(long)]
    pub ops_per_second: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub problem: ProblemSize,
    #[arg(long)]
    pub layout: Option<Layout>,
    #[command(flatten)]
    pub bounds: BoundArgs,
    /// Print the constraint that binds at each step.
    #[arg(long)]
    pub explain: bool,
    #[arg(long)]
    pub frequency: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub problem: ProblemSize,
    #[arg(long)]
    pub layout: Option<Layout>,
    #[command(flatten)]
    pub bounds: BoundArgs,
    /// Number of ranked designs to keep.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Write the ranked designs as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepMemoryArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Compute units per PE (`x_c*y_c`).
    #[arg(long)]
    pub units_per_pe: u64,
    /// Number of PEs (`x_p*y_p`).
    #[arg(long)]
    pub pes: u64,
    #[arg(long)]
    pub port_width: Option<u32>,
    /// Smallest memory tile in elements (default: one element per unit).
    #[arg(long)]
    pub from: Option<u64>,
    /// Largest memory tile in elements (default: capacity of all usable blocks).
    #[arg(long)]
    pub to: Option<u64>,
    /// Number of evenly spaced tile sizes.
    #[arg(long, default_value_t = 32)]
    pub points: u64,
    #[arg(long)]
    pub frequency: Option<f64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Spec file; when given, `--dtype` names one of its data types.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Element type: a spec data type, or one of u8 u16 u32 u64 f16 f32 f64.
    #[arg(long)]
    pub dtype: String,
    /// Tile extents `x_c,y_c,x_p,y_p,x_t,y_t,x_b,y_b`.
    #[arg(long, conflicts_with = "tile")]
    pub config: Option<TileConfig>,
    /// Memory tile `x,y` computed by a single unit.
    #[arg(long)]
    pub tile: Option<String>,
    #[arg(long)]
    pub problem: ProblemSize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix file for A (requires --b).
    #[arg(long, requires = "b")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    /// Write the result matrix C.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Zero-pad partial edge tiles.
    #[arg(long, conflicts_with = "strict")]
    pub pad: bool,
    /// Require tiles to divide the matrix (default).
    #[arg(long)]
    pub strict: bool,
    /// Simulate the 1D PE chain instead of the loop nest.
    #[arg(long)]
    pub chain: bool,
    /// Write every off-chip access as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Comma-separated cube sizes: report drain efficiency for each instead
    /// of running one simulation.
    #[arg(long)]
    pub efficiency_sweep: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub config: TileConfig,
    #[arg(long)]
    pub layout: Option<Layout>,
    /// Omit the transpose stage after Read A.
    #[arg(long)]
    pub no_transpose: bool,
    /// Elements per Read A vector (transpose FIFO count); default y_c.
    #[arg(long)]
    pub a_vector_width: Option<u64>,
    /// Write the graph text to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_)
            | Error::UnsupportedType { .. }
            | Error::InsufficientMemoryBlocks { .. }
            | Error::ChainDepth { .. }
            | Error::NotChainLayout { .. }
            | Error::TileExceedsMatrix { .. }
            | Error::NonDivisible { .. }
            | Error::QueueTooShallow { .. } => EXIT_INFEASIBLE,
            Error::MatrixFile(_) => EXIT_FAILURE,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_FAILURE, e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::new(EXIT_FAILURE, format!("csv: {e}"))
    }
}

pub type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(a, out),
        Command::Optimize(a) => commands::optimize(a, out),
        Command::Sweep(a) => commands::sweep(a, out),
        Command::SweepMemory(a) => commands::sweep_memory(a, out),
        Command::Simulate(a) => commands::simulate(a, out),
        Command::Layout(a) => commands::layout(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
