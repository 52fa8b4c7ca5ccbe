use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

const TEST_ABOUT: &str = "\
Test complete spatial randomness of the target points X against segregation \
or association with the reference points Y, using the domination number of \
the proportional-edge proximity catch digraph on the Delaunay triangulation of Y.

Recommended expansion parameters: r ≈ 1.30 against segregation and r ≈ 1.35 \
against association (these are the defaults when --r is omitted). Values of r \
in (1.45, 1.50) are not recommended; the result carries a warning there.

The default center is M_C at r = 3/2 and the vertex t1(r) of the inner \
triangle for r < 3/2, the choices for which the null distribution is \
nondegenerate.

Exit codes: 0 ran (whether or not H0 is rejected), 2 usage or validation \
error, 3 data error, 4 numerical failure.";

#[derive(Debug, Parser)]
#[command(name = "pcd", version, about = "Domination-number tests for segregation and association of spatial point patterns")]
pub struct Cli {
    /// Worker threads for parallel sections (default: available cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(about = "Run a segregation or association test", long_about = TEST_ABOUT)]
    Test(TestArgs),
    /// Monte Carlo experiments: γ frequencies, size and power, hull
    /// exclusion rates, Ḡ histograms.
    Simulate(SimulateArgs),
    /// Tabulate the null probability p_r over a grid of r.
    PrCurve(PrCurveArgs),
    /// Draw target points from CSR, segregation or association patterns.
    Generate(GenerateArgs),
    /// Export the Delaunay triangulation of a point file as JSON.
    Triangulate(TriangulateArgs),
    /// Print the reference for every subcommand and flag.
    Docs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlternativeArg {
    Segregation,
    Association,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Normal,
    Binomial,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternArg {
    #[default]
    Csr,
    Segregation,
    Association,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    /// Bundled ten-point layout with thirteen Delaunay triangles.
    Frozen,
    /// The standard equilateral triangle.
    Equilateral,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// JSON file with any of the fields below; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Target points (CSV x,y).
    #[arg(long, value_name = "FILE")]
    pub x: Option<PathBuf>,
    /// Reference points (CSV x,y).
    #[arg(long, value_name = "FILE")]
    pub y: Option<PathBuf>,
    /// Expansion parameter r ≥ 1, or "inf".
    #[arg(long)]
    pub r: Option<String>,
    /// Center: mc, t1, t2, t3 or bary:b1,b2,b3.
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub alternative: Option<AlternativeArg>,
    #[arg(long, value_enum)]
    pub statistic: Option<StatisticArg>,
    /// Correct for target points outside the convex hull of Y.
    #[arg(long)]
    pub hull_correction: bool,
    /// Small-sample adjustment of the normal statistic (r = 1.35 or 1.5,
    /// |Y| = 10, 20, .., 50).
    #[arg(long)]
    pub small_sample: bool,
    /// Relative tolerance for p_r quadrature.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Output file (default: stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment description (JSON).
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo replicates per cell.
    #[arg(long)]
    pub n_mc: Option<usize>,
    #[arg(long, value_enum)]
    pub pattern: Option<PatternArg>,
    #[arg(long, conflicts_with = "delta")]
    pub epsilon: Option<f64>,
    /// Alternative given by the removed (segregation) or remaining
    /// (association) area fraction instead of epsilon.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub center: Option<String>,
}

#[derive(Debug, Args)]
pub struct PrCurveArgs {
    #[arg(long, default_value_t = 1.05)]
    pub from: f64,
    #[arg(long, default_value_t = 1.5)]
    pub to: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Output file (default: stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = PatternArg::Csr)]
    pub pattern: PatternArg,
    #[arg(long, conflicts_with = "delta")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n: usize,
    /// Reference points (CSV x,y).
    #[arg(long, value_name = "FILE", conflicts_with = "layout")]
    pub y: Option<PathBuf>,
    /// Built-in reference layout.
    #[arg(long, value_enum)]
    pub layout: Option<LayoutArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (default: stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TriangulateArgs {
    /// Reference points (CSV x,y).
    #[arg(long, value_name = "FILE")]
    pub y: PathBuf,
    /// Output file (default: stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
