use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::parse::{parse_count, parse_real, parse_seed, Seed};

/// Audit maps ℝⁿ → ℝᵐ for large fibers, and encode points with a bounded-fiber grid codec.
///
/// Every run is seeded (fixed default seed) and writes a deterministic JSON report.
/// Exit status: 0 success, 1 input or validation error, 2 search did not converge.
/// FIBERAUDIT_THREADS sets the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "fiberaudit", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Antipodal pair with equal images on the m-sphere of radius M about the origin.
    Witness(WitnessArgs),
    /// Antipodal pair at distance 1 on the sphere inscribed in the unit cube.
    CubeWitness(CubeWitnessArgs),
    /// Sample a δ-approximate fiber and bound its diameter.
    Fiber(FiberArgs),
    /// Level-crossing witness for three points pairwise at least M apart.
    Lemma(LemmaArgs),
    /// Check that small-fiber points lie within M of two anchors.
    ProbeUnion(ProbeUnionArgs),
    /// Look for values on both sides of f(b) outside the ball B(b, M).
    Boundedness(BoundednessArgs),
    /// Closed-form fiber geometry of the two-point map.
    Urysohn(UrysohnArgs),
    /// Encode points from a CSV file as prime codes (JSON lines).
    Quantize(QuantizeArgs),
    /// Decode prime codes (JSON lines) to cell centers (CSV).
    Dequantize(DequantizeArgs),
    /// Point sets for plotting fibers.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed (integer or `random`).
    #[arg(long, default_value = "default", value_parser = parse_seed)]
    pub seed: Seed,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add wall-clock time to the report (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Defect tolerance [default: 1e-9·(1 + ‖f(center)‖)].
    #[arg(long, value_parser = parse_real)]
    pub tol: Option<f64>,
    /// Number of multistart starts [default: 8·(m+1)].
    #[arg(long, value_parser = parse_count)]
    pub starts: Option<u64>,
    /// Map evaluations per start.
    #[arg(long, default_value = "1000", value_parser = parse_count)]
    pub budget: u64,
    /// CSV file of vectors spanning the carrier subspace [default: first m+1 axes].
    #[arg(long)]
    pub carrier: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WitnessArgs {
    /// Map descriptor (JSON).
    #[arg(long)]
    pub map: PathBuf,
    /// Sphere radius M; the witness pair is 2M apart.
    #[arg(long = "M", value_parser = parse_real)]
    pub radius: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CubeWitnessArgs {
    /// Map descriptor (JSON), evaluated on [0,1]ⁿ.
    #[arg(long)]
    pub map: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    /// Sampling box `lo:hi,lo:hi,...` (a single `lo:hi` applies to every axis).
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: String,
    /// Number of seed points.
    #[arg(long = "n", default_value = "256", value_parser = parse_count)]
    pub samples: u64,
    /// Refinement iterations per seed point.
    #[arg(long, default_value = "50", value_parser = parse_count)]
    pub refine_steps: u64,
}

#[derive(Debug, Clone, Args)]
pub struct FiberArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Level y as comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    pub level: String,
    /// Image-space tolerance δ.
    #[arg(long, default_value = "1e-6", value_parser = parse_real)]
    pub delta: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Smallness threshold M; adds a verdict to the report.
    #[arg(long = "M", value_parser = parse_real)]
    pub threshold: Option<f64>,
    /// Output format [default: csv if --out ends in .csv, json otherwise].
    #[arg(long, value_parser = ["json", "csv"])]
    pub format: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct LemmaArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// CSV file with three points, one per row.
    #[arg(long)]
    pub points: PathBuf,
    /// Separation threshold M.
    #[arg(long = "M", value_parser = parse_real)]
    pub threshold: f64,
    /// Level tolerance |f(x) − f(b)|.
    #[arg(long, default_value = "1e-9", value_parser = parse_real)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeUnionArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// CSV file of candidate points, one per row.
    #[arg(long)]
    pub candidates: PathBuf,
    /// Smallness threshold M.
    #[arg(long = "M", value_parser = parse_real)]
    pub threshold: f64,
    /// Level tolerance for the witness reported with a violation.
    #[arg(long, default_value = "1e-9", value_parser = parse_real)]
    pub tol: f64,
    /// Verify each candidate by sampling its fiber in this box (`lo:hi,...`);
    /// candidates whose sample is not small are dropped.
    #[arg(long, allow_hyphen_values = true)]
    pub verify_box: Option<String>,
    /// Image-space tolerance δ for verification.
    #[arg(long, default_value = "1e-6", value_parser = parse_real)]
    pub delta: f64,
    /// Seed points per verified fiber.
    #[arg(long = "n", default_value = "64", value_parser = parse_count)]
    pub samples: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct BoundednessArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// The point b, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    /// Ball radius M.
    #[arg(long = "M", value_parser = parse_real)]
    pub threshold: f64,
    /// Search box `lo:hi,...`.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: String,
    /// Grid points.
    #[arg(long = "n", default_value = "4096", value_parser = parse_count)]
    pub samples: u64,
    /// Level tolerance.
    #[arg(long, default_value = "1e-9", value_parser = parse_real)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("query").required(true).args(["level", "threshold"])))]
pub struct UrysohnArgs {
    /// The point a, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    /// The point b, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    /// Fiber at level t ∈ [0, 1].
    #[arg(long = "t", value_parser = parse_real)]
    pub level: Option<f64>,
    /// Small-level intervals and region separation for threshold M.
    #[arg(long = "M", value_parser = parse_real)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct QuantizeArgs {
    /// Codec configuration (JSON).
    #[arg(long)]
    pub map_config: PathBuf,
    /// CSV file of points.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output JSON-lines file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add the exact rational value of each slot.
    #[arg(long)]
    pub rational: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DequantizeArgs {
    #[arg(long)]
    pub map_config: PathBuf,
    /// JSON-lines file of codes.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output CSV file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(subcommand)]
    pub kind: FigureKind,
}

#[derive(Debug, Clone, Subcommand)]
pub enum FigureKind {
    /// Fiber circles of the two-point map at evenly spaced levels.
    UrysohnFigure(UrysohnFigureArgs),
    /// Fiber circles of the axis-tube map along the x₁ axis.
    AxisTubeFigure(AxisTubeFigureArgs),
    /// Point sets from a saved `urysohn` or `fiber` report.
    FromReport(FromReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct UrysohnFigureArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    /// Number of levels, placed at i/(k+1).
    #[arg(long, default_value = "9", value_parser = parse_count)]
    pub levels: u64,
    /// Plot box `lo:hi,lo:hi` for clipping the bisector [default: 2·d(a,b) around the midpoint].
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Directory for the CSV files.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AxisTubeFigureArgs {
    /// Domain dimension n ≥ 3.
    #[arg(long = "n", default_value = "3", value_parser = parse_count)]
    pub dim: u64,
    /// Positions along the x₁ axis, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x1: String,
    /// Circle radii, comma-separated (one value applies to every position).
    #[arg(long)]
    pub r: String,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FromReportArgs {
    /// A report written by `urysohn` or `fiber`.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}
