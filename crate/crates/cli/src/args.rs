use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "toric", version, about = "Extremal metrics on toric surfaces: polygons, potentials and checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Lattice nodes per side.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Tolerance for the command's check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized families.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for artifacts; results go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weighted polygons: weights, balance and surgery.
    #[command(subcommand)]
    Polygon(PolygonCmd),
    /// Curvature and energy of the canonical potential.
    #[command(subcommand)]
    Field(FieldCmd),
    /// Positivity of the linear functional.
    #[command(subcommand)]
    Stability(StabilityCmd),
    /// Metric geometry of a potential.
    #[command(subcommand)]
    Geom(GeomCmd),
    /// Newton solve described by a manifest.
    Solve {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Identity and inequality checks on built-in fixtures.
    Verify {
        #[arg(value_enum)]
        check: Check,
    },
    /// Plot data.
    #[command(subcommand)]
    Plot(PlotCmd),
}

#[derive(Subcommand, Debug)]
pub enum PolygonCmd {
    /// Canonical weights with A = 1.
    Canon { file: PathBuf },
    /// Balance residual of the weights against A (the file's A, else the
    /// unique balancing affine function).
    Balance { file: PathBuf },
    /// The invariant μ.
    Mu { file: PathBuf },
    /// Cut the corner at a vertex.
    Cut {
        file: PathBuf,
        #[arg(long)]
        vertex: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Rescale two edge weights so the balancing A is constant.
    Rebalance {
        file: PathBuf,
        #[arg(long)]
        first: usize,
        #[arg(long)]
        second: usize,
    },
    /// Dilate by a factor.
    Rescale {
        file: PathBuf,
        #[arg(long)]
        factor: f64,
    },
    /// Balanced path between two weighted polygons.
    Path {
        from: PathBuf,
        to: PathBuf,
        #[arg(long, default_value_t = 6)]
        samples: usize,
    },
}

/// A polygon file, or `quarter[:EXTENT]` / `half[:EXTENT]` for the model
/// potentials on truncated quadrant and half-plane.
pub type PotentialArg = String;

#[derive(Subcommand, Debug)]
pub enum FieldCmd {
    /// Scalar curvature at lattice nodes.
    Abreu { input: PotentialArg },
    /// Curvature tensor summary; CSV of node data with `--out`.
    Curvature { input: PotentialArg },
    /// The energy functional of the canonical potential.
    Energy { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum StabilityCmd {
    /// Minimum of L over a random family of convex PL functions.
    Probe {
        file: PathBuf,
        #[arg(long, default_value_t = 500)]
        n: usize,
    },
    /// Estimate of the stability constant at a base point.
    Lambda {
        file: PathBuf,
        #[arg(long, default_value_t = 500)]
        n: usize,
        /// Base point `x,y`; the centroid when absent.
        #[arg(long)]
        base: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GeomCmd {
    /// Largest V(p, q) over lattice pairs.
    Mcond {
        input: PotentialArg,
        /// Bound to test against.
        #[arg(long)]
        m: Option<f64>,
        /// Only row and column pairs.
        #[arg(long)]
        axis_only: bool,
        /// Sampling box `x0,y0,x1,y1`.
        #[arg(long = "box")]
        sample_box: Option<String>,
    },
    /// Riemannian distance from a point, an edge or the whole boundary.
    Geodist {
        input: PotentialArg,
        #[arg(long, conflicts_with_all = ["edge", "boundary"])]
        from: Option<String>,
        #[arg(long, conflicts_with = "boundary")]
        edge: Option<usize>,
        #[arg(long)]
        boundary: bool,
        /// Evaluation point `x,y`; repeatable.
        #[arg(long, required = true)]
        at: Vec<String>,
    },
    /// Curvature inequality suite.
    Bounds {
        input: PotentialArg,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
    },
    /// Volume of sublevel sets against distance on the quarter plane.
    Volume {
        input: PotentialArg,
        /// Comma-separated levels.
        #[arg(long, default_value = "1,2,3,4,5,6,7,8")]
        tau: String,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    All,
    Lemma14,
    Lemma17,
    Lemma18,
    Flux,
    Harmonic,
    Detbounds,
    Thm2,
}

#[derive(Subcommand, Debug)]
pub enum PlotCmd {
    /// Polygon outline, optionally over a heat map of a node quantity.
    PolygonSvg {
        file: PathBuf,
        #[arg(long, value_enum)]
        heat: Option<Heat>,
    },
    /// Node data of the canonical potential as CSV.
    FieldCsv { input: PotentialArg },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum Heat {
    Abreu,
    Det,
    AbsF,
}
