use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "mpgreen",
    version,
    about = "Coalescing-pole Green functions on the bidisk",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Length, multiplicity and complete-intersection checks for an ideal file
    Ideal {
        #[command(subcommand)]
        op: IdealOp,
    },
    /// Limits of point families and the convergence predictor
    Family {
        #[command(subcommand)]
        op: FamilyOp,
    },
    /// Green function envelopes, model grids and the two-point table
    Green {
        #[command(subcommand)]
        op: GreenOp,
    },
    /// Local residues and residue membership
    Residue {
        #[command(subcommand)]
        op: ResidueOp,
    },
    /// Dump one analytic disk construction as JSON
    Disk(DiskArgs),
}

#[derive(Args, Debug, Clone)]
pub struct IdealArgs {
    /// IdealSpec JSON file
    #[arg(long)]
    pub file: PathBuf,
    /// largest jet degree tried while waiting for the length to stabilize
    #[arg(long, default_value_t = multipole_green::ideal_algebra::DEFAULT_D_MAX)]
    pub d_max: u32,
    /// largest power used for the multiplicity
    #[arg(long, default_value_t = multipole_green::ideal_algebra::DEFAULT_K_MAX)]
    pub k_max: u32,
}

#[derive(Subcommand, Debug)]
pub enum IdealOp {
    Length(IdealArgs),
    Mult(IdealArgs),
    Ci(IdealArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// gen3-generic, gen3-collinear, two-point, degenerate-3pt or product-AxB
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub builtin: Option<String>,
    /// PointFamily JSON file
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// jet degree; defaults to one suited to the number of points
    #[arg(long)]
    pub degree: Option<u32>,
    /// α for gen3-collinear, as `re` or `re,im`
    #[arg(long, default_value = "0")]
    pub alpha: String,
    /// direction for two-point, as `re1,im1,re2,im2`
    #[arg(long, default_value = "1,0,0,0")]
    pub direction: String,
    /// schedule override, comma-separated and strictly decreasing
    #[arg(long)]
    pub schedule: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum FamilyOp {
    Limit(FamilyArgs),
    Predict(FamilyArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseArg {
    Generic,
    Degenerate,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelArg {
    H,
    F,
    #[value(name = "f-check", alias = "fcheck")]
    FCheck,
}

#[derive(Args, Debug, Clone)]
pub struct SampleArgs {
    /// modulus of both coordinates on the sampling torus
    #[arg(long, default_value_t = 0.5)]
    pub torus: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// worker threads; output does not depend on it
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV destination; the CSV goes to stdout and the summary to stderr without it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SandwichArgs {
    #[arg(long, value_enum, default_value_t = CaseArg::Generic)]
    pub case: CaseArg,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// fast pole distance; ε² by default in the degenerate case
    #[arg(long)]
    pub rho: Option<f64>,
    /// width of the removed collar around the exceptional region
    #[arg(long, default_value_t = 0.02)]
    pub collar: f64,
    #[command(flatten)]
    pub sampling: SampleArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long, value_enum, ignore_case = true, default_value_t = ModelArg::H)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long)]
    pub rho: Option<f64>,
    #[command(flatten)]
    pub sampling: SampleArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TwoPointArgs {
    /// distance ρ of the second pole
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub torus: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum GreenOp {
    Sandwich(SandwichArgs),
    Grid(GridArgs),
    TwoPoint(TwoPointArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidueMethodArg {
    Auto,
    Simple,
    Local,
}

#[derive(Args, Debug, Clone)]
pub struct ResidueArgs {
    /// map file: {"components": [p, q], "domain_radius": r} or [p, q]
    #[arg(long)]
    pub map: PathBuf,
    /// numerator polynomial file
    #[arg(long)]
    pub h: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ResidueMethodArg::Auto)]
    pub method: ResidueMethodArg,
    /// test degree for membership; derived from the degrees by default
    #[arg(long)]
    pub degree: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum ResidueOp {
    Eval(ResidueArgs),
    Member(ResidueArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskKind {
    Axes,
    Generic,
    Degenerate,
    Neil,
}

#[derive(Args, Debug, Clone)]
pub struct DiskArgs {
    #[arg(long, value_enum)]
    pub kind: DiskKind,
    /// point as `re1,im1,re2,im2`
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// fast pole distance; ε² by default
    #[arg(long)]
    pub rho: Option<f64>,
}
