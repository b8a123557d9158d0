//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iscat_core::evolve::Equation;
use iscat_core::Mode;

#[derive(Parser, Debug)]
#[command(name = "iscat", version, about = "Scattering transforms, conserved energies and split-step flows")]
pub struct Cli {
    /// Worker threads for parallel sweeps; `ISCAT_THREADS` overrides.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transmission coefficients `T⁻¹(z)`, or `scatter poles` for bound states.
    Scatter(ScatterArgs),
    /// Renormalized energy `E_s` or momentum `P_s`.
    Energy(EnergyArgs),
    /// Split-step evolution with a drift table.
    Evolve(EvolveArgs),
    /// Exact shuffle-algebra expansions.
    Hopf {
        #[command(subcommand)]
        action: HopfAction,
    },
    /// Hamiltonian densities of the hierarchy.
    Hierarchy {
        #[command(subcommand)]
        action: HierarchyAction,
    },
    /// Writes a sampled potential.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Focusing,
    Defocusing,
    Kdv,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Focusing => Mode::Focusing,
            ModeArg::Defocusing => Mode::Defocusing,
            ModeArg::Kdv => Mode::Kdv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EquationArg {
    NlsFocusing,
    NlsDefocusing,
    MkdvFocusing,
    MkdvDefocusing,
    Kdv,
}

impl From<EquationArg> for Equation {
    fn from(e: EquationArg) -> Self {
        match e {
            EquationArg::NlsFocusing => Equation::NlsFocusing,
            EquationArg::NlsDefocusing => Equation::NlsDefocusing,
            EquationArg::MkdvFocusing => Equation::MkdvFocusing,
            EquationArg::MkdvDefocusing => Equation::MkdvDefocusing,
            EquationArg::Kdv => Equation::Kdv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
pub struct ScatterArgs {
    #[command(subcommand)]
    pub action: Option<ScatterAction>,

    /// Potential as GridFunction JSON (or CSV with `.csv` extension).
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "defocusing")]
    pub mode: ModeArg,

    /// Spectral parameter, e.g. `0.0+1.0i`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,

    /// Real sweep `re0:re1:n` at fixed `--im`.
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,

    /// Imaginary part for `--sweep`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub im: f64,

    /// Step-halving tolerance of the ODE solver.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum ScatterAction {
    /// Zeros of `T⁻¹` in a rectangle of the upper half-plane.
    Poles(PolesArgs),
}

#[derive(Args, Debug)]
pub struct PolesArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value = "focusing")]
    pub mode: ModeArg,

    /// `re_min,re_max,im_min,im_max`.
    #[arg(long, default_value = "-4,4,0.05,4", allow_hyphen_values = true)]
    pub rect: String,
}

#[derive(Args, Debug)]
pub struct EnergyArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Order `s`.
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,

    #[arg(long, value_enum, default_value = "defocusing")]
    pub mode: ModeArg,

    /// Number of subtracted expansion terms (default: smallest admissible).
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i64>,

    /// Evaluate the momentum `P_s` instead of `E_s`.
    #[arg(long)]
    pub momentum: bool,

    /// Also evaluate the real-line side of the trace formula.
    #[arg(long)]
    pub trace_check: bool,

    /// Rectangle for the pole search of `--trace-check` (focusing and KdV).
    #[arg(long, default_value = "-4,4,0.05,4", allow_hyphen_values = true)]
    pub rect: String,

    /// Also evaluate the explicit quartic (NLS) or cubic (KdV) kernel.
    #[arg(long)]
    pub quartic: bool,

    /// Relative quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Ray truncation point.
    #[arg(long)]
    pub tau_max: Option<f64>,

    /// Skip the quadratic-part subtraction.
    #[arg(long)]
    pub no_subtraction: bool,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, value_enum)]
    pub eq: EquationArg,

    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,

    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,

    /// Comma-separated quantities such as `H0,H2,E0.25,P0.5`.
    #[arg(long, default_value = "H0")]
    pub check: String,

    /// Drift CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Snapshot stride in steps.
    #[arg(long)]
    pub snapshot_every: Option<usize>,

    /// `sup|u|` that aborts the run.
    #[arg(long, default_value_t = 1e3)]
    pub blowup_bound: f64,

    /// Writes the final state as GridFunction JSON.
    #[arg(long)]
    pub final_state: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum HopfAction {
    /// `−ln T` as a combination of connected words.
    #[command(name = "expand-logT", alias = "expand-logt")]
    ExpandLogT {
        #[arg(long, default_value_t = 4)]
        max_degree: usize,

        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Subcommand, Debug)]
pub enum HierarchyAction {
    /// Calibrated density of `H_k`.
    Print {
        #[arg(long)]
        k: usize,

        #[arg(long, value_enum, default_value = "defocusing")]
        mode: ModeArg,

        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Gaussian,
    Sech,
    Sech2,
    Modulated,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,

    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub amplitude: f64,

    /// Length scale `w` in `f((x − c)/w)`.
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,

    /// Centre `c`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center: f64,

    /// Carrier wavenumber for `modulated`.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub carrier: f64,

    /// Domain length.
    #[arg(long = "length", short = 'L', default_value_t = 64.0)]
    pub length: f64,

    /// Number of grid points.
    #[arg(long = "points", short = 'N', default_value_t = 1024)]
    pub points: usize,

    #[arg(long, value_enum, default_value = "json")]
    pub format: GridFormat,

    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
