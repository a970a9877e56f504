use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Causal integral averages: smoothing, level-crossing analysis and axiom
/// checks.
#[derive(Debug, Parser)]
#[command(name = "causavg", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smooth a sampled signal and write `t,g`.
    Smooth(SmoothArgs),
    /// Count intervals above or below thresholds.
    Crossings(CrossingsArgs),
    /// Check constant invariance, monotonicity and variation diminution.
    Axioms(AxiomsArgs),
    /// Search for a variation-diminution counterexample.
    Falsify(FalsifyArgs),
    /// Axiom table for a set of kernels.
    Matrix(MatrixArgs),
    /// Kernel transform and its reciprocal on a frequency grid.
    Transform(TransformArgs),
    /// Inverse transform of the symmetrized exponential kernel.
    Reconstruct(ReconstructArgs),
    /// Generate test signals.
    Gen(GenArgs),
}

/// Parsed `--kernel` value.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Exponential(f64),
    Box(f64),
    Gamma(u32, f64),
    File(PathBuf),
}

fn positive(text: &str, what: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("{what} `{text}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{what} must be positive and finite, got {text}"))
    }
}

impl FromStr for KernelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (family, params) = s
            .split_once(':')
            .ok_or_else(|| format!("kernel spec `{s}` must look like exp:<rate>, box:<width>, gamma:<n>,<rate> or file:<path>"))?;
        match family {
            "exp" => Ok(KernelSpec::Exponential(positive(params, "rate")?)),
            "box" => Ok(KernelSpec::Box(positive(params, "width")?)),
            "gamma" => {
                let (n, rate) = params
                    .split_once(',')
                    .ok_or_else(|| format!("gamma spec `{s}` must be gamma:<n>,<rate>"))?;
                let n: u32 = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("gamma shape `{n}` must be a positive integer"))?;
                if n == 0 {
                    return Err("gamma shape must be at least 1".into());
                }
                Ok(KernelSpec::Gamma(n, positive(rate, "rate")?))
            }
            "file" if !params.is_empty() => Ok(KernelSpec::File(PathBuf::from(params))),
            "file" => Err("file kernel spec needs a path".into()),
            other => Err(format!("unknown kernel family `{other}` (expected exp, box, gamma or file)")),
        }
    }
}

/// Value assumed before the first sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum History {
    /// Hold the first sample.
    Hold,
    /// Zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelationArg {
    Above,
    Below,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    #[arg(long)]
    pub kernel: KernelSpec,
    /// CSV with header `t,value` on a uniform grid.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Use the O(1) streaming recursion (exponential kernels only).
    #[arg(long)]
    pub stream: bool,
    #[arg(long, value_enum, default_value_t = History::Hold)]
    pub history: History,
    /// Quadrature horizon for file kernels; defaults to the kernel support.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CrossingsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Count on the smoothed signal instead of the input.
    #[arg(long, requires = "kernel")]
    pub smoothed: bool,
    #[arg(long)]
    pub kernel: Option<KernelSpec>,
    #[arg(long = "threshold", required = true, allow_negative_numbers = true)]
    pub thresholds: Vec<f64>,
    #[arg(long, value_enum, default_value_t = RelationArg::Above)]
    pub relation: RelationArg,
    #[arg(long, value_enum, default_value_t = History::Hold)]
    pub history: History,
    /// JSON destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    #[arg(long)]
    pub kernel: KernelSpec,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub max_pieces: usize,
    /// Random levels per trial on top of the midpoint schedule.
    #[arg(long, default_value_t = 4)]
    pub thresholds_per_trial: usize,
    /// Tolerance for constant invariance; the path-specific default otherwise.
    #[arg(long)]
    pub p1_tol: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FalsifyArgs {
    #[arg(long)]
    pub kernel: KernelSpec,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Kernels to tabulate; the default set when absent.
    #[arg(long = "kernel")]
    pub kernels: Vec<KernelSpec>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 500)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the full rows as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub kernel: KernelSpec,
    #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub ds: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub zero_tol: f64,
    /// Discretize the kernel at this step and use the quadrature transform.
    #[arg(long)]
    pub sample_dt: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub delta: f64,
    #[arg(long = "C", alias = "c")]
    pub c: f64,
    #[arg(long, default_value_t = 5.0)]
    pub xmax: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dx: f64,
    /// Frequency cutoff; `2000/δ` when absent.
    #[arg(long)]
    pub s_cutoff: Option<f64>,
    /// Frequency step; `0.01/δ` when absent.
    #[arg(long)]
    pub ds: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    /// Output sample step.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Random steps.
    Steps {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        pieces: usize,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        value_min: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        value_max: f64,
        #[arg(long, default_value_t = 0.1)]
        duration_min: f64,
        #[arg(long, default_value_t = 3.0)]
        duration_max: f64,
    },
    /// Rectangular pulses on a constant base.
    Pulses {
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        height: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        base: f64,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 2.0)]
        period: f64,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// A rating history with bounded jumps after each game.
    Rating {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        games: usize,
        #[arg(long, default_value_t = 1500.0, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, default_value_t = 16.0)]
        step_scale: f64,
    },
}
