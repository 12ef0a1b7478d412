use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "deflact", version, about = "Iterative regularization with subspace recycling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a test problem directory.
    #[command(allow_negative_numbers = true)]
    Gen(GenArgs),
    /// Build a recycle space for a problem.
    #[command(allow_negative_numbers = true)]
    Recycle(RecycleArgs),
    /// Run one solver and write its trace and reconstruction.
    #[command(allow_negative_numbers = true)]
    Run(RunArgs),
    /// Run a plain method and its augmented variant side by side.
    #[command(allow_negative_numbers = true)]
    Compare(CompareArgs),
    /// Solve freshly generated problems over a list of noise levels.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Describe a problem directory, recycle-space directory or grid file.
    #[command(allow_negative_numbers = true)]
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Blur,
    Dense,
    Diagonal,
    Nonlinear,
}

/// Problem family and shape; noise is given separately.
#[derive(Debug, Clone, Args)]
pub struct ProblemShape {
    #[arg(long, value_enum, default_value = "blur")]
    pub kind: Kind,
    /// Image side length (blur) or dimension (dense, nonlinear).
    #[arg(long, default_value_t = 64, value_parser = positive_usize)]
    pub size: usize,
    /// Image rows; overrides --size for blur problems.
    #[arg(long, value_parser = positive_usize)]
    pub rows: Option<usize>,
    /// Image columns; overrides --size for blur problems.
    #[arg(long, value_parser = positive_usize)]
    pub cols: Option<usize>,
    /// Gaussian PSF standard deviation in pixels.
    #[arg(long, default_value_t = 6.0, value_parser = positive_f64)]
    pub sigma: f64,
    /// `geometric`, `starfield` or the path of an RGRID image.
    #[arg(long, default_value = "geometric")]
    pub image: String,
    /// Number of stars for the starfield image.
    #[arg(long, default_value_t = 60)]
    pub stars: usize,
    /// Singular value decay ratio of the dense problem.
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub decay: f64,
    /// Diagonal entries of the diagonal problem.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sv: Vec<f64>,
    /// Exact solution of the diagonal problem.
    #[arg(long = "x-true", value_delimiter = ',', allow_hyphen_values = true)]
    pub x_true: Vec<f64>,
    /// Strength of the quadratic term of the nonlinear problem.
    #[arg(long, default_value_t = 0.1, value_parser = nonnegative_f64)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Noise norm relative to the exact data norm (default 0.01).
    #[arg(long, value_parser = nonnegative_f64, conflicts_with = "noise_abs")]
    pub noise_rel: Option<f64>,
    /// Absolute noise norm.
    #[arg(long, value_parser = nonnegative_f64)]
    pub noise_abs: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub shape: ProblemShape,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Output problem directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    /// Iterates of cheap steepest-descent solves with narrower blurs.
    PriorSolves,
    /// Dominant eigenvectors of T*T.
    Eigen,
    /// User-provided RGRID vectors.
    Files,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataSource {
    Noisy,
    Exact,
}

#[derive(Debug, Args)]
pub struct RecycleArgs {
    /// Problem directory.
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: Strategy,
    /// Blur widths for prior solves, as `a:b:n` or a comma list.
    #[arg(long, default_value = "0.5:1.5:5", value_parser = float_list)]
    pub sigmas: FloatList,
    /// Steepest-descent iterations per prior solve.
    #[arg(long, default_value_t = 2, value_parser = positive_usize)]
    pub iters: usize,
    /// Data the prior solves are run on.
    #[arg(long, value_enum, default_value = "noisy")]
    pub data: DataSource,
    /// Number of eigenvectors.
    #[arg(long, default_value_t = 37, value_parser = positive_usize)]
    pub count: usize,
    /// Subspace iterations for the eigenvector strategy.
    #[arg(long, default_value_t = 300, value_parser = positive_usize)]
    pub eigen_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// RGRID vector files for the `files` strategy.
    #[arg(long = "file")]
    pub files: Vec<PathBuf>,
    /// Output recycle-space directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeltaMode {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Threshold {
    /// Augmented runs stop at tau * kappa_U * delta.
    Kappa,
    /// Augmented runs stop at tau * delta.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Euclidean,
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    Projected,
    Raw,
}

/// Options shared by `run` and `compare`.
#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Problem directory.
    #[arg(long)]
    pub problem: PathBuf,
    /// Recycle-space directory.
    #[arg(long)]
    pub recycle: Option<PathBuf>,
    /// Discrepancy factor.
    #[arg(long, default_value_t = 1.5, value_parser = above_one)]
    pub tau: f64,
    /// Noise level; defaults to the level stored with the problem.
    #[arg(long, value_parser = nonnegative_f64)]
    pub delta: Option<f64>,
    /// Whether --delta is absolute or relative to the exact data norm.
    #[arg(long, value_enum, default_value = "absolute")]
    pub delta_mode: DeltaMode,
    /// Fixed Landweber step; defaults to 1 / ||T||^2.
    #[arg(long, value_parser = positive_f64)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Noise level seen by the stopping rule of augmented runs.
    #[arg(long, value_enum, default_value = "kappa")]
    pub threshold: Threshold,
    #[arg(long, value_enum, default_value = "euclidean")]
    pub error_metric: Metric,
    /// Seed of the operator-norm estimate.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// landweber, sd, cgne, aug-landweber, aug-sd, nl-landweber, nl-sd or
    /// nl-aug-landweber.
    #[arg(long)]
    pub method: String,
    /// Step of the nonlinear Landweber methods; defaults to 1 / ||F'(x0)||^2.
    #[arg(long, value_parser = positive_f64)]
    pub alpha: Option<f64>,
    /// Residual used for the correction term of nl-aug-landweber.
    #[arg(long, value_enum, default_value = "projected")]
    pub what: What,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Plain method to compare against its augmented variant.
    #[arg(long, default_value = "sd")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub shape: ProblemShape,
    /// Noise levels, strictly decreasing, as `a:b:n` or a comma list.
    #[arg(long, default_value = "1e-1,1e-2,1e-3,1e-4", value_parser = float_list)]
    pub deltas: FloatList,
    /// Whether the noise levels are absolute or relative to the exact data norm.
    #[arg(long, value_enum, default_value = "absolute")]
    pub delta_mode: DeltaMode,
    #[arg(long, default_value = "landweber")]
    pub method: String,
    /// Recycle-space directory for augmented methods.
    #[arg(long)]
    pub recycle: Option<PathBuf>,
    #[arg(long, default_value_t = 1.5, value_parser = above_one)]
    pub tau: f64,
    #[arg(long, value_parser = positive_f64)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value = "kappa")]
    pub threshold: Threshold,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Problem directory, recycle-space directory or RGRID file.
    pub path: PathBuf,
    /// Problem the recycle space belongs to, for bound reporting.
    #[arg(long)]
    pub problem: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

/// `a:b:n` gives `n` equally spaced values from `a` to `b` inclusive;
/// otherwise a comma-separated list.
pub fn float_list(s: &str) -> Result<FloatList, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let values = if let Some((a, rest)) = s.split_once(':') {
        let (b, n) = rest.split_once(':').ok_or("range must look like a:b:n")?;
        let (a, b) = (parse(a)?, parse(b)?);
        let n: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a count"))?;
        match n {
            0 => return Err("range needs at least one point".into()),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(FloatList(values))
}

fn number(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn nonnegative_f64(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be nonnegative, got {v}"))
    }
}

fn above_one(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 1.0 {
        Ok(v)
    } else {
        Err(format!("must exceed 1, got {v}"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1], got {v}"))
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("must be a positive integer, got `{s}`")),
    }
}
