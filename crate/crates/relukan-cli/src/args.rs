use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "relukan",
    about = "ReLU-KAN training engine and benchmark harness",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one fitting-suite target and write loss curves, a summary and
    /// visualization data.
    Fit(FitArgs),
    /// Time training across the speed-suite targets and report
    /// per-iteration statistics and model-vs-model ratios.
    Bench(BenchArgs),
    /// Run the five-phase continual-learning protocol and write the
    /// phase-by-region RMSE matrix.
    Forget(ForgetArgs),
    /// Verify every analytic gradient against central finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Fitting-suite target id (f1..f6).
    #[arg(long)]
    pub function: String,
    /// relukan1, relukan2 or bspline; all three when omitted.
    #[arg(long)]
    pub model: Option<String>,
    /// Layer widths as a comma list, e.g. 2,5,1; defaults per function.
    #[arg(long)]
    pub widths: Option<String>,
    /// Grid count G; defaults per function.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Span parameter k; defaults per function.
    #[arg(long)]
    pub span: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Comma list of training seeds.
    #[arg(long, default_value = "1,2,3,4,5")]
    pub seeds: String,
    /// Basis normalization: constant or dynamic.
    #[arg(long, default_value = "constant")]
    pub norm_mode: String,
    /// Multiplier on the variance-scaled weight initialization.
    #[arg(long, default_value_t = relukan::DEFAULT_INIT_SCALE)]
    pub init_scale: f64,
    /// Output directory; all files land here.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Speed-suite target id (f1..f5); the whole suite when omitted.
    #[arg(long)]
    pub function: Option<String>,
    /// relukan1, relukan2 or bspline; all three when omitted.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value = "1")]
    pub seeds: String,
    #[arg(long, default_value = "constant")]
    pub norm_mode: String,
    #[arg(long, default_value_t = relukan::DEFAULT_INIT_SCALE)]
    pub init_scale: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ForgetArgs {
    /// relukan1, relukan2 or bspline.
    #[arg(long, default_value = "relukan2")]
    pub model: String,
    /// Layer widths; must start and end at 1.
    #[arg(long, default_value = "1,1")]
    pub widths: String,
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub span: usize,
    /// Training iterations per phase.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Training samples per phase.
    #[arg(long, default_value_t = 300)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Seed (first entry is used; the protocol is a single run).
    #[arg(long, default_value = "1")]
    pub seeds: String,
    #[arg(long, default_value = "constant")]
    pub norm_mode: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// Seed for probe generation (first entry is used).
    #[arg(long, default_value = "1")]
    pub seeds: String,
    /// Test hook: negate the S-endpoint gradients; the check must then fail.
    #[arg(long, hide = true, default_value_t = false)]
    pub flip_s_grad: bool,
}
