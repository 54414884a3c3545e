use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "lrpoly",
    version,
    about = "Low-rank approximation and variable concentration of homogeneous polynomials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Polynomial JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Inline polynomial JSON.
    #[arg(long, global = true, value_name = "JSON")]
    pub poly: Option<String>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, default_value_t = 32)]
    pub restarts: usize,

    #[arg(long, global = true, default_value_t = 500)]
    pub max_iters: usize,

    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Use the exact small-instance oracles (d = 2 eigen, n ≤ 3 grid) and
    /// fail if the instance is out of their range.
    #[arg(long, global = true)]
    pub oracle: bool,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Bombieri norm and largest absolute coefficient.
    Norm,
    /// Operator norm (max of |p| on the unit sphere).
    Opnorm,
    /// Subspace norm: sup of ‖p_V‖ over dim V ≤ k.
    Subnorm {
        #[arg(long)]
        k: usize,
    },
    /// Greedy rank-1 deflation to relative operator-norm accuracy eps.
    Approx {
        #[arg(long)]
        eps: f64,
    },
    /// Rotate a greedy approximation onto the leading variables and measure
    /// the concentration defect.
    Concentrate {
        #[arg(long)]
        eps: f64,
        /// Accuracy for the inner greedy step (default eps / d!).
        #[arg(long)]
        eps_inner: Option<f64>,
    },
    /// Recompute and check every link of a concentration report.
    ChainCheck {
        /// Output of `concentrate` (or a bare report).
        #[arg(long, value_name = "PATH")]
        report: PathBuf,
    },
    /// Random polynomial.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
        /// bombieri-gaussian | sparse(t) | hard-family | planted-lowrank(r)
        #[arg(long, default_value = "bombieri-gaussian")]
        model: String,
        /// Relative noise for planted-lowrank.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Sweep greedy term counts and defect ratios over eps × d × n.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.8")]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        d: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "4,6")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value = "bombieri-gaussian")]
        model: String,
        /// Skip the concentration pipeline (term counts only).
        #[arg(long)]
        no_defect: bool,
    },
    /// Largest observed ‖p‖₍ₖ₎ / ‖p‖ₒ over random samples.
    RatioProbe {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}
