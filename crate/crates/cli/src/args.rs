use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qwalk::oracle::{Method, OracleBox, DEFAULT_TOL, TARGET_BOUNDARY_MASS};
use qwalk::{ModelConfig, QuadConfig};

#[derive(Debug, Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Blocking probabilities of two data centers with trunk reservation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full analytic report for one threshold.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Also run the truncated-chain oracle and record the deltas.
        #[arg(long)]
        with_oracle: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Analytic blocking curves over a range of thresholds.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Truncated-chain oracle for the limiting walk.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        range: OptionalRangeArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Analytic and oracle side by side, with a pass/fail per threshold.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        range: OptionalRangeArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Largest accepted |B_analytic - B_oracle| per component.
        #[arg(long, default_value_t = 5e-3)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Busy-server chain at finite scale nu.
    Prelimit {
        #[command(flatten)]
        model: ModelArgs,
        /// Scale factors; C_i = round(nu * c_i) and arrival rates nu * lambda_i.
        #[arg(long, required = true, value_delimiter = ',')]
        nu: Vec<f64>,
        /// Solution method.
        #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
        method: MethodArg,
        /// Residual tolerance of the stationary solve.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        residual_tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Model parameters as individual flags, optionally layered over a JSON file.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// JSON file with any of: lambda1, lambda2, mu1, mu2, c1, c2, a. Flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub mu1: Option<f64>,
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Reservation threshold (default 0).
    #[arg(long)]
    pub a: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    mu1: Option<f64>,
    mu2: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    a: Option<usize>,
}

impl ModelArgs {
    pub fn resolve(&self) -> Result<ModelConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .with_context(|| format!("cannot parse config {}", path.display()))?
            }
            None => ConfigFile::default(),
        };
        let pick = |flag: Option<f64>, field: Option<f64>, name: &str| -> Result<f64> {
            match flag.or(field) {
                Some(v) => Ok(v),
                None => bail!("missing parameter `{name}` (use --{name} or the config file)"),
            }
        };
        Ok(ModelConfig {
            lambda1: pick(self.lambda1, file.lambda1, "lambda1")?,
            lambda2: pick(self.lambda2, file.lambda2, "lambda2")?,
            mu1: pick(self.mu1, file.mu1, "mu1")?,
            mu2: pick(self.mu2, file.mu2, "mu2")?,
            c1: pick(self.c1, file.c1, "c1")?,
            c2: pick(self.c2, file.c2, "c2")?,
            a: self.a.or(file.a).unwrap_or(0),
        })
    }
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    /// Nodes of every fixed quadrature grid (even, at least 16).
    #[arg(long, env = "QW_GRID_SIZE", default_value_t = QuadConfig::default().grid_size)]
    pub grid_size: usize,
}

impl QuadArgs {
    pub fn config(&self) -> QuadConfig {
        QuadConfig::default().with_grid_size(self.grid_size)
    }
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long, default_value_t = 0)]
    pub a_min: usize,
    #[arg(long, default_value_t = 30)]
    pub a_max: usize,
}

impl RangeArgs {
    pub fn thresholds(&self) -> Result<Vec<usize>> {
        if self.a_min > self.a_max {
            bail!("--a-min {} exceeds --a-max {}", self.a_min, self.a_max);
        }
        Ok((self.a_min..=self.a_max).collect())
    }
}

/// Either the single threshold of the model, or an explicit range.
#[derive(Debug, Args)]
pub struct OptionalRangeArgs {
    #[arg(long, requires = "a_max")]
    pub a_min: Option<usize>,
    #[arg(long, requires = "a_min")]
    pub a_max: Option<usize>,
}

impl OptionalRangeArgs {
    pub fn thresholds(&self, model_a: usize) -> Result<Vec<usize>> {
        match (self.a_min, self.a_max) {
            (Some(lo), Some(hi)) => RangeArgs { a_min: lo, a_max: hi }.thresholds(),
            _ => Ok(vec![model_a]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    GaussSeidel,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::GaussSeidel => Method::GaussSeidel,
        }
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Fixed box width along n1; requires --n2-max. Default: sized automatically.
    #[arg(long, requires = "n2_max")]
    pub n1_max: Option<usize>,
    /// Fixed box height along n2; requires --n1-max.
    #[arg(long, requires = "n1_max")]
    pub n2_max: Option<usize>,
    /// Rim mass the automatic box aims for.
    #[arg(long, default_value_t = TARGET_BOUNDARY_MASS)]
    pub target_mass: f64,
    /// Solution method (only with a fixed box; the automatic box is solved directly).
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    pub method: MethodArg,
    /// Residual tolerance of the stationary solve.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub residual_tol: f64,
}

impl OracleArgs {
    pub fn fixed_box(&self) -> Option<OracleBox> {
        match (self.n1_max, self.n2_max) {
            (Some(n1), Some(n2)) => Some(OracleBox::new(n1, n2)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format (default: json for `solve`, csv otherwise).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
