//! Run configuration: a JSON document, optionally overridden by flags.
//!
//! ```json
//! {
//!   "command": "fit",
//!   "input": {"csv": {"path": "data.csv", "has_header": true, "target": "y"}},
//!   "estimator": {"kind": "lasso", "lambda": 0.1},
//!   "seed": 7,
//!   "output": {"path": "fit.json", "format": "json"}
//! }
//! ```
//!
//! See the README for every section.

use std::path::PathBuf;

use penreg::estimators::{CdInit, CdOptions, EstimatorSpec};
use penreg::simulate::{
    gaussian_design, orthonormal_design, rank_deficient_design, DgpSpec, Design, ErrorDist,
};
use penreg::Matrix;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Fit,
    Path,
    Risk,
    Bounds,
    Mc,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Path => "path",
            Command::Risk => "risk",
            Command::Bounds => "bounds",
            Command::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub input: Option<Input>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub path: PathConfig,
    #[serde(default)]
    pub cd: CdConfig,
    #[serde(default)]
    pub risk: RiskConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub mc: McSection,
    /// Fit with centering and an intercept (default) or on the raw data.
    #[serde(default = "yes")]
    pub intercept: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn yes() -> bool {
    true
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            input: None,
            estimator: EstimatorConfig::default(),
            path: PathConfig::default(),
            cd: CdConfig::default(),
            risk: RiskConfig::default(),
            bounds: BoundsConfig::default(),
            mc: McSection::default(),
            intercept: true,
            seed: 0,
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Input {
    Csv(CsvInput),
    Dgp(DgpConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvInput {
    pub path: PathBuf,
    #[serde(default = "yes")]
    pub has_header: bool,
    /// Header name, or 1-based column number. Defaults to the first column.
    pub target: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpConfig {
    pub n: usize,
    pub design: DesignConfig,
    pub theta0: Vec<f64>,
    pub error: ErrorConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignConfig {
    /// Explicit rows.
    Fixed { rows: Vec<Vec<f64>> },
    /// Fixed design with i.i.d. standard normal entries.
    Gaussian { p: usize, seed: Option<u64> },
    /// Fixed design with `X'X / n = I`.
    Orthonormal { p: usize, seed: Option<u64> },
    /// Fixed Gaussian-product design of the given rank.
    RankDeficient { p: usize, rank: usize, seed: Option<u64> },
    RandomGaussian { mean: Vec<f64>, covariance: Vec<Vec<f64>> },
    RandomCollinear { base_covariance: Vec<Vec<f64>>, loadings: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorConfig {
    Gaussian(f64),
    SymmetricBernoulli(f64),
    Uniform(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKindArg {
    Ls,
    #[default]
    Ridgeless,
    Ridge,
    Lasso,
    L0,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default)]
    pub kind: EstimatorKindArg,
    pub lambda: Option<f64>,
    /// Support size for the best-subset oracle.
    pub radius: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub n_lambda: Option<usize>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitConfig {
    Zeros,
    /// Ridge start with this penalty; 0 starts from the ridgeless fit.
    Ridge(f64),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdConfig {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub init: Option<InitConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskConfig {
    /// True coefficients; taken from the DGP when the input is one.
    pub theta0: Option<Vec<f64>>,
    /// Error standard deviation; taken from the DGP when the input is one.
    pub sigma: Option<f64>,
    /// Ridge penalties to tabulate.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// Grid scanned for a ridge penalty that beats ridgeless.
    pub lambda_star_grid: Option<GridConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundModeConfig {
    #[default]
    Deterministic,
    Subgaussian,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaConfig {
    Exact(f64),
    Sampled { samples: usize, refine_steps: usize },
}

impl Default for KappaConfig {
    fn default() -> Self {
        KappaConfig::Sampled { samples: 256, refine_steps: 20 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default)]
    pub mode: BoundModeConfig,
    pub delta: Option<f64>,
    #[serde(default)]
    pub kappa: KappaConfig,
    pub theta0: Option<Vec<f64>>,
    /// Variance proxy; taken from the DGP when the input is one.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McTask {
    #[default]
    Risk,
    Coverage,
    LossProbe,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default)]
    pub task: McTask,
    pub replications: Option<usize>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub probes: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

pub const DEFAULT_DELTA: f64 = 0.3;
pub const DEFAULT_REPLICATIONS: usize = 1000;

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix, CliError> {
    Matrix::from_rows(rows).map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

impl DgpConfig {
    pub fn to_spec(&self, seed: u64) -> Result<DgpSpec, CliError> {
        let n = self.n;
        let s = |d: Option<u64>| d.unwrap_or(seed);
        let design = match &self.design {
            DesignConfig::Fixed { rows } => Design::Fixed(matrix(rows, "design rows")?),
            DesignConfig::Gaussian { p, seed: d } => Design::Fixed(gaussian_design(n, *p, s(*d))?),
            DesignConfig::Orthonormal { p, seed: d } => Design::Fixed(orthonormal_design(n, *p, s(*d))?),
            DesignConfig::RankDeficient { p, rank, seed: d } => {
                Design::Fixed(rank_deficient_design(n, *p, *rank, s(*d))?)
            }
            DesignConfig::RandomGaussian { mean, covariance } => Design::RandomGaussian {
                mean: mean.clone(),
                covariance: matrix(covariance, "covariance")?,
            },
            DesignConfig::RandomCollinear { base_covariance, loadings } => Design::RandomCollinear {
                base_covariance: matrix(base_covariance, "base covariance")?,
                loadings: matrix(loadings, "loadings")?,
            },
        };
        let error = match self.error {
            ErrorConfig::Gaussian(v) => ErrorDist::Gaussian(v),
            ErrorConfig::SymmetricBernoulli(v) => ErrorDist::SymmetricBernoulli(v),
            ErrorConfig::Uniform(v) => ErrorDist::Uniform(v),
        };
        let spec = DgpSpec { design, theta0: self.theta0.clone(), error, n, seed };
        spec.validate()?;
        Ok(spec)
    }
}

impl RunConfig {
    pub fn cd_options(&self) -> Result<CdOptions<f64>, CliError> {
        let mut o = CdOptions::default();
        if let Some(t) = self.cd.tol {
            o.tol = t;
        }
        if let Some(m) = self.cd.max_iter {
            o.max_iterations = m;
        }
        o.init = match self.cd.init {
            None | Some(InitConfig::Zeros) => CdInit::Zeros,
            Some(InitConfig::Ridge(l)) => CdInit::Ridge(l),
        };
        if !(o.tol > 0.0) || o.max_iterations == 0 {
            return Err(CliError::Validation("cd tol must be > 0 and max_iter >= 1".into()));
        }
        Ok(o)
    }

    pub fn estimator_spec(&self) -> Result<EstimatorSpec<f64>, CliError> {
        let need_lambda = || {
            self.estimator
                .lambda
                .filter(|l| *l > 0.0)
                .ok_or_else(|| CliError::Validation(format!("{:?} needs a positive lambda", self.estimator.kind)))
        };
        Ok(match self.estimator.kind {
            EstimatorKindArg::Ls => EstimatorSpec::Ls,
            EstimatorKindArg::Ridgeless => EstimatorSpec::Ridgeless,
            EstimatorKindArg::Ridge => EstimatorSpec::Ridge { lambda: need_lambda()? },
            EstimatorKindArg::Lasso => EstimatorSpec::Lasso { lambda: need_lambda()?, options: self.cd_options()? },
            EstimatorKindArg::L0 => EstimatorSpec::L0Brute {
                radius: self
                    .estimator
                    .radius
                    .ok_or_else(|| CliError::Validation("l0 needs a radius".into()))?,
            },
        })
    }
}
