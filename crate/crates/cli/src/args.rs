//! Command line flags. Flags override the fields of `--config`.

use std::path::PathBuf;

use clap::Parser;

use crate::config::{Command, CsvInput, EstimatorKindArg, Format, Input, RunConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "penreg", version, about = "Penalized regression fits, risk tables, lasso bounds and Monte Carlo checks")]
pub struct Args {
    /// Subcommand; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// CSV data file.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Target column: header name or 1-based index (default: first column).
    #[arg(long)]
    pub target: Option<String>,

    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,

    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorKindArg>,

    #[arg(long)]
    pub lambda: Option<f64>,

    /// Support size for the l0 estimator.
    #[arg(long)]
    pub radius: Option<usize>,

    /// Number of penalties on the lasso path.
    #[arg(long)]
    pub n_lambda: Option<usize>,

    /// Smallest path penalty as a fraction of lambda_max.
    #[arg(long)]
    pub ratio: Option<f64>,

    /// Coordinate descent tolerance.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Coordinate descent pass limit.
    #[arg(long)]
    pub max_iter: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Monte Carlo worker threads (0: all cores).
    #[arg(long)]
    pub workers: Option<usize>,

    #[arg(long)]
    pub replications: Option<usize>,

    /// Fit on the raw data without centering or an intercept.
    #[arg(long)]
    pub no_intercept: bool,

    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Args {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Validation(format!("config {}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if self.command.is_some() {
            cfg.command = self.command;
        }
        if let Some(path) = self.input {
            let keep = match cfg.input.take() {
                Some(Input::Csv(c)) => c,
                _ => CsvInput { path: PathBuf::new(), has_header: true, target: None },
            };
            cfg.input = Some(Input::Csv(CsvInput { path, ..keep }));
        }
        if self.target.is_some() || self.no_header {
            match &mut cfg.input {
                Some(Input::Csv(c)) => {
                    if self.target.is_some() {
                        c.target = self.target;
                    }
                    if self.no_header {
                        c.has_header = false;
                    }
                }
                _ => return Err(CliError::Validation("--target and --no-header apply to CSV input only".into())),
            }
        }
        if let Some(k) = self.estimator {
            cfg.estimator.kind = k;
        }
        set(&mut cfg.estimator.lambda, self.lambda);
        set(&mut cfg.estimator.radius, self.radius);
        set(&mut cfg.path.n_lambda, self.n_lambda);
        set(&mut cfg.path.ratio, self.ratio);
        set(&mut cfg.cd.tol, self.tol);
        set(&mut cfg.cd.max_iter, self.max_iter);
        set(&mut cfg.mc.workers, self.workers);
        set(&mut cfg.mc.replications, self.replications);
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.no_intercept {
            cfg.intercept = false;
        }
        if let Some(o) = self.out {
            cfg.output.path = Some(o);
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        Ok(cfg)
    }
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}
