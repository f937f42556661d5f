use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use pairgee::{FitConfig, InputColumns, LinkKind, ShrinkMode};

#[derive(Debug, Parser)]
#[command(name = "pairgee", version, about = "Marginal mean and pairwise correlation models for clustered binary data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit mean and correlation models to delimited input files.
    Fit(FitArgs),
    /// Run a simulation scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Outcome/covariate file: one row per observation, clusters contiguous.
    #[arg(long, value_name = "FILE")]
    pub xy: PathBuf,
    /// Pair covariate file: one row per within-cluster pair, canonical order.
    #[arg(long, value_name = "FILE")]
    pub z: PathBuf,
    /// Cluster weight file.
    #[arg(long, value_name = "FILE")]
    pub w: PathBuf,
    /// Cluster id column (xy and w files).
    #[arg(long)]
    pub id: String,
    /// Binary outcome column.
    #[arg(long)]
    pub y: String,
    /// Mean-model covariate columns; include a constant column for an intercept.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<String>,
    /// Correlation-model covariate columns in the pair file.
    #[arg(long, value_delimiter = ',', required = true)]
    pub zvar: Vec<String>,
    /// Weight column.
    #[arg(long)]
    pub wvar: String,
    /// Optional cluster id column in the pair file (better row-count errors).
    #[arg(long)]
    pub z_id: Option<String>,
    /// Cluster id column in the weight file, if it differs from --id.
    #[arg(long)]
    pub w_id: Option<String>,
    #[arg(long, default_value = ",")]
    pub delimiter: char,

    /// Mean link: identity, log or logit.
    #[arg(long, default_value = "logit")]
    pub link: LinkKind,
    /// Correlation link: identity, log, logit or fisherz.
    #[arg(long, default_value = "identity")]
    pub corr_link: LinkKind,
    #[arg(long, default_value_t = pairgee::config::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = pairgee::config::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Report range violations from every iteration, not just the last.
    #[arg(long)]
    pub print_range: bool,
    /// Shrinking on range violations: none, alpha or theta.
    #[arg(long, default_value = "none")]
    pub shrink: ShrinkMode,
    /// Use unit variances for the sample correlations.
    #[arg(long)]
    pub make_v_one: bool,
    /// Initial beta (comma-separated); default is the independence fit.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start_beta: Option<Vec<f64>>,
    /// Initial alpha (comma-separated); default 0.01 for every parameter.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start_alpha: Option<Vec<f64>>,
    /// Hold alpha at its start value.
    #[arg(long)]
    pub fix_alpha: bool,
    /// Use the joint (detailed) fitting algorithm.
    #[arg(long)]
    pub detailed: bool,

    /// Cluster diagnostics output.
    #[arg(long, value_name = "FILE")]
    pub clsout: Option<PathBuf>,
    /// Observation diagnostics output.
    #[arg(long, value_name = "FILE")]
    pub obsout: Option<PathBuf>,
    /// Predicted probabilities output.
    #[arg(long, value_name = "FILE")]
    pub probout: Option<PathBuf>,
    /// Machine-readable results file.
    #[arg(long, value_name = "FILE")]
    pub results: Option<PathBuf>,
    /// Also write the printed report to this file.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

impl FitArgs {
    pub fn columns(&self) -> Result<InputColumns, String> {
        let delimiter = u8::try_from(self.delimiter).map_err(|_| "delimiter must be a single ASCII character".to_string())?;
        let mut cols = InputColumns::new(
            &self.id,
            &self.y,
            &self.x.iter().map(String::as_str).collect::<Vec<_>>(),
            &self.zvar.iter().map(String::as_str).collect::<Vec<_>>(),
            &self.wvar,
        );
        cols.z_id = self.z_id.clone();
        cols.w_id = self.w_id.clone();
        cols.delimiter = delimiter;
        Ok(cols)
    }

    pub fn config(&self) -> FitConfig {
        FitConfig {
            mean_link: self.link,
            corr_link: self.corr_link,
            max_iter: self.max_iter,
            epsilon: self.epsilon,
            start_beta: self.start_beta.clone().map(DVector::from_vec),
            start_alpha: self.start_alpha.clone().map(DVector::from_vec),
            fix_alpha: self.fix_alpha,
            make_v_one: self.make_v_one,
            shrink: self.shrink,
            print_range: self.print_range,
            detailed: self.detailed,
            ..FitConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (key = value lines).
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the scenario replicate count.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Per-parameter metrics as comma-separated text.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the printed summary to this file.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Run replicates on one thread.
    #[arg(long)]
    pub sequential: bool,
}
