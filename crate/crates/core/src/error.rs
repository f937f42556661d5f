use std::path::PathBuf;

use crate::link::{LinkKind, LinkMode};

/// Everything that can go wrong while loading, fitting or simulating.
#[derive(Debug, thiserror::Error)]
pub enum GeeError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: malformed delimited input: {message}")]
    Csv { file: String, message: String },

    #[error("{file}: column `{column}` not found in header")]
    MissingColumn { file: String, column: String },

    #[error("{file}: row {row}, column `{column}`: missing value")]
    MissingValue {
        file: String,
        row: usize,
        column: String,
    },

    #[error("{file}: row {row}, column `{column}`: `{value}` is not numeric")]
    NonNumeric {
        file: String,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{file}: row {row}, column `{column}`: outcome must be 0 or 1, found `{value}`")]
    NonBinaryOutcome {
        file: String,
        row: usize,
        column: String,
        value: String,
    },

    #[error("correlation covariates: expected {expected} rows, found {found}; {detail}")]
    PairRowMismatch {
        expected: usize,
        found: usize,
        detail: String,
    },

    #[error("weights: no weight supplied for cluster `{cluster}`")]
    MissingWeight { cluster: String },

    #[error("weights: cluster `{cluster}` listed more than once")]
    DuplicateWeight { cluster: String },

    #[error("weights: cluster `{cluster}` has weight {weight}; weights must be positive")]
    NonPositiveWeight { cluster: String, weight: f64 },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid pair ({j}, {k}) for cluster size {n}")]
    InvalidPair { j: usize, k: usize, n: usize },

    #[error("{kind} link, {mode} mode: value {value} is outside the domain")]
    LinkDomain {
        kind: LinkKind,
        mode: LinkMode,
        value: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "cluster `{cluster}`, observation {obs}: marginal mean {mu} is outside (0, 1){advice}"
    )]
    MeanOutOfRange {
        cluster: String,
        obs: usize,
        mu: f64,
        advice: &'static str,
    },

    #[error("cluster `{cluster}`: {what} is not positive definite")]
    NotPositiveDefinite { cluster: String, what: &'static str },

    #[error("cluster `{cluster}`, pair ({j}, {k}): var(R) = {value} is not positive")]
    PairVariance {
        cluster: String,
        j: usize,
        k: usize,
        value: f64,
    },

    #[error("{0} information matrix is singular")]
    SingularInformation(&'static str),

    #[error("cluster `{cluster}`: I - H for the {block} block is singular")]
    LeverageSingular {
        cluster: String,
        block: &'static str,
    },

    #[error("{0} covariance matrix is singular")]
    SingularCovariance(&'static str),

    #[error("range violations persist after {limit} shrink modifications in iteration {iteration}; estimates unreliable")]
    ShrinkLimit { iteration: usize, limit: usize },

    #[error("target (mu_j = {mu_j}, mu_k = {mu_k}, rho = {rho}) lies outside the Frechet bounds [{lower}, {upper}]")]
    Infeasible {
        mu_j: f64,
        mu_k: f64,
        rho: f64,
        lower: f64,
        upper: f64,
    },

    #[error("latent correlation root solve did not converge for (mu_j = {mu_j}, mu_k = {mu_k}, rho = {rho})")]
    RootSolve { mu_j: f64, mu_k: f64, rho: f64 },

    #[error("latent correlation matrix needs a repair of spectral size {change:.4} (limit {limit})")]
    LatentRepair { change: f64, limit: f64 },

    #[error("{path}: line {line}: {message}")]
    Scenario {
        path: String,
        line: usize,
        message: String,
    },

    #[error("simulation: none of the {replicates} replicates converged")]
    NoConvergedReplicates { replicates: usize },

    #[error("simulation metrics need at least {needed} converged replicates, got {got}")]
    TooFewReplicates { needed: usize, got: usize },
}

pub type Result<T, E = GeeError> = std::result::Result<T, E>;
