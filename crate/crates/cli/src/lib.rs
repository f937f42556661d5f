//! Command-line front end: `pairgee fit` and `pairgee simulate`.

pub mod args;
pub mod output;
pub mod report;
pub mod results;

use std::io::Write;
use std::path::Path;

use pairgee::diagnostics::diagnostics;
use pairgee::simulate::{load_scenario, run_simulation};
use pairgee::{fit, load_inputs, predicted_probabilities, Execution, GeeError};

use args::{Cli, Command, FitArgs, SimulateArgs};
use report::Names;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const NOT_CONVERGED: u8 = 3;
    pub const RANGE: u8 = 4;
    pub const SHRINK_LIMIT: u8 = 5;
}

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "PAIRGEE_THREADS";

pub fn exit_code(e: &GeeError) -> u8 {
    use GeeError::*;
    match e {
        Io { .. } | Csv { .. } | MissingColumn { .. } | MissingValue { .. } | NonNumeric { .. }
        | NonBinaryOutcome { .. } | PairRowMismatch { .. } | MissingWeight { .. }
        | DuplicateWeight { .. } | NonPositiveWeight { .. } | InvalidData(_) | InvalidPair { .. }
        | LinkDomain { .. } | Config(_) | Scenario { .. } | Infeasible { .. } => exit::INPUT,
        MeanOutOfRange { .. } | PairVariance { .. } | NotPositiveDefinite { .. } => exit::RANGE,
        ShrinkLimit { .. } => exit::SHRINK_LIMIT,
        NoConvergedReplicates { .. } => exit::NOT_CONVERGED,
        _ => exit::FAILURE,
    }
}

/// A failure with its exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<GeeError> for Failure {
    fn from(e: GeeError) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: exit::FAILURE,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn output_failure(message: String) -> Failure {
    Failure {
        code: exit::FAILURE,
        message,
    }
}

pub fn fit_command(a: &FitArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let cols = a.columns().map_err(|m| Failure {
        code: exit::INPUT,
        message: m,
    })?;
    let (data, pairs) = load_inputs(&a.xy, &a.z, &a.w, &cols)?;
    let cfg = a.config();
    let res = fit(&data, &pairs, &cfg)?;
    let names = Names {
        beta: &a.x,
        alpha: &a.zvar,
    };
    let text = report::fit_report(&res, &data, &pairs, &cfg, &names);
    let _ = out.write_all(text.as_bytes());
    if let Some(p) = &a.report {
        write_file(p, &text)?;
    }
    let mut results = report::fit_results(&res, &data, &pairs, &cfg, &names);

    if let Some(cov) = &res.covariance {
        if a.clsout.is_some() || a.obsout.is_some() {
            let table = diagnostics(&data, &pairs, &cfg, &res.beta, &res.alpha, cov)?;
            results.put("diagnostics.distance_covariance", table.distance_covariance);
            if let Some(p) = &a.clsout {
                output::write_clusters(p, &table, &a.x, &a.zvar).map_err(output_failure)?;
            }
            if let Some(p) = &a.obsout {
                output::write_observations(p, &table, &a.x).map_err(output_failure)?;
            }
        }
        if let Some(p) = &a.probout {
            let pred = predicted_probabilities(&data, &res.beta, cfg.mean_link);
            output::write_predictions(p, &data, &pred, &a.y, &a.x).map_err(output_failure)?;
        }
    }
    if let Some(p) = &a.results {
        write_file(p, &results.render())?;
    }
    Ok(if res.converged() { exit::OK } else { exit::NOT_CONVERGED })
}

pub fn simulate_command(a: &SimulateArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let mut cfg = load_scenario(&a.scenario)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(r) = a.replicates {
        if r == 0 {
            return Err(Failure {
                code: exit::INPUT,
                message: "--replicates must be at least 1".into(),
            });
        }
        cfg.replicates = r;
    }
    if a.sequential {
        cfg.execution = Execution::Sequential;
    }
    let report = run_simulation(&cfg)?;
    let text = report.summary();
    let _ = out.write_all(text.as_bytes());
    if let Some(p) = &a.report {
        write_file(p, &text)?;
    }
    if let Some(p) = &a.out {
        write_file(p, &report.to_delimited())?;
    }
    Ok(exit::OK)
}

/// Runs a parsed invocation, printing errors to `err`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Fit(a) => fit_command(a, out),
        Command::Simulate(a) => simulate_command(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
