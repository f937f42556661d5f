//! Monte Carlo performance summaries for one parameter.

use crate::error::{GeeError, Result};

use super::bvn::norm_quantile;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamMetrics {
    pub truth: f64,
    pub replicates: usize,
    pub mean: f64,
    /// Percent relative bias, or plain bias when `absolute_bias` is set.
    pub bias: f64,
    /// The true value is zero, so `bias` is not relative.
    pub absolute_bias: bool,
    /// Monte Carlo variance (N − 1 denominator).
    pub var_mc: f64,
    pub mean_var_bc0: f64,
    pub mean_var_bc2: f64,
    /// Percent relative bias of the mean variance estimate against `var_mc`.
    pub var_bias_bc0: f64,
    pub var_bias_bc2: f64,
    /// Percent of 95% normal intervals containing the truth.
    pub coverage_bc0: f64,
    pub coverage_bc2: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn coverage(truth: f64, est: &[f64], var: &[f64], z: f64) -> f64 {
    let hits = est
        .iter()
        .zip(var)
        .filter(|(q, v)| (**q - truth).abs() <= z * v.max(0.0).sqrt())
        .count();
    100.0 * hits as f64 / est.len() as f64
}

/// Metrics over converged replicates: `estimates[r]` with variance estimates
/// `var_bc0[r]` and `var_bc2[r]`.
pub fn sim_metrics(truth: f64, estimates: &[f64], var_bc0: &[f64], var_bc2: &[f64]) -> Result<ParamMetrics> {
    let n = estimates.len();
    if n < 2 {
        return Err(GeeError::TooFewReplicates { needed: 2, got: n });
    }
    if var_bc0.len() != n || var_bc2.len() != n {
        return Err(GeeError::InvalidData("variance estimates do not match replicates".into()));
    }
    let m = mean(estimates);
    let var_mc = estimates.iter().map(|q| (q - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let absolute_bias = truth == 0.0;
    let bias = if absolute_bias {
        m
    } else {
        100.0 * mean(&estimates.iter().map(|q| (q - truth) / truth).collect::<Vec<_>>())
    };
    let (v0, v2) = (mean(var_bc0), mean(var_bc2));
    let z = norm_quantile(0.975);
    Ok(ParamMetrics {
        truth,
        replicates: n,
        mean: m,
        bias,
        absolute_bias,
        var_mc,
        mean_var_bc0: v0,
        mean_var_bc2: v2,
        var_bias_bc0: 100.0 * (v0 - var_mc) / var_mc,
        var_bias_bc2: 100.0 * (v2 - var_mc) / var_mc,
        coverage_bc0: coverage(truth, estimates, var_bc0, z),
        coverage_bc2: coverage(truth, estimates, var_bc2, z),
    })
}
