use std::fmt::Write as _;

use nalgebra::DVector;
use pairgee::simulate::norm_cdf;
use pairgee::{ClusterDataset, FitConfig, FitResult, FitStatus, PairCovariates, RangeReport};

use crate::results::ResultsFile;

/// Two-sided normal p-value for estimate / se.
pub fn p_value(est: f64, se: f64) -> f64 {
    if se > 0.0 {
        2.0 * norm_cdf(-(est / se).abs())
    } else {
        f64::NAN
    }
}

pub struct Names<'a> {
    pub beta: &'a [String],
    pub alpha: &'a [String],
}

fn status_text(res: &FitResult) -> String {
    match res.status {
        FitStatus::Converged => format!("converged in {} iterations", res.iterations),
        FitStatus::NotConverged { max_delta } => format!(
            "NOT converged after {} iterations (last max |change| {:.3e}); estimates below are the final iterate",
            res.iterations, max_delta
        ),
    }
}

fn param_table(s: &mut String, title: &str, names: &[String], est: &DVector<f64>, se0: Option<DVector<f64>>, se2: Option<DVector<f64>>) {
    let _ = writeln!(s, "\n{title}");
    let _ = writeln!(
        s,
        "  {:<20} {:>12} {:>10} {:>9} {:>10} {:>9}",
        "parameter", "estimate", "se(BC0)", "p(BC0)", "se(BC2)", "p(BC2)"
    );
    for (i, name) in names.iter().enumerate() {
        let cell = |se: &Option<DVector<f64>>| match se {
            Some(v) => (format!("{:.5}", v[i]), format!("{:.4}", p_value(est[i], v[i]))),
            None => ("-".into(), "-".into()),
        };
        let (a, b) = cell(&se0);
        let (c, d) = cell(&se2);
        let _ = writeln!(s, "  {:<20} {:>12.6} {:>10} {:>9} {:>10} {:>9}", name, est[i], a, b, c, d);
    }
}

fn ranges(s: &mut String, reports: &[RangeReport], all: bool) {
    let total: usize = reports.iter().map(|r| r.violations.len()).sum();
    let scope = if all { "all iterations" } else { "final iteration" };
    if total == 0 {
        let _ = writeln!(s, "\nRange violations ({scope}): none");
        return;
    }
    let _ = writeln!(s, "\nRange violations ({scope}): {total}");
    for r in reports {
        for v in &r.violations {
            let _ = writeln!(
                s,
                "  iter {:>3}  cluster {}  pair ({},{})  mu=({:.4},{:.4})  rho={:.4}  bounds [{:.4}, {:.4}]",
                r.iteration, v.cluster, v.j, v.k, v.mu_j, v.mu_k, v.rho, v.lower, v.upper
            );
        }
    }
}

pub fn fit_report(res: &FitResult, data: &ClusterDataset, pairs: &PairCovariates, cfg: &FitConfig, names: &Names) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "pairgee fit ({} algorithm)", res.method.name());
    let _ = writeln!(s, "Mean link: {}   Correlation link: {}", cfg.mean_link, cfg.corr_link);
    let _ = writeln!(
        s,
        "Clusters: {}   Observations: {}   Pairs: {}",
        data.len(),
        data.observation_count(),
        pairs.total_rows()
    );
    let _ = writeln!(s, "Status: {}", status_text(res));
    let cov = res.covariance.as_ref();
    param_table(
        &mut s,
        "Mean model",
        names.beta,
        &res.beta,
        cov.map(|c| c.se_beta(false)),
        cov.map(|c| c.se_beta(true)),
    );
    param_table(
        &mut s,
        if cfg.fix_alpha { "Correlation model (held fixed)" } else { "Correlation model" },
        names.alpha,
        &res.alpha,
        cov.and_then(|c| c.se_alpha(false)),
        cov.and_then(|c| c.se_alpha(true)),
    );
    if let Some(sel) = &res.selection {
        let _ = writeln!(s, "\nSelection criteria (larger Lg and smaller CIC, GPC, TECM preferred)");
        let _ = writeln!(s, "  CIC  {:>14.6}", sel.cic);
        let _ = writeln!(s, "  TECM {:>14.6}", sel.tecm);
        let _ = writeln!(s, "  Lg   {:>14.6}", sel.lg);
        let _ = writeln!(s, "  GPC  {:>14.6}", sel.gpc);
    }
    ranges(&mut s, &res.range_reports, cfg.print_range);
    for w in &res.warnings {
        let _ = writeln!(s, "\nWarning: {w}");
    }
    s
}

pub fn fit_results(res: &FitResult, data: &ClusterDataset, pairs: &PairCovariates, cfg: &FitConfig, names: &Names) -> ResultsFile {
    let mut r = ResultsFile::default();
    r.put("method", res.method.name());
    r.put("status", if res.converged() { "converged" } else { "not_converged" });
    r.put("iterations", res.iterations);
    if let Some(last) = res.trace.last() {
        r.put("max_delta", last.max_delta);
    }
    r.put("mean_link", cfg.mean_link);
    r.put("corr_link", cfg.corr_link);
    r.put("clusters", data.len());
    r.put("observations", data.observation_count());
    r.put("pairs", pairs.total_rows());
    r.put("p", data.p());
    r.put("q", pairs.q());
    for (i, n) in names.beta.iter().enumerate() {
        r.put(format!("beta.{n}"), res.beta[i]);
        r.put(format!("score.beta.{n}"), res.score_beta[i]);
    }
    for (i, n) in names.alpha.iter().enumerate() {
        r.put(format!("alpha.{n}"), res.alpha[i]);
        r.put(format!("score.alpha.{n}"), res.score_alpha[i]);
    }
    if let Some(cov) = &res.covariance {
        for (tag, bc2) in [("bc0", false), ("bc2", true)] {
            let se = cov.se_beta(bc2);
            for (i, n) in names.beta.iter().enumerate() {
                r.put(format!("se_{tag}.beta.{n}"), se[i]);
                r.put(format!("p_{tag}.beta.{n}"), p_value(res.beta[i], se[i]));
            }
            if let Some(se) = cov.se_alpha(bc2) {
                for (i, n) in names.alpha.iter().enumerate() {
                    r.put(format!("se_{tag}.alpha.{n}"), se[i]);
                    r.put(format!("p_{tag}.alpha.{n}"), p_value(res.alpha[i], se[i]));
                }
            }
        }
    }
    if let Some(sel) = &res.selection {
        r.put("cic", sel.cic);
        r.put("tecm", sel.tecm);
        r.put("lg", sel.lg);
        r.put("gpc", sel.gpc);
    }
    let violations: usize = res.range_reports.iter().map(|x| x.violations.len()).sum();
    r.put("range_violations", violations);
    for (i, w) in res.warnings.iter().enumerate() {
        r.put(format!("warning.{}", i + 1), w);
    }
    if let Some(cov) = &res.covariance {
        r.put_matrix("cov_beta_bc0", &cov.cov_beta_bc0);
        r.put_matrix("cov_beta_bc2", &cov.cov_beta_bc2);
        if let (Some(a0), Some(a2)) = (&cov.cov_alpha_bc0, &cov.cov_alpha_bc2) {
            r.put_matrix("cov_alpha_bc0", a0);
            r.put_matrix("cov_alpha_bc2", a2);
        }
        if let (Some(j0), Some(j2)) = (&cov.cov_joint_bc0, &cov.cov_joint_bc2) {
            r.put_matrix("cov_joint_bc0", j0);
            r.put_matrix("cov_joint_bc2", j2);
        }
    }
    r
}
