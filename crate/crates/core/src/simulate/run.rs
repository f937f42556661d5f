//! Replicate loop: generate outcomes on a fixed design, fit, summarize.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{FitConfig, FitMethod};
use crate::error::{GeeError, Result};
use crate::fit::fit_with;
use crate::par::{self, Execution};

use super::design::{CampDesign, Design, ExchangeableDesign};
use super::generator::LatentSampler;
use super::metrics::{sim_metrics, ParamMetrics};
use super::tetrachoric::solve_tetrachoric;

#[derive(Debug, Clone, PartialEq)]
pub enum DesignSpec {
    Camp(CampDesign),
    Exchangeable(ExchangeableDesign),
}

impl DesignSpec {
    pub fn build(&self, seed: u64) -> Result<Design> {
        match self {
            DesignSpec::Camp(c) => c.build(seed),
            DesignSpec::Exchangeable(e) => e.build(seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSet {
    Extended,
    Detailed,
    Both,
}

impl MethodSet {
    pub fn methods(self) -> Vec<FitMethod> {
        match self {
            MethodSet::Extended => vec![FitMethod::Extended],
            MethodSet::Detailed => vec![FitMethod::Detailed],
            MethodSet::Both => vec![FitMethod::Extended, FitMethod::Detailed],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub replicates: usize,
    pub seed: u64,
    pub design_seed: u64,
    pub design: DesignSpec,
    pub beta: DVector<f64>,
    pub alpha: DVector<f64>,
    pub methods: MethodSet,
    /// Links and iteration controls; start values and `detailed` are ignored.
    pub fit: FitConfig,
    /// Replicates run in parallel; fits inside a replicate are sequential.
    pub execution: Execution,
}

impl SimConfig {
    pub fn new(design: DesignSpec, beta: DVector<f64>, alpha: DVector<f64>) -> Self {
        SimConfig {
            replicates: 1000,
            seed: 1,
            design_seed: 1,
            design,
            beta,
            alpha,
            methods: MethodSet::Both,
            fit: FitConfig::default(),
            execution: Execution::default(),
        }
    }
}

/// Estimates and variance diagonals from one converged replicate fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFit {
    pub beta: DVector<f64>,
    pub alpha: DVector<f64>,
    pub var_beta_bc0: DVector<f64>,
    pub var_beta_bc2: DVector<f64>,
    pub var_alpha_bc0: DVector<f64>,
    pub var_alpha_bc2: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct MethodReport {
    pub method: FitMethod,
    pub converged: usize,
    pub beta: Vec<ParamMetrics>,
    pub alpha: Vec<ParamMetrics>,
    /// One entry per replicate; `None` if the fit failed or did not converge.
    pub fits: Vec<Option<ReplicateFit>>,
}

impl MethodReport {
    pub fn convergence_rate(&self) -> f64 {
        100.0 * self.converged as f64 / self.fits.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub replicates: usize,
    pub seed: u64,
    pub beta_names: Vec<String>,
    pub alpha_names: Vec<String>,
    pub methods: Vec<MethodReport>,
    /// Largest latent-matrix repair over the design's clusters.
    pub max_repair: f64,
}

fn key(x: f64) -> u64 {
    x.to_bits()
}

/// Latent samplers for every cluster of the design at the true parameters.
pub fn design_samplers(design: &Design, beta: &DVector<f64>, alpha: &DVector<f64>, fit: &FitConfig) -> Result<Vec<LatentSampler>> {
    let means = design.means(beta, fit.mean_link);
    let rhos = design.correlations(alpha, fit.corr_link);
    let mut memo: HashMap<(u64, u64, u64), f64> = HashMap::new();
    means
        .iter()
        .zip(&rhos)
        .map(|(mu, rho)| {
            LatentSampler::with_solver(mu, rho, |a, b, r| {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let k = (key(lo), key(hi), key(r));
                if let Some(&v) = memo.get(&k) {
                    return Ok(v);
                }
                let v = solve_tetrachoric(lo, hi, r)?;
                memo.insert(k, v);
                Ok(v)
            })
        })
        .collect()
}

/// Outcomes for replicate `r`: stream `r` of a ChaCha8 generator seeded by `seed`.
pub fn replicate_outcomes(samplers: &[LatentSampler], seed: u64, r: usize) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    samplers.iter().map(|s| s.sample(&mut rng)).collect()
}

fn fit_replicate(design: &Design, ys: Vec<DVector<f64>>, cfg: &FitConfig, method: FitMethod) -> Option<ReplicateFit> {
    let data = design.data.with_outcomes(ys).ok()?;
    let mut c = cfg.clone();
    c.detailed = method == FitMethod::Detailed;
    let res = fit_with(&data, &design.pairs, &c, false).ok()?;
    let cov = res.covariance?;
    Some(ReplicateFit {
        var_beta_bc0: cov.cov_beta_bc0.diagonal(),
        var_beta_bc2: cov.cov_beta_bc2.diagonal(),
        var_alpha_bc0: cov.cov_alpha_bc0?.diagonal(),
        var_alpha_bc2: cov.cov_alpha_bc2?.diagonal(),
        beta: res.beta,
        alpha: res.alpha,
    })
}

fn summarize(truth: &DVector<f64>, fits: &[&ReplicateFit], pick: impl Fn(&ReplicateFit) -> (&DVector<f64>, &DVector<f64>, &DVector<f64>)) -> Result<Vec<ParamMetrics>> {
    (0..truth.len())
        .map(|i| {
            let est: Vec<f64> = fits.iter().map(|f| pick(f).0[i]).collect();
            let v0: Vec<f64> = fits.iter().map(|f| pick(f).1[i]).collect();
            let v2: Vec<f64> = fits.iter().map(|f| pick(f).2[i]).collect();
            sim_metrics(truth[i], &est, &v0, &v2)
        })
        .collect()
}

pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.replicates == 0 {
        return Err(GeeError::Config("replicates must be at least 1".into()));
    }
    let design = cfg.design.build(cfg.design_seed)?;
    if cfg.beta.len() != design.data.p() || cfg.alpha.len() != design.pairs.q() {
        return Err(GeeError::Config(format!(
            "design has {} mean and {} correlation parameters; got {} and {}",
            design.data.p(),
            design.pairs.q(),
            cfg.beta.len(),
            cfg.alpha.len()
        )));
    }
    let samplers = design_samplers(&design, &cfg.beta, &cfg.alpha, &cfg.fit)?;
    let max_repair = samplers.iter().fold(0.0f64, |m, s| m.max(s.repair));
    let mut fit_cfg = cfg.fit.clone();
    fit_cfg.start_beta = None;
    fit_cfg.start_alpha = None;
    fit_cfg.execution = if cfg.execution.is_parallel() {
        Execution::Sequential
    } else {
        cfg.execution
    };
    let methods = cfg.methods.methods();
    let per_rep: Vec<Vec<Option<ReplicateFit>>> = par::map_range(cfg.execution, cfg.replicates, |r| {
        let ys = replicate_outcomes(&samplers, cfg.seed, r);
        methods
            .iter()
            .map(|&m| fit_replicate(&design, ys.clone(), &fit_cfg, m))
            .collect()
    });

    let mut reports = Vec::with_capacity(methods.len());
    for (mi, &method) in methods.iter().enumerate() {
        let fits: Vec<Option<ReplicateFit>> = per_rep.iter().map(|r| r[mi].clone()).collect();
        let ok: Vec<&ReplicateFit> = fits.iter().flatten().collect();
        if ok.is_empty() {
            return Err(GeeError::NoConvergedReplicates {
                replicates: cfg.replicates,
            });
        }
        let (beta, alpha) = if ok.len() >= 2 {
            (
                summarize(&cfg.beta, &ok, |f| (&f.beta, &f.var_beta_bc0, &f.var_beta_bc2))?,
                summarize(&cfg.alpha, &ok, |f| (&f.alpha, &f.var_alpha_bc0, &f.var_alpha_bc2))?,
            )
        } else {
            (Vec::new(), Vec::new())
        };
        reports.push(MethodReport {
            method,
            converged: ok.len(),
            beta,
            alpha,
            fits,
        });
    }
    Ok(SimReport {
        replicates: cfg.replicates,
        seed: cfg.seed,
        beta_names: design.beta_names,
        alpha_names: design.alpha_names,
        methods: reports,
        max_repair,
    })
}

impl SimReport {
    fn rows(&self) -> impl Iterator<Item = (&MethodReport, &str, &ParamMetrics)> {
        self.methods.iter().flat_map(move |m| {
            let b = self.beta_names.iter().zip(&m.beta);
            let a = self.alpha_names.iter().zip(&m.alpha);
            b.chain(a).map(move |(n, p)| (m, n.as_str(), p))
        })
    }

    /// One comma-separated row per method and parameter.
    pub fn to_delimited(&self) -> String {
        let mut s = String::from(
            "method,parameter,truth,converged,mean,bias,bias_kind,var_mc,mean_var_bc0,mean_var_bc2,\
             var_bias_bc0,var_bias_bc2,coverage_bc0,coverage_bc2\n",
        );
        for (m, name, p) in self.rows() {
            let kind = if p.absolute_bias { "absolute" } else { "percent" };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                m.method.name(),
                name,
                p.truth,
                m.converged,
                p.mean,
                p.bias,
                kind,
                p.var_mc,
                p.mean_var_bc0,
                p.mean_var_bc2,
                p.var_bias_bc0,
                p.var_bias_bc2,
                p.coverage_bc0,
                p.coverage_bc2
            );
        }
        s
    }

    /// Human-readable table.
    pub fn summary(&self) -> String {
        let mut s = format!("Simulation: {} replicates, seed {}\n", self.replicates, self.seed);
        if self.max_repair > 0.0 {
            let _ = writeln!(s, "Latent correlation repair applied (max spectral change {:.2e})", self.max_repair);
        }
        for m in &self.methods {
            let _ = writeln!(
                s,
                "\n{} GEE: {}/{} converged ({:.1}%)",
                m.method.name(),
                m.converged,
                self.replicates,
                m.convergence_rate()
            );
            let _ = writeln!(
                s,
                "{:<18} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7} {:>7}",
                "parameter", "truth", "mean", "bias%", "vbBC0%", "vbBC2%", "covBC0", "covBC2"
            );
            let names = self.beta_names.iter().zip(&m.beta).chain(self.alpha_names.iter().zip(&m.alpha));
            for (name, p) in names {
                let bias = if p.absolute_bias {
                    format!("{:.4}*", p.bias)
                } else {
                    format!("{:.2}", p.bias)
                };
                let _ = writeln!(
                    s,
                    "{:<18} {:>9.4} {:>9.4} {:>9} {:>9.2} {:>9.2} {:>7.1} {:>7.1}",
                    name, p.truth, p.mean, bias, p.var_bias_bc0, p.var_bias_bc2, p.coverage_bc0, p.coverage_bc2
                );
            }
        }
        if self.rows().any(|(_, _, p)| p.absolute_bias) {
            s.push_str("* true value is 0; absolute bias shown\n");
        }
        s
    }
}
