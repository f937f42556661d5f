//! Robust (BC0) and leverage-corrected (BC2) sandwich covariances.

use nalgebra::{DMatrix, DVector};

use crate::config::{FitConfig, FitMethod};
use crate::data::{ClusterDataset, PairCovariates};
use crate::error::{GeeError, Result};
use crate::fit::{all_terms, invert_information, reduce, ClusterTerms, Needs};

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSet {
    pub method: FitMethod,
    pub cov_beta_bc0: DMatrix<f64>,
    pub cov_beta_bc2: DMatrix<f64>,
    /// `None` when α is held fixed.
    pub cov_alpha_bc0: Option<DMatrix<f64>>,
    pub cov_alpha_bc2: Option<DMatrix<f64>>,
    /// (p+q) × (p+q), detailed method only.
    pub cov_joint_bc0: Option<DMatrix<f64>>,
    pub cov_joint_bc2: Option<DMatrix<f64>>,
}

impl CovarianceSet {
    pub fn se_beta(&self, bc2: bool) -> DVector<f64> {
        let m = if bc2 { &self.cov_beta_bc2 } else { &self.cov_beta_bc0 };
        m.diagonal().map(|v| v.max(0.0).sqrt())
    }

    pub fn se_alpha(&self, bc2: bool) -> Option<DVector<f64>> {
        let m = if bc2 { &self.cov_alpha_bc2 } else { &self.cov_alpha_bc0 };
        m.as_ref().map(|m| m.diagonal().map(|v| v.max(0.0).sqrt()))
    }
}

/// Fitted quantities shared by the post-processing modules.
pub(crate) struct Fitted {
    pub terms: Vec<ClusterTerms>,
    /// (Σ w D'V⁻¹D)⁻¹
    pub a: DMatrix<f64>,
    /// (Σ w E'W⁻¹E)⁻¹; `None` if α is fixed and the information is singular.
    pub c: Option<DMatrix<f64>>,
    /// Σ w E'W⁻¹ E[∂R/∂β]
    pub g: DMatrix<f64>,
    pub info_beta: DMatrix<f64>,
    pub info_alpha: DMatrix<f64>,
}

pub(crate) fn fitted(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
) -> Result<Fitted> {
    let terms = all_terms(data, pairs, beta, alpha, config, Needs::ALL)?;
    fitted_from_terms(data, config, terms)
}

/// Requires terms evaluated with `Needs::ALL`.
pub(crate) fn fitted_from_terms(data: &ClusterDataset, config: &FitConfig, terms: Vec<ClusterTerms>) -> Result<Fitted> {
    let tot = reduce(data, &terms)?;
    let a = invert_information(&tot.info_beta, "mean-model")?;
    let c = match invert_information(&tot.info_alpha, "correlation-model") {
        Ok(c) => Some(c),
        Err(_) if config.fix_alpha => None,
        Err(e) => return Err(e),
    };
    Ok(Fitted {
        terms,
        a,
        c,
        g: tot.cross,
        info_beta: tot.info_beta,
        info_alpha: tot.info_alpha,
    })
}

/// (M − F)⁻¹ g, the score with the cluster's own contribution removed from the
/// information. Fails when the remaining information is singular.
pub(crate) fn deleted_solve(
    total: &DMatrix<f64>,
    own: &DMatrix<f64>,
    g: &DVector<f64>,
    cluster: &str,
    block: &'static str,
) -> Result<DVector<f64>> {
    (total - own)
        .cholesky()
        .map(|ch| ch.solve(g))
        .ok_or_else(|| GeeError::LeverageSingular {
            cluster: cluster.to_string(),
            block,
        })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn outer_sum(data: &ClusterDataset, scores: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut meat = DMatrix::zeros(dim, dim);
    for (c, u) in data.clusters().iter().zip(scores) {
        meat += c.weight * u * u.transpose();
    }
    meat
}

/// Per-cluster scores, raw and leverage-corrected, for both blocks.
struct Scores {
    beta: Vec<DVector<f64>>,
    beta_bc2: Vec<DVector<f64>>,
    alpha: Vec<DVector<f64>>,
    alpha_bc2: Vec<DVector<f64>>,
}

fn cluster_scores(data: &ClusterDataset, f: &Fitted, with_alpha: bool) -> Result<Scores> {
    let info_beta = &f.info_beta;
    let mut s = Scores {
        beta: Vec::with_capacity(data.len()),
        beta_bc2: Vec::with_capacity(data.len()),
        alpha: Vec::new(),
        alpha_bc2: Vec::new(),
    };
    for (c, t) in data.clusters().iter().zip(&f.terms) {
        // (I − H)⁻¹ pushed through D'V⁻¹: A⁻¹ (A⁻¹ − F)⁻¹ g.
        let z = deleted_solve(info_beta, &t.info_beta, &t.score_beta, &c.id, "mean")?;
        s.beta.push(t.score_beta.clone());
        s.beta_bc2.push(info_beta * z);
        if with_alpha {
            let z = deleted_solve(&f.info_alpha, &t.info_alpha, &t.score_alpha, &c.id, "correlation")?;
            s.alpha.push(t.score_alpha.clone());
            s.alpha_bc2.push(&f.info_alpha * z);
        }
    }
    Ok(s)
}

/// Block-diagonal sandwich for the alternating algorithm.
pub fn covariance_extended(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
) -> Result<CovarianceSet> {
    let f = fitted(data, pairs, config, beta, alpha)?;
    extended_from(data, &f, config.fix_alpha)
}

fn extended_from(data: &ClusterDataset, f: &Fitted, fix_alpha: bool) -> Result<CovarianceSet> {
    let (p, q) = (f.a.nrows(), f.info_alpha.nrows());
    let with_alpha = !fix_alpha;
    let s = cluster_scores(data, f, with_alpha)?;
    let sandwich = |bread: &DMatrix<f64>, u: &[DVector<f64>], dim| {
        symmetrize(bread * outer_sum(data, u, dim) * bread)
    };
    let (ab0, ab2) = match (&f.c, with_alpha) {
        (Some(c), true) => (
            Some(sandwich(c, &s.alpha, q)),
            Some(sandwich(c, &s.alpha_bc2, q)),
        ),
        _ => (None, None),
    };
    Ok(CovarianceSet {
        method: FitMethod::Extended,
        cov_beta_bc0: sandwich(&f.a, &s.beta, p),
        cov_beta_bc2: sandwich(&f.a, &s.beta_bc2, p),
        cov_alpha_bc0: ab0,
        cov_alpha_bc2: ab2,
        cov_joint_bc0: None,
        cov_joint_bc2: None,
    })
}

/// Joint sandwich L Λ L' with L = [[A, 0], [B, C]] and B = C G A.
pub fn covariance_detailed(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
) -> Result<CovarianceSet> {
    let f = fitted(data, pairs, config, beta, alpha)?;
    detailed_from(data, &f, config.fix_alpha)
}

fn detailed_from(data: &ClusterDataset, f: &Fitted, fix_alpha: bool) -> Result<CovarianceSet> {
    let c = match (&f.c, fix_alpha) {
        (Some(c), false) => c,
        _ => {
            let mut set = extended_from(data, f, fix_alpha)?;
            set.method = FitMethod::Detailed;
            return Ok(set);
        }
    };
    let (p, q) = (f.a.nrows(), c.nrows());
    let s = cluster_scores(data, f, true)?;
    let b = c * &f.g * &f.a;
    let mut l = DMatrix::zeros(p + q, p + q);
    l.view_mut((0, 0), (p, p)).copy_from(&f.a);
    l.view_mut((p, 0), (q, p)).copy_from(&b);
    l.view_mut((p, p), (q, q)).copy_from(c);
    let stack = |ub: &[DVector<f64>], ua: &[DVector<f64>]| -> Vec<DVector<f64>> {
        ub.iter()
            .zip(ua)
            .map(|(b, a)| {
                let mut u = DVector::zeros(p + q);
                u.rows_mut(0, p).copy_from(b);
                u.rows_mut(p, q).copy_from(a);
                u
            })
            .collect()
    };
    let joint = |u: &[DVector<f64>]| symmetrize(&l * outer_sum(data, u, p + q) * l.transpose());
    let j0 = joint(&stack(&s.beta, &s.alpha));
    let j2 = joint(&stack(&s.beta_bc2, &s.alpha_bc2));
    let block = |m: &DMatrix<f64>, off: usize, n: usize| m.view((off, off), (n, n)).into_owned();
    Ok(CovarianceSet {
        method: FitMethod::Detailed,
        cov_beta_bc0: block(&j0, 0, p),
        cov_beta_bc2: block(&j2, 0, p),
        cov_alpha_bc0: Some(block(&j0, p, q)),
        cov_alpha_bc2: Some(block(&j2, p, q)),
        cov_joint_bc0: Some(j0),
        cov_joint_bc2: Some(j2),
    })
}

/// Covariance for the given fitting method.
pub fn covariance(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    method: FitMethod,
) -> Result<CovarianceSet> {
    let f = fitted(data, pairs, config, beta, alpha)?;
    covariance_from(data, &f, config.fix_alpha, method)
}

pub(crate) fn covariance_from(
    data: &ClusterDataset,
    f: &Fitted,
    fix_alpha: bool,
    method: FitMethod,
) -> Result<CovarianceSet> {
    match method {
        FitMethod::Extended => extended_from(data, f, fix_alpha),
        FitMethod::Detailed => detailed_from(data, f, fix_alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Cluster;

    fn toy(weights: [f64; 3]) -> (ClusterDataset, PairCovariates) {
        let ys = [[1.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        let clusters = (0..3)
            .map(|i| {
                let x = DMatrix::from_row_slice(3, 2, &[1.0, -0.5, 1.0, 0.2 * i as f64, 1.0, 0.7]);
                Cluster::new(format!("c{i}"), DVector::from_row_slice(&ys[i]), x, weights[i])
            })
            .collect();
        let data = ClusterDataset::new(clusters).unwrap();
        let pairs = PairCovariates::exchangeable(&data).unwrap();
        (data, pairs)
    }

    #[test]
    fn detailed_beta_block_matches_extended() {
        let (data, pairs) = toy([1.0, 2.0, 1.0]);
        let cfg = FitConfig::default();
        let beta = DVector::from_row_slice(&[0.1, 0.3]);
        let alpha = DVector::from_row_slice(&[0.05]);
        let e = covariance_extended(&data, &pairs, &cfg, &beta, &alpha).unwrap();
        let d = covariance_detailed(&data, &pairs, &cfg, &beta, &alpha).unwrap();
        assert!((&e.cov_beta_bc0 - &d.cov_beta_bc0).amax() < 1e-12);
        assert!((&e.cov_beta_bc2 - &d.cov_beta_bc2).amax() < 1e-12);
    }

    #[test]
    fn fixed_alpha_has_no_alpha_block() {
        let (data, pairs) = toy([1.0, 1.0, 1.0]);
        let cfg = FitConfig {
            fix_alpha: true,
            ..FitConfig::default()
        };
        let beta = DVector::from_row_slice(&[0.1, 0.3]);
        let alpha = DVector::from_row_slice(&[0.0]);
        let e = covariance_extended(&data, &pairs, &cfg, &beta, &alpha).unwrap();
        assert!(e.cov_alpha_bc0.is_none());
        assert!(e.cov_joint_bc0.is_none());
    }
}
