//! Working-correlation selection criteria.
//!
//! Larger `lg` is better; smaller `cic`, `tecm` and `gpc` are better.

use nalgebra::{DMatrix, DVector};

use crate::config::FitConfig;
use crate::data::{ClusterDataset, PairCovariates};
use crate::error::Result;
use crate::par;
use crate::variance::{deleted_solve, fitted, CovarianceSet, Fitted};
use crate::work::mean_part;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionCriteria {
    pub cic: f64,
    pub tecm: f64,
    /// Gaussian pseudo-log-likelihood without the 2π constant.
    pub lg: f64,
    pub gpc: f64,
}

/// Which of two fits each criterion prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Votes {
    pub cic: bool,
    pub tecm: bool,
    pub lg: bool,
    pub gpc: bool,
}

impl SelectionCriteria {
    /// `true` entries mean `self` is preferred over `other` by that criterion.
    pub fn preferred_over(&self, other: &SelectionCriteria) -> Votes {
        Votes {
            cic: self.cic < other.cic,
            tecm: self.tecm < other.tecm,
            lg: self.lg > other.lg,
            gpc: self.gpc < other.gpc,
        }
    }
}

pub fn selection_criteria(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    cov: &CovarianceSet,
) -> Result<SelectionCriteria> {
    let f = fitted(data, pairs, config, beta, alpha)?;
    selection_from(data, config, beta, &f, cov)
}

pub(crate) fn selection_from(
    data: &ClusterDataset,
    config: &FitConfig,
    beta: &DVector<f64>,
    f: &Fitted,
    cov: &CovarianceSet,
) -> Result<SelectionCriteria> {
    let p = data.p();
    let link = config.mean_link;
    let parts = par::try_map(config.execution, data.clusters(), |i, c| {
        let mean = mean_part(c, beta, link)?;
        let mut scaled = mean.d.clone();
        for j in 0..c.size() {
            scaled.row_mut(j).scale_mut(1.0 / (mean.sd[j] * mean.sd[j]));
        }
        let omega = mean.d.tr_mul(&scaled);
        let t = &f.terms[i];
        let shift = deleted_solve(&f.info_beta, &t.info_beta, &t.score_beta, &c.id, "mean")?;
        let eta = &c.x * (beta - shift);
        let press: f64 = (0..c.size())
            .map(|j| (c.y[j] - link.inverse(eta[j])).powi(2))
            .sum();
        Ok((omega, press))
    })?;
    let mut omega = DMatrix::zeros(p, p);
    let (mut lg, mut gpc) = (0.0, 0.0);
    for ((c, t), (om, press)) in data.clusters().iter().zip(&f.terms).zip(parts) {
        omega += c.weight * om;
        lg -= 0.5 * c.weight * (t.quad + t.logdet);
        gpc += c.weight * press;
    }
    Ok(SelectionCriteria {
        cic: (omega * &cov.cov_beta_bc0).trace(),
        tecm: cov.cov_beta_bc0.trace(),
        lg,
        gpc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation() {
        let a = SelectionCriteria { cic: 3.0, tecm: 0.1, lg: -10.0, gpc: 5.0 };
        let b = SelectionCriteria { cic: 4.0, tecm: 0.2, lg: -12.0, gpc: 6.0 };
        let v = a.preferred_over(&b);
        assert!(v.cic && v.tecm && v.lg && v.gpc);
        let w = b.preferred_over(&a);
        assert!(!w.cic && !w.tecm && !w.lg && !w.gpc);
    }
}
