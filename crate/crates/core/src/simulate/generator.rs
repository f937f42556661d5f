//! Correlated binary vectors by thresholding a latent multivariate normal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::pairs;
use crate::error::{GeeError, Result};

use super::bvn::norm_quantile;
use super::tetrachoric::solve_tetrachoric;

/// Smallest eigenvalue kept when repairing a latent correlation matrix.
pub const EIGEN_FLOOR: f64 = 1e-8;
/// Largest spectral change accepted from a repair.
pub const MAX_REPAIR: f64 = 0.01;

/// Precomputed latent structure for one cluster.
#[derive(Debug, Clone)]
pub struct LatentSampler {
    thresholds: Vec<f64>,
    /// Lower Cholesky factor of the latent correlation matrix.
    factor: DMatrix<f64>,
    /// Spectral norm of the repair applied (0 if none was needed).
    pub repair: f64,
}

impl LatentSampler {
    /// `rho` lists pairwise correlations in canonical pair order.
    pub fn new(mu: &[f64], rho: &[f64]) -> Result<Self> {
        Self::with_solver(mu, rho, solve_tetrachoric)
    }

    /// Like [`LatentSampler::new`] with a custom (e.g. memoized) tetrachoric solver.
    pub fn with_solver<F>(mu: &[f64], rho: &[f64], mut solve: F) -> Result<Self>
    where
        F: FnMut(f64, f64, f64) -> Result<f64>,
    {
        let n = mu.len();
        if rho.len() != n * n.saturating_sub(1) / 2 {
            return Err(GeeError::InvalidData(format!(
                "{} correlations for a cluster of size {n}",
                rho.len()
            )));
        }
        if let Some(&m) = mu.iter().find(|m| !(**m > 0.0 && **m < 1.0)) {
            return Err(GeeError::InvalidData(format!("marginal mean {m} outside (0, 1)")));
        }
        let thresholds = mu.iter().map(|&m| norm_quantile(m)).collect();
        let mut latent = DMatrix::identity(n, n);
        for (row, (j, k)) in pairs(n).enumerate() {
            let r = solve(mu[j], mu[k], rho[row])?;
            latent[(j, k)] = r;
            latent[(k, j)] = r;
        }
        let (factor, repair) = match latent.clone().cholesky() {
            Some(ch) => (ch.l(), 0.0),
            None => {
                let (fixed, change) = repair(&latent)?;
                let ch = fixed.cholesky().ok_or(GeeError::LatentRepair {
                    change,
                    limit: MAX_REPAIR,
                })?;
                (ch.l(), change)
            }
        };
        Ok(LatentSampler {
            thresholds,
            factor,
            repair,
        })
    }

    pub fn size(&self) -> usize {
        self.thresholds.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let n = self.size();
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let latent = &self.factor * z;
        DVector::from_fn(n, |j, _| if latent[j] <= self.thresholds[j] { 1.0 } else { 0.0 })
    }
}

/// Clips eigenvalues at [`EIGEN_FLOOR`] and rescales to unit diagonal.
fn repair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let clipped = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let mut fixed = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let scale: Vec<f64> = (0..n).map(|i| 1.0 / fixed[(i, i)].sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            fixed[(i, j)] *= scale[i] * scale[j];
        }
    }
    let change = SymmetricEigen::new(&fixed - m)
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, l| a.max(l.abs()));
    if change > MAX_REPAIR {
        return Err(GeeError::LatentRepair {
            change,
            limit: MAX_REPAIR,
        });
    }
    Ok((fixed, change))
}

/// One draw of a binary vector with means `mu` and pairwise correlations `rho`.
pub fn generate_correlated_binary<R: Rng + ?Sized>(
    mu: &[f64],
    rho: &[f64],
    rng: &mut R,
) -> Result<DVector<f64>> {
    Ok(LatentSampler::new(mu, rho)?.sample(rng))
}
