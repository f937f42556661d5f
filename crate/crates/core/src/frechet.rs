//! Natural bounds on the correlation of two Bernoulli variables.

use crate::data::{pairs, Cluster};
use crate::work::ClusterWork;

/// A pair whose modelled correlation lies outside its Fréchet bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeViolation {
    pub cluster: String,
    /// 1-based unit indices.
    pub j: usize,
    pub k: usize,
    pub mu_j: f64,
    pub mu_k: f64,
    pub rho: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Violations found while evaluating one iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RangeReport {
    pub iteration: usize,
    pub violations: Vec<RangeViolation>,
}

impl RangeReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// (lower, upper) bounds on corr(Y_j, Y_k) given the two means.
pub fn frechet_bounds(mu_j: f64, mu_k: f64) -> (f64, f64) {
    let psi_j = (mu_j / (1.0 - mu_j)).sqrt();
    let psi_k = (mu_k / (1.0 - mu_k)).sqrt();
    let prod = psi_j * psi_k;
    let lower = (-prod).max(-1.0 / prod);
    let upper = (psi_j / psi_k).min(psi_k / psi_j);
    (lower, upper)
}

pub fn violates(mu_j: f64, mu_k: f64, rho: f64) -> Option<(f64, f64)> {
    let (lower, upper) = frechet_bounds(mu_j, mu_k);
    (rho < lower || rho > upper).then_some((lower, upper))
}

/// Flags every pair of the cluster whose ρ lies outside its bounds.
pub fn frechet_check(work: &ClusterWork, cluster: &Cluster) -> Vec<RangeViolation> {
    check_pairs(&work.mu, &work.rho, cluster)
}

pub(crate) fn check_pairs(
    mu: &nalgebra::DVector<f64>,
    rho: &nalgebra::DVector<f64>,
    cluster: &Cluster,
) -> Vec<RangeViolation> {
    let n = mu.len();
    let psi: Vec<f64> = mu.iter().map(|&m| (m / (1.0 - m)).sqrt()).collect();
    let mut out = Vec::new();
    for (row, (j, k)) in pairs(n).enumerate() {
        let (a, b, r) = (psi[j], psi[k], rho[row]);
        // Division-free form of r < max(−ab, −1/(ab)) or r > min(a/b, b/a).
        let outside = r < -a * b || r * a * b < -1.0 || r * b > a || r * a > b;
        if outside {
            let (lower, upper) = frechet_bounds(mu[j], mu[k]);
            out.push(RangeViolation {
                cluster: cluster.id.clone(),
                j: j + 1,
                k: k + 1,
                mu_j: mu[j],
                mu_k: mu[k],
                rho: r,
                lower,
                upper,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_examples() {
        let (l, u) = frechet_bounds(0.5, 0.5);
        assert!((l + 1.0).abs() < 1e-15 && (u - 1.0).abs() < 1e-15);
        let (l, u) = frechet_bounds(0.2, 0.5);
        assert!((l + 0.5).abs() < 1e-15 && (u - 0.5).abs() < 1e-15);
        assert!(violates(0.2, 0.5, 0.6).is_some());
        assert!(violates(0.2, 0.5, 0.4).is_none());
    }

    #[test]
    fn agrees_with_joint_probability_bounds() {
        for a in 1..20 {
            for b in 1..20 {
                for c in 0..20 {
                    let (mj, mk) = (a as f64 / 20.0 - 0.025, b as f64 / 20.0 - 0.025);
                    let rho = -0.95 + 0.1 * c as f64;
                    let p11 = mj * mk + rho * (mj * (1.0 - mj) * mk * (1.0 - mk)).sqrt();
                    let brute = p11 < (mj + mk - 1.0).max(0.0) || p11 > mj.min(mk);
                    assert_eq!(violates(mj, mk, rho).is_some(), brute, "{mj} {mk} {rho}");
                }
            }
        }
    }
}
