//! Reference oracles and data generators used by the acceptance suite.

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use pairgee::simulate::generate_correlated_binary;
use pairgee::{frechet_bounds, Cluster, ClusterDataset};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Intercept plus standard-normal covariates, responses drawn with
/// exchangeable correlation `rho`, clamped into each pair's bounds (0 gives
/// independent responses).
pub fn logistic_clusters(
    rng: &mut ChaCha8Rng,
    k: usize,
    sizes: RangeInclusive<usize>,
    beta: &[f64],
    rho: f64,
    weights: &dyn Fn(usize) -> f64,
) -> ClusterDataset {
    let p = beta.len();
    let clusters = (0..k)
        .map(|i| {
            let n = rng.random_range(sizes.clone());
            let x = DMatrix::from_fn(n, p, |_, c| {
                if c == 0 {
                    1.0
                } else {
                    rng.sample::<f64, _>(rand_distr::StandardNormal)
                }
            });
            let mu: Vec<f64> = (0..n)
                .map(|j| expit((0..p).map(|c| x[(j, c)] * beta[c]).sum()))
                .collect();
            // Keep every pair strictly inside its bounds.
            let mut rhos = Vec::with_capacity(n * (n - 1) / 2);
            for j in 0..n {
                for k in j + 1..n {
                    let (lower, upper) = frechet_bounds(mu[j], mu[k]);
                    rhos.push(rho.clamp(0.9 * lower, 0.9 * upper));
                }
            }
            let y = generate_correlated_binary(&mu, &rhos, rng).expect("feasible draw");
            Cluster::new(format!("k{i}"), y, x, weights(i))
        })
        .collect();
    ClusterDataset::new(clusters).expect("valid clusters")
}

/// Weighted logistic maximum likelihood by plain Newton–Raphson.
pub fn logistic_newton(data: &ClusterDataset) -> DVector<f64> {
    let p = data.p();
    let mut beta = DVector::<f64>::zeros(p);
    for _ in 0..100 {
        let mut info = DMatrix::<f64>::zeros(p, p);
        let mut score = DVector::<f64>::zeros(p);
        for c in data.clusters() {
            for j in 0..c.size() {
                let x = c.x.row(j).transpose();
                let mu = expit(x.dot(&beta));
                info += c.weight * mu * (1.0 - mu) * &x * x.transpose();
                score += c.weight * (c.y[j] - mu) * &x;
            }
        }
        let step = info.cholesky().expect("positive definite information").solve(&score);
        beta += &step;
        if step.amax() < 1e-14 {
            break;
        }
    }
    beta
}

/// Joint probabilities (p00, p01, p10, p11) of two binary variables.
pub fn joint_probabilities(mu_j: f64, mu_k: f64, rho: f64) -> [f64; 4] {
    let p11 = mu_j * mu_k + rho * (mu_j * (1.0 - mu_j) * mu_k * (1.0 - mu_k)).sqrt();
    [1.0 - mu_j - mu_k + p11, mu_k - p11, mu_j - p11, p11]
}

/// Outcome pairs in the order used by [`joint_probabilities`].
pub const OUTCOMES: [(f64, f64); 4] = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];

/// Pearson correlation of two columns of draws.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
