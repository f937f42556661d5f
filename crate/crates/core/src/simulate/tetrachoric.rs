//! Latent normal correlation reproducing a target binary correlation.

use crate::error::{GeeError, Result};
use crate::frechet::frechet_bounds;

use super::bvn::{bvn_cdf, bvn_pdf, norm_quantile};

const TOL: f64 = 1e-10;
/// Slack on the Fréchet check for targets sitting exactly on a bound.
const BOUND_SLACK: f64 = 1e-12;

/// Solves Φ₂(z_j, z_k; r) = μ_jμ_k + ρ√(μ_j(1−μ_j)μ_k(1−μ_k)) for r, where
/// z = Φ⁻¹(μ) so that Y = 1{Z ≤ z} has mean μ.
pub fn solve_tetrachoric(mu_j: f64, mu_k: f64, rho: f64) -> Result<f64> {
    let (lower, upper) = frechet_bounds(mu_j, mu_k);
    if !(rho >= lower - BOUND_SLACK && rho <= upper + BOUND_SLACK) {
        return Err(GeeError::Infeasible {
            mu_j,
            mu_k,
            rho,
            lower,
            upper,
        });
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let target = mu_j * mu_k + rho * (mu_j * (1.0 - mu_j) * mu_k * (1.0 - mu_k)).sqrt();
    let (zj, zk) = (norm_quantile(mu_j), norm_quantile(mu_k));
    let f = |r: f64| bvn_cdf(zj, zk, r) - target;
    if rho >= upper - BOUND_SLACK {
        return Ok(1.0);
    }
    if rho <= lower + BOUND_SLACK {
        return Ok(-1.0);
    }
    // f is increasing in r; keep a bracket and take Newton steps inside it.
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut r = rho.clamp(-0.999, 0.999);
    for _ in 0..200 {
        let fr = f(r);
        if fr == 0.0 {
            return Ok(r);
        }
        if fr < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let slope = bvn_pdf(zj, zk, r);
        let newton = r - fr / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - r).abs() < TOL || hi - lo < TOL {
            return Ok(next);
        }
        r = next;
    }
    Err(GeeError::RootSolve { mu_j, mu_k, rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    #[allow(clippy::approx_constant)]
    fn closed_form_at_half() {
        for rho in [-0.9, -0.5, -0.2, 0.1, 0.5, 0.8] {
            let r = solve_tetrachoric(0.5, 0.5, rho).unwrap();
            assert!((r - (PI * rho / 2.0).sin()).abs() < 1e-10, "rho={rho}");
        }
        assert!((solve_tetrachoric(0.5, 0.5, 0.5).unwrap() - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn endpoints() {
        assert_eq!(solve_tetrachoric(0.3, 0.7, 0.0).unwrap(), 0.0);
        assert_eq!(solve_tetrachoric(0.5, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(solve_tetrachoric(0.5, 0.5, -1.0).unwrap(), -1.0);
    }

    #[test]
    fn reproduces_target_joint_probability() {
        for &(a, b, rho) in &[(0.05, 0.1, 0.03), (0.2, 0.6, -0.2), (0.9, 0.85, 0.4), (0.02, 0.03, 0.01)] {
            let r = solve_tetrachoric(a, b, rho).unwrap();
            let p11 = bvn_cdf(norm_quantile(a), norm_quantile(b), r);
            let target = a * b + rho * (a * (1.0 - a) * b * (1.0 - b)).sqrt();
            assert!((p11 - target).abs() < 1e-11);
        }
    }

    #[test]
    fn infeasible_target_names_triple() {
        let err = solve_tetrachoric(0.2, 0.5, 0.6).unwrap_err();
        match err {
            GeeError::Infeasible { mu_j, mu_k, rho, .. } => {
                assert_eq!((mu_j, mu_k, rho), (0.2, 0.5, 0.6));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn monotone_in_rho() {
        for &(a, b) in &[(0.1, 0.2), (0.5, 0.3), (0.7, 0.8)] {
            let (lo, hi) = frechet_bounds(a, b);
            let mut last = -2.0;
            for i in 1..40 {
                let rho = lo + (hi - lo) * i as f64 / 40.0;
                let r = solve_tetrachoric(a, b, rho).unwrap();
                assert!(r > last);
                last = r;
            }
        }
    }
}
