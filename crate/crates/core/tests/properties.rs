mod common;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use pairgee::diagnostics::{cluster_leverage, diagnostics};
use pairgee::{fit, Cluster, ClusterDataset, FitConfig, FitResult, PairCovariates};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::logistic_clusters;

fn dataset(seed: u64, k: usize, rho: f64) -> (ClusterDataset, PairCovariates) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = logistic_clusters(&mut rng, k, 1..=6, &[-0.4, 0.5, -0.3], rho, &|_| 1.0);
    let pairs = PairCovariates::exchangeable(&data).unwrap();
    (data, pairs)
}

fn tight(detailed: bool) -> FitConfig {
    FitConfig {
        detailed,
        epsilon: 1e-10,
        max_iter: 100,
        ..FitConfig::default()
    }
}

/// Fits, or returns `None` when the random data make the fit unusable.
fn try_fit(data: &ClusterDataset, pairs: &PairCovariates, cfg: &FitConfig) -> Option<FitResult> {
    fit(data, pairs, cfg).ok().filter(FitResult::converged)
}

fn assert_sym_psd(m: &DMatrix<f64>) {
    assert!((m - m.transpose()).amax() <= 1e-12 * m.amax().max(1.0));
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    assert!(eig.min() >= -1e-10, "eigenvalues {eig}");
}

fn permute(data: &ClusterDataset, order: &[usize]) -> ClusterDataset {
    ClusterDataset::new(order.iter().map(|&i| data.clusters()[i].clone()).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn covariances_are_symmetric_psd_and_bc2_inflates(seed in 0u64..10_000, detailed in any::<bool>()) {
        let (data, pairs) = dataset(seed, 60, 0.2);
        let Some(res) = try_fit(&data, &pairs, &tight(detailed)) else { return Ok(()) };
        let cov = res.covariance.unwrap();
        let mut blocks = vec![(&cov.cov_beta_bc0, &cov.cov_beta_bc2)];
        if let (Some(a0), Some(a2)) = (&cov.cov_alpha_bc0, &cov.cov_alpha_bc2) {
            blocks.push((a0, a2));
        }
        if let (Some(j0), Some(j2)) = (&cov.cov_joint_bc0, &cov.cov_joint_bc2) {
            blocks.push((j0, j2));
        }
        for (bc0, bc2) in blocks {
            assert_sym_psd(bc0);
            assert_sym_psd(bc2);
            for i in 0..bc0.nrows() {
                prop_assert!(bc2[(i, i)] >= bc0[(i, i)], "BC2 {} < BC0 {}", bc2[(i, i)], bc0[(i, i)]);
            }
        }
    }

    #[test]
    fn scores_vanish_at_convergence(seed in 0u64..10_000, detailed in any::<bool>()) {
        let (data, pairs) = dataset(seed, 60, 0.2);
        let Some(res) = try_fit(&data, &pairs, &tight(detailed)) else { return Ok(()) };
        prop_assert!(res.score_beta.amax() < 1e-6);
        prop_assert!(res.score_alpha.amax() < 1e-6);
    }

    #[test]
    fn extended_and_detailed_reach_the_same_estimates(seed in 0u64..10_000) {
        let (data, pairs) = dataset(seed, 60, 0.2);
        let (Some(e), Some(d)) = (try_fit(&data, &pairs, &tight(false)), try_fit(&data, &pairs, &tight(true))) else {
            return Ok(());
        };
        prop_assert!((&e.beta - &d.beta).amax() < 1e-3);
        prop_assert!((&e.alpha - &d.alpha).amax() < 1e-3);
    }

    #[test]
    fn leverage_traces_sum_to_dimensions(seed in 0u64..10_000) {
        let (data, pairs) = dataset(seed, 40, 0.2);
        let cfg = tight(false);
        let Some(res) = try_fit(&data, &pairs, &cfg) else { return Ok(()) };
        let lev = cluster_leverage(&data, &pairs, &cfg, &res.beta, &res.alpha).unwrap();
        let h1: f64 = lev.iter().map(|l| l.h1).sum();
        let h2: f64 = lev.iter().map(|l| l.h2.unwrap()).sum();
        prop_assert!((h1 - 3.0).abs() < 1e-10, "{h1}");
        prop_assert!((h2 - 1.0).abs() < 1e-10, "{h2}");
    }

    #[test]
    fn cluster_order_does_not_matter(seed in 0u64..10_000, detailed in any::<bool>(), shift in 1usize..29) {
        let (data, pairs) = dataset(seed, 30, 0.2);
        let cfg = tight(detailed);
        let Some(a) = try_fit(&data, &pairs, &cfg) else { return Ok(()) };
        let order: Vec<usize> = (0..data.len()).map(|i| (i * 7 + shift) % data.len()).collect();
        let moved = permute(&data, &order);
        let moved_pairs = PairCovariates::exchangeable(&moved).unwrap();
        let b = try_fit(&moved, &moved_pairs, &cfg).expect("permuted fit converges");
        prop_assert!((&a.beta - &b.beta).amax() < 1e-9);
        prop_assert!((&a.alpha - &b.alpha).amax() < 1e-9);
        let (sa, sb) = (a.selection.unwrap(), b.selection.unwrap());
        prop_assert!((sa.tecm - sb.tecm).abs() < 1e-9 * sa.tecm);
        prop_assert!((sa.lg - sb.lg).abs() < 1e-8 * sa.lg.abs().max(1.0));

        let da = diagnostics(&data, &pairs, &cfg, &a.beta, &a.alpha, a.covariance.as_ref().unwrap()).unwrap();
        let db = diagnostics(&moved, &moved_pairs, &cfg, &b.beta, &b.alpha, b.covariance.as_ref().unwrap()).unwrap();
        for (pos, &orig) in order.iter().enumerate() {
            let (ra, rb) = (&da.clusters[orig], &db.clusters[pos]);
            prop_assert_eq!(&ra.id, &rb.id);
            prop_assert!((&ra.dbetac - &rb.dbetac).amax() < 1e-8);
            prop_assert!((ra.dcls - rb.dcls).abs() < 1e-8 * ra.dcls.max(1e-6));
            prop_assert!(ra.dcls >= 0.0 && ra.dcls_beta >= 0.0);
        }
    }

    #[test]
    fn row_order_within_clusters_does_not_move_gpc(seed in 0u64..10_000) {
        let (data, pairs) = dataset(seed, 30, 0.2);
        let cfg = tight(false);
        let Some(a) = try_fit(&data, &pairs, &cfg) else { return Ok(()) };
        let reversed = ClusterDataset::new(
            data.clusters()
                .iter()
                .map(|c| {
                    let n = c.size();
                    let y = DVector::from_fn(n, |j, _| c.y[n - 1 - j]);
                    let x = DMatrix::from_fn(n, c.x.ncols(), |j, col| c.x[(n - 1 - j, col)]);
                    Cluster::new(c.id.clone(), y, x, c.weight)
                })
                .collect(),
        )
        .unwrap();
        let b = try_fit(&reversed, &PairCovariates::exchangeable(&reversed).unwrap(), &cfg).unwrap();
        let (sa, sb) = (a.selection.unwrap(), b.selection.unwrap());
        prop_assert!((sa.gpc - sb.gpc).abs() < 1e-9 * sa.gpc.max(1.0));
        prop_assert!((sa.cic - sb.cic).abs() < 1e-8 * sa.cic.abs().max(1.0));
    }
}
