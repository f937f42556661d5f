mod common;

use nalgebra::{DMatrix, DVector};
use pairgee::diagnostics::{cluster_leverage, deletion_diagnostics};
use pairgee::simulate::{run_simulation, solve_tetrachoric, DesignSpec, ExchangeableDesign, MethodSet, SimConfig};
use pairgee::work::var_r;
use std::f64::consts::FRAC_1_SQRT_2;
use pairgee::{diagnostics, fit, Cluster, ClusterDataset, FitConfig, PairCovariates};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::logistic_clusters;

fn exchangeable(data: &ClusterDataset) -> PairCovariates {
    PairCovariates::exchangeable(data).unwrap()
}

#[test]
fn reference_values() {
    assert!((var_r(0.2, 0.3, 0.1) - 1.1209).abs() < 5e-5);
    assert!((solve_tetrachoric(0.5, 0.5, 0.5).unwrap() - FRAC_1_SQRT_2).abs() < 1e-9);
}

#[test]
fn duplicated_clusters_share_diagnostics() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let base = logistic_clusters(&mut rng, 40, 2..=6, &[-0.3, 0.5], 0.2, &|_| 1.0);
    let mut clusters = base.clusters().to_vec();
    let mut copy = clusters[7].clone();
    copy.id = "copy".into();
    clusters.push(copy);
    let data = ClusterDataset::new(clusters).unwrap();
    let pairs = exchangeable(&data);
    for detailed in [false, true] {
        let cfg = FitConfig { detailed, epsilon: 1e-10, ..FitConfig::default() };
        let res = fit(&data, &pairs, &cfg).unwrap();
        let cov = res.covariance.as_ref().unwrap();
        let table = diagnostics(&data, &pairs, &cfg, &res.beta, &res.alpha, cov).unwrap();
        let (a, b) = (&table.clusters[7], &table.clusters[40]);
        assert!((a.h1 - b.h1).abs() < 1e-12);
        assert!((a.dbetac.clone() - &b.dbetac).amax() < 1e-12);
        assert!((a.dcls - b.dcls).abs() < 1e-12);
    }
}

#[test]
fn identical_clusters_share_leverage_evenly() {
    let k = 20;
    let y = DVector::from_row_slice(&[0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
    let x = DMatrix::from_fn(8, 2, |j, c| if c == 0 { 1.0 } else { j as f64 / 7.0 - 0.5 });
    let data = ClusterDataset::new((0..k).map(|i| Cluster::new(format!("c{i}"), y.clone(), x.clone(), 1.0)).collect())
        .unwrap();
    let pairs = exchangeable(&data);
    // A free α drifts to -1/(n-1) here and leaves V singular.
    let cfg = FitConfig {
        epsilon: 1e-10,
        fix_alpha: true,
        start_alpha: Some(DVector::from_element(1, 0.1)),
        ..FitConfig::default()
    };
    let res = fit(&data, &pairs, &cfg).unwrap();
    assert!(res.converged());
    for lev in cluster_leverage(&data, &pairs, &cfg, &res.beta, &res.alpha).unwrap() {
        assert!((lev.h1 - 2.0 / k as f64).abs() < 1e-10);
        if let Some(h2) = lev.h2 {
            assert!((h2 - 1.0 / k as f64).abs() < 1e-10);
        }
    }
}

#[test]
fn one_step_deletion_tracks_exact_refits() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let data = logistic_clusters(&mut rng, 200, 2..=6, &[-0.3, 0.5, -0.4], 0.15, &|_| 1.0);
    let pairs = exchangeable(&data);
    let cfg = FitConfig { epsilon: 1e-10, max_iter: 100, ..FitConfig::default() };
    let res = fit(&data, &pairs, &cfg).unwrap();
    let del = deletion_diagnostics(&data, &pairs, &cfg, &res.beta, &res.alpha).unwrap();
    let refit_cfg = FitConfig {
        start_beta: Some(res.beta.clone()),
        start_alpha: Some(res.alpha.clone()),
        ..cfg.clone()
    };
    let mut total = 0.0;
    for i in 0..data.len() {
        let d = data.without_cluster(i).unwrap();
        let exact = fit(&d, &pairs.without_cluster(i), &refit_cfg).unwrap();
        let change = &res.beta - &exact.beta;
        total += (&del.dbetac[i] - &change).norm() / change.norm();
    }
    let mean = total / data.len() as f64;
    assert!(mean < 0.10, "mean relative error {mean}");
}

#[test]
fn cic_matches_dimension_under_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cfg = FitConfig {
        fix_alpha: true,
        start_alpha: Some(DVector::zeros(1)),
        ..FitConfig::default()
    };
    let mut cics = Vec::new();
    for _ in 0..500 {
        let data = logistic_clusters(&mut rng, 150, 1..=6, &[-0.3, 0.5, -0.4], 0.0, &|_| 1.0);
        let res = fit(&data, &exchangeable(&data), &cfg).unwrap();
        cics.push(res.selection.unwrap().cic);
    }
    let mean = cics.iter().sum::<f64>() / cics.len() as f64;
    assert!((mean - 3.0).abs() < 0.3, "mean CIC {mean}");
}

#[test]
fn sandwich_variance_matches_monte_carlo() {
    let design = ExchangeableDesign { clusters: 100, ..ExchangeableDesign::default() };
    let mut cfg = SimConfig::new(
        DesignSpec::Exchangeable(design),
        DVector::from_row_slice(&[-0.5, 0.5, 0.5]),
        DVector::from_row_slice(&[0.3]),
    );
    cfg.replicates = 1000;
    cfg.seed = 3;
    cfg.methods = MethodSet::Extended;
    let report = run_simulation(&cfg).unwrap();
    let m = &report.methods[0];
    assert!(m.convergence_rate() > 99.0);
    for p in m.beta.iter().chain(&m.alpha) {
        assert!(p.var_bias_bc2.abs() < 25.0, "{p:?}");
    }
    for p in &m.beta {
        assert!(p.var_bias_bc0.abs() < 25.0, "{p:?}");
    }
}

#[test]
fn range_reports_follow_print_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data = logistic_clusters(&mut rng, 60, 3..=6, &[-2.0, 0.5], 0.0, &|_| 1.0);
    let pairs = exchangeable(&data);
    let base = FitConfig {
        fix_alpha: true,
        start_alpha: Some(DVector::from_element(1, 0.5)),
        max_iter: 4,
        ..FitConfig::default()
    };
    let quiet = fit(&data, &pairs, &base).unwrap();
    assert_eq!(quiet.range_reports.len(), 1);
    assert_eq!(quiet.range_reports[0].iteration, quiet.iterations);

    let loud = fit(&data, &pairs, &FitConfig { print_range: true, ..base }).unwrap();
    let iters: Vec<usize> = loud.range_reports.iter().map(|r| r.iteration).collect();
    assert!(iters.len() > 1 && iters.windows(2).all(|w| w[0] < w[1]), "{iters:?}");
    assert_eq!(iters.last(), Some(&loud.iterations));
    for v in loud.range_reports.iter().flat_map(|r| &r.violations) {
        assert!(v.rho < v.lower || v.rho > v.upper);
        assert!(v.j < v.k);
    }
}
