//! Fixed covariate designs for simulation studies.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Cluster, ClusterDataset, PairCovariates};
use crate::error::{GeeError, Result};
use crate::link::LinkKind;

/// Covariates and pair covariates of a simulation design. Outcomes are
/// placeholders until replaced by generated data.
#[derive(Debug, Clone)]
pub struct Design {
    pub data: ClusterDataset,
    pub pairs: PairCovariates,
    pub beta_names: Vec<String>,
    pub alpha_names: Vec<String>,
}

impl Design {
    /// Marginal means per cluster under `beta`.
    pub fn means(&self, beta: &DVector<f64>, link: LinkKind) -> Vec<Vec<f64>> {
        self.data
            .clusters()
            .iter()
            .map(|c| (&c.x * beta).iter().map(|&e| link.inverse(e)).collect())
            .collect()
    }

    /// Pairwise correlations per cluster under `alpha`.
    pub fn correlations(&self, alpha: &DVector<f64>, link: LinkKind) -> Vec<Vec<f64>> {
        self.pairs
            .blocks()
            .iter()
            .map(|z| (z * alpha).iter().map(|&e| link.inverse(e)).collect())
            .collect()
    }
}

/// Parameters of the work-camp design: camps of workers followed over days.
#[derive(Debug, Clone, PartialEq)]
pub struct CampDesign {
    pub clusters: usize,
    pub workers_min: usize,
    pub workers_max: usize,
    pub days_mean: f64,
    pub days_sd: f64,
    pub days_min: usize,
    pub size_min: usize,
    pub size_max: usize,
    /// Probabilities of the three non-reference work types.
    pub work_type: [f64; 3],
    pub p_inexperienced: f64,
    pub p_tobacco: f64,
    pub p_wet: f64,
    /// SD of centred temperature in units of 10 degrees.
    pub temp_sd: f64,
}

impl Default for CampDesign {
    fn default() -> Self {
        CampDesign {
            clusters: 111,
            workers_min: 2,
            workers_max: 9,
            days_mean: 22.0,
            days_sd: 10.0,
            days_min: 3,
            size_min: 20,
            size_max: 208,
            work_type: [0.3, 0.2, 0.2],
            p_inexperienced: 0.5,
            p_tobacco: 0.3,
            p_wet: 0.2,
            temp_sd: 0.5,
        }
    }
}

pub const CAMP_BETA_NAMES: [&str; 8] = [
    "intercept",
    "priming",
    "priming_barning",
    "other_barning",
    "experience_lt5",
    "wet_clothes",
    "temperature",
    "tobacco",
];

pub const CAMP_ALPHA_NAMES: [&str; 2] = ["same_worker", "different_worker"];

impl CampDesign {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GeeError::Config(format!("camp design: {m}")));
        if self.clusters == 0 {
            return bad("clusters must be positive");
        }
        if self.workers_min == 0 || self.workers_min > self.workers_max {
            return bad("worker range is empty");
        }
        if self.size_min > self.size_max || self.size_max < self.workers_min * self.days_min.max(1) {
            return bad("cluster size range cannot be met");
        }
        let probs = [
            self.p_inexperienced,
            self.p_tobacco,
            self.p_wet,
            self.work_type.iter().sum(),
        ];
        if probs.iter().chain(&self.work_type).any(|p| !(0.0..=1.0).contains(p)) {
            return bad("probabilities must lie in [0, 1]");
        }
        if !(self.days_sd >= 0.0 && self.temp_sd >= 0.0) {
            return bad("standard deviations must be non-negative");
        }
        Ok(())
    }

    /// Draws the design. Worker rows are contiguous within a camp.
    pub fn build(&self, seed: u64) -> Result<Design> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let days_dist = Normal::new(self.days_mean, self.days_sd)
            .map_err(|e| GeeError::Config(format!("camp design: {e}")))?;
        let temp_dist = Normal::new(0.0, self.temp_sd)
            .map_err(|e| GeeError::Config(format!("camp design: {e}")))?;
        let mut clusters = Vec::with_capacity(self.clusters);
        let mut workers_of = Vec::with_capacity(self.clusters);
        for c in 0..self.clusters {
            let days = loop {
                let w = rng.random_range(self.workers_min..=self.workers_max);
                let days: Vec<usize> = (0..w)
                    .map(|_| (days_dist.sample(&mut rng).round().max(self.days_min as f64)) as usize)
                    .collect();
                let total: usize = days.iter().sum();
                if (self.size_min..=self.size_max).contains(&total) {
                    break days;
                }
            };
            let n: usize = days.iter().sum();
            let mut x = DMatrix::zeros(n, 8);
            let mut worker = Vec::with_capacity(n);
            let mut row = 0;
            for (w, &d) in days.iter().enumerate() {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut wt = None;
                for (t, &p) in self.work_type.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        wt = Some(t);
                        break;
                    }
                }
                let inexperienced = rng.random_bool(self.p_inexperienced);
                let tobacco = rng.random_bool(self.p_tobacco);
                for _ in 0..d {
                    x[(row, 0)] = 1.0;
                    if let Some(t) = wt {
                        x[(row, 1 + t)] = 1.0;
                    }
                    x[(row, 4)] = f64::from(u8::from(inexperienced));
                    x[(row, 5)] = f64::from(u8::from(rng.random_bool(self.p_wet)));
                    x[(row, 6)] = (temp_dist.sample(&mut rng) * 10.0).round() / 10.0;
                    x[(row, 7)] = f64::from(u8::from(tobacco));
                    worker.push(w);
                    row += 1;
                }
            }
            clusters.push(Cluster::new(format!("camp{}", c + 1), DVector::zeros(n), x, 1.0));
            workers_of.push(worker);
        }
        let data = ClusterDataset::new(clusters)?;
        let pairs = PairCovariates::from_fn(&data, 2, |ci, j, k| {
            let same = workers_of[ci][j] == workers_of[ci][k];
            if same {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            }
        })?;
        Ok(Design {
            data,
            pairs,
            beta_names: CAMP_BETA_NAMES.iter().map(|s| s.to_string()).collect(),
            alpha_names: CAMP_ALPHA_NAMES.iter().map(|s| s.to_string()).collect(),
        })
    }
}

/// Equal-size clusters with an intercept, a within-cluster covariate drawn
/// uniformly on [-x_scale, x_scale] and a cluster-level binary covariate; one
/// exchangeable correlation parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeableDesign {
    pub clusters: usize,
    pub size: usize,
    pub x_scale: f64,
    pub p_group: f64,
}

impl Default for ExchangeableDesign {
    fn default() -> Self {
        ExchangeableDesign {
            clusters: 300,
            size: 5,
            x_scale: 1.0,
            p_group: 0.5,
        }
    }
}

impl ExchangeableDesign {
    pub fn build(&self, seed: u64) -> Result<Design> {
        if self.clusters == 0 || self.size == 0 {
            return Err(GeeError::Config("exchangeable design needs clusters and size > 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let clusters = (0..self.clusters)
            .map(|c| {
                let g = f64::from(u8::from(rng.random_bool(self.p_group)));
                let x = DMatrix::from_fn(self.size, 3, |_, col| match col {
                    0 => 1.0,
                    1 => rng.random_range(-self.x_scale..=self.x_scale),
                    _ => g,
                });
                Cluster::new(format!("c{}", c + 1), DVector::zeros(self.size), x, 1.0)
            })
            .collect();
        let data = ClusterDataset::new(clusters)?;
        let pairs = PairCovariates::exchangeable(&data)?;
        Ok(Design {
            data,
            pairs,
            beta_names: vec!["intercept".into(), "x".into(), "group".into()],
            alpha_names: vec!["rho".into()],
        })
    }
}
