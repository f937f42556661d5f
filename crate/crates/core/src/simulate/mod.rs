//! Correlated binary data generation and simulation studies.

pub mod bvn;
pub mod design;
pub mod generator;
pub mod metrics;
pub mod run;
pub mod scenario;
pub mod tetrachoric;

pub use bvn::{bvn_cdf, norm_cdf, norm_quantile};
pub use design::{CampDesign, Design, ExchangeableDesign};
pub use generator::{generate_correlated_binary, LatentSampler};
pub use metrics::{sim_metrics, ParamMetrics};
pub use run::{run_simulation, DesignSpec, MethodReport, MethodSet, ReplicateFit, SimConfig, SimReport};
pub use scenario::{load_scenario, parse_scenario};
pub use tetrachoric::solve_tetrachoric;
