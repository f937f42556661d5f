//! Marginal mean and pairwise correlation models for clustered binary data,
//! fitted by paired estimating equations.
//!
//! ```no_run
//! use pairgee::{fit, load_inputs, FitConfig, InputColumns};
//!
//! let cols = InputColumns::new("camp", "gts", &["one", "priming"], &["same", "diff"], "w");
//! let (data, pairs) = load_inputs("xy.csv".as_ref(), "z.csv".as_ref(), "w.csv".as_ref(), &cols)?;
//! let res = fit(&data, &pairs, &FitConfig::default())?;
//! println!("{}", res.beta);
//! # Ok::<(), pairgee::GeeError>(())
//! ```

pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod frechet;
pub mod link;
pub mod par;
pub mod selection;
pub mod simulate;
pub mod variance;
pub mod work;

pub use config::{FitConfig, FitMethod, ShrinkMode};
pub use data::{load_inputs, pair_row_offset, Cluster, ClusterDataset, InputColumns, PairCovariates};
pub use diagnostics::{diagnostics, predicted_probabilities, DiagnosticsTable};
pub use error::{GeeError, Result};
pub use fit::{fit, fit_estimates, FitResult, FitStatus, ThetaState};
pub use frechet::{frechet_bounds, RangeReport, RangeViolation};
pub use link::{LinkKind, LinkMode};
pub use par::Execution;
pub use selection::SelectionCriteria;
pub use variance::CovarianceSet;
