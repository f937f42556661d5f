use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{GeeError, Result};
use crate::link::LinkKind;
use crate::par::Execution;

/// Default initial value for every correlation parameter.
pub const DEFAULT_START_ALPHA: f64 = 0.01;
pub const DEFAULT_MAX_ITER: usize = 20;
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Parameter shrinking applied when Fréchet range violations occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShrinkMode {
    #[default]
    None,
    Alpha,
    Theta,
}

impl FromStr for ShrinkMode {
    type Err = GeeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "none" | "no" => Ok(ShrinkMode::None),
            "alpha" => Ok(ShrinkMode::Alpha),
            "theta" => Ok(ShrinkMode::Theta),
            other => Err(GeeError::Config(format!("unknown shrink mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Alternating β / α updates.
    Extended,
    /// Joint Fisher-scoring update with the β→α cross information.
    Detailed,
}

impl FitMethod {
    pub fn name(self) -> &'static str {
        match self {
            FitMethod::Extended => "extended",
            FitMethod::Detailed => "detailed",
        }
    }
}

/// Fitting options with the standard defaults.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub mean_link: LinkKind,
    pub corr_link: LinkKind,
    pub max_iter: usize,
    pub epsilon: f64,
    /// `None` means "start from the independence GLM fit".
    pub start_beta: Option<DVector<f64>>,
    /// `None` means 0.01 for every correlation parameter.
    pub start_alpha: Option<DVector<f64>>,
    pub fix_alpha: bool,
    pub make_v_one: bool,
    pub shrink: ShrinkMode,
    pub print_range: bool,
    pub detailed: bool,
    pub execution: Execution,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            mean_link: LinkKind::Logit,
            corr_link: LinkKind::Identity,
            max_iter: DEFAULT_MAX_ITER,
            epsilon: DEFAULT_EPSILON,
            start_beta: None,
            start_alpha: None,
            fix_alpha: false,
            make_v_one: false,
            shrink: ShrinkMode::None,
            print_range: false,
            detailed: false,
            execution: Execution::default(),
        }
    }
}

impl FitConfig {
    pub fn method(&self) -> FitMethod {
        if self.detailed {
            FitMethod::Detailed
        } else {
            FitMethod::Extended
        }
    }

    pub fn start_alpha_for(&self, q: usize) -> DVector<f64> {
        self.start_alpha
            .clone()
            .unwrap_or_else(|| DVector::from_element(q, DEFAULT_START_ALPHA))
    }

    /// Checks option consistency against the model dimensions.
    pub fn validate(&self, p: usize, q: usize) -> Result<()> {
        if !self.mean_link.valid_for_mean() {
            return Err(GeeError::Config(format!(
                "{} is not available as a mean link",
                self.mean_link
            )));
        }
        if self.max_iter == 0 {
            return Err(GeeError::Config("max_iter must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(GeeError::Config("epsilon must be a positive number".into()));
        }
        if self.shrink != ShrinkMode::None && self.corr_link != LinkKind::Identity {
            return Err(GeeError::Config(format!(
                "parameter shrinking requires the identity correlation link, not {}",
                self.corr_link
            )));
        }
        if let Some(b) = &self.start_beta {
            if b.len() != p {
                return Err(GeeError::Config(format!(
                    "start_beta has {} values but there are {p} mean covariates",
                    b.len()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(GeeError::Config("start_beta must be finite".into()));
            }
        }
        if let Some(a) = &self.start_alpha {
            if a.len() != q {
                return Err(GeeError::Config(format!(
                    "start_alpha has {} values but there are {q} correlation covariates",
                    a.len()
                )));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(GeeError::Config("start_alpha must be finite".into()));
            }
        }
        Ok(())
    }

    /// Advisory messages about risky option combinations.
    pub fn warnings(&self, q: usize) -> Vec<String> {
        let mut out = Vec::new();
        let start = self.start_alpha_for(q);
        if matches!(self.corr_link, LinkKind::Log | LinkKind::Logit)
            && start.iter().all(|&a| a >= 0.0)
        {
            let floor = if self.corr_link == LinkKind::Log { "1" } else { "0.5" };
            out.push(format!(
                "{} correlation link with non-negative start alpha starts every correlation \
                 at or above {floor}; supply negative start values with start_alpha",
                self.corr_link
            ));
        }
        out
    }
}
