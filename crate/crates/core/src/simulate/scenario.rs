//! Simulation scenario files: `key = value` lines, `#` comments, vectors as
//! comma-separated numbers.
//!
//! ```text
//! version = 1
//! design = camp
//! clusters = 111
//! replicates = 1000
//! seed = 20240601
//! beta = -3.9, 1.3, 0.4, -0.7, 0.4, 0.9, 0.4, -0.4
//! alpha = 0.03, 0.01
//! methods = both
//! ```

use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;

use crate::config::{DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use crate::error::{GeeError, Result};

use super::design::{CampDesign, ExchangeableDesign};
use super::run::{DesignSpec, MethodSet, SimConfig};

pub const SCENARIO_VERSION: u32 = 1;

struct Ctx<'a> {
    path: &'a str,
    line: usize,
}

impl Ctx<'_> {
    fn err(&self, message: impl Into<String>) -> GeeError {
        GeeError::Scenario {
            path: self.path.to_string(),
            line: self.line,
            message: message.into(),
        }
    }

    fn num<T: FromStr>(&self, key: &str, v: &str) -> Result<T> {
        v.parse()
            .map_err(|_| self.err(format!("`{key}` expects a number, got `{v}`")))
    }

    fn vec(&self, key: &str, v: &str) -> Result<Vec<f64>> {
        v.split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.err(format!("`{key}` has a bad entry `{t}`")))
            })
            .collect()
    }
}

/// Parses scenario text; `path` is used in error messages only.
pub fn parse_scenario(text: &str, path: &str) -> Result<SimConfig> {
    let mut version = None;
    let mut design_kind = "camp".to_string();
    let mut design_line = 0;
    let mut camp = CampDesign::default();
    let mut exch = ExchangeableDesign::default();
    let mut clusters = None;
    let mut replicates = None;
    let mut seed = 1u64;
    let mut design_seed = None;
    let mut beta = None;
    let mut alpha = None;
    let mut methods = MethodSet::Both;
    let mut max_iter = DEFAULT_MAX_ITER;
    let mut epsilon = DEFAULT_EPSILON;
    let mut seen = std::collections::HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let ctx = Ctx { path, line: idx + 1 };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ctx.err("expected `key = value`"))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        if !seen.insert(key.clone()) {
            return Err(ctx.err(format!("duplicate key `{key}`")));
        }
        match key.as_str() {
            "version" => {
                let v: u32 = ctx.num(&key, value)?;
                if v != SCENARIO_VERSION {
                    return Err(ctx.err(format!("unsupported version {v} (expected {SCENARIO_VERSION})")));
                }
                version = Some(v);
            }
            "design" => {
                design_kind = value.to_ascii_lowercase();
                design_line = ctx.line;
            }
            "clusters" => clusters = Some(ctx.num::<usize>(&key, value)?),
            "replicates" => {
                let r: usize = ctx.num(&key, value)?;
                if r == 0 {
                    return Err(ctx.err("`replicates` must be at least 1"));
                }
                replicates = Some(r);
            }
            "seed" => seed = ctx.num(&key, value)?,
            "design_seed" => design_seed = Some(ctx.num(&key, value)?),
            "beta" => beta = Some(ctx.vec(&key, value)?),
            "alpha" => alpha = Some(ctx.vec(&key, value)?),
            "methods" => {
                methods = match value.to_ascii_lowercase().as_str() {
                    "extended" => MethodSet::Extended,
                    "detailed" => MethodSet::Detailed,
                    "both" => MethodSet::Both,
                    other => return Err(ctx.err(format!("unknown methods `{other}`"))),
                }
            }
            "max_iter" => max_iter = ctx.num(&key, value)?,
            "epsilon" => {
                epsilon = ctx.num(&key, value)?;
                if !(epsilon > 0.0) {
                    return Err(ctx.err("`epsilon` must be positive"));
                }
            }
            "workers_min" => camp.workers_min = ctx.num(&key, value)?,
            "workers_max" => camp.workers_max = ctx.num(&key, value)?,
            "days_mean" => camp.days_mean = ctx.num(&key, value)?,
            "days_sd" => camp.days_sd = ctx.num(&key, value)?,
            "days_min" => camp.days_min = ctx.num(&key, value)?,
            "size_min" => camp.size_min = ctx.num(&key, value)?,
            "size_max" => camp.size_max = ctx.num(&key, value)?,
            "work_type" => {
                let v = ctx.vec(&key, value)?;
                camp.work_type = v
                    .try_into()
                    .map_err(|_| ctx.err("`work_type` needs three probabilities"))?;
            }
            "p_inexperienced" => camp.p_inexperienced = ctx.num(&key, value)?,
            "p_tobacco" => camp.p_tobacco = ctx.num(&key, value)?,
            "p_wet" => camp.p_wet = ctx.num(&key, value)?,
            "temp_sd" => camp.temp_sd = ctx.num(&key, value)?,
            "cluster_size" => exch.size = ctx.num(&key, value)?,
            "x_scale" => exch.x_scale = ctx.num(&key, value)?,
            "p_group" => exch.p_group = ctx.num(&key, value)?,
            other => return Err(ctx.err(format!("unknown key `{other}`"))),
        }
    }
    let end = Ctx {
        path,
        line: text.lines().count().max(1),
    };
    if version.is_none() {
        return Err(end.err("missing `version`"));
    }
    let replicates = replicates.ok_or_else(|| end.err("missing `replicates`"))?;
    let beta = beta.ok_or_else(|| end.err("missing `beta`"))?;
    let alpha = alpha.ok_or_else(|| end.err("missing `alpha`"))?;
    let design = match design_kind.as_str() {
        "camp" => {
            if let Some(k) = clusters {
                camp.clusters = k;
            }
            if beta.len() != 8 || alpha.len() != 2 {
                return Err(end.err("camp design needs 8 beta and 2 alpha values"));
            }
            DesignSpec::Camp(camp)
        }
        "exchangeable" => {
            if let Some(k) = clusters {
                exch.clusters = k;
            }
            if beta.len() != 3 || alpha.len() != 1 {
                return Err(end.err("exchangeable design needs 3 beta and 1 alpha value"));
            }
            DesignSpec::Exchangeable(exch)
        }
        other => {
            return Err(Ctx {
                path,
                line: design_line,
            }
            .err(format!("unknown design `{other}`")))
        }
    };
    let mut cfg = SimConfig::new(design, DVector::from_vec(beta), DVector::from_vec(alpha));
    cfg.replicates = replicates;
    cfg.seed = seed;
    cfg.design_seed = design_seed.unwrap_or(seed);
    cfg.methods = methods;
    cfg.fit.max_iter = max_iter;
    cfg.fit.epsilon = epsilon;
    Ok(cfg)
}

pub fn load_scenario(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| GeeError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_scenario(&text, &path.display().to_string())
}
