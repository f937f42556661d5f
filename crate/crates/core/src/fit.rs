//! Estimating equations and the two fitting algorithms.
//!
//! The extended algorithm alternates a Fisher-scoring step for β (with ρ from
//! the current α) and a step for α (with R, W evaluated at the new β). The
//! detailed algorithm takes one joint step
//!
//! ```text
//! [β]    [β]   [A 0] [U_β]
//! [α] ←  [α] + [B C] [U_α],   B = C (Σ E'W⁻¹ E[∂R/∂β]) A
//! ```
//!
//! whose fixed point is the same root of (U_β, U_α).

use nalgebra::{DMatrix, DVector};

use crate::config::{FitConfig, FitMethod, ShrinkMode};
use crate::data::{ClusterDataset, PairCovariates};
use crate::error::{GeeError, Result};
use crate::frechet::{check_pairs, RangeReport, RangeViolation};
use crate::link::LinkKind;
use crate::par;
use crate::selection::{selection_from, SelectionCriteria};
use crate::variance::{covariance_from, fitted_from_terms, CovarianceSet};
use crate::work::{
    alpha_terms, beta_terms, check_pair_variances, cross_term, factor_v, mean_part, pair_part, pair_rho,
    working_covariance,
};

/// Maximum number of shrink modifications within one iteration.
pub const MAX_SHRINKS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaState {
    pub beta: DVector<f64>,
    pub alpha: DVector<f64>,
    pub iteration: usize,
    /// Previous parameter update (β then α).
    pub last_delta: DVector<f64>,
    /// Shrink modifications made in the current iteration.
    pub shrink_count: usize,
}

impl ThetaState {
    pub fn new(beta: DVector<f64>, alpha: DVector<f64>) -> Self {
        let len = beta.len() + alpha.len();
        ThetaState {
            beta,
            alpha,
            iteration: 0,
            last_delta: DVector::zeros(len),
            shrink_count: 0,
        }
    }

    pub fn theta(&self) -> DVector<f64> {
        let p = self.beta.len();
        let mut t = DVector::zeros(p + self.alpha.len());
        t.rows_mut(0, p).copy_from(&self.beta);
        t.rows_mut(p, self.alpha.len()).copy_from(&self.alpha);
        t
    }

    fn set_theta(&mut self, theta: &DVector<f64>) {
        let p = self.beta.len();
        self.beta.copy_from(&theta.rows(0, p));
        let q = self.alpha.len();
        self.alpha.copy_from(&theta.rows(p, q));
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitStatus {
    Converged,
    /// Iteration limit reached; `max_delta` is the last max |Δθ|.
    NotConverged { max_delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub beta: DVector<f64>,
    pub alpha: DVector<f64>,
    pub max_delta: f64,
    pub shrinks: usize,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta: DVector<f64>,
    pub alpha: DVector<f64>,
    pub method: FitMethod,
    pub status: FitStatus,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    /// Every iteration's violations with `print_range`, otherwise only the
    /// final iteration's.
    pub range_reports: Vec<RangeReport>,
    /// Scores at the final estimates.
    pub score_beta: DVector<f64>,
    pub score_alpha: DVector<f64>,
    /// Computed on convergence.
    pub covariance: Option<CovarianceSet>,
    pub selection: Option<SelectionCriteria>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn converged(&self) -> bool {
        self.status == FitStatus::Converged
    }
}

/// Which per-cluster terms an evaluation must produce.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Needs {
    pub beta: bool,
    pub alpha: bool,
    pub cross: bool,
}

impl Needs {
    pub const ALL: Needs = Needs {
        beta: true,
        alpha: true,
        cross: true,
    };
}

/// Unweighted contributions of one cluster.
#[derive(Debug)]
pub(crate) struct ClusterTerms {
    /// D'V⁻¹D
    pub info_beta: DMatrix<f64>,
    /// D'V⁻¹(y − μ)
    pub score_beta: DVector<f64>,
    /// E'W⁻¹E
    pub info_alpha: DMatrix<f64>,
    /// E'W⁻¹(R − ρ)
    pub score_alpha: DVector<f64>,
    /// Σ E'W⁻¹ E[∂R/∂β]
    pub cross: DMatrix<f64>,
    /// (y − μ)'V⁻¹(y − μ)
    pub quad: f64,
    /// log det V
    pub logdet: f64,
    pub violations: Vec<RangeViolation>,
    /// Failures that only matter if the terms are used (after any shrinking).
    deferred: Option<GeeError>,
}

pub(crate) fn cluster_terms(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    i: usize,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    cfg: &FitConfig,
    needs: Needs,
) -> Result<ClusterTerms> {
    let cluster = &data.clusters()[i];
    let (p, q) = (data.p(), pairs.q());
    let mean = mean_part(cluster, beta, cfg.mean_link)?;
    let pp = if needs.alpha || needs.cross {
        Some(pair_part(&mean, pairs.block(i), alpha, cfg.corr_link, cfg.make_v_one))
    } else {
        None
    };
    let rho = match &pp {
        Some(pp) => pp.rho.clone(),
        None => pair_rho(pairs.block(i), alpha, cfg.corr_link),
    };
    let violations = check_pairs(&mean.mu, &rho, cluster);
    let mut t = ClusterTerms {
        info_beta: DMatrix::zeros(p, p),
        score_beta: DVector::zeros(p),
        info_alpha: DMatrix::zeros(q, q),
        score_alpha: DVector::zeros(q),
        cross: DMatrix::zeros(q, p),
        quad: 0.0,
        logdet: 0.0,
        violations,
        deferred: None,
    };
    if needs.beta {
        match factor_v(working_covariance(&mean, &rho), cluster) {
            Ok(chol) => {
                let resid = &cluster.y - &mean.mu;
                let bt = beta_terms(&mean.d, &chol, &resid);
                t.info_beta = bt.info;
                t.score_beta = bt.score;
                t.quad = bt.quad;
                t.logdet = bt.logdet;
            }
            Err(e) => t.deferred = Some(e),
        }
    }
    if let Some(pp) = &pp {
        if let Err(e) = check_pair_variances(cluster, &pp.w_diag) {
            t.deferred.get_or_insert(e);
        } else {
            if needs.alpha {
                let (f, g) = alpha_terms(pp);
                t.info_alpha = f;
                t.score_alpha = g;
            }
            if needs.cross {
                t.cross = cross_term(&mean, pp);
            }
        }
    }
    Ok(t)
}

pub(crate) fn all_terms(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    cfg: &FitConfig,
    needs: Needs,
) -> Result<Vec<ClusterTerms>> {
    par::try_map(cfg.execution, data.clusters(), |i, _| {
        cluster_terms(data, pairs, i, beta, alpha, cfg, needs)
    })
}

/// Weighted sums over clusters, accumulated in cluster order.
#[derive(Debug, Clone)]
pub(crate) struct Totals {
    pub info_beta: DMatrix<f64>,
    pub score_beta: DVector<f64>,
    pub info_alpha: DMatrix<f64>,
    pub score_alpha: DVector<f64>,
    pub cross: DMatrix<f64>,
}

pub(crate) fn reduce(data: &ClusterDataset, terms: &[ClusterTerms]) -> Result<Totals> {
    let first = &terms[0];
    let mut tot = Totals {
        info_beta: DMatrix::zeros(first.info_beta.nrows(), first.info_beta.ncols()),
        score_beta: DVector::zeros(first.score_beta.len()),
        info_alpha: DMatrix::zeros(first.info_alpha.nrows(), first.info_alpha.ncols()),
        score_alpha: DVector::zeros(first.score_alpha.len()),
        cross: DMatrix::zeros(first.cross.nrows(), first.cross.ncols()),
    };
    for (c, t) in data.clusters().iter().zip(terms) {
        if let Some(e) = &t.deferred {
            return Err(clone_error(e));
        }
        let w = c.weight;
        tot.info_beta += w * &t.info_beta;
        tot.score_beta += w * &t.score_beta;
        tot.info_alpha += w * &t.info_alpha;
        tot.score_alpha += w * &t.score_alpha;
        tot.cross += w * &t.cross;
    }
    Ok(tot)
}

fn clone_error(e: &GeeError) -> GeeError {
    match e {
        GeeError::NotPositiveDefinite { cluster, what } => GeeError::NotPositiveDefinite {
            cluster: cluster.clone(),
            what,
        },
        GeeError::PairVariance {
            cluster,
            j,
            k,
            value,
        } => GeeError::PairVariance {
            cluster: cluster.clone(),
            j: *j,
            k: *k,
            value: *value,
        },
        other => GeeError::InvalidData(other.to_string()),
    }
}

pub(crate) fn invert_information(m: &DMatrix<f64>, which: &'static str) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(GeeError::SingularInformation(which))
}

fn check_dimensions(data: &ClusterDataset, pairs: &PairCovariates) -> Result<()> {
    if pairs.blocks().len() != data.len() {
        return Err(GeeError::InvalidData(format!(
            "{} pair blocks for {} clusters",
            pairs.blocks().len(),
            data.len()
        )));
    }
    for (c, b) in data.clusters().iter().zip(pairs.blocks()) {
        if b.nrows() != c.pair_count() {
            return Err(GeeError::PairRowMismatch {
                expected: c.pair_count(),
                found: b.nrows(),
                detail: format!("cluster `{}`", c.id),
            });
        }
    }
    Ok(())
}

/// Weighted scores (U_β, U_α) at (β, α).
pub fn score_equations(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    config: &FitConfig,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dimensions(data, pairs)?;
    let needs = Needs {
        beta: true,
        alpha: true,
        cross: false,
    };
    let tot = reduce(data, &all_terms(data, pairs, beta, alpha, config, needs)?)?;
    Ok((tot.score_beta, tot.score_alpha))
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn beta_update(tot: &Totals) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let a = invert_information(&tot.info_beta, "mean-model")?;
    let step = &a * &tot.score_beta;
    Ok((a, step))
}

fn finish_step(mut state: ThetaState, new_beta: DVector<f64>, new_alpha: DVector<f64>) -> ThetaState {
    let old = state.theta();
    state.beta = new_beta;
    state.alpha = new_alpha;
    state.last_delta = state.theta() - old;
    state
}

fn alpha_update_extended(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    config: &FitConfig,
) -> Result<DVector<f64>> {
    if config.fix_alpha {
        return Ok(alpha.clone());
    }
    let needs = Needs {
        beta: false,
        alpha: true,
        cross: false,
    };
    let tot = reduce(data, &all_terms(data, pairs, beta, alpha, config, needs)?)?;
    let c = invert_information(&tot.info_alpha, "correlation-model")?;
    Ok(alpha + c * tot.score_alpha)
}

/// One alternating iteration: β by Fisher scoring with the current α, then α
/// with R and W at the new β.
pub fn step_extended(
    state: ThetaState,
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
) -> Result<ThetaState> {
    check_dimensions(data, pairs)?;
    let needs = Needs {
        beta: true,
        alpha: false,
        cross: false,
    };
    let terms = all_terms(data, pairs, &state.beta, &state.alpha, config, needs)?;
    extended_from_terms(state, data, pairs, config, &terms)
}

fn extended_from_terms(
    state: ThetaState,
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    terms: &[ClusterTerms],
) -> Result<ThetaState> {
    let tot = reduce(data, terms)?;
    let (_, step) = beta_update(&tot)?;
    let beta = &state.beta + step;
    let alpha = alpha_update_extended(data, pairs, &beta, &state.alpha, config)?;
    Ok(finish_step(state, beta, alpha))
}

/// One joint Fisher-scoring iteration using the expected cross information.
pub fn step_detailed(
    state: ThetaState,
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
) -> Result<ThetaState> {
    check_dimensions(data, pairs)?;
    let terms = all_terms(data, pairs, &state.beta, &state.alpha, config, Needs::ALL)?;
    detailed_from_terms(state, data, config, &terms)
}

fn detailed_from_terms(
    state: ThetaState,
    data: &ClusterDataset,
    config: &FitConfig,
    terms: &[ClusterTerms],
) -> Result<ThetaState> {
    let tot = reduce(data, terms)?;
    let (_, step_beta) = beta_update(&tot)?;
    let beta = &state.beta + &step_beta;
    let alpha = if config.fix_alpha {
        state.alpha.clone()
    } else {
        let c = invert_information(&tot.info_alpha, "correlation-model")?;
        // B U_β + C U_α = C (G A U_β + U_α)
        &state.alpha + &c * (&tot.cross * &step_beta + &tot.score_alpha)
    };
    Ok(finish_step(state, beta, alpha))
}

/// Applies one shrink modification after a range violation.
pub fn shrink_step(state: ThetaState, mode: ShrinkMode, corr_link: LinkKind) -> Result<ThetaState> {
    if mode == ShrinkMode::None {
        return Err(GeeError::Config("shrink_step called without a shrink mode".into()));
    }
    if corr_link != LinkKind::Identity {
        return Err(GeeError::Config(format!(
            "parameter shrinking requires the identity correlation link, not {corr_link}"
        )));
    }
    if state.shrink_count >= MAX_SHRINKS {
        return Err(GeeError::ShrinkLimit {
            iteration: state.iteration,
            limit: MAX_SHRINKS,
        });
    }
    let mut s = state;
    if s.iteration <= 1 {
        s.alpha.fill(0.0);
    } else {
        match mode {
            ShrinkMode::Alpha => s.alpha *= 0.95,
            ShrinkMode::Theta => {
                let factor = 0.5f64.powi(s.shrink_count as i32 + 1);
                let theta = s.theta() - factor * &s.last_delta;
                s.set_theta(&theta);
            }
            ShrinkMode::None => unreachable!(),
        }
    }
    s.shrink_count += 1;
    Ok(s)
}

/// Independence-model GLM fit by Fisher scoring under `link`, with weights.
pub fn independence_glm(
    data: &ClusterDataset,
    link: LinkKind,
    start: Option<&DVector<f64>>,
    exec: par::Execution,
) -> Result<DVector<f64>> {
    let p = data.p();
    let terms = |beta: &DVector<f64>| -> Result<(DMatrix<f64>, DVector<f64>)> {
        let per = par::try_map(exec, data.clusters(), |_, c| {
            let m = mean_part(c, beta, link)?;
            let mut scaled = m.d.clone();
            for j in 0..c.size() {
                scaled.row_mut(j).scale_mut(1.0 / (m.sd[j] * m.sd[j]));
            }
            let resid = &c.y - &m.mu;
            Ok((m.d.transpose() * &scaled, scaled.transpose() * resid))
        })?;
        let mut info = DMatrix::zeros(p, p);
        let mut score = DVector::zeros(p);
        for (c, (f, g)) in data.clusters().iter().zip(per) {
            info += c.weight * f;
            score += c.weight * g;
        }
        Ok((info, score))
    };
    let mut beta = start.cloned().unwrap_or_else(|| DVector::zeros(p));
    let (mut info, mut score) = terms(&beta)?;
    for _ in 0..100 {
        let step = match info.clone().cholesky() {
            Some(ch) => ch.solve(&score),
            None => return Err(GeeError::SingularInformation("independence-model")),
        };
        let mut scale = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let cand = &beta + scale * &step;
            match terms(&cand) {
                Ok(t) => {
                    next = Some((cand, t));
                    break;
                }
                Err(GeeError::MeanOutOfRange { .. }) => scale *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((cand, (i2, s2))) = next else {
            return terms(&(&beta + &step)).map(|_| beta.clone());
        };
        let delta = max_abs(&(&cand - &beta));
        beta = cand;
        info = i2;
        score = s2;
        if delta < 1e-10 {
            break;
        }
    }
    Ok(beta)
}

/// Initial β: logistic regression, mapped to the requested link and refined
/// by independence Fisher scoring under that link.
pub fn initial_beta(data: &ClusterDataset, config: &FitConfig) -> Result<DVector<f64>> {
    let logit = independence_glm(data, LinkKind::Logit, None, config.execution)?;
    if config.mean_link == LinkKind::Logit {
        return Ok(logit);
    }
    // Weighted least squares of g(μ̂_logit) on X.
    let p = data.p();
    let mut xtx = DMatrix::zeros(p, p);
    let mut xty = DVector::zeros(p);
    for c in data.clusters() {
        let mu = (&c.x * &logit).map(|e| LinkKind::Logit.inverse(e));
        let target = mu.map(|m| config.mean_link.forward(m).unwrap_or(0.0));
        xtx += c.weight * c.x.transpose() * &c.x;
        xty += c.weight * c.x.transpose() * target;
    }
    let start = xtx
        .cholesky()
        .map(|ch| ch.solve(&xty))
        .ok_or(GeeError::SingularInformation("design"))?;
    independence_glm(data, config.mean_link, Some(&start), config.execution)
}

/// Fits the mean and correlation models, then computes covariances and
/// selection criteria if the iterations converged.
pub fn fit(data: &ClusterDataset, pairs: &PairCovariates, config: &FitConfig) -> Result<FitResult> {
    fit_with(data, pairs, config, true)
}

/// Fits and, on convergence, fills `covariance` and optionally `selection`
/// from the final evaluation.
pub(crate) fn fit_with(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    with_selection: bool,
) -> Result<FitResult> {
    let (mut res, terms) = estimate(data, pairs, config)?;
    if res.converged() {
        let f = fitted_from_terms(data, config, terms)?;
        let cov = covariance_from(data, &f, config.fix_alpha, res.method)?;
        if with_selection {
            res.selection = Some(selection_from(data, config, &res.beta, &f, &cov)?);
        }
        res.covariance = Some(cov);
    }
    Ok(res)
}

/// Point estimates only; `covariance` and `selection` are left empty.
pub fn fit_estimates(data: &ClusterDataset, pairs: &PairCovariates, config: &FitConfig) -> Result<FitResult> {
    estimate(data, pairs, config).map(|(res, _)| res)
}

fn estimate(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
) -> Result<(FitResult, Vec<ClusterTerms>)> {
    check_dimensions(data, pairs)?;
    let (p, q) = (data.p(), pairs.q());
    config.validate(p, q)?;
    let warnings = config.warnings(q);
    let beta0 = match &config.start_beta {
        Some(b) => b.clone(),
        None => initial_beta(data, config)?,
    };
    let mut state = ThetaState::new(beta0, config.start_alpha_for(q));
    let method = config.method();
    let needs = match method {
        FitMethod::Extended => Needs {
            beta: true,
            alpha: false,
            cross: false,
        },
        FitMethod::Detailed => Needs::ALL,
    };

    let mut trace = Vec::new();
    let mut range_reports = Vec::new();
    let mut status = FitStatus::NotConverged {
        max_delta: f64::INFINITY,
    };
    let mut iterations = 0;
    for s in 1..=config.max_iter {
        iterations = s;
        state.iteration = s;
        state.shrink_count = 0;
        let terms = loop {
            let terms = all_terms(data, pairs, &state.beta, &state.alpha, config, needs)?;
            let violations: Vec<RangeViolation> =
                terms.iter().flat_map(|t| t.violations.iter().cloned()).collect();
            if violations.is_empty() {
                break terms;
            }
            if config.print_range {
                range_reports.push(RangeReport {
                    iteration: s,
                    violations,
                });
            }
            if config.shrink == ShrinkMode::None {
                break terms;
            }
            state = shrink_step(state, config.shrink, config.corr_link)?;
        };
        let shrinks = state.shrink_count;
        let before = state.theta();
        state = match method {
            FitMethod::Extended => extended_from_terms(state, data, pairs, config, &terms)?,
            FitMethod::Detailed => detailed_from_terms(state, data, config, &terms)?,
        };
        // Includes any shrink adjustment made at the top of the iteration.
        let max_delta = max_abs(&(state.theta() - before));
        trace.push(IterationRecord {
            iteration: s,
            beta: state.beta.clone(),
            alpha: state.alpha.clone(),
            max_delta,
            shrinks,
        });
        if max_delta < config.epsilon {
            status = FitStatus::Converged;
            break;
        }
        status = FitStatus::NotConverged { max_delta };
    }

    let final_terms = all_terms(data, pairs, &state.beta, &state.alpha, config, Needs::ALL)?;
    let final_violations: Vec<RangeViolation> = final_terms
        .iter()
        .flat_map(|t| t.violations.iter().cloned())
        .collect();
    if !config.print_range && !final_violations.is_empty() {
        range_reports.push(RangeReport {
            iteration: iterations,
            violations: final_violations,
        });
    }
    let tot = reduce(data, &final_terms)?;

    let res = FitResult {
        beta: state.beta,
        alpha: state.alpha,
        method,
        status,
        iterations,
        trace,
        range_reports,
        score_beta: tot.score_beta,
        score_alpha: tot.score_alpha,
        covariance: None,
        selection: None,
        warnings,
    };
    Ok((res, final_terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(beta: &[f64], alpha: &[f64], iteration: usize, delta: &[f64]) -> ThetaState {
        ThetaState {
            beta: DVector::from_column_slice(beta),
            alpha: DVector::from_column_slice(alpha),
            iteration,
            last_delta: DVector::from_column_slice(delta),
            shrink_count: 0,
        }
    }

    #[test]
    fn first_iteration_violation_zeroes_alpha() {
        for mode in [ShrinkMode::Alpha, ShrinkMode::Theta] {
            let s = shrink_step(state(&[1.0], &[0.3], 1, &[0.1, 0.1]), mode, LinkKind::Identity).unwrap();
            assert_eq!(s.alpha[0], 0.0);
            assert_eq!(s.beta[0], 1.0);
            assert_eq!(s.shrink_count, 1);
        }
    }

    #[test]
    fn alpha_shrink_scales_by_095() {
        let s = shrink_step(state(&[1.0], &[0.2], 3, &[0.0, 0.0]), ShrinkMode::Alpha, LinkKind::Identity).unwrap();
        assert!((s.alpha[0] - 0.19).abs() < 1e-15);
        assert_eq!(s.beta[0], 1.0);
    }

    #[test]
    fn theta_shrink_backs_off_geometrically() {
        let mut s = state(&[1.0], &[0.5], 4, &[0.4, 0.2]);
        s.shrink_count = 1;
        let s = shrink_step(s, ShrinkMode::Theta, LinkKind::Identity).unwrap();
        assert!((s.beta[0] - (1.0 - 0.25 * 0.4)).abs() < 1e-15);
        assert!((s.alpha[0] - (0.5 - 0.25 * 0.2)).abs() < 1e-15);
        assert_eq!(s.shrink_count, 2);
    }

    #[test]
    fn shrink_limit_aborts() {
        let mut s = state(&[1.0], &[0.5], 4, &[0.4, 0.2]);
        for _ in 0..MAX_SHRINKS {
            s = shrink_step(s, ShrinkMode::Alpha, LinkKind::Identity).unwrap();
        }
        assert_eq!(s.shrink_count, 20);
        assert!(matches!(
            shrink_step(s, ShrinkMode::Alpha, LinkKind::Identity),
            Err(GeeError::ShrinkLimit { limit: 20, .. })
        ));
    }

    #[test]
    fn shrink_rejects_non_identity_link() {
        let s = state(&[1.0], &[0.5], 2, &[0.4, 0.2]);
        assert!(matches!(
            shrink_step(s, ShrinkMode::Alpha, LinkKind::FisherZ),
            Err(GeeError::Config(_))
        ));
    }
}
