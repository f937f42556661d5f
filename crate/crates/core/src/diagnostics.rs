//! One-step deletion diagnostics, leverage, Cook's distances and fitted
//! probabilities.

use nalgebra::{DMatrix, DVector};

use crate::config::{FitConfig, FitMethod};
use crate::data::{pairs as pair_iter, ClusterDataset, PairCovariates};
use crate::error::{GeeError, Result};
use crate::link::LinkKind;
use crate::par;
use crate::variance::{deleted_solve, fitted, CovarianceSet, Fitted};
use crate::work::{factor_v, mean_part, pair_part, working_covariance};

/// Leverage traces of one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leverage {
    /// tr(D A D'V⁻¹)
    pub h1: f64,
    /// tr(E C E'W⁻¹); `None` when the α information is unavailable.
    pub h2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeletionDiagnostics {
    /// β̂ − β̂(−i), one-step.
    pub dbetac: Vec<DVector<f64>>,
    /// α̂ − α̂(−i), one-step; `None` under a fixed α.
    pub dalphac: Vec<Option<DVector<f64>>>,
    /// Per cluster, per observation: β̂ − β̂(−ij).
    pub dbetao: Vec<Vec<DVector<f64>>>,
    /// Per cluster, per observation: α change from dropping the pairs of unit j.
    pub dalphao: Vec<Vec<Option<DVector<f64>>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRow {
    pub id: String,
    pub n: usize,
    pub h1: f64,
    pub h2: Option<f64>,
    pub dbetac: DVector<f64>,
    pub dalphac: Option<DVector<f64>>,
    pub dcls: f64,
    pub dcls_beta: f64,
    pub dcls_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRow {
    pub cluster: String,
    /// 1-based unit within the cluster.
    pub unit: usize,
    pub dbetao: DVector<f64>,
    pub dobs: f64,
    pub dobs_beta: f64,
    pub dobs_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsTable {
    pub clusters: Vec<ClusterRow>,
    pub observations: Vec<ObservationRow>,
    /// "block-diagonal" or "joint", the covariance used for Cook's distances.
    pub distance_covariance: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedRow {
    pub cluster: String,
    pub unit: usize,
    pub mu: f64,
}

pub fn cluster_leverage(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
) -> Result<Vec<Leverage>> {
    let f = fitted(data, pairs, config, beta, alpha)?;
    Ok(leverage_from(&f))
}

fn leverage_from(f: &Fitted) -> Vec<Leverage> {
    f.terms
        .iter()
        .map(|t| Leverage {
            h1: (&f.a * &t.info_beta).trace(),
            h2: f.c.as_ref().map(|c| (c * &t.info_alpha).trace()),
        })
        .collect()
}

pub fn deletion_diagnostics(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
) -> Result<DeletionDiagnostics> {
    let f = fitted(data, pairs, config, beta, alpha)?;
    deletion_from(data, pairs, config, beta, alpha, &f)
}

struct PerCluster {
    dbetac: DVector<f64>,
    dalphac: Option<DVector<f64>>,
    dbetao: Vec<DVector<f64>>,
    dalphao: Vec<Option<DVector<f64>>>,
}

fn deletion_from(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    f: &Fitted,
) -> Result<DeletionDiagnostics> {
    let with_alpha = f.c.is_some() && !config.fix_alpha;
    let per = par::try_map(config.execution, data.clusters(), |i, c| {
        let t = &f.terms[i];
        let dbetac = deleted_solve(&f.info_beta, &t.info_beta, &t.score_beta, &c.id, "mean")?;
        let dalphac = if with_alpha {
            Some(deleted_solve(&f.info_alpha, &t.info_alpha, &t.score_alpha, &c.id, "correlation")?)
        } else {
            None
        };

        let mean = mean_part(c, beta, config.mean_link)?;
        let pp = pair_part(&mean, pairs.block(i), alpha, config.corr_link, config.make_v_one);
        let chol = factor_v(working_covariance(&mean, &pp.rho), c)?;
        let n = c.size();
        let vinv = chol.inverse();
        let vinv_d = &vinv * &mean.d;
        let vinv_e = &vinv * (&c.y - &mean.mu);
        let mut dbetao = Vec::with_capacity(n);
        for j in 0..n {
            let a = vinv_d.row(j).transpose();
            let aa = &f.a * &a;
            let denom = vinv[(j, j)] - a.dot(&aa);
            if !(denom > 0.0) {
                return Err(GeeError::LeverageSingular {
                    cluster: format!("{} (unit {})", c.id, j + 1),
                    block: "mean",
                });
            }
            dbetao.push(aa * (vinv_e[j] / denom));
        }

        let q = pp.e.ncols();
        let mut own_info = vec![DMatrix::<f64>::zeros(q, q); if with_alpha { n } else { 0 }];
        let mut own_score = vec![DVector::<f64>::zeros(q); own_info.len()];
        if with_alpha {
            for (row, (j, k)) in pair_iter(n).enumerate() {
                let e = pp.e.row(row).transpose();
                let wi = 1.0 / pp.w_diag[row];
                let outer = &e * e.transpose() * wi;
                let sc = &e * ((pp.r[row] - pp.rho[row]) * wi);
                for u in [j, k] {
                    own_info[u] += &outer;
                    own_score[u] += &sc;
                }
            }
        }
        let dalphao = (0..n)
            .map(|j| {
                if !with_alpha {
                    return Ok(None);
                }
                let label = format!("{} (unit {})", c.id, j + 1);
                deleted_solve(&f.info_alpha, &own_info[j], &own_score[j], &label, "correlation").map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PerCluster {
            dbetac,
            dalphac,
            dbetao,
            dalphao,
        })
    })?;
    let mut out = DeletionDiagnostics {
        dbetac: Vec::with_capacity(per.len()),
        dalphac: Vec::with_capacity(per.len()),
        dbetao: Vec::with_capacity(per.len()),
        dalphao: Vec::with_capacity(per.len()),
    };
    for pc in per {
        out.dbetac.push(pc.dbetac);
        out.dalphac.push(pc.dalphac);
        out.dbetao.push(pc.dbetao);
        out.dalphao.push(pc.dalphao);
    }
    Ok(out)
}

fn precision(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.inverse());
    }
    m.clone().try_inverse().ok_or(GeeError::SingularCovariance(what))
}

fn quad(prec: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    d.dot(&(prec * d)).max(0.0)
}

/// Per-cluster and per-observation Cook's distances, as (overall, β, α).
#[derive(Debug, Clone, PartialEq)]
pub struct CookDistances {
    pub cluster: Vec<(f64, f64, Option<f64>)>,
    pub observation: Vec<Vec<(f64, f64, Option<f64>)>>,
    pub covariance_form: &'static str,
}

/// Cook's distances from BC0 covariances: block-diagonal for the extended
/// method, the joint matrix for the detailed method.
pub fn cooks_distances(cov: &CovarianceSet, del: &DeletionDiagnostics) -> Result<CookDistances> {
    let p = cov.cov_beta_bc0.nrows();
    let prec_b = precision(&cov.cov_beta_bc0, "β covariance")?;
    let prec_a = cov
        .cov_alpha_bc0
        .as_ref()
        .map(|m| precision(m, "α covariance"))
        .transpose()?;
    let joint = match (cov.method, &cov.cov_joint_bc0) {
        (FitMethod::Detailed, Some(j)) => Some(precision(j, "joint covariance")?),
        _ => None,
    };
    let q = prec_a.as_ref().map_or(0, |m| m.nrows());
    let distance = |db: &DVector<f64>, da: Option<&DVector<f64>>| {
        let qb = quad(&prec_b, db);
        let (Some(pa), Some(da)) = (&prec_a, da) else {
            return (qb / p as f64, qb / p as f64, None);
        };
        let qa = quad(pa, da);
        let total = match &joint {
            Some(pj) => {
                let mut d = DVector::zeros(p + q);
                d.rows_mut(0, p).copy_from(db);
                d.rows_mut(p, q).copy_from(da);
                quad(pj, &d)
            }
            None => qb + qa,
        };
        (total / (p + q) as f64, qb / p as f64, Some(qa / q as f64))
    };
    let cluster = del
        .dbetac
        .iter()
        .zip(&del.dalphac)
        .map(|(b, a)| distance(b, a.as_ref()))
        .collect();
    let observation = del
        .dbetao
        .iter()
        .zip(&del.dalphao)
        .map(|(bs, as_)| bs.iter().zip(as_).map(|(b, a)| distance(b, a.as_ref())).collect())
        .collect();
    Ok(CookDistances {
        cluster,
        observation,
        covariance_form: if joint.is_some() { "joint" } else { "block-diagonal" },
    })
}

/// Full diagnostics at converged estimates.
pub fn diagnostics(
    data: &ClusterDataset,
    pairs: &PairCovariates,
    config: &FitConfig,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    cov: &CovarianceSet,
) -> Result<DiagnosticsTable> {
    let f = fitted(data, pairs, config, beta, alpha)?;
    let lev = leverage_from(&f);
    let del = deletion_from(data, pairs, config, beta, alpha, &f)?;
    let cook = cooks_distances(cov, &del)?;
    let mut clusters = Vec::with_capacity(data.len());
    let mut observations = Vec::with_capacity(data.observation_count());
    for (i, c) in data.clusters().iter().enumerate() {
        let (dcls, dcls_beta, dcls_alpha) = cook.cluster[i];
        clusters.push(ClusterRow {
            id: c.id.clone(),
            n: c.size(),
            h1: lev[i].h1,
            h2: lev[i].h2,
            dbetac: del.dbetac[i].clone(),
            dalphac: del.dalphac[i].clone(),
            dcls,
            dcls_beta,
            dcls_alpha,
        });
        for (j, d) in del.dbetao[i].iter().enumerate() {
            let (dobs, dobs_beta, dobs_alpha) = cook.observation[i][j];
            observations.push(ObservationRow {
                cluster: c.id.clone(),
                unit: j + 1,
                dbetao: d.clone(),
                dobs,
                dobs_beta,
                dobs_alpha,
            });
        }
    }
    Ok(DiagnosticsTable {
        clusters,
        observations,
        distance_covariance: cook.covariance_form,
    })
}

/// Fitted probabilities for every input row, in input order.
pub fn predicted_probabilities(
    data: &ClusterDataset,
    beta: &DVector<f64>,
    link: LinkKind,
) -> Vec<PredictedRow> {
    data.input_order()
        .iter()
        .map(|&(ci, u)| {
            let c = &data.clusters()[ci];
            PredictedRow {
                cluster: c.id.clone(),
                unit: u + 1,
                mu: link.inverse(c.x.row(u).dot(&beta.transpose())),
            }
        })
        .collect()
}
