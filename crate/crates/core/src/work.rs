//! Per-cluster model quantities: fitted means, pairwise correlations, sample
//! correlations, their variances and the derivative matrices.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::config::FitConfig;
use crate::data::{pairs, Cluster};
use crate::error::{GeeError, Result};
use crate::link::LinkKind;

/// var[R_jk] for a pair with means μ_j, μ_k and correlation ρ.
pub fn var_r(mu_j: f64, mu_k: f64, rho: f64) -> f64 {
    let s = (mu_j * (1.0 - mu_j) * mu_k * (1.0 - mu_k)).sqrt();
    1.0 + (1.0 - 2.0 * mu_j) * (1.0 - 2.0 * mu_k) / s * rho - rho * rho
}

/// Everything the estimating equations need from one cluster at (β, α).
#[derive(Debug, Clone)]
pub struct ClusterWork {
    pub mu: DVector<f64>,
    /// ∂μ/∂β, n × p.
    pub d: DMatrix<f64>,
    /// √(μ(1−μ)).
    pub sd: DVector<f64>,
    pub rho: DVector<f64>,
    /// ∂ρ/∂α, m × q.
    pub e: DMatrix<f64>,
    /// Sample correlations.
    pub r: DVector<f64>,
    /// Diagonal of W (var R), or all ones under `make_v_one`.
    pub w_diag: DVector<f64>,
    /// Working covariance A C(α) A.
    pub v: DMatrix<f64>,
}

/// Mean-model part of the evaluation.
#[derive(Debug, Clone)]
pub(crate) struct MeanPart {
    pub mu: DVector<f64>,
    pub d: DMatrix<f64>,
    pub sd: DVector<f64>,
    /// (y − μ) / sd.
    pub t: DVector<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct PairPart {
    pub rho: DVector<f64>,
    pub e: DMatrix<f64>,
    pub r: DVector<f64>,
    pub w_diag: DVector<f64>,
}

pub(crate) fn mean_part(cluster: &Cluster, beta: &DVector<f64>, link: LinkKind) -> Result<MeanPart> {
    let n = cluster.size();
    let eta = &cluster.x * beta;
    let mut mu = DVector::zeros(n);
    let mut d = cluster.x.clone();
    let mut sd = DVector::zeros(n);
    let mut t = DVector::zeros(n);
    for j in 0..n {
        let m = link.inverse(eta[j]);
        if !(m > 0.0 && m < 1.0) {
            return Err(mean_range_error(cluster, j, m, link));
        }
        let dm = link.d_inverse(eta[j]);
        d.row_mut(j).scale_mut(dm);
        mu[j] = m;
        sd[j] = (m * (1.0 - m)).sqrt();
        t[j] = (cluster.y[j] - m) / sd[j];
    }
    Ok(MeanPart { mu, d, sd, t })
}

fn mean_range_error(cluster: &Cluster, j: usize, mu: f64, link: LinkKind) -> GeeError {
    let advice = match link {
        LinkKind::Identity if mu.is_nan() || mu <= 0.0 => "; a log or logit link is recommended",
        LinkKind::Identity => "; a logit link is recommended",
        LinkKind::Log if mu.is_nan() || mu >= 1.0 => "; the logit link is recommended",
        _ => "",
    };
    GeeError::MeanOutOfRange {
        cluster: cluster.id.clone(),
        obs: j + 1,
        mu,
        advice,
    }
}

pub(crate) fn pair_part(
    mean: &MeanPart,
    zblock: &DMatrix<f64>,
    alpha: &DVector<f64>,
    corr_link: LinkKind,
    make_v_one: bool,
) -> PairPart {
    let n = mean.mu.len();
    let m = zblock.nrows();
    let eta = zblock * alpha;
    let rho = eta.map(|v| corr_link.inverse(v));
    let mut e = zblock.clone();
    if corr_link != LinkKind::Identity {
        let dr = eta.map(|v| corr_link.d_inverse(v));
        for mut col in e.column_iter_mut() {
            col.component_mul_assign(&dr);
        }
    }
    let mut r = DVector::zeros(m);
    let mut w_diag = DVector::from_element(m, 1.0);
    let c: Vec<f64> = (0..n).map(|j| (1.0 - 2.0 * mean.mu[j]) / mean.sd[j]).collect();
    let t = mean.t.as_slice();
    let (rs, ws, rh) = (r.as_mut_slice(), w_diag.as_mut_slice(), rho.as_slice());
    let mut row = 0;
    for j in 0..n {
        for k in j + 1..n {
            rs[row] = t[j] * t[k];
            if !make_v_one {
                let p = rh[row];
                ws[row] = 1.0 + c[j] * c[k] * p - p * p;
            }
            row += 1;
        }
    }
    PairPart { rho, e, r, w_diag }
}

/// Fitted correlations only.
pub(crate) fn pair_rho(zblock: &DMatrix<f64>, alpha: &DVector<f64>, corr_link: LinkKind) -> DVector<f64> {
    let mut rho = zblock * alpha;
    if corr_link != LinkKind::Identity {
        rho.apply(|v| *v = corr_link.inverse(*v));
    }
    rho
}

pub(crate) fn working_covariance(mean: &MeanPart, rho: &DVector<f64>) -> DMatrix<f64> {
    let n = mean.mu.len();
    let sd = mean.sd.as_slice();
    let mut v = DMatrix::zeros(n, n);
    let vs = v.as_mut_slice();
    let mut row = 0;
    for j in 0..n {
        vs[j * n + j] = sd[j] * sd[j];
        for k in j + 1..n {
            let c = sd[j] * sd[k] * rho[row];
            vs[j * n + k] = c;
            vs[k * n + j] = c;
            row += 1;
        }
    }
    v
}

/// Evaluates all per-cluster quantities at (β, α).
pub fn evaluate_cluster(
    cluster: &Cluster,
    zblock: &DMatrix<f64>,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    config: &FitConfig,
) -> Result<ClusterWork> {
    if beta.iter().chain(alpha.iter()).any(|v| !v.is_finite()) {
        return Err(GeeError::InvalidData("non-finite parameter value".into()));
    }
    let mean = mean_part(cluster, beta, config.mean_link)?;
    let pp = pair_part(&mean, zblock, alpha, config.corr_link, config.make_v_one);
    let v = working_covariance(&mean, &pp.rho);
    Ok(ClusterWork {
        mu: mean.mu,
        d: mean.d,
        sd: mean.sd,
        rho: pp.rho,
        e: pp.e,
        r: pp.r,
        w_diag: pp.w_diag,
        v,
    })
}

/// Cholesky factor of V, or an error naming the cluster.
pub(crate) fn factor_v(v: DMatrix<f64>, cluster: &Cluster) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(v).ok_or_else(|| GeeError::NotPositiveDefinite {
        cluster: cluster.id.clone(),
        what: "working covariance V",
    })
}

/// Mean-model quantities of one cluster obtained from the factor of V.
pub(crate) struct BetaTerms {
    /// D'V⁻¹D
    pub info: DMatrix<f64>,
    /// D'V⁻¹(y − μ)
    pub score: DVector<f64>,
    /// (y − μ)'V⁻¹(y − μ)
    pub quad: f64,
    pub logdet: f64,
}

pub(crate) fn beta_terms(d: &DMatrix<f64>, chol: &Cholesky<f64, Dyn>, resid: &DVector<f64>) -> BetaTerms {
    let l = chol.l_dirty();
    let ld = l.solve_lower_triangular(d).expect("Cholesky factor has a positive diagonal");
    let lr = l.solve_lower_triangular(resid).expect("Cholesky factor has a positive diagonal");
    BetaTerms {
        info: ld.tr_mul(&ld),
        score: ld.tr_mul(&lr),
        quad: lr.norm_squared(),
        logdet: 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>(),
    }
}

pub(crate) fn check_pair_variances(cluster: &Cluster, w_diag: &DVector<f64>) -> Result<()> {
    if let Some((row, &value)) = w_diag.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
        let (j, k) = pairs(cluster.size()).nth(row).expect("row within pair count");
        return Err(GeeError::PairVariance {
            cluster: cluster.id.clone(),
            j: j + 1,
            k: k + 1,
            value,
        });
    }
    Ok(())
}

/// Correlation-model information and score: (E'W⁻¹E, E'W⁻¹(R − ρ)).
pub(crate) fn alpha_terms(pp: &PairPart) -> (DMatrix<f64>, DVector<f64>) {
    let winv = pp.w_diag.map(|w| 1.0 / w);
    let mut ew = pp.e.clone();
    for mut col in ew.column_iter_mut() {
        col.component_mul_assign(&winv);
    }
    let info = ew.tr_mul(&pp.e);
    let score = ew.tr_mul(&(&pp.r - &pp.rho));
    (info, score)
}

/// Per-observation vectors (1 − 2μ_j) D_j / (μ_j(1 − μ_j)), as rows of an n × p matrix.
fn scaled_derivative_rows(mu: &DVector<f64>, sd: &DVector<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let mut a = d.clone();
    for j in 0..mu.len() {
        let s = (1.0 - 2.0 * mu[j]) / (sd[j] * sd[j]);
        a.row_mut(j).scale_mut(s);
    }
    a
}

/// Σ_pairs E_r' W_r⁻¹ E[∂R_r/∂β], the q × p cross information of one cluster.
pub(crate) fn cross_term(mean: &MeanPart, pp: &PairPart) -> DMatrix<f64> {
    let n = mean.mu.len();
    let q = pp.e.ncols();
    let a = scaled_derivative_rows(&mean.mu, &mean.sd, &mean.d);
    // E[∂R_jk/∂β] = −½ ρ_jk (a_j + a_k), so accumulate −½ ρ E/W per observation.
    let s: Vec<f64> = pp.rho.iter().zip(pp.w_diag.iter()).map(|(r, w)| -0.5 * r / w).collect();
    let mut per_obs = DMatrix::<f64>::zeros(n, q);
    for c in 0..q {
        let col = pp.e.column(c);
        let col = col.as_slice();
        let mut acc = vec![0.0; n];
        let mut row = 0;
        for j in 0..n {
            for k in j + 1..n {
                let v = s[row] * col[row];
                acc[j] += v;
                acc[k] += v;
                row += 1;
            }
        }
        per_obs.column_mut(c).copy_from_slice(&acc);
    }
    per_obs.tr_mul(&a)
}

/// E[∂R/∂β] under the model, m × p, rows in canonical pair order.
///
/// R_jk = (y_j − μ_j)(y_k − μ_k)/s_jk has expectation ρ_jk and its
/// first-order terms in (y − μ) vanish in expectation, leaving
/// −½ ρ_jk [(1−2μ_j) D_j / v_j + (1−2μ_k) D_k / v_k] with v = μ(1−μ).
pub fn expected_dr_dbeta(cluster: &Cluster, work: &ClusterWork) -> DMatrix<f64> {
    let n = cluster.size();
    let p = work.d.ncols();
    let a = scaled_derivative_rows(&work.mu, &work.sd, &work.d);
    let mut out = DMatrix::zeros(work.rho.len(), p);
    for (row, (j, k)) in pairs(n).enumerate() {
        let s = -0.5 * work.rho[row];
        for c in 0..p {
            out[(row, c)] = s * (a[(j, c)] + a[(k, c)]);
        }
    }
    out
}

/// Observed ∂R/∂β at the cluster's outcomes, m × p.
pub fn observed_dr_dbeta(cluster: &Cluster, work: &ClusterWork) -> DMatrix<f64> {
    let n = cluster.size();
    let p = work.d.ncols();
    let a = scaled_derivative_rows(&work.mu, &work.sd, &work.d);
    let mut out = DMatrix::zeros(work.rho.len(), p);
    for (row, (j, k)) in pairs(n).enumerate() {
        let s = work.sd[j] * work.sd[k];
        let ej = cluster.y[j] - work.mu[j];
        let ek = cluster.y[k] - work.mu[k];
        let r = work.r[row];
        for c in 0..p {
            out[(row, c)] =
                -(work.d[(j, c)] * ek + work.d[(k, c)] * ej) / s - 0.5 * r * (a[(j, c)] + a[(k, c)]);
        }
    }
    out
}
