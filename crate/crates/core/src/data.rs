//! Clustered binary data, pair covariates and the three-file loader.
//!
//! Pairs within a cluster of size n are always ordered
//! (1,2), (1,3), …, (1,n), (2,3), …, (n−1,n).

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeeError, Result};

/// One cluster of binary responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: String,
    pub y: DVector<f64>,
    /// n × p, one row per observation.
    pub x: DMatrix<f64>,
    /// Frequency weight.
    pub weight: f64,
}

impl Cluster {
    pub fn new(id: impl Into<String>, y: DVector<f64>, x: DMatrix<f64>, weight: f64) -> Self {
        Cluster {
            id: id.into(),
            y,
            x,
            weight,
        }
    }

    pub fn size(&self) -> usize {
        self.y.len()
    }

    pub fn pair_count(&self) -> usize {
        pair_count(self.size())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDataset {
    clusters: Vec<Cluster>,
    p: usize,
    /// (cluster index, unit index) of every input row, in input order.
    input_order: Vec<(usize, usize)>,
}

impl ClusterDataset {
    /// Validates and wraps clusters. Rows are assumed to arrive cluster by cluster.
    pub fn new(clusters: Vec<Cluster>) -> Result<Self> {
        let input_order = clusters
            .iter()
            .enumerate()
            .flat_map(|(c, cl)| (0..cl.size()).map(move |u| (c, u)))
            .collect();
        Self::with_input_order(clusters, input_order)
    }

    fn with_input_order(clusters: Vec<Cluster>, input_order: Vec<(usize, usize)>) -> Result<Self> {
        let first = clusters
            .first()
            .ok_or_else(|| GeeError::InvalidData("dataset has no clusters".into()))?;
        let p = first.x.ncols();
        if p == 0 {
            return Err(GeeError::InvalidData("no mean covariates".into()));
        }
        let mut seen = HashMap::with_capacity(clusters.len());
        for c in &clusters {
            if seen.insert(c.id.clone(), ()).is_some() {
                return Err(GeeError::InvalidData(format!("duplicate cluster id `{}`", c.id)));
            }
            if c.size() == 0 {
                return Err(GeeError::InvalidData(format!("cluster `{}` is empty", c.id)));
            }
            if c.x.nrows() != c.size() || c.x.ncols() != p {
                return Err(GeeError::InvalidData(format!(
                    "cluster `{}`: design is {}x{}, expected {}x{p}",
                    c.id,
                    c.x.nrows(),
                    c.x.ncols(),
                    c.size()
                )));
            }
            if let Some(v) = c.y.iter().find(|&&v| v != 0.0 && v != 1.0) {
                return Err(GeeError::InvalidData(format!(
                    "cluster `{}`: outcome {v} is not 0 or 1",
                    c.id
                )));
            }
            if c.x.iter().any(|v| !v.is_finite()) {
                return Err(GeeError::InvalidData(format!(
                    "cluster `{}`: non-finite covariate",
                    c.id
                )));
            }
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(GeeError::NonPositiveWeight {
                    cluster: c.id.clone(),
                    weight: c.weight,
                });
            }
        }
        Ok(ClusterDataset {
            clusters,
            p,
            input_order,
        })
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn observation_count(&self) -> usize {
        self.clusters.iter().map(Cluster::size).sum()
    }

    pub fn input_order(&self) -> &[(usize, usize)] {
        &self.input_order
    }

    /// Same design with new outcomes; `ys[i]` must match cluster i's size.
    pub fn with_outcomes(&self, ys: Vec<DVector<f64>>) -> Result<Self> {
        if ys.len() != self.clusters.len() {
            return Err(GeeError::InvalidData("outcome count mismatch".into()));
        }
        let clusters = self
            .clusters
            .iter()
            .zip(ys)
            .map(|(c, y)| {
                if y.len() != c.size() {
                    return Err(GeeError::InvalidData(format!(
                        "cluster `{}`: outcome length mismatch",
                        c.id
                    )));
                }
                Ok(Cluster { y, ..c.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_input_order(clusters, self.input_order.clone())
    }

    /// Dataset without cluster `index` (used by exact deletion checks).
    pub fn without_cluster(&self, index: usize) -> Result<Self> {
        let clusters: Vec<Cluster> = self
            .clusters
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, c)| c.clone())
            .collect();
        Self::new(clusters)
    }
}

/// Correlation-model design: block i is m_i × q in canonical pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCovariates {
    blocks: Vec<DMatrix<f64>>,
    q: usize,
}

impl PairCovariates {
    pub fn new(blocks: Vec<DMatrix<f64>>, q: usize, data: &ClusterDataset) -> Result<Self> {
        if q == 0 {
            return Err(GeeError::InvalidData("no correlation covariates".into()));
        }
        if blocks.len() != data.len() {
            return Err(GeeError::InvalidData(format!(
                "{} pair blocks for {} clusters",
                blocks.len(),
                data.len()
            )));
        }
        let expected: usize = data.clusters().iter().map(Cluster::pair_count).sum();
        let found: usize = blocks.iter().map(DMatrix::nrows).sum();
        let mismatches: Vec<String> = data
            .clusters()
            .iter()
            .zip(&blocks)
            .filter(|(c, b)| c.pair_count() != b.nrows())
            .map(|(c, b)| format!("`{}` expected {} found {}", c.id, c.pair_count(), b.nrows()))
            .collect();
        if !mismatches.is_empty() {
            return Err(GeeError::PairRowMismatch {
                expected,
                found,
                detail: format!("per cluster: {}", mismatches.join(", ")),
            });
        }
        for (c, b) in data.clusters().iter().zip(&blocks) {
            if b.ncols() != q && b.nrows() > 0 {
                return Err(GeeError::InvalidData(format!(
                    "cluster `{}`: pair block has {} columns, expected {q}",
                    c.id,
                    b.ncols()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(GeeError::InvalidData(format!(
                    "cluster `{}`: non-finite correlation covariate",
                    c.id
                )));
            }
        }
        let blocks = blocks
            .into_iter()
            .map(|b| if b.nrows() == 0 { DMatrix::zeros(0, q) } else { b })
            .collect();
        Ok(PairCovariates { blocks, q })
    }

    /// Builds blocks from a per-pair function `f(cluster_index, j, k)` with
    /// 0-based unit indices `j < k`.
    pub fn from_fn<F>(data: &ClusterDataset, q: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> Vec<f64>,
    {
        let blocks = data
            .clusters()
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let n = c.size();
                let mut b = DMatrix::zeros(pair_count(n), q);
                for (row, (j, k)) in pairs(n).enumerate() {
                    let z = f(ci, j, k);
                    assert_eq!(z.len(), q, "pair covariate length");
                    for (col, v) in z.into_iter().enumerate() {
                        b[(row, col)] = v;
                    }
                }
                b
            })
            .collect();
        Self::new(blocks, q, data)
    }

    /// A single constant covariate: the exchangeable correlation model.
    pub fn exchangeable(data: &ClusterDataset) -> Result<Self> {
        Self::from_fn(data, 1, |_, _, _| vec![1.0])
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &DMatrix<f64> {
        &self.blocks[i]
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn total_rows(&self) -> usize {
        self.blocks.iter().map(DMatrix::nrows).sum()
    }

    pub fn without_cluster(&self, index: usize) -> Self {
        PairCovariates {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != index)
                .map(|(_, b)| b.clone())
                .collect(),
            q: self.q,
        }
    }
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// 0-based pairs (j, k), j < k, in canonical order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |j| (j + 1..n).map(move |k| (j, k)))
}

/// 1-based row of pair (j, k) among the n(n−1)/2 pairs of a cluster of size n.
pub fn pair_row_offset(j: usize, k: usize, n: usize) -> Result<usize> {
    if j < 1 || j >= k || k > n {
        return Err(GeeError::InvalidPair { j, k, n });
    }
    Ok((j - 1) * (2 * n - j) / 2 + (k - j))
}

/// Inverse of [`pair_row_offset`]: the 1-based pair at 1-based `row`.
pub fn pair_at_row(row: usize, n: usize) -> Result<(usize, usize)> {
    if row < 1 || row > pair_count(n) {
        return Err(GeeError::InvalidPair { j: row, k: row, n });
    }
    let mut remaining = row;
    for j in 1..n {
        let in_row = n - j;
        if remaining <= in_row {
            return Ok((j, j + remaining));
        }
        remaining -= in_row;
    }
    unreachable!("row bounded by pair count")
}

/// Column selection and parsing options for [`load_inputs`].
#[derive(Debug, Clone)]
pub struct InputColumns {
    pub id: String,
    pub y: String,
    pub x: Vec<String>,
    pub z: Vec<String>,
    /// Optional cluster-id column in the pair file, used to localize row-count errors.
    pub z_id: Option<String>,
    /// Cluster-id column in the weight file; defaults to `id`.
    pub w_id: Option<String>,
    pub w: String,
    pub delimiter: u8,
}

impl InputColumns {
    pub fn new(id: &str, y: &str, x: &[&str], z: &[&str], w: &str) -> Self {
        InputColumns {
            id: id.into(),
            y: y.into(),
            x: x.iter().map(|s| s.to_string()).collect(),
            z: z.iter().map(|s| s.to_string()).collect(),
            z_id: None,
            w_id: None,
            w: w.into(),
            delimiter: b',',
        }
    }
}

struct Table {
    file: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path, delimiter: u8) -> Result<Self> {
        let file = path.display().to_string();
        let text = std::fs::read(path).map_err(|source| GeeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .trim(csv::Trim::All)
            .has_headers(true)
            .from_reader(text.as_slice());
        let csv_err = |e: csv::Error| GeeError::Csv {
            file: file.clone(),
            message: e.to_string(),
        };
        let header = rdr
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(str::to_string).collect());
        }
        Ok(Table { file, header, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| GeeError::MissingColumn {
                file: self.file.clone(),
                column: name.to_string(),
            })
    }

    fn text(&self, row: usize, col: usize) -> Result<&str> {
        let v = self.rows[row][col].as_str();
        if is_missing(v) {
            return Err(GeeError::MissingValue {
                file: self.file.clone(),
                row: row + 1,
                column: self.header[col].clone(),
            });
        }
        Ok(v)
    }

    fn number(&self, row: usize, col: usize) -> Result<f64> {
        let v = self.text(row, col)?;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(GeeError::NonNumeric {
                file: self.file.clone(),
                row: row + 1,
                column: self.header[col].clone(),
                value: v.to_string(),
            }),
        }
    }
}

fn is_missing(v: &str) -> bool {
    v.is_empty() || v == "." || v.eq_ignore_ascii_case("na")
}

/// Loads the outcome/mean-covariate file, the pair-covariate file and the
/// cluster-weight file.
///
/// Clusters appear in order of first occurrence in the outcome file. The pair
/// file is consumed sequentially: the first m_1 rows belong to the first
/// cluster, and so on.
pub fn load_inputs(
    xy_path: &Path,
    z_path: &Path,
    w_path: &Path,
    cols: &InputColumns,
) -> Result<(ClusterDataset, PairCovariates)> {
    let xy = Table::read(xy_path, cols.delimiter)?;
    let id_col = xy.column(&cols.id)?;
    let y_col = xy.column(&cols.y)?;
    let x_cols = cols
        .x
        .iter()
        .map(|c| xy.column(c))
        .collect::<Result<Vec<_>>>()?;
    if x_cols.is_empty() {
        return Err(GeeError::Config("at least one mean covariate is required".into()));
    }
    let p = x_cols.len();

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut ys: Vec<Vec<f64>> = Vec::new();
    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut input_order = Vec::with_capacity(xy.rows.len());
    for row in 0..xy.rows.len() {
        let id = xy.text(row, id_col)?.to_string();
        let yv = xy.text(row, y_col)?;
        let y = match yv.parse::<f64>() {
            Ok(v) if v == 0.0 || v == 1.0 => v,
            _ => {
                return Err(GeeError::NonBinaryOutcome {
                    file: xy.file.clone(),
                    row: row + 1,
                    column: xy.header[y_col].clone(),
                    value: yv.to_string(),
                })
            }
        };
        let c = *index.entry(id.clone()).or_insert_with(|| {
            ids.push(id);
            ys.push(Vec::new());
            xs.push(Vec::new());
            ids.len() - 1
        });
        input_order.push((c, ys[c].len()));
        ys[c].push(y);
        for &xc in &x_cols {
            xs[c].push(xy.number(row, xc)?);
        }
    }
    if ids.is_empty() {
        return Err(GeeError::InvalidData(format!("{}: no data rows", xy.file)));
    }

    let weights = read_weights(w_path, cols, &index)?;
    let mut clusters = Vec::with_capacity(ids.len());
    for (c, id) in ids.iter().enumerate() {
        let weight = weights[c].ok_or_else(|| GeeError::MissingWeight {
            cluster: id.clone(),
        })?;
        let n = ys[c].len();
        clusters.push(Cluster::new(
            id.clone(),
            DVector::from_vec(std::mem::take(&mut ys[c])),
            DMatrix::from_row_slice(n, p, &xs[c]),
            weight,
        ));
    }
    let data = ClusterDataset::with_input_order(clusters, input_order)?;
    let pairs = read_pairs(z_path, cols, &data)?;
    Ok((data, pairs))
}

fn read_weights(
    path: &Path,
    cols: &InputColumns,
    index: &HashMap<String, usize>,
) -> Result<Vec<Option<f64>>> {
    let t = Table::read(path, cols.delimiter)?;
    let id_col = t.column(cols.w_id.as_deref().unwrap_or(&cols.id))?;
    let w_col = t.column(&cols.w)?;
    let mut out = vec![None; index.len()];
    for row in 0..t.rows.len() {
        let id = t.text(row, id_col)?;
        let w = t.number(row, w_col)?;
        // Weight rows for clusters absent from the outcome file are ignored.
        let Some(&c) = index.get(id) else { continue };
        if out[c].is_some() {
            return Err(GeeError::DuplicateWeight {
                cluster: id.to_string(),
            });
        }
        if w <= 0.0 {
            return Err(GeeError::NonPositiveWeight {
                cluster: id.to_string(),
                weight: w,
            });
        }
        out[c] = Some(w);
    }
    Ok(out)
}

fn read_pairs(path: &Path, cols: &InputColumns, data: &ClusterDataset) -> Result<PairCovariates> {
    let t = Table::read(path, cols.delimiter)?;
    let z_cols = cols
        .z
        .iter()
        .map(|c| t.column(c))
        .collect::<Result<Vec<_>>>()?;
    if z_cols.is_empty() {
        return Err(GeeError::Config("at least one correlation covariate is required".into()));
    }
    let q = z_cols.len();
    let expected: usize = data.clusters().iter().map(Cluster::pair_count).sum();
    let found = t.rows.len();

    if let Some(zid) = &cols.z_id {
        let zc = t.column(zid)?;
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for row in 0..found {
            *counts.entry(t.text(row, zc)?).or_default() += 1;
        }
        let bad: Vec<String> = data
            .clusters()
            .iter()
            .filter_map(|c| {
                let got = counts.get(c.id.as_str()).copied().unwrap_or(0);
                (got != c.pair_count())
                    .then(|| format!("`{}` expected {} found {}", c.id, c.pair_count(), got))
            })
            .collect();
        if !bad.is_empty() {
            return Err(GeeError::PairRowMismatch {
                expected,
                found,
                detail: format!("per cluster: {}", bad.join(", ")),
            });
        }
    }
    if expected != found {
        let sizes: Vec<String> = data
            .clusters()
            .iter()
            .take(10)
            .map(|c| format!("`{}` n={} m={}", c.id, c.size(), c.pair_count()))
            .collect();
        let more = if data.len() > 10 { ", ..." } else { "" };
        return Err(GeeError::PairRowMismatch {
            expected,
            found,
            detail: format!("expected per cluster: {}{more}", sizes.join(", ")),
        });
    }

    let mut blocks = Vec::with_capacity(data.len());
    let mut row = 0;
    for c in data.clusters() {
        let m = c.pair_count();
        let mut b = DMatrix::zeros(m, q);
        for r in 0..m {
            for (col, &zc) in z_cols.iter().enumerate() {
                b[(r, col)] = t.number(row, zc)?;
            }
            row += 1;
        }
        blocks.push(b);
    }
    PairCovariates::new(blocks, q, data)
}
