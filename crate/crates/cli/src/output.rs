//! Delimited diagnostic and prediction tables.

use std::path::Path;

use pairgee::diagnostics::{DiagnosticsTable, PredictedRow};
use pairgee::ClusterDataset;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn write(path: &Path, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let err = |e: csv::Error| format!("{}: {e}", path.display());
    w.write_record(&header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| format!("{}: {e}", path.display()))
}

pub fn write_clusters(path: &Path, t: &DiagnosticsTable, beta: &[String], alpha: &[String]) -> Result<(), String> {
    let mut header = vec!["cluster".to_string(), "n".into(), "h1".into(), "h2".into()];
    header.extend(beta.iter().map(|n| format!("dbetac_{n}")));
    header.extend(alpha.iter().map(|n| format!("dalphac_{n}")));
    header.extend(["dcls", "dcls_beta", "dcls_alpha"].map(String::from));
    let rows = t
        .clusters
        .iter()
        .map(|c| {
            let mut row = vec![c.id.clone(), c.n.to_string(), c.h1.to_string(), opt(c.h2)];
            row.extend(c.dbetac.iter().map(|v| v.to_string()));
            match &c.dalphac {
                Some(d) => row.extend(d.iter().map(|v| v.to_string())),
                None => row.extend(alpha.iter().map(|_| String::new())),
            }
            row.extend([c.dcls.to_string(), c.dcls_beta.to_string(), opt(c.dcls_alpha)]);
            row
        })
        .collect();
    write(path, header, rows)
}

pub fn write_observations(path: &Path, t: &DiagnosticsTable, beta: &[String]) -> Result<(), String> {
    let mut header = vec!["cluster".to_string(), "unit".into()];
    header.extend(beta.iter().map(|n| format!("dbetao_{n}")));
    header.extend(["dobs", "dobs_beta", "dobs_alpha"].map(String::from));
    let rows = t
        .observations
        .iter()
        .map(|o| {
            let mut row = vec![o.cluster.clone(), o.unit.to_string()];
            row.extend(o.dbetao.iter().map(|v| v.to_string()));
            row.extend([o.dobs.to_string(), o.dobs_beta.to_string(), opt(o.dobs_alpha)]);
            row
        })
        .collect();
    write(path, header, rows)
}

pub fn write_predictions(path: &Path, data: &ClusterDataset, pred: &[PredictedRow], y: &str, x: &[String]) -> Result<(), String> {
    let mut header = vec!["cluster".to_string(), "unit".into(), y.to_string()];
    header.extend(x.iter().cloned());
    header.push("mu".into());
    let rows = data
        .input_order()
        .iter()
        .zip(pred)
        .map(|(&(ci, u), p)| {
            let c = &data.clusters()[ci];
            let mut row = vec![p.cluster.clone(), p.unit.to_string(), c.y[u].to_string()];
            row.extend(c.x.row(u).iter().map(|v| v.to_string()));
            row.push(p.mu.to_string());
            row
        })
        .collect();
    write(path, header, rows)
}
