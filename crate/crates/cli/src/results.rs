//! Results file: `key = value` lines followed by `[name]` matrix blocks of
//! comma-separated rows. Numbers use the shortest representation that parses
//! back to the same `f64`.

use std::fmt::Write as _;

use nalgebra::DMatrix;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsFile {
    pub entries: Vec<(String, String)>,
    pub matrices: Vec<(String, DMatrix<f64>)>,
}

impl ResultsFile {
    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn put_matrix(&mut self, name: impl Into<String>, m: &DMatrix<f64>) {
        self.matrices.push((name.into(), m.clone()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn matrix(&self, name: &str) -> Option<&DMatrix<f64>> {
        self.matrices.iter().find(|(k, _)| k == name).map(|(_, m)| m)
    }

    pub fn render(&self) -> String {
        let mut s = String::from("# pairgee results v1\n");
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (name, m) in &self.matrices {
            let _ = writeln!(s, "\n[{name}]");
            for r in 0..m.nrows() {
                let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "{}", row.join(","));
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut out = ResultsFile::default();
        let mut current: Option<(String, Vec<Vec<f64>>)> = None;
        let flush = |cur: Option<(String, Vec<Vec<f64>>)>, out: &mut ResultsFile| -> Result<(), String> {
            if let Some((name, rows)) = cur {
                let ncols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(format!("matrix `{name}` has ragged rows"));
                }
                let flat: Vec<f64> = rows.into_iter().flatten().collect();
                let nrows = if ncols == 0 { 0 } else { flat.len() / ncols };
                out.matrices.push((name, DMatrix::from_row_slice(nrows, ncols, &flat)));
            }
            Ok(())
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                flush(current.take(), &mut out)?;
                current = Some((name.to_string(), Vec::new()));
                continue;
            }
            match &mut current {
                Some((_, rows)) => {
                    let row = line
                        .split(',')
                        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("line {}: bad number `{t}`", i + 1)))
                        .collect::<Result<Vec<_>, _>>()?;
                    rows.push(row);
                }
                None => {
                    let (k, v) = line
                        .split_once(" = ")
                        .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
                    out.entries.push((k.to_string(), v.to_string()));
                }
            }
        }
        flush(current, &mut out)?;
        Ok(out)
    }
}
