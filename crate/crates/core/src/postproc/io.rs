//! CSV tables of named numeric columns.

use std::path::Path;

use crate::error::{Error, Result};
use crate::postproc::surface::SurfaceDistribution;

/// Columns of equal length with a header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            columns: vec![Vec::new(); headers.len()],
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        for (c, v) in self.columns.iter_mut().zip(row) {
            c.push(*v);
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let parse_err = |e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            }
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(parse_err)?;
        let headers: Vec<String> = rdr.headers().map_err(parse_err)?.iter().map(String::from).collect();
        let mut columns = vec![Vec::new(); headers.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(parse_err)?;
            for (c, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: row + 2,
                    message: format!("column {}: not a number: {field:?}", headers[c]),
                })?;
                columns[c].push(v);
            }
        }
        Ok(Self { headers, columns })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io_err = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::io(path, source),
            other => Error::Serde(format!("{other:?}")),
        };
        let mut w = csv::Writer::from_path(path).map_err(io_err)?;
        w.write_record(&self.headers).map_err(io_err)?;
        for r in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|c| format!("{:e}", c[r])).collect();
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Dump `s/c, x, y, Cp, Cf, τ_w, Δn⁺` per wall station.
pub fn write_surface(path: &Path, dist: &SurfaceDistribution) -> Result<()> {
    let mut t = Table::new(&["s_over_c", "x", "y", "cp", "cf", "tau_w", "dn_plus"]);
    for k in 0..dist.len() {
        t.push_row(&[
            dist.s[k],
            dist.x[k],
            dist.y[k],
            dist.cp[k],
            dist.cf[k],
            dist.tau_w[k],
            dist.dn_plus[k],
        ]);
    }
    t.write(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let mut t = Table::new(&["t", "cl"]);
        t.push_row(&[0.1, 1.0 / 3.0]);
        t.push_row(&[0.2, -2.5e-300]);
        t.write(&p).unwrap();
        let back = Table::read(&p).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("cl").unwrap()[0], 1.0 / 3.0);
    }

    #[test]
    fn bad_number_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "t,cl\n0,1\n1,abc\n").unwrap();
        match Table::read(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
