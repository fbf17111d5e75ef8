//! Text snapshot format for fields: header lines `l=`, `N=`, `t=`, then one
//! `x,U(x)` line per grid point at full round-trip precision. Snapshots are
//! written by the simulation commands and accepted back as initial data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::DomainGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub l: f64,
    pub n: usize,
    pub t: f64,
    pub field: Vec<f64>,
}

impl Snapshot {
    pub fn new(grid: &DomainGrid, t: f64, field: Vec<f64>) -> Self {
        debug_assert_eq!(field.len(), grid.len());
        Snapshot {
            l: grid.half_width(),
            n: grid.len(),
            t,
            field,
        }
    }

    pub fn to_text(&self, grid: &DomainGrid) -> String {
        let mut s = String::new();
        writeln!(s, "l={}", self.l).unwrap();
        writeln!(s, "N={}", self.n).unwrap();
        writeln!(s, "t={}", self.t).unwrap();
        for (j, u) in self.field.iter().enumerate() {
            writeln!(s, "{},{}", grid.point(j), u).unwrap();
        }
        s
    }

    pub fn write(&self, grid: &DomainGrid, path: &Path) -> Result<()> {
        fs::write(path, self.to_text(grid))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Snapshot {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::parse(&text).map_err(|reason| Error::Snapshot {
            path: path.to_path_buf(),
            reason,
        })
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines();
        let l = header(lines.next(), "l")?;
        let n_val = header(lines.next(), "N")?;
        let t = header(lines.next(), "t")?;
        let n = n_val as usize;
        if n_val.fract() != 0.0 || n == 0 {
            return Err(format!("N must be a positive integer, got {n_val}"));
        }
        let mut field = Vec::with_capacity(n);
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (_, u) = line
                .split_once(',')
                .ok_or_else(|| format!("line {}: expected \"x,u\"", idx + 4))?;
            let u: f64 = u.trim().parse().map_err(|e| format!("line {}: {e}", idx + 4))?;
            field.push(u);
        }
        if field.len() != n {
            return Err(format!("expected {} field values, found {}", n, field.len()));
        }
        Ok(Snapshot { l, n, t, field })
    }

    /// Extract the field, verifying the snapshot grid matches `grid`.
    pub fn into_field_for(self, grid: &DomainGrid) -> Result<Vec<f64>> {
        if self.n != grid.len() || (self.l - grid.half_width()).abs() > 1e-9 * grid.half_width() {
            return Err(Error::config(
                "initial.path",
                format!(
                    "snapshot grid (l={}, N={}) does not match the run grid (l={}, N={})",
                    self.l,
                    self.n,
                    grid.half_width(),
                    grid.len()
                ),
            ));
        }
        Ok(self.field)
    }
}

fn header(line: Option<&str>, key: &str) -> std::result::Result<f64, String> {
    let line = line.ok_or_else(|| format!("missing header line {key}="))?;
    let (k, v) = line.split_once('=').ok_or_else(|| format!("malformed header line {line:?}"))?;
    if k.trim() != key {
        return Err(format!("expected header {key}=, got {line:?}"));
    }
    v.trim().parse().map_err(|e| format!("header {key}: {e}"))
}
