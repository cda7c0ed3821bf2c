//! Batch front end: configuration, sweeps, figure presets and the self-check.

pub mod config;
pub mod figures;
pub mod quantities;
pub mod selfcheck;
pub mod sweep;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that fixes the worker-thread count.
pub const THREADS_ENV: &str = "OMSQ_THREADS";

/// Installs the global rayon pool sized from `OMSQ_THREADS` (default: all
/// cores). Results do not depend on the thread count.
pub fn init_thread_pool() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Error::Config {
        line: None,
        message: format!("{THREADS_ENV}={v:?} is not a positive integer"),
    })?;
    // A second initialisation (e.g. from tests) keeps the existing pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    Int(i64),
}

impl Cell {
    fn write(&self, out: &mut String) {
        match self {
            // 17 significant digits; `{:e}` ignores the locale.
            Cell::Num(v) => write!(out, "{v:.16e}"),
            Cell::Flag(b) => write!(out, "{b}"),
            Cell::Int(i) => write!(out, "{i}"),
        }
        .expect("writing to a String cannot fail");
    }
}

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.write(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[k] {
                    Cell::Num(v) => v,
                    Cell::Flag(b) => f64::from(u8::from(b)),
                    Cell::Int(i) => i as f64,
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

pub(crate) fn write_table(dir: &Path, name: &str, table: &Table) -> Result<(PathBuf, FileRecord)> {
    let path = write_file(dir, name, &table.to_csv())?;
    Ok((path, FileRecord { name: name.to_string(), rows: table.rows.len(), columns: table.header.clone() }))
}

pub(crate) fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    write_file(dir, name, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_number_format_round_trips() {
        let mut t = Table::new(["a", "ok", "n"]);
        let x = 0.1 + 0.2;
        t.push(vec![Cell::Num(x), Cell::Flag(false), Cell::Int(-3)]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().next(), Some("a,ok,n"));
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0], "3.0000000000000004e-1");
        assert_eq!(row[0].parse::<f64>().unwrap(), x);
        assert_eq!(row[1..], ["false", "-3"]);
        assert_eq!(t.column("a"), Some(vec![x]));
    }
}
