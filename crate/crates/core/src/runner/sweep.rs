//! Parameter sweeps and stability maps driven by a [`RunConfig`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{poles, stability_limit};
use crate::params::{DerivedParams, Model, SystemParams, Warning};
use crate::runner::config::RunConfig;
use crate::runner::quantities::{Evaluator, Quantity};
use crate::runner::{write_json, write_table, Cell, FileRecord, Table, SCHEMA_VERSION};

/// One operating point of a sweep.
#[derive(Debug, Clone)]
pub struct Point {
    pub sweep_value: Option<f64>,
    pub model: Model,
}

pub fn operating_points(cfg: &RunConfig) -> Result<Vec<Point>> {
    let build = |p: SystemParams, v: Option<f64>| -> Result<Point> {
        let model = Model::new(p).map_err(|e| Error::Config { line: None, message: e.to_string() })?;
        Ok(Point { sweep_value: v, model })
    };
    match &cfg.sweep {
        None => Ok(vec![build(cfg.params.clone(), None)?]),
        Some(s) => s
            .values
            .iter()
            .map(|&v| {
                let mut p = cfg.params.clone();
                p.set(&s.parameter, v)?;
                build(p, Some(v))
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
    pub derived: DerivedParams,
    pub stable: bool,
    pub mode_split: bool,
    pub margin: f64,
    pub lambda_limit: f64,
    pub warnings: Vec<Warning>,
}

fn point_record(index: usize, pt: &Point) -> PointRecord {
    let r = poles(&pt.model);
    PointRecord {
        index,
        sweep_value: pt.sweep_value,
        derived: *pt.model.derived(),
        stable: r.stable,
        mode_split: r.mode_split,
        margin: r.margin,
        lambda_limit: stability_limit(&pt.model),
        warnings: pt.model.warnings().to_vec(),
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct InvalidSummary {
    pub count: usize,
    pub first_error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub kind: &'static str,
    pub config: RunConfig,
    pub points: Vec<PointRecord>,
    pub files: Vec<FileRecord>,
    /// Rows whose values could not be evaluated (emitted as NaN, `valid=false`).
    pub invalid: BTreeMap<String, InvalidSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
}

/// In-memory sweep result.
#[derive(Debug, Clone)]
pub struct SweepTables {
    pub tables: Vec<(Quantity, Table)>,
    pub points: Vec<PointRecord>,
    pub invalid: BTreeMap<String, InvalidSummary>,
}

fn header(cfg: &RunConfig, q: Quantity) -> Vec<String> {
    let mut h = Vec::new();
    if let Some(s) = &cfg.sweep {
        h.push(s.parameter.clone());
    }
    if q.is_spectral() {
        h.push("omega".into());
    }
    h.push("stable".into());
    h.push("valid".into());
    h.extend(q.columns());
    h
}

fn note(invalid: &mut BTreeMap<String, InvalidSummary>, q: Quantity, e: &Error) {
    let entry = invalid.entry(q.name().to_string()).or_default();
    if entry.count == 0 {
        entry.first_error = e.to_string();
    }
    entry.count += 1;
}

/// Evaluates every requested quantity; rows are sweep-major, frequency-minor.
pub fn sweep_tables(cfg: &RunConfig) -> Result<SweepTables> {
    let points = operating_points(cfg)?;
    let quantities = cfg.quantities();
    let grid = cfg.grid.as_ref().map(|g| g.points()).unwrap_or_default();
    let mut tables: Vec<(Quantity, Table)> = quantities.iter().map(|&q| (q, Table::new(header(cfg, q)))).collect();
    let mut invalid = BTreeMap::new();
    let mut records = Vec::with_capacity(points.len());
    for (i, pt) in points.iter().enumerate() {
        let rec = point_record(i, pt);
        if !rec.stable {
            log::warn!("operating point {i} is unstable; emitting off-pole values with stable=false");
        }
        let ev = Evaluator { model: &pt.model, rwa: cfg.rwa, sideband_order: cfg.sideband_order };
        let lead = |omega: Option<f64>| {
            let mut row = Vec::new();
            if let Some(v) = pt.sweep_value {
                row.push(Cell::Num(v));
            }
            if let Some(w) = omega {
                row.push(Cell::Num(w));
            }
            row.push(Cell::Flag(rec.stable));
            row
        };
        for (q, table) in tables.iter_mut() {
            let width = q.columns().len();
            let mut finish = |mut row: Vec<Cell>, value: Result<Vec<f64>>| {
                match value {
                    Ok(v) => {
                        row.push(Cell::Flag(true));
                        row.extend(v.into_iter().map(Cell::Num));
                    }
                    Err(e) => {
                        note(&mut invalid, *q, &e);
                        row.push(Cell::Flag(false));
                        row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), width));
                    }
                }
                table.push(row);
            };
            if q.is_spectral() {
                let values: Vec<Result<Vec<f64>>> = grid.par_iter().map(|&w| ev.spectral(*q, w)).collect();
                for (&w, v) in grid.iter().zip(values) {
                    finish(lead(Some(w)), v);
                }
            } else {
                finish(lead(None), ev.resonant(*q));
            }
        }
        records.push(rec);
    }
    Ok(SweepTables { tables, points: records, invalid })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub sidecar: PathBuf,
}

pub fn run_sweep(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutput> {
    let st = sweep_tables(cfg)?;
    let prefix = &cfg.output.prefix;
    let mut files = Vec::new();
    let mut records = Vec::new();
    for (q, table) in &st.tables {
        let (path, rec) = write_table(out_dir, &format!("{prefix}{}.csv", q.name()), table)?;
        files.push(path);
        records.push(rec);
    }
    let sidecar = Sidecar {
        schema_version: SCHEMA_VERSION,
        kind: "sweep",
        config: cfg.clone(),
        points: st.points,
        files: records,
        invalid: st.invalid,
        notices: Vec::new(),
    };
    let sidecar = write_json(out_dir, &format!("{prefix}run.json"), &sidecar)?;
    Ok(RunOutput { files, sidecar })
}

/// Stability over the sweep parameter × the `[map]` axis.
pub fn stability_table(cfg: &RunConfig) -> Result<Table> {
    let map = cfg.map.as_ref().ok_or_else(|| Error::Config {
        line: None,
        message: "stability-map needs a [map] section (parameter, min, max, count)".into(),
    })?;
    let sweep_name = cfg.sweep.as_ref().map(|s| s.parameter.clone()).unwrap_or_else(|| "point".into());
    let mut table = Table::new([
        sweep_name.as_str(),
        map.parameter.as_str(),
        "stable",
        "mode_split",
        "margin",
        "lambda_limit",
        "lambda_over_limit",
    ]);
    let axis = map.axis().points();
    for (i, pt) in operating_points(cfg)?.iter().enumerate() {
        let rows: Vec<Result<Vec<Cell>>> = axis
            .par_iter()
            .map(|&y| {
                let mut p = pt.model.params().clone();
                p.set(&map.parameter, y)?;
                let m = Model::new(p).map_err(|e| Error::Config { line: None, message: e.to_string() })?;
                let r = poles(&m);
                let limit = stability_limit(&m);
                Ok(vec![
                    Cell::Num(pt.sweep_value.unwrap_or(i as f64)),
                    Cell::Num(y),
                    Cell::Flag(r.stable),
                    Cell::Flag(r.mode_split),
                    Cell::Num(r.margin),
                    Cell::Num(limit),
                    Cell::Num(m.params().lambda_mag / limit),
                ])
            })
            .collect();
        for row in rows {
            table.push(row?);
        }
    }
    Ok(table)
}

pub fn run_stability_map(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutput> {
    let table = stability_table(cfg)?;
    let prefix = &cfg.output.prefix;
    let (path, rec) = write_table(out_dir, &format!("{prefix}stability_map.csv"), &table)?;
    let points = operating_points(cfg)?.iter().enumerate().map(|(i, p)| point_record(i, p)).collect();
    let sidecar = Sidecar {
        schema_version: SCHEMA_VERSION,
        kind: "stability_map",
        config: cfg.clone(),
        points,
        files: vec![rec],
        invalid: BTreeMap::new(),
        notices: Vec::new(),
    };
    let sidecar = write_json(out_dir, &format!("{prefix}stability_map.json"), &sidecar)?;
    Ok(RunOutput { files: vec![path], sidecar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::squeezing;

    fn cfg(extra: &str) -> RunConfig {
        RunConfig::from_toml(&format!(
            r#"
[params]
kappa_ext = 1.0
gamma = 1e-5
coupling = 0.0158113883008419
nbar_m = 100

[grid]
min = -1e-3
max = 1e-3
count = 7
{extra}
"#
        ))
        .unwrap()
    }

    #[test]
    fn five_lambda_values_give_five_gain_rows() {
        let c = cfg("[sweep]\nparameter = \"lambda_mag\"\nvalues = [0.0, 1e-4, 2e-4, 3e-4, 4e-4]\n[output]\nquantities = [\"gain_Y\"]\n");
        let st = sweep_tables(&c).unwrap();
        let t = &st.tables[0].1;
        assert_eq!(t.rows.len(), 5);
        assert_eq!(t.header[..3], ["lambda_mag", "stable", "valid"]);
    }

    #[test]
    fn squeeze_column_matches_module_exactly() {
        let c =
            cfg("[sweep]\nparameter = \"lambda_mag\"\nvalues = [1e-4, 4e-4]\n[output]\nquantities = [\"squeeze_X\"]\n");
        let st = sweep_tables(&c).unwrap();
        let t = &st.tables[0].1;
        assert_eq!(t.rows.len(), 14);
        let csv = t.to_csv();
        let pts = operating_points(&c).unwrap();
        for (k, line) in csv.lines().skip(1).enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            let w: f64 = f[1].parse().unwrap();
            let want = squeezing(&pts[k / 7].model, w).unwrap();
            assert_eq!(f[4].parse::<f64>().unwrap(), want);
        }
    }

    #[test]
    fn unstable_points_are_flagged_not_dropped() {
        // λ_max = 0.5e-5·(1+100) ≈ 5.05e-4.
        let c = cfg("[sweep]\nparameter = \"lambda_mag\"\nvalues = [1e-4, 9e-4]\n[output]\nquantities = [\"s_out\", \"stability\"]\n");
        let st = sweep_tables(&c).unwrap();
        assert!(st.points[0].stable && !st.points[1].stable);
        let s_out = &st.tables[0].1;
        assert_eq!(s_out.rows.len(), 14);
        let stable = s_out.column("stable").unwrap();
        let valid = s_out.column("valid").unwrap();
        assert!(stable[..7].iter().all(|&s| s == 1.0) && stable[7..].iter().all(|&s| s == 0.0));
        assert!(valid.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn outputs_are_byte_identical_across_runs() {
        let c = cfg("[sweep]\nparameter = \"lambda_mag\"\nvalues = [1e-4, 3e-4]\n[output]\nquantities = [\"s_out\", \"t_eff\", \"gain_Y\"]\n");
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run_sweep(&c, a.path()).unwrap();
        run_sweep(&c, b.path()).unwrap();
        for f in ra.files.iter().chain([&ra.sidecar]) {
            let name = f.file_name().unwrap();
            assert_eq!(std::fs::read(f).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        }
        let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&ra.sidecar).unwrap()).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["points"].as_array().unwrap().len(), 2);
        assert_eq!(json["config"]["params"]["nbar_m"], 100.0);
    }

    #[test]
    fn stability_map_marks_threshold() {
        let c = cfg("[sweep]\nparameter = \"coupling\"\nvalues = [0.0, 0.0158113883008419]\n[map]\nparameter = \"lambda_mag\"\nmin = 0.0\nmax = 1e-3\ncount = 11\n");
        let t = stability_table(&c).unwrap();
        assert_eq!(t.rows.len(), 22);
        let ratio = t.column("lambda_over_limit").unwrap();
        let stable = t.column("stable").unwrap();
        for (r, s) in ratio.iter().zip(&stable) {
            assert_eq!(*s == 1.0, *r < 1.0);
        }
    }
}
