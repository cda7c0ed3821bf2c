//! Figure presets: fixed parameter sets and the curve data for each figure.

use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::force::{added_noise_force, impedance_match_c0, is_impedance_matched, transduction};
use crate::model::poles;
use crate::numerics::linspace;
use crate::params::{Model, SystemParams};
use crate::runner::{write_json, write_table, Cell, FileRecord, Table, SCHEMA_VERSION};
use crate::scattering::{gain_y, impurity_from, output_spectra, scattering_matrix};
use crate::sideband::nonrwa_point;
use crate::spectral::{qubit_polarization, spectral_function};

pub const PRESETS: &[&str] = &["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub label: String,
    pub params: SystemParams,
    pub rwa: bool,
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub name: &'static str,
    pub tables: Vec<(String, Table)>,
    pub curves: Vec<Curve>,
    pub notices: Vec<String>,
}

#[derive(Serialize)]
struct FigureSidecar<'a> {
    schema_version: u32,
    kind: &'static str,
    figure: &'a str,
    curves: &'a [Curve],
    files: Vec<FileRecord>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    notices: &'a [String],
}

pub fn build(name: &str) -> Result<Figure> {
    match name {
        "fig2" => Ok(fig2()),
        "fig3" => Ok(fig3()),
        "fig4" => Ok(fig4()),
        "fig5" => Ok(fig5()),
        "fig6" => Ok(fig6()),
        "fig7" => Ok(fig7()),
        "fig8" => Ok(fig8()),
        _ => Err(Error::Config {
            line: None,
            message: format!("unknown figure `{name}`; presets: {}", PRESETS.join(", ")),
        }),
    }
}

pub fn write(fig: &Figure, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    let mut records = Vec::new();
    for (file, table) in &fig.tables {
        let (p, r) = write_table(dir, file, table)?;
        paths.push(p);
        records.push(r);
    }
    let sidecar = FigureSidecar {
        schema_version: SCHEMA_VERSION,
        kind: "figure",
        figure: fig.name,
        curves: &fig.curves,
        files: records,
        notices: &fig.notices,
    };
    paths.push(write_json(dir, &format!("{}.json", fig.name), &sidecar)?);
    Ok(paths)
}

fn model(p: SystemParams) -> Model {
    Model::new(p).expect("preset parameters are valid")
}

/// `(valid, value)`; failures become NaN with `valid = false`.
fn cells(values: Result<Vec<f64>>, width: usize) -> Vec<Cell> {
    match values {
        Ok(v) => std::iter::once(Cell::Flag(true)).chain(v.into_iter().map(Cell::Num)).collect(),
        Err(_) => std::iter::once(Cell::Flag(false)).chain(std::iter::repeat_n(Cell::Num(f64::NAN), width)).collect(),
    }
}

/// Output spectra and direct scattering, from the sideband solve unless `rwa`.
fn output(m: &Model, omega: f64, rwa: bool) -> Result<(nalgebra::Matrix4<C64>, nalgebra::Matrix4<C64>, f64)> {
    if rwa {
        Ok((output_spectra(m, omega)?, scattering_matrix(m, omega)?.entries, 0.0))
    } else {
        let p = nonrwa_point(m, omega, 1)?;
        Ok((p.s_out, p.s_direct, p.oscillating))
    }
}

/// Fig. 3 operating point: γ/κ = 1e-4, G/κ = 0.05 (C0 = 100), ω_M/κ = 20,
/// n_c = 0, n_m = 5.
pub fn fig3_params(lambda_over_max: f64) -> SystemParams {
    let base = SystemParams { gamma: 1e-4, coupling: 0.05, omega_m: 20.0, nbar_m: 5.0, ..Default::default() };
    SystemParams { lambda_mag: lambda_over_max * base.lambda_max(), ..base }
}

/// Resonant gain versus drive for two cooperativities.
fn fig2() -> Figure {
    let mut t = Table::new(["c0", "lambda_over_lambda_max", "two_lambda_over_gamma", "stable", "valid", "r_y", "gain"]);
    let mut curves = Vec::new();
    for c0 in [10.0, 100.0] {
        let base = SystemParams::scaled(1e-4, c0, 0.0);
        curves.push(Curve { label: format!("C0={c0}"), params: base.clone(), rwa: true });
        for r in linspace(0.0, 0.999, 200) {
            let m = model(SystemParams { lambda_mag: r * base.lambda_max(), ..base.clone() });
            let mut row = vec![Cell::Num(c0), Cell::Num(r), Cell::Num(2.0 * m.params().lambda_mag / m.params().gamma)];
            row.push(Cell::Flag(poles(&m).stable));
            row.extend(cells(gain_y(&m).map(|g| vec![g.r_y, g.gain]), 2));
            t.push(row);
        }
    }
    Figure { name: "fig2", tables: vec![("fig2_gain.csv".into(), t)], curves, notices: vec![] }
}

pub const FIG3_LAMBDAS: [f64; 5] = [0.5, 0.7, 0.8, 0.9, 0.95];

/// Gain, referred noise, squeezing and impurity spectra with first-sideband
/// counter-rotating corrections.
fn fig3() -> Figure {
    let cols = ["gain_y", "referred_noise_y", "two_s_xx", "squeeze_db", "n_eff", "gain_y_rwa", "oscillating"];
    let mut spectra = Table::new(["lambda_over_lambda_max", "omega", "stable", "valid"].into_iter().chain(cols));
    let mut curves = Vec::new();
    let grid = linspace(-0.03, 0.03, 301);
    let eval = |m: &Model, w: f64| -> Result<Vec<f64>> {
        let (s_out, s, osc) = output(m, w, false)?;
        let gain = s[(1, 1)].norm_sqr();
        let two_sxx = 2.0 * s_out[(0, 0)].re;
        let rwa_gain = scattering_matrix(m, w)?.entries[(1, 1)].norm_sqr();
        Ok(vec![gain, s_out[(1, 1)].re / gain, two_sxx, -10.0 * two_sxx.log10(), impurity_from(&s_out), rwa_gain, osc])
    };
    for r in FIG3_LAMBDAS {
        let m = model(fig3_params(r));
        curves.push(Curve { label: format!("lambda/lambda_max={r}"), params: m.params().clone(), rwa: false });
        let stable = poles(&m).stable;
        let rows: Vec<Vec<Cell>> = grid
            .par_iter()
            .map(|&w| {
                let mut row = vec![Cell::Num(r), Cell::Num(w), Cell::Flag(stable)];
                row.extend(cells(eval(&m, w), cols.len()));
                row
            })
            .collect();
        rows.into_iter().for_each(|row| spectra.push(row));
    }
    let mut resonant = Table::new(["lambda_over_lambda_max", "stable", "valid", "gain_y", "referred_noise_y"]);
    for r in linspace(0.5, 0.99, 50) {
        let m = model(fig3_params(r));
        let mut row = vec![Cell::Num(r), Cell::Flag(poles(&m).stable)];
        row.extend(cells(eval(&m, 0.0).map(|v| vec![v[0], v[1]]), 2));
        resonant.push(row);
    }
    Figure {
        name: "fig3",
        tables: vec![("fig3_spectra.csv".into(), spectra), ("fig3_resonant.csv".into(), resonant)],
        curves,
        notices: vec![],
    }
}

/// On-resonance squeezing and impurity versus drive strength.
fn fig4() -> Figure {
    let mut t = Table::new([
        "c0",
        "lambda_over_lambda_max",
        "stable",
        "valid",
        "two_s_xx",
        "squeeze_db",
        "n_eff",
        "squeeze_db_rwa",
        "n_eff_rwa",
    ]);
    let mut curves = Vec::new();
    for c0 in [10.0, 100.0, 1000.0, 1e4] {
        let base = SystemParams { omega_m: 20.0, nbar_m: 100.0, ..SystemParams::scaled(1e-5, c0, 0.0) };
        curves.push(Curve { label: format!("C0={c0}"), params: base.clone(), rwa: false });
        let lmax = base.lambda_max();
        let rows: Vec<Vec<Cell>> = linspace(0.0, 0.99, 100)
            .par_iter()
            .map(|&r| {
                let m = model(SystemParams { lambda_mag: r * lmax, ..base.clone() });
                let vals = output(&m, 0.0, false).and_then(|(s, _, _)| {
                    let rwa = output_spectra(&m, 0.0)?;
                    let two = 2.0 * s[(0, 0)].re;
                    let two_rwa = 2.0 * rwa[(0, 0)].re;
                    Ok(vec![two, -10.0 * two.log10(), impurity_from(&s), -10.0 * two_rwa.log10(), impurity_from(&rwa)])
                });
                let mut row = vec![Cell::Num(c0), Cell::Num(r), Cell::Flag(poles(&m).stable)];
                row.extend(cells(vals, 5));
                row
            })
            .collect();
        rows.into_iter().for_each(|row| t.push(row));
    }
    Figure { name: "fig4", tables: vec![("fig4_resonant.csv".into(), t)], curves, notices: vec![] }
}

/// Largest squeezing over the optical quadrature angle: the smaller
/// eigenvalue of the (X, Y) block of `2S̄`, and the angle of its eigenvector.
fn best_quadrature(s: &nalgebra::Matrix4<C64>) -> (f64, f64) {
    let block = Matrix2::new(s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]);
    let sym = (block + block.transpose()).map(|z| z.re);
    let eig = sym.symmetric_eigen();
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let v = eig.eigenvectors.column(k);
    (eig.eigenvalues[k], v[1].atan2(v[0]))
}

/// Squeezing spectrum of the two-phonon-drive scheme at C0 = 1000.
fn fig5() -> Figure {
    let base = SystemParams { omega_m: 20.0, nbar_m: 5.0, ..SystemParams::scaled(1e-4, 1000.0, 0.0) };
    let mut t = Table::new([
        "lambda_over_lambda_max",
        "omega",
        "stable",
        "valid",
        "min_two_s",
        "squeeze_angle",
        "two_s_xx",
        "n_eff",
        "n_eff_large_c0",
    ]);
    let mut curves = Vec::new();
    for r in [0.5, 0.9] {
        let m = model(SystemParams { lambda_mag: r * base.lambda_max(), ..base.clone() });
        curves.push(Curve { label: format!("2PD lambda/lambda_max={r}"), params: m.params().clone(), rwa: false });
        let stable = poles(&m).stable;
        let approx = crate::scattering::impurity_sq_large_c0(1000.0, r, 5.0).sqrt() - 0.5;
        let rows: Vec<Vec<Cell>> = linspace(-0.3, 0.3, 301)
            .par_iter()
            .map(|&w| {
                let vals = output(&m, w, false).map(|(s, _, _)| {
                    let (min, angle) = best_quadrature(&s);
                    vec![min, angle, 2.0 * s[(0, 0)].re, impurity_from(&s), approx]
                });
                let mut row = vec![Cell::Num(r), Cell::Num(w), Cell::Flag(stable)];
                row.extend(cells(vals, 5));
                row
            })
            .collect();
        rows.into_iter().for_each(|row| t.push(row));
    }
    Figure {
        name: "fig5",
        tables: vec![("fig5_2pd.csv".into(), t)],
        curves,
        notices: vec![
            "fig5: only the two-phonon-drive (2PD) curves are generated; the dissipative and ponderomotive comparison schemes are out of scope.".into(),
            "fig5: gamma/kappa = 1e-4, n_m = 5 and the drive strengths are illustrative choices (only C0 = 1000 is fixed).".into(),
        ],
    }
}

/// Force transduction and optically added force noise on and off the
/// impedance-matching locus.
fn fig6() -> Figure {
    let gamma = 1e-5;
    let mut t = Table::new([
        "lambda_over_gamma",
        "c0",
        "impedance_matched",
        "omega",
        "stable",
        "valid",
        "s_yu_abs2",
        "n_add_fd",
    ]);
    let mut curves = Vec::new();
    let mut cases: Vec<(f64, f64)> = [0.0, 0.25, 0.45].iter().map(|&l| (l, impedance_match_c0(l))).collect();
    cases.push((0.25, 1.0));
    for (l, c0) in cases {
        let m = model(SystemParams::scaled(gamma, c0, l * gamma));
        curves.push(Curve { label: format!("lambda/gamma={l}, C0={c0}"), params: m.params().clone(), rwa: true });
        let matched = is_impedance_matched(&m);
        let stable = poles(&m).stable;
        for w in linspace(-5e-5, 5e-5, 401) {
            let vals = transduction(&m, w).and_then(|s| Ok(vec![s.norm_sqr(), added_noise_force(&m, w)?]));
            let mut row = vec![Cell::Num(l), Cell::Num(c0), Cell::Flag(matched), Cell::Num(w), Cell::Flag(stable)];
            row.extend(cells(vals, 2));
            t.push(row);
        }
    }
    Figure { name: "fig6", tables: vec![("fig6_force.csv".into(), t)], curves, notices: vec![] }
}

/// Spectral function through the OMIT notch and its sign change.
fn fig7() -> Figure {
    let gamma = 1e-4;
    let mut cases = vec![(0.0, 0.0)];
    for ell in [0.0, 5.0, 101f64.sqrt(), 20.0, 50.0] {
        cases.push((100.0, ell));
    }
    let header = ["c0", "two_lambda_over_gamma", "omega", "stable", "valid", "a"];
    let mut main = Table::new(header);
    let mut inset = Table::new(header);
    let mut curves = Vec::new();
    for (c0, ell) in cases {
        let m = model(SystemParams::scaled(gamma, c0, 0.5 * ell * gamma));
        curves.push(Curve { label: format!("C0={c0}, 2lambda/gamma={ell}"), params: m.params().clone(), rwa: true });
        let stable = poles(&m).stable;
        for (table, grid) in [(&mut main, linspace(-0.03, 0.03, 601)), (&mut inset, linspace(-5.0, 5.0, 401))] {
            for w in grid {
                let mut row = vec![Cell::Num(c0), Cell::Num(ell), Cell::Num(w), Cell::Flag(stable)];
                row.extend(cells(spectral_function(&m, w).map(|a| vec![a]), 1));
                table.push(row);
            }
        }
    }
    Figure {
        name: "fig7",
        tables: vec![("fig7_main.csv".into(), main), ("fig7_inset.csv".into(), inset)],
        curves,
        notices: vec![],
    }
}

/// Qubit polarization over drive strength and detuning.
fn fig8() -> Figure {
    let gamma = 1e-4;
    let c0 = 100.0;
    let base = SystemParams::scaled(gamma, c0, 0.0);
    let mut t = Table::new(["two_lambda_over_gamma", "omega", "stable", "valid", "sigma_z"]);
    let ells = linspace(0.0, 0.99 * (1.0 + c0), 100);
    let omegas = linspace(-0.03, 0.03, 121);
    let rows: Vec<Vec<Vec<Cell>>> = ells
        .par_iter()
        .map(|&ell| {
            let m = model(SystemParams { lambda_mag: 0.5 * ell * gamma, ..base.clone() });
            let stable = poles(&m).stable;
            omegas
                .iter()
                .map(|&w| {
                    let mut row = vec![Cell::Num(ell), Cell::Num(w), Cell::Flag(stable)];
                    row.extend(cells(qubit_polarization(&m, w).map(|p| vec![p]), 1));
                    row
                })
                .collect()
        })
        .collect();
    rows.into_iter().flatten().for_each(|row| t.push(row));
    Figure {
        name: "fig8",
        tables: vec![("fig8_polarization.csv".into(), t)],
        curves: vec![Curve { label: format!("C0={c0}"), params: base, rwa: true }],
        notices: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_uses_caption_parameters() {
        let p = fig3_params(0.5);
        assert_eq!((p.gamma, p.coupling, p.omega_m, p.nbar_m, p.nbar_c), (1e-4, 0.05, 20.0, 5.0, 0.0));
        assert!((p.cooperativity() - 100.0).abs() < 1e-9);
        let fig = build("fig3").unwrap();
        assert!(fig.curves.iter().all(|c| !c.rwa));
    }

    #[test]
    fn fig3_resonant_gain_rises_and_noise_falls() {
        let fig = build("fig3").unwrap();
        let t = &fig.tables[1].1;
        let gain = t.column("gain_y").unwrap();
        let noise = t.column("referred_noise_y").unwrap();
        assert!(t.column("valid").unwrap().iter().all(|&v| v == 1.0));
        assert!(gain.windows(2).all(|w| w[1] > w[0]));
        assert!(noise.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fig7_spans_omit_to_negative() {
        let fig = build("fig7").unwrap();
        let t = &fig.tables[0].1;
        let (ell, w, a) =
            (t.column("two_lambda_over_gamma").unwrap(), t.column("omega").unwrap(), t.column("a").unwrap());
        let at_zero = |e: f64| (0..a.len()).find(|&k| ell[k] == e && w[k].abs() < 1e-12).map(|k| a[k]).unwrap();
        assert!(at_zero(0.0) > 0.0 && at_zero(50.0) < 0.0);
        assert!(fig.curves.iter().all(|c| c.rwa && c.params.gamma == 1e-4));
    }

    #[test]
    fn fig8_parameters_and_inversion() {
        let fig = build("fig8").unwrap();
        assert!((fig.curves[0].params.cooperativity() - 100.0).abs() < 1e-9);
        let pol = fig.tables[0].1.column("sigma_z").unwrap();
        assert!(pol.iter().any(|&p| p > 0.0) && pol.iter().any(|&p| p < 0.0));
    }

    #[test]
    fn fig5_emits_notice_and_every_preset_builds() {
        assert!(!build("fig5").unwrap().notices.is_empty());
        for name in PRESETS {
            let fig = build(name).unwrap();
            assert!(fig.tables.iter().all(|(_, t)| !t.rows.is_empty()));
        }
        assert!(matches!(build("fig9"), Err(Error::Config { .. })));
    }
}
