//! Single-quadrature force sensing: lab-frame forces as rotating-frame
//! mechanical quadrature inputs, their transduction to the optical Y output,
//! and the optically added noise of that measurement.

use std::io::BufRead;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Model;
use crate::quad::{U, V, Y};
use crate::scattering::{loss_noise_matrix, scattering_matrix};

/// Sampled lab-frame force spectrum `F[ω]` (force × time).
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSpectrum {
    grid: Vec<f64>,
    values: Vec<C64>,
    /// Zero-point displacement `√(ħ/2mω_M)`.
    pub x_zpf: f64,
}

impl ForceSpectrum {
    /// `grid` must be strictly increasing. Where both `ω` and `−ω` are
    /// sampled, `F[−ω] = F[ω]*` is enforced.
    pub fn new(grid: Vec<f64>, values: Vec<C64>, x_zpf: f64) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::InvalidParam {
                name: "force_spectrum",
                reason: format!("need ≥ 2 samples with matching lengths, got {} and {}", grid.len(), values.len()),
            });
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParam {
                name: "force_spectrum",
                reason: "grid must be finite and strictly increasing".into(),
            });
        }
        let spec = Self { grid, values, x_zpf };
        let scale = spec.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (&w, &v) in spec.grid.iter().zip(&spec.values) {
            if let Some(mirror) = spec.interpolate(-w) {
                if (mirror - v.conj()).norm() > 1e-9 * scale {
                    return Err(Error::NotReal(w));
                }
            }
        }
        Ok(spec)
    }

    /// Reads `frequency,re,im` rows. Blank lines, `#` comments and a
    /// non-numeric header line are skipped.
    pub fn from_csv<R: BufRead>(reader: R, x_zpf: f64) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidParam { name: "force_spectrum", reason: e.to_string() })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 3 => {
                    grid.push(v[0]);
                    values.push(C64::new(v[1], v[2]));
                }
                Err(_) if grid.is_empty() && values.is_empty() && n == 0 => continue,
                _ => {
                    return Err(Error::InvalidParam {
                        name: "force_spectrum",
                        reason: format!("line {}: expected `frequency,re,im`, got `{line}`", n + 1),
                    })
                }
            }
        }
        Self::new(grid, values, x_zpf)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    fn interpolate(&self, w: f64) -> Option<C64> {
        let (first, last) = (self.grid[0], *self.grid.last()?);
        if w < first || w > last {
            return None;
        }
        let k = self.grid.partition_point(|&g| g <= w);
        if k == self.grid.len() {
            return Some(self.values[k - 1]);
        }
        let (w0, w1) = (self.grid[k - 1], self.grid[k]);
        let t = (w - w0) / (w1 - w0);
        Some(self.values[k - 1] * (1.0 - t) + self.values[k] * t)
    }

    /// `F[ω]`, falling back to `F[−ω]*` when only the mirror frequency is sampled.
    pub fn at(&self, w: f64) -> Result<C64> {
        self.interpolate(w).or_else(|| self.interpolate(-w).map(|z| z.conj())).ok_or(Error::GridCoverage(w))
    }
}

/// Rotating-frame force quadratures `(f_U[ω], f_V[ω])`:
///
/// `f_U = (x_zpf/2i)(e^{iφ/2} F[ω+ω_M] − e^{−iφ/2} F[ω−ω_M])`,
/// `f_V = −(x_zpf/2)(e^{iφ/2} F[ω+ω_M] + e^{−iφ/2} F[ω−ω_M])`.
///
/// Shifting φ by π maps `(f_U, f_V)` to `(−f_V, f_U)`.
pub fn force_to_quadrature(force: &ForceSpectrum, phi_p: f64, omega_m: f64, omega: f64) -> Result<(C64, C64)> {
    let up = force.at(omega + omega_m)?;
    let down = force.at(omega - omega_m)?;
    let ep = C64::from_polar(1.0, 0.5 * phi_p);
    let em = ep.conj();
    let f_u = (ep * up - em * down) * force.x_zpf / C64::new(0.0, 2.0);
    let f_v = -(ep * up + em * down) * (0.5 * force.x_zpf);
    Ok((f_u, f_v))
}

/// Force-quadrature-to-`Y_out` coefficient `s_YU[ω]`.
pub fn transduction(model: &Model, omega: f64) -> Result<C64> {
    Ok(scattering_matrix(model, omega)?.get(Y, U))
}

/// Mean `Y_out[ω]` produced by a deterministic force.
pub fn force_signal_y(model: &Model, force: &ForceSpectrum, omega: f64) -> Result<C64> {
    let s = scattering_matrix(model, omega)?;
    let (f_u, f_v) = force_to_quadrature(force, model.params().phi_p, model.params().omega_m, omega)?;
    Ok(s.get(Y, U) * f_u + s.get(Y, V) * f_v)
}

/// Optically added noise for a measurement of `U_in` through `Y_out`, in
/// mechanical bath quanta:
/// `n_add = (|s_YY|²(n_c+½) + |N_YY|²(n_loss+½)) / |s_YU|²`.
/// The loss term is present only when `kappa_int > 0`.
pub fn added_noise_force(model: &Model, omega: f64) -> Result<f64> {
    let s = scattering_matrix(model, omega)?;
    let n = loss_noise_matrix(model, omega)?;
    let t = s.get(Y, U).norm_sqr();
    if t == 0.0 {
        return Err(Error::TransductionNull(omega));
    }
    let p = model.params();
    let optical = s.get(Y, Y).norm_sqr() * (p.nbar_c + 0.5) + n.get(Y, Y).norm_sqr() * (model.loss_occupancy() + 0.5);
    Ok(optical / t)
}

/// Cooperativity that impedance-matches the U quadrature, `C0 = 1 − 2|λ|/γ`.
pub fn impedance_match_c0(lambda_over_gamma: f64) -> f64 {
    1.0 - 2.0 * lambda_over_gamma
}

pub fn is_impedance_matched(model: &Model) -> bool {
    let p = model.params();
    let target = impedance_match_c0(p.lambda_mag / p.gamma);
    p.lambda_mag > 0.0 && target > 0.0 && (model.c0() - target).abs() <= 1e-9 * target
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceSensingResult {
    pub omegas: Vec<f64>,
    #[serde(serialize_with = "ser_complex_vec")]
    pub s_yu: Vec<C64>,
    pub n_add_fd: Vec<f64>,
    pub impedance_matched: bool,
}

fn ser_complex_vec<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|z| [z.re, z.im]))
}

pub fn force_sensing(model: &Model, omegas: &[f64]) -> Result<ForceSensingResult> {
    let mut s_yu = Vec::with_capacity(omegas.len());
    let mut n_add_fd = Vec::with_capacity(omegas.len());
    for &w in omegas {
        s_yu.push(transduction(model, w)?);
        n_add_fd.push(added_noise_force(model, w)?);
    }
    Ok(ForceSensingResult { omegas: omegas.to_vec(), s_yu, n_add_fd, impedance_matched: is_impedance_matched(model) })
}
