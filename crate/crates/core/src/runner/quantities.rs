//! Named output quantities and their CSV columns.
//!
//! Resonant quantities produce one row per operating point; spectral ones
//! produce one row per operating point and grid frequency.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::force::{added_noise_force, transduction};
use crate::model::{poles, stability_limit, susceptibility};
use crate::paramp::{coherent_dissipative_ratio, effective_dpa_map, Ratio};
use crate::params::Model;
use crate::quad::{QUAD_LABELS, U, X, Y};
use crate::scattering::{
    added_noise_amp, bandwidth, gain_y, impurity_from, loss_noise_matrix, output_spectra, scattering_matrix,
};
use crate::sideband::nonrwa_point;
use crate::spectral::{
    effective_temperature, keldysh, qubit_polarization, retarded_green, spectral_function, EffectiveTemperature,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    GainY,
    NAddAmp,
    Bandwidth,
    Stability,
    EffectiveDpa,
    Scattering,
    NoiseMatrix,
    Susceptibility,
    SOut,
    GainYSpectrum,
    ReferredNoiseY,
    SqueezeX,
    NEff,
    SYU,
    NAddForce,
    Green,
    SpectralFunction,
    Keldysh,
    TEff,
    Polarization,
    CoherentRatio,
}

impl Quantity {
    pub const ALL: &'static [Quantity] = &[
        Quantity::GainY,
        Quantity::NAddAmp,
        Quantity::Bandwidth,
        Quantity::Stability,
        Quantity::EffectiveDpa,
        Quantity::Scattering,
        Quantity::NoiseMatrix,
        Quantity::Susceptibility,
        Quantity::SOut,
        Quantity::GainYSpectrum,
        Quantity::ReferredNoiseY,
        Quantity::SqueezeX,
        Quantity::NEff,
        Quantity::SYU,
        Quantity::NAddForce,
        Quantity::Green,
        Quantity::SpectralFunction,
        Quantity::Keldysh,
        Quantity::TEff,
        Quantity::Polarization,
        Quantity::CoherentRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::GainY => "gain_Y",
            Quantity::NAddAmp => "n_add_amp",
            Quantity::Bandwidth => "bandwidth",
            Quantity::Stability => "stability",
            Quantity::EffectiveDpa => "effective_dpa",
            Quantity::Scattering => "scattering",
            Quantity::NoiseMatrix => "noise_matrix",
            Quantity::Susceptibility => "susceptibility",
            Quantity::SOut => "s_out",
            Quantity::GainYSpectrum => "gain_Y_spectrum",
            Quantity::ReferredNoiseY => "referred_noise_Y",
            Quantity::SqueezeX => "squeeze_X",
            Quantity::NEff => "n_eff",
            Quantity::SYU => "s_YU",
            Quantity::NAddForce => "n_add_force",
            Quantity::Green => "green",
            Quantity::SpectralFunction => "spectral_function",
            Quantity::Keldysh => "keldysh",
            Quantity::TEff => "t_eff",
            Quantity::Polarization => "polarization",
            Quantity::CoherentRatio => "coherent_ratio",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|q| q.name() == name)
    }

    pub fn is_spectral(self) -> bool {
        !matches!(
            self,
            Quantity::GainY | Quantity::NAddAmp | Quantity::Bandwidth | Quantity::Stability | Quantity::EffectiveDpa
        )
    }

    /// Value columns (after the sweep/frequency/flag columns).
    pub fn columns(self) -> Vec<String> {
        let s = |v: &[&str]| v.iter().map(|c| c.to_string()).collect();
        match self {
            Quantity::GainY => s(&["r_y", "gain"]),
            Quantity::NAddAmp => s(&["total_y_referred", "n_add_amp"]),
            Quantity::Bandwidth => s(&["fwhm_numeric", "fwhm_approx"]),
            Quantity::Stability => {
                let mut c = vec!["mode_split".to_string(), "margin".into(), "lambda_limit".into()];
                for k in 0..4 {
                    c.push(format!("pole{k}_re"));
                    c.push(format!("pole{k}_im"));
                }
                c
            }
            Quantity::EffectiveDpa => s(&["kappa_eff0", "lambda_tilde0_re", "lambda_tilde0_im"]),
            Quantity::Scattering => matrix_columns("s"),
            Quantity::NoiseMatrix => matrix_columns("n"),
            Quantity::Susceptibility => matrix_columns("chi"),
            Quantity::SOut => matrix_columns("S"),
            Quantity::GainYSpectrum => s(&["gain"]),
            Quantity::ReferredNoiseY => s(&["s_yy_referred"]),
            Quantity::SqueezeX => s(&["two_s_xx", "db_below_zero_point"]),
            Quantity::NEff => s(&["n_eff"]),
            Quantity::SYU => s(&["re", "im", "abs2"]),
            Quantity::NAddForce => s(&["n_add_fd"]),
            Quantity::Green => s(&["re", "im"]),
            Quantity::SpectralFunction => s(&["a"]),
            Quantity::Keldysh => s(&["s_kel"]),
            Quantity::TEff => s(&["value", "infinite", "kelvin"]),
            Quantity::Polarization => s(&["sigma_z"]),
            Quantity::CoherentRatio => s(&["ratio", "infinite"]),
        }
    }
}

fn matrix_columns(prefix: &str) -> Vec<String> {
    let mut c = Vec::with_capacity(32);
    for r in QUAD_LABELS {
        for k in QUAD_LABELS {
            c.push(format!("{prefix}_{r}{k}_re"));
            c.push(format!("{prefix}_{r}{k}_im"));
        }
    }
    c
}

fn flatten(m: &Matrix4<C64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(32);
    for r in 0..4 {
        for k in 0..4 {
            v.push(m[(r, k)].re);
            v.push(m[(r, k)].im);
        }
    }
    v
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Evaluates quantities at one operating point.
pub struct Evaluator<'a> {
    pub model: &'a Model,
    /// Use the RWA solution for output spectra; otherwise the sideband solve.
    pub rwa: bool,
    pub sideband_order: usize,
}

impl Evaluator<'_> {
    pub fn resonant(&self, q: Quantity) -> Result<Vec<f64>> {
        let m = self.model;
        Ok(match q {
            Quantity::GainY => {
                let g = gain_y(m)?;
                vec![g.r_y, g.gain]
            }
            Quantity::NAddAmp => {
                let n = added_noise_amp(m)?;
                vec![n.total_y_referred, n.n_add_amp]
            }
            Quantity::Bandwidth => {
                let b = bandwidth(m)?;
                vec![b.fwhm_numeric, b.fwhm_approx]
            }
            Quantity::Stability => {
                let r = poles(m);
                let mut v = vec![flag(r.mode_split), r.margin, stability_limit(m)];
                for p in r.poles {
                    v.push(p.re);
                    v.push(p.im);
                }
                v
            }
            Quantity::EffectiveDpa => {
                let e = effective_dpa_map(m)?;
                vec![e.kappa_eff0, e.lambda_tilde0.re, e.lambda_tilde0.im]
            }
            _ => unreachable!("{} is a spectral quantity", q.name()),
        })
    }

    /// `(S_out, s)` at `ω` from the RWA or sideband solution.
    fn output(&self, omega: f64) -> Result<(Matrix4<C64>, Matrix4<C64>)> {
        if self.rwa {
            Ok((output_spectra(self.model, omega)?, scattering_matrix(self.model, omega)?.entries))
        } else {
            let p = nonrwa_point(self.model, omega, self.sideband_order)?;
            Ok((p.s_out, p.s_direct))
        }
    }

    pub fn spectral(&self, q: Quantity, omega: f64) -> Result<Vec<f64>> {
        let m = self.model;
        Ok(match q {
            Quantity::Scattering => flatten(&self.output(omega)?.1),
            Quantity::NoiseMatrix => flatten(&loss_noise_matrix(m, omega)?.entries),
            Quantity::Susceptibility => flatten(&susceptibility(m, omega)?.entries),
            Quantity::SOut => flatten(&self.output(omega)?.0),
            Quantity::GainYSpectrum => vec![self.output(omega)?.1[(Y, Y)].norm_sqr()],
            Quantity::ReferredNoiseY => {
                let (s_out, s) = self.output(omega)?;
                vec![s_out[(Y, Y)].re / s[(Y, Y)].norm_sqr()]
            }
            Quantity::SqueezeX => {
                let two_sxx = 2.0 * self.output(omega)?.0[(X, X)].re;
                vec![two_sxx, -10.0 * two_sxx.log10()]
            }
            Quantity::NEff => vec![impurity_from(&self.output(omega)?.0)],
            Quantity::SYU => {
                let z = if self.rwa { transduction(m, omega)? } else { self.output(omega)?.1[(Y, U)] };
                vec![z.re, z.im, z.norm_sqr()]
            }
            Quantity::NAddForce => vec![added_noise_force(m, omega)?],
            Quantity::Green => {
                let g = retarded_green(m, omega)?;
                vec![g.re, g.im]
            }
            Quantity::SpectralFunction => vec![spectral_function(m, omega)?],
            Quantity::Keldysh => vec![keldysh(m, omega)?],
            Quantity::TEff => match effective_temperature(m, omega)? {
                EffectiveTemperature::Ratio(r) => vec![r, 0.0, 0.0],
                EffectiveTemperature::Kelvin(t) => vec![t, 0.0, 1.0],
                EffectiveTemperature::Infinite => vec![f64::NAN, 1.0, 0.0],
            },
            Quantity::Polarization => vec![qubit_polarization(m, omega)?],
            Quantity::CoherentRatio => match coherent_dissipative_ratio(m, omega)? {
                Ratio::Finite(r) => vec![r, 0.0],
                Ratio::Infinite => vec![f64::NAN, 1.0],
            },
            _ => unreachable!("{} is a resonant quantity", q.name()),
        })
    }
}
