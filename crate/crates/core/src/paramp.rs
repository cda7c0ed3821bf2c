//! Reference parametric amplifiers (resonant DPA/NDPA, detuned DPA) and the
//! mapping of the optomechanical cavity response onto an effective DPA.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{effective_lambda, self_energy};
use crate::params::Model;

/// Pump and decay rates of the reference amplifiers. `mu`, `kappa_s`,
/// `kappa_i` describe the non-degenerate amplifier; `lambda`, `delta`,
/// `kappa` the (possibly detuned) degenerate one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParampParams {
    pub mu: C64,
    pub kappa_s: f64,
    pub kappa_i: f64,
    pub lambda: C64,
    pub delta: f64,
    pub kappa: f64,
}

impl ParampParams {
    pub fn ndpa(mu: C64, kappa_s: f64, kappa_i: f64) -> Result<Self> {
        Self { mu, kappa_s, kappa_i, lambda: C64::new(0.0, 0.0), delta: 0.0, kappa: 1.0 }.validated()
    }

    pub fn dpa(lambda: C64, kappa: f64, delta: f64) -> Result<Self> {
        Self { mu: C64::new(0.0, 0.0), kappa_s: 1.0, kappa_i: 1.0, lambda, delta, kappa }.validated()
    }

    fn validated(self) -> Result<Self> {
        for (name, v) in [("kappa_s", self.kappa_s), ("kappa_i", self.kappa_i), ("kappa", self.kappa)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam { name, reason: format!("decay rate {v} must be positive") });
            }
        }
        Ok(self)
    }

    /// `|μ|² < κ_S κ_I / 4`.
    pub fn ndpa_stable(&self) -> bool {
        self.mu.norm_sqr() < 0.25 * self.kappa_s * self.kappa_i
    }

    /// `|Λ|² < κ²/4 + Δ²`.
    pub fn dpa_stable(&self) -> bool {
        self.lambda.norm_sqr() < 0.25 * self.kappa * self.kappa + self.delta * self.delta
    }
}

/// Signal and idler spectral functions `(A_S, A_I)` of the resonant NDPA.
pub fn ndpa_spectral_function(p: &ParampParams, omega: f64) -> (f64, f64) {
    let (ks, ki) = (p.kappa_s, p.kappa_i);
    let margin = 0.25 * ks * ki - p.mu.norm_sqr();
    let w2 = omega * omega;
    let den = (margin - w2).powi(2) + 0.25 * w2 * (ks + ki).powi(2);
    ((ki * margin + ks * w2) / den, (ks * margin + ki * w2) / den)
}

/// NDPA susceptibility in the basis (a_S, a_I†) by direct 2×2 inversion of
/// the equations of motion.
pub fn ndpa_susceptibility(p: &ParampParams, omega: f64) -> Option<Matrix2<C64>> {
    let m = Matrix2::new(C64::new(0.5 * p.kappa_s, -omega), -p.mu, -p.mu.conj(), C64::new(0.5 * p.kappa_i, -omega));
    m.try_inverse()
}

/// Resonant DPA, `A = κ(κ²/4 − |Λ|² + ω²)/((κ²/4 − |Λ|² − ω²)² + κ²ω²)`.
pub fn dpa_spectral_function(lambda: C64, kappa: f64, omega: f64) -> f64 {
    let margin = 0.25 * kappa * kappa - lambda.norm_sqr();
    let w2 = omega * omega;
    kappa * (margin + w2) / ((margin - w2).powi(2) + kappa * kappa * w2)
}

/// Detuned DPA (`H = −Δa†a + (i/2)(Λa†² − h.c.)`) photon susceptibility
/// `χ_aa = (−iω + κ/2 + iΔ)/((−iω + κ/2)² + Δ² − |Λ|²)`.
pub fn detuned_dpa_chi(lambda: C64, kappa: f64, delta: f64, omega: f64) -> C64 {
    let a = C64::new(0.5 * kappa, -omega);
    (a + C64::new(0.0, delta)) / (a * a + delta * delta - lambda.norm_sqr())
}

/// `A = 2 Re χ_aa` of the detuned DPA.
pub fn detuned_dpa_spectral_function(lambda: C64, kappa: f64, delta: f64, omega: f64) -> f64 {
    2.0 * detuned_dpa_chi(lambda, kappa, delta, omega).re
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetunedScan {
    pub stable: bool,
    pub negative_frequencies: Vec<f64>,
}

pub fn detuned_dpa_scan(lambda: C64, kappa: f64, delta: f64, grid: &[f64]) -> DetunedScan {
    let stable = lambda.norm_sqr() < 0.25 * kappa * kappa + delta * delta;
    let negative_frequencies =
        grid.iter().copied().filter(|&w| detuned_dpa_spectral_function(lambda, kappa, delta, w) < 0.0).collect();
    DetunedScan { stable, negative_frequencies }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Ratio {
    Finite(f64),
    /// `Re λ̃ = 0`.
    Infinite,
}

/// `|Im λ̃/Re λ̃|` with the drive phase removed from λ̃.
pub fn coherent_dissipative_ratio(model: &Model, omega: f64) -> Result<Ratio> {
    let p = model.params();
    if p.lambda_mag == 0.0 {
        return Err(Error::Precondition("coherent/dissipative split needs a nonzero parametric drive".into()));
    }
    let lt = effective_lambda(model, omega)? * C64::from_polar(1.0, -p.phi_p);
    if lt.re.abs() <= 4.0 * f64::EPSILON * lt.norm() {
        return Ok(Ratio::Infinite);
    }
    Ok(Ratio::Finite((lt.im / lt.re).abs()))
}

/// Closed form `|ω|γ / |γ²/4 − |λ|² − ω²|`.
pub fn coherent_dissipative_ratio_closed(gamma: f64, lambda_mag: f64, omega: f64) -> f64 {
    omega.abs() * gamma / (0.25 * gamma * gamma - lambda_mag * lambda_mag - omega * omega).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveDpa {
    /// `κ − 2 Im Σ_d[0]`.
    pub kappa_eff0: f64,
    #[serde(serialize_with = "ser_complex")]
    pub lambda_tilde0: C64,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    [z.re, z.im].serialize(s)
}

impl EffectiveDpa {
    /// On-resonance spectral function of the equivalent DPA.
    pub fn spectral_function(&self) -> f64 {
        dpa_spectral_function(self.lambda_tilde0, self.kappa_eff0, 0.0)
    }
}

/// On resonance the cavity responds like a DPA with damping `κ_eff[0]` and
/// pump `λ̃[0]`.
pub fn effective_dpa_map(model: &Model) -> Result<EffectiveDpa> {
    let sigma = self_energy(model, 0.0)?;
    Ok(EffectiveDpa { kappa_eff0: model.kappa() - 2.0 * sigma.im, lambda_tilde0: effective_lambda(model, 0.0)? })
}
