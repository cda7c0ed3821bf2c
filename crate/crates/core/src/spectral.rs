//! Intracavity photon response: retarded Green's function, spectral function,
//! symmetrized (Keldysh) correlator, effective temperature and the polarization
//! of a weakly coupled probe qubit.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{effective_lambda, field_susceptibility, self_energy, Blocks};
use crate::params::{Model, UnitMode};

const HBAR: f64 = 1.054_571_817e-34;
const K_B: f64 = 1.380_649e-23;

/// Retarded photon Green's function `G^R[ω] = −iχ_dd[ω]`.
///
/// In the rotated quadratures the photon propagator splits into the X and Y
/// channels, `G^R = −(i/2)(χ_XX + χ_YY)`. This form has no trouble at
/// |λ| = γ/2, where Σ and λ̃ individually diverge; see [`retarded_green_dyson`].
pub fn retarded_green(model: &Model, omega: f64) -> Result<C64> {
    let b = Blocks::new(model, omega)?;
    Ok(C64::new(0.0, -0.5) * (b.cp / b.dp + b.cm / b.dm))
}

/// The same propagator assembled from the self-energy and the induced
/// parametric interaction. The drive feeds the anomalous channel
/// d → b† → d† → b → d back into the photon line:
///
/// `G^R = [ω + iκ/2 − Σ(ω) − i λ̃(ω) λ̃(−ω)* / a'(ω)]⁻¹`,
/// `a'(ω) = −iω + κ/2 − i Σ(−ω)*`.
///
/// At λ = 0 this is the familiar `[ω + iκ/2 − Σ(ω)]⁻¹`.
pub fn retarded_green_dyson(model: &Model, omega: f64) -> Result<C64> {
    let i = C64::i();
    let half_k = 0.5 * model.kappa();
    let sigma = self_energy(model, omega)?;
    let sigma_m = self_energy(model, -omega)?;
    let lt = effective_lambda(model, omega)?;
    let lt_m = effective_lambda(model, -omega)?;
    let a_conj = C64::new(half_k, -omega) - i * sigma_m.conj();
    let inv = C64::new(omega, half_k) - sigma - i * lt * lt_m.conj() / a_conj;
    Ok(1.0 / inv)
}

/// `A[ω] = −2 Im G^R[ω]`.
pub fn spectral_function(model: &Model, omega: f64) -> Result<f64> {
    Ok(-2.0 * retarded_green(model, omega)?.im)
}

/// Exact on-resonance `A[0] = (4/κ)(ℓ² − 1 − C0)/(ℓ² − (1 + C0)²)`, `ℓ = 2|λ|/γ`,
/// valid in the RWA.
pub fn spectral_function_at_resonance(model: &Model) -> f64 {
    let p = model.params();
    let l2 = (2.0 * p.lambda_mag / p.gamma).powi(2);
    let c0 = model.c0();
    4.0 / model.kappa() * (l2 - 1.0 - c0) / (l2 - (1.0 + c0).powi(2))
}

/// Phase-averaged power reflection of a probe in a weakly coupled auxiliary
/// port, `R = |1 − iκ'G^R|²`.
pub fn probe_reflection(model: &Model, omega: f64, kappa_probe: f64) -> Result<f64> {
    if kappa_probe > 0.1 * model.kappa() {
        log::warn!("probe coupling {kappa_probe} exceeds kappa/10; the weak-probe picture is not reliable");
    }
    let gr = retarded_green(model, omega)?;
    Ok((1.0 - C64::i() * kappa_probe * gr).norm_sqr())
}

/// Mean reflected probe amplitude without phase averaging,
/// `(1 − iκ'G^R[ω]) c[ω] − κ' χ_{dd†}[ω] c[−ω]*`.
pub fn probe_amplitude(model: &Model, omega: f64, kappa_probe: f64, c_at: C64, c_mirror: C64) -> Result<C64> {
    let gr = retarded_green(model, omega)?;
    let chi = field_susceptibility(model, omega)?;
    Ok((1.0 - C64::i() * kappa_probe * gr) * c_at - kappa_probe * chi[(0, 1)] * c_mirror.conj())
}

/// Symmetrized photon correlator `∫dt e^{iωt} ⟨{d(t), d†(0)}⟩`.
///
/// Built from the field-basis susceptibility row of `d` and delta-correlated
/// inputs: each input channel contributes `|χ_{d,j}|² Γ_j (2n_j + 1)`.
pub fn keldysh(model: &Model, omega: f64) -> Result<f64> {
    let chi = field_susceptibility(model, omega)?;
    let p = model.params();
    let nc = 2.0 * p.nbar_c + 1.0;
    let nm = 2.0 * p.nbar_m + 1.0;
    let nl = 2.0 * model.loss_occupancy() + 1.0;
    let row = |j: usize| chi[(0, j)].norm_sqr();
    let optical = row(0) + row(1);
    Ok(optical * (p.kappa_ext * nc + p.kappa_int * nl) + (row(2) + row(3)) * p.gamma * nm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EffectiveTemperature {
    /// Scaled units: the ratio `Skel/A = coth(Ω/2T_eff)`.
    Ratio(f64),
    /// Absolute units, kelvin.
    Kelvin(f64),
    /// `A = 0`.
    Infinite,
}

impl EffectiveTemperature {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Self::Ratio(v) | Self::Kelvin(v) => Some(v),
            Self::Infinite => None,
        }
    }
}

/// Frequency-resolved effective photon temperature, defined through
/// `coth(Ω/2T_eff) = Skel/A` at lab-frame `Ω = ω_c + ω`.
pub fn effective_temperature(model: &Model, omega: f64) -> Result<EffectiveTemperature> {
    let a = spectral_function(model, omega)?;
    let skel = keldysh(model, omega)?;
    Ok(temperature_from(model, omega, a, skel))
}

fn temperature_from(model: &Model, omega: f64, a: f64, skel: f64) -> EffectiveTemperature {
    if a == 0.0 {
        return EffectiveTemperature::Infinite;
    }
    let ratio = skel / a;
    match model.params().units {
        UnitMode::Scaled => EffectiveTemperature::Ratio(ratio),
        UnitMode::Absolute => {
            let big_omega = model.params().omega_c + omega;
            // Rounding can leave a pure state a hair inside |r| < 1.
            if ratio.abs() <= 1.0 {
                return EffectiveTemperature::Kelvin(0.0f64.copysign(ratio));
            }
            let acoth = 0.5 * ((ratio + 1.0) / (ratio - 1.0)).ln();
            EffectiveTemperature::Kelvin(HBAR * big_omega / (2.0 * K_B * acoth))
        }
    }
}

/// Steady-state `⟨σ_z⟩ = −A/Skel` of a qubit weakly coupled to the cavity.
pub fn qubit_polarization(model: &Model, omega: f64) -> Result<f64> {
    let a = spectral_function(model, omega)?;
    let skel = keldysh(model, omega)?;
    polarization_from(omega, a, skel)
}

fn polarization_from(omega: f64, a: f64, skel: f64) -> Result<f64> {
    if skel <= 0.0 {
        return Err(Error::Precondition(format!("symmetrized correlator {skel:e} ≤ 0 at omega = {omega}")));
    }
    Ok(-a / skel)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub omega: f64,
    #[serde(serialize_with = "ser_complex")]
    pub gr: C64,
    pub a: f64,
    pub skel: f64,
    pub t_eff: EffectiveTemperature,
    pub pol: f64,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    [z.re, z.im].serialize(s)
}

pub fn spectral_point(model: &Model, omega: f64) -> Result<SpectralPoint> {
    let gr = retarded_green(model, omega)?;
    let a = -2.0 * gr.im;
    let skel = keldysh(model, omega)?;
    Ok(SpectralPoint {
        omega,
        gr,
        a,
        skel,
        t_eff: temperature_from(model, omega, a, skel),
        pol: polarization_from(omega, a, skel)?,
    })
}
