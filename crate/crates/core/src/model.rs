//! RWA linear response of the coupled cavity and mechanics: susceptibility,
//! cavity self-energy, the induced parametric interaction and stability.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Model;
use crate::quad::{BasisChange, Direction, QuadMatrix};

/// Scalar building blocks of the RWA susceptibility at one frequency.
///
/// `a = χ_o⁻¹ = −iω + κ/2`, `cp = χ_{m,+}⁻¹`, `cm = χ_{m,−}⁻¹` and the two
/// block determinants `dp = a·cp + G²` (X–V block), `dm = a·cm + G²` (Y–U block).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Blocks {
    pub a: C64,
    pub cp: C64,
    pub cm: C64,
    pub dp: C64,
    pub dm: C64,
    pub g: f64,
}

impl Blocks {
    pub fn new(model: &Model, omega: f64) -> Result<Self> {
        let p = model.params();
        let a = C64::new(0.5 * model.kappa(), -omega);
        let cp = C64::new(0.5 * p.gamma + p.lambda_mag, -omega);
        let cm = C64::new(0.5 * p.gamma - p.lambda_mag, -omega);
        let g2 = p.coupling * p.coupling;
        let dp = a * cp + g2;
        let dm = a * cm + g2;
        let floor = model.floor_abs();
        for d in [dp, dm] {
            if d.norm() < floor {
                return Err(Error::PoleProximity { omega, magnitude: d.norm(), floor });
            }
        }
        Ok(Self { a, cp, cm, dp, dm, g: p.coupling })
    }
}

/// RWA susceptibility χ[ω] in the (X, Y, U, V) basis, `Q = −χ (K Q_in + K_int Q_ξ)`.
pub fn susceptibility(model: &Model, omega: f64) -> Result<QuadMatrix> {
    let b = Blocks::new(model, omega)?;
    let z = C64::new(0.0, 0.0);
    let g = C64::new(b.g, 0.0);
    #[rustfmt::skip]
    let chi = Matrix4::new(
        b.cp / b.dp, z,            z,            g / b.dp,
        z,           b.cm / b.dm,  -g / b.dm,    z,
        z,           g / b.dm,     b.a / b.dm,   z,
        -g / b.dp,   z,            z,            b.a / b.dp,
    );
    Ok(QuadMatrix::new(omega, chi))
}

/// RWA susceptibility in the field basis (d, d†, b, b†), `χ_a = T⁻¹ χ T`,
/// with the drive phase restored.
pub fn field_susceptibility(model: &Model, omega: f64) -> Result<Matrix4<C64>> {
    let chi = susceptibility(model, omega)?;
    Ok(BasisChange::new(model.params().phi_p).matrix(&chi.entries, Direction::QuadratureToField))
}

/// Field-basis (d, d†, b, b†) equation-of-motion matrix `M` of the RWA
/// Heisenberg–Langevin equations, `M a = −(inputs)`. Uses λ = |λ|e^{iφ_p}.
pub fn field_eom_matrix(model: &Model, omega: f64) -> Matrix4<C64> {
    let p = model.params();
    let i = C64::i();
    let z = C64::new(0.0, 0.0);
    let a = C64::new(0.5 * model.kappa(), -omega);
    let m = C64::new(0.5 * p.gamma, -omega);
    let g = C64::new(p.coupling, 0.0);
    let lam = C64::from_polar(p.lambda_mag, p.phi_p);
    #[rustfmt::skip]
    let eom = Matrix4::new(
        a,       z,      i * g,       z,
        z,       a,      z,           -i * g,
        i * g,   z,      m,           -lam,
        z,       -i * g, -lam.conj(), m,
    );
    eom
}

/// Cavity self-energy Σ_d[ω] = G²(ω + iγ/2)/((ω + iγ/2)² + |λ|²).
pub fn self_energy(model: &Model, omega: f64) -> Result<C64> {
    let p = model.params();
    let w = C64::new(omega, 0.5 * p.gamma);
    let den = w * w + p.lambda_mag * p.lambda_mag;
    guard(model, omega, den)?;
    Ok(p.coupling * p.coupling * w / den)
}

/// Induced parametric interaction λ̃[ω] = G²λ/((−iω + γ/2)² − |λ|²).
pub fn effective_lambda(model: &Model, omega: f64) -> Result<C64> {
    let p = model.params();
    let c = C64::new(0.5 * p.gamma, -omega);
    let den = c * c - p.lambda_mag * p.lambda_mag;
    guard(model, omega, den)?;
    let lam = C64::from_polar(p.lambda_mag, p.phi_p);
    Ok(p.coupling * p.coupling * lam / den)
}

fn guard(model: &Model, omega: f64, den: C64) -> Result<()> {
    let floor = model.floor_abs();
    if den.norm() < floor {
        return Err(Error::PoleProximity { omega, magnitude: den.norm(), floor });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `[Ω⁽⁺⁾₊, Ω⁽⁺⁾₋, Ω⁽⁻⁾₊, Ω⁽⁻⁾₋]`.
    #[serde(serialize_with = "ser_poles")]
    pub poles: [C64; 4],
    pub stable: bool,
    pub mode_split: bool,
    /// min over poles of −Im Ω; positive when stable.
    pub margin: f64,
}

fn ser_poles<S: serde::Serializer>(poles: &[C64; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for p in poles {
        seq.serialize_element(&[p.re, p.im])?;
    }
    seq.end()
}

/// Closed-form susceptibility poles. Square roots are principal branches,
/// so a negative discriminant puts the ± pair symmetrically off the
/// imaginary axis.
pub fn poles(model: &Model) -> StabilityReport {
    let p = model.params();
    let half_k = 0.5 * model.kappa();
    let half_g = 0.5 * p.gamma;
    let lam = p.lambda_mag;
    let four_g2 = 4.0 * p.coupling * p.coupling;
    let mut out = [C64::new(0.0, 0.0); 4];
    let mut mode_split = false;
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        let sum = half_k + half_g + sign * lam;
        let diff = half_k - half_g - sign * lam;
        let disc = diff * diff - four_g2;
        mode_split |= disc < 0.0;
        let root = C64::new(disc, 0.0).sqrt();
        let minus_half_i = C64::new(0.0, -0.5);
        out[2 * k] = minus_half_i * (sum + root);
        out[2 * k + 1] = minus_half_i * (sum - root);
    }
    let margin = out.iter().map(|w| -w.im).fold(f64::INFINITY, f64::min);
    StabilityReport { poles: out, stable: margin > 0.0, mode_split, margin }
}

/// Upper edge of the stable |λ| interval, `min{(κ+γ)/2, (γ/2)(1+C0)}`.
pub fn stability_limit(model: &Model) -> f64 {
    let p = model.params();
    (0.5 * (model.kappa() + p.gamma)).min(model.lambda_max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::quad::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(p: SystemParams) -> Model {
        Model::new(p).unwrap()
    }

    // Independent route: numerically invert the field-basis equations of
    // motion, assembled here from the Heisenberg–Langevin equations, then
    // rotate into quadratures.
    fn chi_by_inversion(p: &SystemParams, omega: f64) -> Matrix4<C64> {
        let i = C64::i();
        let kappa = p.kappa_ext + p.kappa_int;
        let lam = C64::from_polar(p.lambda_mag, p.phi_p);
        let mut m = Matrix4::<C64>::zeros();
        let diag_c = -i * omega + kappa / 2.0;
        let diag_m = -i * omega + p.gamma / 2.0;
        m[(0, 0)] = diag_c;
        m[(0, 2)] = i * p.coupling;
        m[(1, 1)] = diag_c;
        m[(1, 3)] = -i * p.coupling;
        m[(2, 2)] = diag_m;
        m[(2, 3)] = -lam;
        m[(2, 0)] = i * p.coupling;
        m[(3, 3)] = diag_m;
        m[(3, 2)] = -lam.conj();
        m[(3, 1)] = -i * p.coupling;
        let inv = m.try_inverse().unwrap();
        BasisChange::new(p.phi_p).matrix(&inv, Direction::FieldToQuadrature)
    }

    pub(crate) fn random_stable(rng: &mut ChaCha8Rng) -> SystemParams {
        let gamma = 10f64.powf(rng.gen_range(-6.0..-2.0));
        let c0 = 10f64.powf(rng.gen_range(-2.0..4.0));
        let mut p = SystemParams::scaled(gamma, c0, 0.0);
        p.kappa_int = rng.gen_range(0.0..0.5);
        p.kappa_ext = 1.0 - p.kappa_int;
        p.phi_p = rng.gen_range(-3.0..3.0);
        let lim = stability_limit(&Model::new(p.clone()).unwrap());
        p.lambda_mag = rng.gen_range(0.0..0.95) * lim;
        p
    }

    #[test]
    fn decoupled_resonance_is_diagonal_lorentzian() {
        let m = model(SystemParams { gamma: 1e-3, ..Default::default() });
        let chi = susceptibility(&m, 0.0).unwrap();
        let expect = [2.0, 2.0, 2e3, 2e3];
        for (k, e) in expect.iter().enumerate() {
            assert!((chi.get(k, k) - C64::new(*e, 0.0)).norm() < 1e-9);
        }
        assert_eq!(chi.get(0, 3), C64::new(0.0, 0.0));
    }

    #[test]
    fn closed_form_matches_inversion_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = random_stable(&mut rng);
            let omega = rng.gen_range(-0.5..0.5) * 10f64.powf(rng.gen_range(-4.0..0.0));
            let m = model(p.clone());
            let chi = susceptibility(&m, omega).unwrap();
            let oracle = chi_by_inversion(&p, omega);
            // χ entries reach ~1/γ; compare on the scale of the largest entry.
            let scale = oracle.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let err = chi.max_abs_diff(&oracle);
            assert!(err <= 1e-12 * scale, "err {err:e} scale {scale:e} for {p:?} at {omega}");
        }
    }

    #[test]
    fn field_susceptibility_inverts_field_eom() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let m = model(random_stable(&mut rng));
            let w = rng.gen_range(-0.1..0.1);
            let chi = field_susceptibility(&m, w).unwrap();
            let prod = chi * field_eom_matrix(&m, w);
            let scale = chi.iter().map(|z| z.norm()).fold(1.0, f64::max);
            assert!(max_abs_diff(&prod, &Matrix4::identity()) < 1e-12 * scale);
        }
    }

    #[test]
    fn reality_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = random_stable(&mut rng);
            let m = model(p);
            let w = rng.gen_range(-1.0..1.0);
            let a = susceptibility(&m, w).unwrap();
            let b = susceptibility(&m, -w).unwrap();
            assert!(max_abs_diff(&a.entries, &b.entries.map(|z| z.conj())) == 0.0);
        }
    }

    #[test]
    fn pole_proximity_is_reported() {
        // Exactly at λ_max the Y–U determinant vanishes at ω = 0.
        let mut p = SystemParams::scaled(1e-4, 100.0, 0.0);
        p.lambda_mag = p.lambda_max();
        let m = model(p);
        assert!(matches!(susceptibility(&m, 0.0), Err(Error::PoleProximity { .. })));
        assert!(susceptibility(&m, 0.1).is_ok());
    }

    #[test]
    fn self_energy_without_drive() {
        let p = SystemParams { gamma: 1e-4, coupling: 0.05, ..Default::default() };
        let s = self_energy(&model(p.clone()), 0.0).unwrap();
        let expect = C64::new(0.0, -2.0 * 0.05 * 0.05 / 1e-4);
        assert!((s - expect).norm() < 1e-9 * expect.norm());
        let free = SystemParams { coupling: 0.0, lambda_mag: 3e-5, ..p };
        assert_eq!(self_energy(&model(free), 0.3).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn self_energy_with_drive_at_resonance() {
        let gamma = 1e-4;
        let p = SystemParams { gamma, coupling: 0.05, lambda_mag: 40.0 * gamma, ..Default::default() };
        let s = self_energy(&model(p), 0.0).unwrap();
        let expect = C64::new(0.0, 0.05 * 0.05 * gamma / 2.0) / (-gamma * gamma / 4.0 + 1600.0 * gamma * gamma);
        assert!((s - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn effective_lambda_properties() {
        let mut p = SystemParams { gamma: 1e-4, coupling: 0.05, lambda_mag: 0.0, ..Default::default() };
        assert_eq!(effective_lambda(&model(p.clone()), 0.2).unwrap(), C64::new(0.0, 0.0));
        p.lambda_mag = 3e-4;
        p.phi_p = 0.9;
        let l0 = effective_lambda(&model(p.clone()), 0.0).unwrap();
        let phase = C64::from_polar(1.0, 0.9);
        assert!((l0 / phase).im.abs() < 1e-12 * l0.norm());
        p.phi_p = 0.0;
        let m = model(p);
        for k in 0..50 {
            let w = 1e-5 * k as f64;
            let a = effective_lambda(&m, w).unwrap();
            let b = effective_lambda(&m, -w).unwrap();
            assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn decoupled_poles() {
        let m = model(SystemParams { gamma: 1e-3, ..Default::default() });
        let r = poles(&m);
        let mut ims: Vec<f64> = r.poles.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        let expect = [-0.5, -0.5, -5e-4, -5e-4];
        for (a, b) in ims.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(r.poles.iter().all(|z| z.re == 0.0));
        assert!(r.stable && !r.mode_split);
    }

    #[test]
    fn marginal_at_lambda_max() {
        let mut p = SystemParams::scaled(1e-4, 100.0, 0.0);
        let lmax = p.lambda_max();
        p.lambda_mag = lmax;
        // (κ/2)(γ/2 − λ) + G² vanishes.
        let det = 0.5 * (0.5 * p.gamma - lmax) + p.coupling * p.coupling;
        assert!(det.abs() < 1e-17);
        let r = poles(&model(p.clone()));
        assert!(r.margin.abs() < 1e-15);
        p.lambda_mag = 1.01 * lmax;
        assert!(!poles(&model(p)).stable);
    }

    #[test]
    fn pole_rule_agrees_with_min_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let gamma = 10f64.powf(rng.gen_range(-5.0..-1.0));
            let c0 = 10f64.powf(rng.gen_range(-1.0..5.0));
            let mut p = SystemParams::scaled(gamma, c0, 0.0);
            let m0 = model(p.clone());
            let lim = stability_limit(&m0);
            p.lambda_mag = rng.gen_range(0.0..2.0) * lim;
            let r = poles(&model(p.clone()));
            if (p.lambda_mag / lim - 1.0).abs() > 1e-9 {
                assert_eq!(r.stable, p.lambda_mag < lim, "{p:?}");
            }
            assert_eq!(r.mode_split, r.poles.iter().any(|z| z.re != 0.0));
        }
    }

    #[test]
    fn bisection_finds_threshold_at_lambda_max() {
        for c0 in [10.0, 100.0, 1000.0] {
            let gamma = 1e-6;
            let base = SystemParams::scaled(gamma, c0, 0.0);
            let lmax = base.lambda_max();
            let stable_at = |lam: f64| poles(&model(SystemParams { lambda_mag: lam, ..base.clone() })).stable;
            let (mut lo, mut hi) = (0.0, 2.0 * lmax);
            while hi - lo > 1e-12 * lmax {
                let mid = 0.5 * (lo + hi);
                if stable_at(mid) {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((0.5 * (lo + hi) / lmax - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn weak_coupling_avoids_mode_splitting() {
        for (gamma, g) in [(1e-4, 0.05), (1e-5, 0.1), (1e-3, 0.02)] {
            let p = SystemParams { gamma, coupling: g, ..Default::default() };
            let cond = (1.0 - 2.0 * gamma - 4.0 * g * g).powi(2) > 16.0 * g * g;
            assert!(cond);
            let lim = stability_limit(&model(p.clone()));
            for k in 0..200 {
                let lam = lim * k as f64 / 200.0;
                let r = poles(&model(SystemParams { lambda_mag: lam, ..p.clone() }));
                assert!(!r.mode_split, "split at λ = {lam}");
            }
        }
    }
}
