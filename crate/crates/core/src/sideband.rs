//! Counter-rotating (non-RWA) corrections by sideband truncation.
//!
//! The counter-rotating terms `G(e^{-2iω_M t} d b + h.c.)` couple Fourier
//! components separated by `2ω_M`. Operators at `ω + 2nω_M` for `|n| ≤ order`
//! are kept; anything further out is dropped. The stationary output spectrum
//! at `ω` then collects contributions from the input noise at every kept
//! sideband.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{field_eom_matrix, poles, stability_limit};
use crate::params::Model;
use crate::quad::{max_abs_diff, BasisChange, Direction};
use crate::scattering::output_spectra;

const D: usize = 0;
const DD: usize = 1;
const B: usize = 2;
const BD: usize = 3;

/// Truncated Floquet system `M x = −K ξ − K_int ξ_int` in the field basis,
/// with `x` ordered block-wise `(d, d†, b, b†)` at `ω + 2nω_M`,
/// `n = −order..=order`.
#[derive(Debug, Clone)]
pub struct SidebandSystem {
    pub omega: f64,
    pub order: usize,
    pub block_matrix: DMatrix<C64>,
    /// Per-block input coupling `diag(√κ_ext, √κ_ext, √γ, √γ)`.
    pub drive: Matrix4<C64>,
    /// Per-block internal-loss coupling `diag(√κ_int, √κ_int, 0, 0)`.
    pub loss_drive: Matrix4<C64>,
    /// Positions of the counter-rotating entries in `block_matrix`.
    pub cr_entries: Vec<(usize, usize)>,
}

impl SidebandSystem {
    pub fn dim(&self) -> usize {
        4 * self.blocks()
    }

    pub fn blocks(&self) -> usize {
        2 * self.order + 1
    }

    /// Global row/column of component `c` in sideband `n`.
    pub fn index(&self, n: i64, c: usize) -> usize {
        4 * (n + self.order as i64) as usize + c
    }

    /// The system with every counter-rotating entry removed.
    pub fn rwa_matrix(&self) -> DMatrix<C64> {
        let mut m = self.block_matrix.clone();
        for &(r, c) in &self.cr_entries {
            m[(r, c)] = C64::new(0.0, 0.0);
        }
        m
    }

    /// Largest second-order weight `|M_rc|²/|M_rr M_cc|` of a counter-rotating
    /// link; this sets the size of the correction it feeds back.
    pub fn offblock_strength(&self) -> f64 {
        let m = &self.block_matrix;
        self.cr_entries
            .iter()
            .map(|&(r, c)| m[(r, c)].norm_sqr() / (m[(r, r)].norm() * m[(c, c)].norm()))
            .fold(0.0, f64::max)
    }
}

pub fn assemble_sideband_system(model: &Model, omega: f64, order: usize) -> Result<SidebandSystem> {
    let p = model.params();
    if order < 1 {
        return Err(Error::InvalidParam { name: "order", reason: "sideband order must be at least 1".into() });
    }
    if p.omega_m.is_nan() || p.omega_m <= 0.0 {
        return Err(Error::InvalidParam { name: "omega_m", reason: "mechanical frequency must be positive".into() });
    }
    let nb = 2 * order + 1;
    let mut sys = SidebandSystem {
        omega,
        order,
        block_matrix: DMatrix::zeros(4 * nb, 4 * nb),
        drive: diag(p.kappa_ext.sqrt(), p.gamma.sqrt()),
        loss_drive: diag(p.kappa_int.sqrt(), 0.0),
        cr_entries: Vec::new(),
    };
    let ig = C64::new(0.0, p.coupling);
    let ord = order as i64;
    for n in -ord..=ord {
        let base = sys.index(n, 0);
        let block = field_eom_matrix(model, omega + 2.0 * n as f64 * p.omega_m);
        sys.block_matrix.view_mut((base, base), (4, 4)).copy_from(&block);
        // (row component, column component, column sideband offset, coefficient)
        for (rc, cc, dn, coef) in [(D, BD, 1, ig), (DD, B, -1, -ig), (B, DD, 1, ig), (BD, D, -1, -ig)] {
            let m = n + dn;
            if m.abs() <= ord {
                let (r, c) = (sys.index(n, rc), sys.index(m, cc));
                sys.block_matrix[(r, c)] = coef;
                sys.cr_entries.push((r, c));
            }
        }
    }
    Ok(sys)
}

fn diag(cavity: f64, mech: f64) -> Matrix4<C64> {
    let (c, m) = (C64::new(cavity, 0.0), C64::new(mech, 0.0));
    Matrix4::from_diagonal(&[c, c, m, m].into())
}

/// Quadrature scattering from each kept input sideband `m = −order..=order`
/// into the output at `ω` (`s`, `n`) and at `ω + 2ω_M` (`s_up`, `n_up`).
struct Solved {
    s: Vec<Matrix4<C64>>,
    n: Vec<Matrix4<C64>>,
    s_up: Vec<Matrix4<C64>>,
    n_up: Vec<Matrix4<C64>>,
}

fn solve(model: &Model, sys: &SidebandSystem) -> Result<Solved> {
    let dim = sys.dim();
    let lu = sys.block_matrix.clone().lu();
    let u = lu.u();
    let scale = sys.block_matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = (0..dim).map(|k| u[(k, k)].norm()).fold(f64::INFINITY, f64::min);
    let floor = model.floor_abs().max(scale * 1e3 * f64::EPSILON);
    if pivot < floor {
        return Err(Error::PoleProximity { omega: sys.omega, magnitude: pivot, floor });
    }
    let inv = lu.try_inverse().ok_or(Error::PoleProximity { omega: sys.omega, magnitude: 0.0, floor })?;
    let t = BasisChange::new(model.params().phi_p);
    let ord = sys.order as i64;
    let block = |out_n: i64, in_m: i64| -> (Matrix4<C64>, Matrix4<C64>) {
        let g: Matrix4<C64> = inv.fixed_view::<4, 4>(sys.index(out_n, 0), sys.index(in_m, 0)).into_owned();
        let mut s = -(sys.drive * g * sys.drive);
        if out_n == in_m {
            s += Matrix4::identity();
        }
        let n = -(sys.drive * g * sys.loss_drive);
        (t.matrix(&s, Direction::FieldToQuadrature), t.matrix(&n, Direction::FieldToQuadrature))
    };
    let mut out = Solved { s: vec![], n: vec![], s_up: vec![], n_up: vec![] };
    for m in -ord..=ord {
        let (s, n) = block(0, m);
        out.s.push(s);
        out.n.push(n);
        let (s, n) = block(1, m);
        out.s_up.push(s);
        out.n_up.push(n);
    }
    Ok(out)
}

fn noise(model: &Model) -> (Matrix4<C64>, Matrix4<C64>) {
    let p = model.params();
    let c = p.nbar_c + 0.5;
    let m = p.nbar_m + 0.5;
    let l = model.loss_occupancy() + 0.5;
    let d = Matrix4::from_diagonal(&[c, c, m, m].map(|x| C64::new(x, 0.0)).into());
    let d_int = Matrix4::from_diagonal(&[l, l, 0.0, 0.0].map(|x| C64::new(x, 0.0)).into());
    (d, d_int)
}

#[derive(Debug, Clone, Copy)]
pub struct NonRwaPoint {
    /// Stationary symmetrized output spectrum.
    pub s_out: Matrix4<C64>,
    /// Same-frequency scattering block `s⁽⁰⁾` (quadratures).
    pub s_direct: Matrix4<C64>,
    /// Largest entry of the `2ω_M`-oscillating correlator `⟨Q_out[ω] Q_out[ω+2ω_M]†⟩`.
    pub oscillating: f64,
}

pub fn nonrwa_point(model: &Model, omega: f64, order: usize) -> Result<NonRwaPoint> {
    let sys = assemble_sideband_system(model, omega, order)?;
    let solved = solve(model, &sys)?;
    let (d, d_int) = noise(model);
    let mut s_out = Matrix4::zeros();
    let mut osc = Matrix4::zeros();
    for k in 0..solved.s.len() {
        s_out += solved.s[k] * d * solved.s[k].adjoint() + solved.n[k] * d_int * solved.n[k].adjoint();
        osc += solved.s[k] * d * solved.s_up[k].adjoint() + solved.n[k] * d_int * solved.n_up[k].adjoint();
    }
    let oscillating = osc.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(NonRwaPoint { s_out, s_direct: solved.s[sys.order], oscillating })
}

#[derive(Debug, Clone, Serialize)]
pub struct NonRwaSpectrum {
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub s_out: Vec<Matrix4<C64>>,
    /// Max entrywise `|S_out − S_out^RWA|` over the grid.
    pub rwa_delta: f64,
    /// Per-frequency magnitude of the dropped oscillating correlator.
    pub oscillating: Vec<f64>,
    /// Within 1% of the RWA stability edge.
    pub near_threshold: bool,
}

pub fn solve_nonrwa_spectra(model: &Model, grid: &[f64], order: usize) -> Result<NonRwaSpectrum> {
    let p = model.params();
    let limit = stability_limit(model);
    if !poles(model).stable {
        return Err(Error::Precondition(format!(
            "|λ| = {} is outside the RWA stability region (limit {limit})",
            p.lambda_mag
        )));
    }
    let near_threshold = p.lambda_mag > 0.99 * limit;
    if near_threshold {
        log::warn!("|λ| within 1% of the RWA stability edge; counter-rotating terms may destabilise the system");
    }
    let rows = grid
        .par_iter()
        .map(|&w| {
            let pt = nonrwa_point(model, w, order)?;
            let rwa = output_spectra(model, w)?;
            Ok((pt.s_out, pt.oscillating, max_abs_diff(&pt.s_out, &rwa)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = NonRwaSpectrum {
        grid: grid.to_vec(),
        s_out: Vec::with_capacity(grid.len()),
        rwa_delta: 0.0,
        oscillating: Vec::with_capacity(grid.len()),
        near_threshold,
    };
    for (s, osc, delta) in rows {
        out.s_out.push(s);
        out.oscillating.push(osc);
        out.rwa_delta = out.rwa_delta.max(delta);
    }
    Ok(out)
}
