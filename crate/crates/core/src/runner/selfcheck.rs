//! Self-check suite: each acceptance criterion as an independent check with
//! its tolerance, the measured worst-case deviation and its runtime.

use std::time::Instant;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::force::{added_noise_force, impedance_match_c0, transduction};
use crate::model::stability_limit;
use crate::numerics::{bisect, golden_max, linspace};
use crate::paramp::{detuned_dpa_scan, ndpa_spectral_function, ParampParams};
use crate::params::{Model, SystemParams};
use crate::quad::{max_abs_diff, Y};
use crate::runner::figures::{self, fig3_params, FIG3_LAMBDAS};
use crate::runner::SCHEMA_VERSION;
use crate::scattering::{
    bandwidth, gain_y, impurity, impurity_sq_large_c0, output_spectra, resonant_scattering_matrix, scattering_matrix,
    squeezing,
};
use crate::sideband::nonrwa_point;
use crate::spectral::{keldysh, qubit_polarization, spectral_function, spectral_function_at_resonance};

/// Closed forms the checks compare against. Swapping one out (e.g. for a
/// deliberately wrong version) must only affect the check that uses it.
#[derive(Clone, Copy)]
pub struct Oracles {
    /// Resonant scattering matrix from `(C0, R_Y)`.
    pub resonant_matrix: fn(f64, f64) -> Matrix4<C64>,
    /// Referred Y noise `n_c + ½ + n_add` from `(C0, √𝒢, n_c, n_m)`.
    pub referred_noise: fn(f64, f64, f64, f64) -> f64,
}

fn referred_noise(c0: f64, root_gain: f64, nbar_c: f64, nbar_m: f64) -> f64 {
    nbar_c + 0.5 + (1.0 + 1.0 / root_gain).powi(2) * (nbar_m + 0.5) / c0
}

impl Default for Oracles {
    fn default() -> Self {
        Self { resonant_matrix: resonant_scattering_matrix, referred_noise }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Bound on `deviation`.
    pub tolerance: f64,
    /// Worst measured deviation (NaN when evaluation failed).
    pub deviation: f64,
    pub runtime_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_limit_s: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "[{}] {:>2} {:<28} deviation {:.3e} (tol {:.1e}) {:.2}s  {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.id,
                    c.name,
                    c.deviation,
                    c.tolerance,
                    c.runtime_s,
                    c.detail
                )
            })
            .collect()
    }
}

/// Partial outcome of one check body.
struct Outcome {
    deviation: f64,
    /// Extra pass conditions beyond `deviation ≤ tolerance`.
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(deviation: f64, detail: impl Into<String>) -> Self {
        Self { deviation, ok: true, detail: detail.into() }
    }

    fn require(mut self, cond: bool, what: &str) -> Self {
        if !cond {
            self.ok = false;
            self.detail = format!("{}; FAILED: {what}", self.detail);
        }
        self
    }
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    Outcome { deviation: f64::NAN, ok: false, detail: format!("evaluation error: {e}") }
}

type Body = fn(&Oracles) -> Outcome;

struct Spec {
    id: u32,
    name: &'static str,
    tolerance: f64,
    runtime_limit_s: Option<f64>,
    body: Body,
}

const SPECS: &[Spec] = &[
    Spec {
        id: 1,
        name: "resonant scattering identity",
        tolerance: 1e-12,
        runtime_limit_s: Some(2.0),
        body: check_resonant,
    },
    Spec { id: 2, name: "gain formula", tolerance: 1e-10, runtime_limit_s: None, body: check_gain },
    Spec { id: 3, name: "added noise", tolerance: 1e-10, runtime_limit_s: None, body: check_added_noise },
    Spec { id: 4, name: "squeezing limit", tolerance: 0.05, runtime_limit_s: Some(1.0), body: check_squeezing },
    Spec { id: 5, name: "impurity approximation", tolerance: 1e-2, runtime_limit_s: None, body: check_impurity },
    Spec { id: 6, name: "gain-bandwidth", tolerance: 0.05, runtime_limit_s: None, body: check_bandwidth },
    Spec {
        id: 7,
        name: "spectral-function threshold",
        tolerance: 1e-9,
        runtime_limit_s: None,
        body: check_spectral_zero,
    },
    Spec { id: 8, name: "force sensing", tolerance: 1e-10, runtime_limit_s: None, body: check_force },
    Spec { id: 9, name: "qubit thermometry", tolerance: 0.01, runtime_limit_s: None, body: check_qubit },
    Spec { id: 10, name: "paramp reference", tolerance: 1e-12, runtime_limit_s: Some(10.0), body: check_paramp },
    Spec { id: 11, name: "non-RWA convergence", tolerance: 0.0, runtime_limit_s: None, body: check_nonrwa },
    Spec { id: 12, name: "fluctuation-dissipation", tolerance: 1e-12, runtime_limit_s: None, body: check_fdt },
    Spec { id: 13, name: "figure presets", tolerance: 0.0, runtime_limit_s: Some(30.0), body: check_figures },
];

pub const CHECK_COUNT: usize = 13;

pub fn run(oracles: &Oracles) -> Report {
    let checks: Vec<CheckResult> = SPECS
        .iter()
        .map(|s| {
            let t0 = Instant::now();
            let out = (s.body)(oracles);
            let runtime_s = t0.elapsed().as_secs_f64();
            let in_time = s.runtime_limit_s.is_none_or(|l| runtime_s < l);
            let mut detail = out.detail;
            if !in_time {
                detail = format!("{detail}; FAILED: runtime over {}s", s.runtime_limit_s.unwrap_or_default());
            }
            CheckResult {
                id: s.id,
                name: s.name,
                passed: out.ok && out.deviation <= s.tolerance && in_time,
                tolerance: s.tolerance,
                deviation: out.deviation,
                runtime_s,
                runtime_limit_s: s.runtime_limit_s,
                detail,
            }
        })
        .collect();
    Report { schema_version: SCHEMA_VERSION, passed: checks.iter().all(|c| c.passed), checks }
}

fn model(p: SystemParams) -> Model {
    Model::new(p).expect("check parameters are valid")
}

/// Lossless stable draws with |λ| below 95% of the stability edge.
fn resonant_draws(seed: u64, n: usize) -> Vec<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let gamma = 10f64.powf(rng.gen_range(-5.0..-2.0));
            let c0 = 10f64.powf(rng.gen_range(-1.0..3.0));
            let mut p = SystemParams::scaled(gamma, c0, 0.0);
            p.lambda_mag = rng.gen_range(0.0..0.95) * stability_limit(&model(p.clone()));
            model(p)
        })
        .collect()
}

/// |λ| giving resonant amplitude gain `r_y` at cooperativity `c0`.
fn lambda_for_gain(gamma: f64, c0: f64, r_y: f64) -> f64 {
    let x = c0 * (1.0 - r_y) / (1.0 + r_y);
    0.5 * gamma * (1.0 - x)
}

fn check_resonant(o: &Oracles) -> Outcome {
    let mut worst: f64 = 0.0;
    for m in resonant_draws(1, 1000) {
        let (Ok(g), Ok(s)) = (gain_y(&m), scattering_matrix(&m, 0.0)) else { return failed("draw evaluation") };
        worst = worst.max(s.max_abs_diff(&(o.resonant_matrix)(m.c0(), g.r_y)));
    }
    Outcome::new(worst, "1000 lossless draws, max entrywise |s(0) - closed form|")
}

fn check_gain(_: &Oracles) -> Outcome {
    let mut worst: f64 = 0.0;
    for m in resonant_draws(1, 1000) {
        let (Ok(g), Ok(s)) = (gain_y(&m), scattering_matrix(&m, 0.0)) else { return failed("draw evaluation") };
        worst = worst.max((s.get(Y, Y).norm_sqr() - g.r_y * g.r_y).abs() / g.gain.max(1.0));
    }
    let mut iff = true;
    for c0 in [2.0, 10.0, 100.0, 1000.0] {
        let gamma = 1e-5;
        let base = SystemParams::scaled(gamma, c0, 0.0);
        let lmax = base.lambda_max();
        let limit = stability_limit(&model(base.clone()));
        for k in 0..400 {
            let lam = limit * k as f64 / 400.0;
            let m = model(SystemParams { lambda_mag: lam, ..base.clone() });
            let Ok(s) = scattering_matrix(&m, 0.0) else { return failed("iff sweep") };
            let amplifies = s.get(Y, Y).norm_sqr() > 1.0;
            iff &= amplifies == (gamma / 2.0 < lam && lam < lmax);
        }
    }
    Outcome::new(worst, "relative |s_YY(0)|^2 vs R_Y^2 on 1000 draws; gain > 1 iff gamma/2 < |lambda| < lambda_max")
        .require(iff, "gain > 1 iff gamma/2 < |lambda| < lambda_max")
}

fn check_added_noise(o: &Oracles) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let gamma = 10f64.powf(rng.gen_range(-6.0..-3.0));
        let c0 = 10f64.powf(rng.gen_range(0.5..3.0));
        let root_gain = 10f64.powf(rng.gen_range(0.05..1.5));
        let p = SystemParams {
            lambda_mag: lambda_for_gain(gamma, c0, root_gain),
            nbar_c: rng.gen_range(0.0..2.0),
            nbar_m: rng.gen_range(0.0..50.0),
            ..SystemParams::scaled(gamma, c0, 0.0)
        };
        let m = model(p.clone());
        let (Ok(s), Ok(g)) = (output_spectra(&m, 0.0), gain_y(&m)) else { return failed("spectra") };
        let full = s[(Y, Y)].re / g.gain;
        let closed = (o.referred_noise)(c0, g.r_y, p.nbar_c, p.nbar_m);
        worst = worst.max((full - closed).abs() / closed);
    }
    let m = model(SystemParams {
        lambda_mag: lambda_for_gain(1e-4, 100.0, 9.0),
        nbar_m: 5.0,
        ..SystemParams::scaled(1e-4, 100.0, 0.0)
    });
    let quoted = match (output_spectra(&m, 0.0), gain_y(&m)) {
        (Ok(s), Ok(g)) => s[(Y, Y)].re / g.gain - 0.5,
        _ => return failed("C0=100 point"),
    };
    Outcome::new(
        worst,
        format!("relative S_YY(0)/G vs closed form on 500 draws; C0=100, sqrt(G)=9, n_m=5 gives {quoted:.4} quanta"),
    )
    .require((quoted - 0.0679).abs() < 5e-5, "added noise 0.0679 at C0=100, sqrt(G)=9, n_m=5")
}

fn check_squeezing(_: &Oracles) -> Outcome {
    let (c0, nm) = (1e4, 5.0);
    let base = SystemParams { nbar_m: nm, ..SystemParams::scaled(1e-6, c0, 0.0) };
    let m = model(SystemParams { lambda_mag: 0.999 * base.lambda_max(), ..base });
    match squeezing(&m, 0.0) {
        Ok(s) => {
            let target = (2.0 * nm + 1.0) / c0;
            Outcome::new((s / target - 1.0).abs(), format!("2S_XX(0) = {s:.6e} vs (2n_m+1)/C0 = {target:.6e}"))
        }
        Err(e) => failed(e),
    }
}

fn check_impurity(_: &Oracles) -> Outcome {
    let (c0, nm) = (1e3, 10.0);
    let base = SystemParams { nbar_m: nm, ..SystemParams::scaled(1e-6, c0, 0.0) };
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for k in 0..=18 {
        let r = 0.05 * k as f64;
        let m = model(SystemParams { lambda_mag: r * base.lambda_max(), ..base.clone() });
        let Ok(n) = impurity(&m, 0.0) else { return failed("impurity") };
        let rel = ((n + 0.5).powi(2) / impurity_sq_large_c0(c0, r, nm) - 1.0).abs();
        if rel > worst {
            worst = rel;
            at = r;
        }
    }
    Outcome::new(worst, format!("max relative error over |lambda/lambda_max| in [0, 0.9] at {at:.2}; bound 10/C0"))
}

fn check_bandwidth(_: &Oracles) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for gain in [100.0, 1e3, 1e4] {
        for g in [0.05, 0.01] {
            for c0 in [100.0, 1000.0] {
                let gamma = 4.0 * g * g / c0;
                let p = SystemParams {
                    coupling: g,
                    lambda_mag: lambda_for_gain(gamma, c0, f64::sqrt(gain)),
                    ..SystemParams::scaled(gamma, c0, 0.0)
                };
                let bw = match bandwidth(&model(p)) {
                    Ok(b) => b,
                    Err(e) => return failed(e),
                };
                let rel = (bw.fwhm_numeric / bw.fwhm_approx - 1.0).abs();
                if rel > worst {
                    worst = rel;
                    at = format!("G={gain}, G/kappa={g}, C0={c0}");
                }
            }
        }
    }
    Outcome::new(worst, format!("max relative FWHM error vs 8G^2/(kappa sqrt(G)) at {at}"))
}

fn check_spectral_zero(_: &Oracles) -> Outcome {
    let gamma = 1e-4;
    let mut worst: f64 = 0.0;
    let mut lam0: f64 = 0.0;
    for c0 in [10.0, 100.0, 1000.0] {
        let base = SystemParams::scaled(gamma, c0, 0.0);
        let a0 = |ell: f64| {
            let m = model(SystemParams { lambda_mag: 0.5 * ell * gamma, ..base.clone() });
            spectral_function(&m, 0.0).unwrap_or(f64::NAN)
        };
        let target = (1.0 + c0).sqrt();
        let root = match bisect(a0, 0.5 * (1.0 + target), 0.5 * (target + 1.0 + c0), 1e-13 * target) {
            Ok(r) => r,
            Err(e) => return failed(e),
        };
        worst = worst.max((root / target - 1.0).abs());
        let m = model(base);
        let Ok(a) = spectral_function(&m, 0.0) else { return failed("lambda = 0") };
        lam0 = lam0.max((a - 4.0 / (1.0 + c0)).abs()).max((spectral_function_at_resonance(&m) - a).abs());
    }
    Outcome::new(worst, format!("relative root error of A(0) = 0 vs sqrt(1+C0); lambda = 0 deviation {lam0:.1e}"))
        .require(lam0 <= 1e-12, "A(0) = (4/kappa)/(1+C0) at lambda = 0 within 1e-12")
}

fn check_force(_: &Oracles) -> Outcome {
    let gamma = 1e-5;
    let m = model(SystemParams::scaled(gamma, impedance_match_c0(0.45), 0.45 * gamma));
    let (Ok(n), Ok(s)) = (added_noise_force(&m, 0.0), transduction(&m, 0.0)) else { return failed("matched point") };
    let dev = (s - C64::new(1.0 / (1.0f64 - 0.9).sqrt(), 0.0)).norm();
    let at_zero = |log_c0: f64| {
        let m = model(SystemParams::scaled(gamma, 10f64.powf(log_c0), 0.0));
        transduction(&m, 0.0).map(|s| s.norm()).unwrap_or(f64::NAN)
    };
    let (arg, max) = golden_max(at_zero, -3.0, 3.0, 1e-8);
    Outcome::new(dev, format!("n_add_FD(0) = {n:.1e}; |s_YU(0)| max {max:.12} at C0 = {:.6}", 10f64.powf(arg)))
        .require(n.abs() <= 1e-12, "n_add_FD(0) <= 1e-12 on the matched locus")
        .require((max - 1.0).abs() <= 1e-10 && (10f64.powf(arg) - 1.0).abs() < 1e-6, "max |s_YU(0)| = 1 at C0 = 1")
}

fn check_qubit(_: &Oracles) -> Outcome {
    let (gamma, c0) = (1e-4, 100.0);
    let base = SystemParams::scaled(gamma, c0, 0.0);
    let pol = |ell: f64| {
        let m = model(SystemParams { lambda_mag: 0.5 * ell * gamma, ..base.clone() });
        qubit_polarization(&m, 0.0).unwrap_or(f64::NAN)
    };
    let lo = (1.0 + c0).sqrt() * 1.0001;
    let (arg, max) = golden_max(pol, lo, 0.999 * (1.0 + c0), 1e-9);
    let locus = (1.0 + c0).powf(0.75);
    let predicted = 1.0 - 4.0 / c0.sqrt();
    Outcome::new(
        (arg / locus - 1.0).abs(),
        format!("argmax 2|lambda|/gamma = {arg:.6} vs (1+C0)^(3/4) = {locus:.6}; max pol {max:.5} vs 1-4/sqrt(C0) = {predicted}"),
    )
    .require((max - predicted).abs() <= 0.02, "max polarization within 0.02 of 1-4/sqrt(C0)")
}

fn check_paramp(_: &Oracles) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let grid = linspace(-10.0, 10.0, 1000);
    let mut min_a = f64::INFINITY;
    for _ in 0..10_000 {
        let ks: f64 = 10f64.powf(rng.gen_range(-1.5..0.5));
        let ki: f64 = 10f64.powf(rng.gen_range(-1.5..0.5));
        let mu = C64::from_polar(rng.gen_range(0.0..1.0) * 0.5 * (ks * ki).sqrt(), rng.gen_range(-3.2..3.2));
        let Ok(p) = ParampParams::ndpa(mu, ks, ki) else { return failed("NDPA draw") };
        for &w in &grid {
            let (a_s, a_i) = ndpa_spectral_function(&p, w);
            min_a = min_a.min(a_s).min(a_i);
        }
    }
    let scan = detuned_dpa_scan(C64::new(0.6, 0.0), 1.0, 1.0, &linspace(-4.0, 4.0, 1000));
    Outcome::new(
        (-min_a).max(0.0),
        format!(
            "min NDPA A over 1e4 draws = {min_a:.3e}; detuned DPA negative at {} grid points",
            scan.negative_frequencies.len()
        ),
    )
    .require(
        scan.stable && !scan.negative_frequencies.is_empty(),
        "detuned DPA (kappa=1, Delta=1, Lambda=0.6) stable with A < 0",
    )
}

fn check_nonrwa(_: &Oracles) -> Outcome {
    let grid = linspace(-0.03, 0.03, 61);
    let mut ok = true;
    let mut detail = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for r in FIG3_LAMBDAS {
        let deltas: Vec<f64> = [20.0, 40.0, 80.0]
            .iter()
            .map(|&wm| {
                let m = model(SystemParams { omega_m: wm, ..fig3_params(r) });
                grid.iter()
                    .map(|&w| match (nonrwa_point(&m, w, 1), output_spectra(&m, w)) {
                        (Ok(p), Ok(s)) => max_abs_diff(&p.s_out, &s),
                        _ => f64::NAN,
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let m = model(fig3_params(r));
        let (mut d21, mut d1r) = (0.0f64, 0.0f64);
        for &w in &grid {
            let (Ok(o1), Ok(o2), Ok(rwa)) = (nonrwa_point(&m, w, 1), nonrwa_point(&m, w, 2), output_spectra(&m, w))
            else {
                return failed("sideband solve");
            };
            d21 = d21.max(max_abs_diff(&o2.s_out, &o1.s_out));
            d1r = d1r.max(max_abs_diff(&o1.s_out, &rwa));
        }
        ok &= deltas[0] > deltas[1] && deltas[1] > deltas[2] && d21 < d1r;
        worst_ratio = worst_ratio.max(d21 / d1r);
        detail.push(format!("r={r}: {:.2e}>{:.2e}>{:.2e}", deltas[0], deltas[1], deltas[2]));
    }
    Outcome::new(0.0, format!("{}; max |o2-o1|/|o1-RWA| = {worst_ratio:.1e}", detail.join(", ")))
        .require(ok, "strict decrease with omega_M and order-2 change below order-1 change")
}

fn check_fdt(_: &Oracles) -> Outcome {
    let mut worst: f64 = 0.0;
    for nc in [0.0, 0.7, 3.0] {
        let m = model(SystemParams { nbar_c: nc, kappa_ext: 0.8, kappa_int: 0.2, ..Default::default() });
        for w in linspace(-5.0, 5.0, 1001) {
            let (Ok(a), Ok(k)) = (spectral_function(&m, w), keldysh(&m, w)) else { return failed("spectra") };
            worst = worst.max((k - (2.0 * nc + 1.0) * a).abs());
        }
    }
    Outcome::new(worst, "max |S_kel - (2n_c+1)A| at G = lambda = 0")
}

fn check_figures(_: &Oracles) -> Outcome {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return failed(e),
    };
    let mut complete = true;
    let mut monotone = false;
    let mut files = 0;
    for name in ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"] {
        let fig = match figures::build(name) {
            Ok(f) => f,
            Err(e) => return failed(e),
        };
        match figures::write(&fig, dir.path()) {
            Ok(paths) => {
                files += paths.len();
                for p in &paths {
                    complete &= std::fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false);
                }
            }
            Err(e) => return failed(e),
        }
        complete &= fig.tables.iter().all(|(_, t)| !t.rows.is_empty());
        if name == "fig3" {
            let t = &fig.tables[1].1;
            let (Some(g), Some(n), Some(v)) = (t.column("gain_y"), t.column("referred_noise_y"), t.column("valid"))
            else {
                return failed("fig3 resonant columns");
            };
            monotone =
                v.iter().all(|&x| x == 1.0) && g.windows(2).all(|w| w[1] > w[0]) && n.windows(2).all(|w| w[1] < w[0]);
        }
    }
    Outcome::new(0.0, format!("{files} files written"))
        .require(complete, "all presets emit non-empty CSV files")
        .require(monotone, "fig3 gain rises and referred noise falls with lambda")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::poles;
    use crate::quad::X;

    fn broken_matrix(c0: f64, r_y: f64) -> Matrix4<C64> {
        let mut m = resonant_scattering_matrix(c0, r_y);
        m[(X, X)] += C64::new(1e-3, 0.0);
        m
    }

    #[test]
    fn corrupted_oracle_fails_only_its_check() {
        let good = run(&Oracles::default());
        let bad = run(&Oracles { resonant_matrix: broken_matrix, ..Oracles::default() });
        assert_eq!(good.checks.len(), CHECK_COUNT);
        assert!(good.checks[0].passed && !bad.checks[0].passed);
        for (g, b) in good.checks.iter().zip(&bad.checks).skip(1) {
            assert_eq!(g.passed, b.passed, "check {} changed", g.id);
        }
        let json = serde_json::to_value(&bad).unwrap();
        assert_eq!(json["schema_version"], 1);
        let first = &json["checks"][0];
        assert!(first["tolerance"].as_f64().unwrap() > 0.0 && first["deviation"].as_f64().unwrap() > 1e-4);
        assert!(FIG3_LAMBDAS.iter().all(|&r| poles(&model(fig3_params(r))).stable));
    }
}
