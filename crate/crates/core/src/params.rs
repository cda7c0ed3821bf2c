//! Operating-point parameters and the validated [`Model`] every physics
//! routine evaluates against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default pole-proximity floor, in units of κ².
pub const DEFAULT_POLE_FLOOR: f64 = 1e-12;

/// How rates and frequencies are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitMode {
    /// Everything in units of the total cavity decay rate κ.
    #[default]
    Scaled,
    /// Angular frequencies in rad/s; effective temperatures come out in kelvin.
    Absolute,
}

/// One operating point of the driven optomechanical cavity.
///
/// Rates are angular frequencies. In [`UnitMode::Scaled`] the usual choice is
/// `kappa_ext + kappa_int = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub kappa_ext: f64,
    #[serde(default)]
    pub kappa_int: f64,
    pub gamma: f64,
    /// Many-photon optomechanical coupling G.
    #[serde(alias = "G")]
    pub coupling: f64,
    /// Parametric drive magnitude |λ|.
    #[serde(default, alias = "lambda")]
    pub lambda_mag: f64,
    /// Parametric drive phase φ_p (radians).
    #[serde(default)]
    pub phi_p: f64,
    #[serde(default = "default_omega_m")]
    pub omega_m: f64,
    /// Cavity resonance, only used to convert to a lab-frame effective temperature.
    #[serde(default)]
    pub omega_c: f64,
    #[serde(default)]
    pub nbar_c: f64,
    #[serde(default)]
    pub nbar_m: f64,
    #[serde(default = "default_x_zpf")]
    pub x_zpf: f64,
    #[serde(default)]
    pub units: UnitMode,
}

fn default_omega_m() -> f64 {
    20.0
}

fn default_x_zpf() -> f64 {
    1.0
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            kappa_ext: 1.0,
            kappa_int: 0.0,
            gamma: 1e-4,
            coupling: 0.0,
            lambda_mag: 0.0,
            phi_p: 0.0,
            omega_m: default_omega_m(),
            omega_c: 0.0,
            nbar_c: 0.0,
            nbar_m: 0.0,
            x_zpf: default_x_zpf(),
            units: UnitMode::Scaled,
        }
    }
}

/// Names accepted by [`SystemParams::set`], in declaration order.
pub const PARAM_NAMES: &[&str] = &[
    "kappa_ext",
    "kappa_int",
    "gamma",
    "coupling",
    "lambda_mag",
    "phi_p",
    "omega_m",
    "omega_c",
    "nbar_c",
    "nbar_m",
    "x_zpf",
];

impl SystemParams {
    /// Lossless scaled-unit operating point with κ = 1 and the coupling chosen
    /// to give cooperativity `c0`.
    pub fn scaled(gamma: f64, c0: f64, lambda_mag: f64) -> Self {
        Self { gamma, coupling: (c0 * gamma / 4.0).sqrt(), lambda_mag, ..Self::default() }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_ext + self.kappa_int
    }

    pub fn cooperativity(&self) -> f64 {
        4.0 * self.coupling * self.coupling / (self.kappa() * self.gamma)
    }

    /// `(γ/2)(1 + C0)`, the parametric threshold in the weak-coupling regime.
    pub fn lambda_max(&self) -> f64 {
        0.5 * self.gamma * (1.0 + self.cooperativity())
    }

    /// Sets the field called `name`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "kappa_ext" => &mut self.kappa_ext,
            "kappa_int" => &mut self.kappa_int,
            "gamma" => &mut self.gamma,
            "coupling" | "G" => &mut self.coupling,
            "lambda_mag" | "lambda" => &mut self.lambda_mag,
            "phi_p" => &mut self.phi_p,
            "omega_m" => &mut self.omega_m,
            "omega_c" => &mut self.omega_c,
            "nbar_c" => &mut self.nbar_c,
            "nbar_m" => &mut self.nbar_m,
            "x_zpf" => &mut self.x_zpf,
            _ => {
                return Err(Error::InvalidParam { name: "sweep", reason: format!("`{name}` is not a parameter field") })
            }
        };
        *slot = value;
        Ok(())
    }

    /// Checks the type invariants. Returns non-fatal warnings on success.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParam { name, reason: format!("{v} is not finite") })
            }
        }
        fn non_negative(name: &'static str, v: f64) -> Result<()> {
            finite(name, v)?;
            if v < 0.0 {
                return Err(Error::InvalidParam { name, reason: format!("{v} < 0") });
            }
            Ok(())
        }
        non_negative("kappa_ext", self.kappa_ext)?;
        non_negative("kappa_int", self.kappa_int)?;
        if self.kappa() <= 0.0 {
            return Err(Error::InvalidParam {
                name: "kappa_ext",
                reason: "total cavity decay kappa_ext + kappa_int must be positive".into(),
            });
        }
        finite("gamma", self.gamma)?;
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParam {
                name: "gamma",
                reason: format!("{} <= 0 leaves the cooperativity undefined", self.gamma),
            });
        }
        non_negative("coupling", self.coupling)?;
        non_negative("lambda_mag", self.lambda_mag)?;
        finite("phi_p", self.phi_p)?;
        finite("omega_m", self.omega_m)?;
        if self.omega_m <= 0.0 {
            return Err(Error::InvalidParam { name: "omega_m", reason: format!("{} <= 0", self.omega_m) });
        }
        finite("omega_c", self.omega_c)?;
        non_negative("nbar_c", self.nbar_c)?;
        non_negative("nbar_m", self.nbar_m)?;
        finite("x_zpf", self.x_zpf)?;

        let mut warnings = Vec::new();
        let ratio = (self.coupling / self.kappa()).powi(2);
        if ratio > 0.01 {
            warnings.push(Warning::StrongCoupling { g_over_kappa_sq: ratio });
        }
        Ok(warnings)
    }
}

/// Non-fatal validation findings.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// (G/κ)² > 0.01: the weak-coupling assumptions behind λ_max and the
    /// mode-splitting analysis no longer hold.
    StrongCoupling { g_over_kappa_sq: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::StrongCoupling { g_over_kappa_sq } => {
                write!(f, "(G/kappa)^2 = {g_over_kappa_sq:.4} exceeds 0.01; weak-coupling results may not apply")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub kappa: f64,
    /// Cooperativity 4G²/(κγ).
    pub c0: f64,
    pub lambda_max: f64,
    /// Optical damping C0·γ = 4G²/κ.
    pub gamma_opt: f64,
}

pub fn derive(params: &SystemParams) -> Result<DerivedParams> {
    params.validate()?;
    let kappa = params.kappa();
    let c0 = params.cooperativity();
    Ok(DerivedParams {
        kappa,
        c0,
        lambda_max: 0.5 * params.gamma * (1.0 + c0),
        gamma_opt: 4.0 * params.coupling * params.coupling / kappa,
    })
}

/// Validated parameters plus evaluation options.
#[derive(Debug, Clone)]
pub struct Model {
    params: SystemParams,
    derived: DerivedParams,
    warnings: Vec<Warning>,
    pole_floor: f64,
    loss_occupancy: Option<f64>,
}

impl Model {
    pub fn new(params: SystemParams) -> Result<Self> {
        let warnings = params.validate()?;
        let derived = derive(&params)?;
        Ok(Self { params, derived, warnings, pole_floor: DEFAULT_POLE_FLOOR, loss_occupancy: None })
    }

    /// Pole-proximity floor in units of κ².
    pub fn with_pole_floor(mut self, floor: f64) -> Self {
        self.pole_floor = floor;
        self
    }

    /// Thermal occupancy of the internal-loss port; defaults to `nbar_c`.
    pub fn with_loss_occupancy(mut self, n: f64) -> Result<Self> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(Error::InvalidParam {
                name: "loss_occupancy",
                reason: format!("{n} is not a valid occupancy"),
            });
        }
        self.loss_occupancy = Some(n);
        Ok(self)
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn derived(&self) -> &DerivedParams {
        &self.derived
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn kappa(&self) -> f64 {
        self.derived.kappa
    }

    pub fn c0(&self) -> f64 {
        self.derived.c0
    }

    pub fn lambda_max(&self) -> f64 {
        self.derived.lambda_max
    }

    /// Absolute pole floor (rate² units).
    pub(crate) fn floor_abs(&self) -> f64 {
        self.pole_floor * self.derived.kappa * self.derived.kappa
    }

    pub fn loss_occupancy(&self) -> f64 {
        self.loss_occupancy.unwrap_or(self.params.nbar_c)
    }

    /// Copy of this model's options applied to new parameters.
    pub fn with_params(&self, params: SystemParams) -> Result<Self> {
        let mut m = Model::new(params)?.with_pole_floor(self.pole_floor);
        m.loss_occupancy = self.loss_occupancy;
        Ok(m)
    }
}
