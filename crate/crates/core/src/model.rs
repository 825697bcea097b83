//! Physical configuration of the engine and derived quantities.
//!
//! Units: `ħ = k_B = 1`. Temperatures and level spacings share one energy
//! unit, couplings are inverse times.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Coupling of the working substance to the cold bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColdCoupling {
    Finite(f64),
    /// `γ_c → ∞`: the cold stroke is instantaneous and its duration is ignored.
    Infinite,
}

impl ColdCoupling {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ColdCoupling::Infinite)
    }

    /// `γ_h / γ_c`, zero in the infinite-coupling limit.
    pub fn ratio_from(&self, gamma_h: f64) -> f64 {
        match *self {
            ColdCoupling::Finite(g) => gamma_h / g,
            ColdCoupling::Infinite => 0.0,
        }
    }
}

impl std::fmt::Display for ColdCoupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColdCoupling::Finite(g) => write!(f, "{g}"),
            ColdCoupling::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for ColdCoupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(ColdCoupling::Infinite);
        }
        s.parse::<f64>()
            .map(ColdCoupling::Finite)
            .map_err(|_| Error::invalid(format!("gamma_c must be a number or \"inf\", got {s:?}")))
    }
}

impl Serialize for ColdCoupling {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            ColdCoupling::Finite(g) => serializer.serialize_f64(g),
            ColdCoupling::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ColdCoupling {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(g) => Ok(ColdCoupling::Finite(g)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Full physical configuration of the engine.
///
/// The serialized field names are part of the CLI parameter-file format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    #[serde(rename = "T_h")]
    pub t_h: f64,
    #[serde(rename = "T_c")]
    pub t_c: f64,
    pub gamma_h: f64,
    pub gamma_c: ColdCoupling,
    pub omega_h_i: f64,
    pub omega_h_f: f64,
}

impl EngineParams {
    /// Checks the parameter invariants. Engine orientation is not enforced
    /// here; see [`EngineParams::require_engine_orientation`].
    pub fn validate(&self) -> Result<()> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !finite_pos(self.t_c) {
            return Err(Error::invalid(format!(
                "T_c must be positive, got {}",
                self.t_c
            )));
        }
        if !finite_pos(self.t_h) {
            return Err(Error::invalid(format!(
                "T_h must be positive, got {}",
                self.t_h
            )));
        }
        if self.t_c >= self.t_h {
            return Err(Error::invalid(format!(
                "require T_c < T_h, got T_c = {} and T_h = {}",
                self.t_c, self.t_h
            )));
        }
        if !finite_pos(self.gamma_h) {
            return Err(Error::invalid(format!(
                "gamma_h must be positive, got {}",
                self.gamma_h
            )));
        }
        if let ColdCoupling::Finite(g) = self.gamma_c {
            if !finite_pos(g) {
                return Err(Error::invalid(format!(
                    "gamma_c must be positive or \"inf\", got {g}"
                )));
            }
        }
        if !finite_pos(self.omega_h_i) || !finite_pos(self.omega_h_f) {
            return Err(Error::invalid(format!(
                "level spacings must be positive, got omega_h_i = {} and omega_h_f = {}",
                self.omega_h_i, self.omega_h_f
            )));
        }
        if self.omega_h_i == self.omega_h_f {
            return Err(Error::invalid("omega_h_f must differ from omega_h_i"));
        }
        Ok(())
    }

    /// Engine mode expands the level spacing during the hot stroke.
    pub fn require_engine_orientation(&self) -> Result<()> {
        if self.omega_h_f < self.omega_h_i {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "engine mode requires omega_h_f < omega_h_i, got {} >= {}",
                self.omega_h_f, self.omega_h_i
            )))
        }
    }

    /// Same engine at a different Carnot efficiency, `T_c = T_h (1 - η_C)`.
    pub fn with_carnot_efficiency(&self, eta_c: f64) -> Result<Self> {
        if !(eta_c > 0.0 && eta_c < 1.0) {
            return Err(Error::invalid(format!(
                "eta_C must lie in (0, 1), got {eta_c}"
            )));
        }
        Ok(EngineParams {
            t_c: self.t_h * (1.0 - eta_c),
            ..*self
        })
    }
}

/// Quantities derived from [`EngineParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub eta_c: f64,
    /// Compression ratio `ω_h^f / ω_h^i`.
    pub delta: f64,
    pub omega_c_i: f64,
    pub omega_c_f: f64,
    /// Hot-stroke relaxation time `ω_h^i / (2 γ_h T_h)`.
    pub t_r: f64,
    pub gamma_tilde_h: f64,
    /// `None` in the infinite-coupling limit.
    pub gamma_tilde_c: Option<f64>,
}

/// Derives Carnot efficiency, cold-stroke spacings (from the adiabatic
/// matching `ω_c/T_c = ω_h/T_h`) and relaxation scales.
pub fn derive(params: &EngineParams) -> Result<DerivedParams> {
    params.validate()?;
    let ratio = params.t_c / params.t_h;
    let omega_c_i = params.omega_h_f * ratio;
    let gamma_tilde_h = 2.0 * params.gamma_h * params.t_h / params.omega_h_i;
    let gamma_tilde_c = match params.gamma_c {
        ColdCoupling::Finite(g) => Some(2.0 * g * params.t_c / omega_c_i),
        ColdCoupling::Infinite => None,
    };
    Ok(DerivedParams {
        eta_c: 1.0 - ratio,
        delta: params.omega_h_f / params.omega_h_i,
        omega_c_i,
        omega_c_f: params.omega_h_i * ratio,
        t_r: params.omega_h_i / (2.0 * params.gamma_h * params.t_h),
        gamma_tilde_h,
        gamma_tilde_c,
    })
}
