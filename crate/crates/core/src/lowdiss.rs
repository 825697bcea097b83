//! Analytic low-dissipation model.
//!
//! Each isotherm exchanges `Q = T (±ΔS - Σ/τ)`; maximising
//! `P = (Q_h + Q_c) / (τ_h + τ_c)` gives closed-form optimal durations and
//! the efficiency at maximum power, bracketed by `η_C/2` and
//! `η_C/(2 - η_C)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive, EngineParams};

/// Default cutoff factor for the self-consistency regime.
pub const DEFAULT_MARGIN: f64 = 0.1;

/// `ω/T` above which the high-temperature expansion is flagged.
pub const HIGH_T_WARNING_RATIO: f64 = 0.3;

/// Coefficients of the low-dissipation heat model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowDissInputs {
    #[serde(rename = "dS")]
    pub delta_s: f64,
    #[serde(rename = "Sigma_h")]
    pub sigma_h: f64,
    #[serde(rename = "Sigma_c")]
    pub sigma_c: f64,
    #[serde(rename = "T_h")]
    pub t_h: f64,
    #[serde(rename = "T_c")]
    pub t_c: f64,
}

impl LowDissInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_s.is_finite() && self.delta_s > 0.0) {
            return Err(Error::invalid(format!(
                "dS must be positive, got {}",
                self.delta_s
            )));
        }
        if !(self.sigma_h >= 0.0 && self.sigma_c >= 0.0)
            || !self.sigma_h.is_finite()
            || !self.sigma_c.is_finite()
        {
            return Err(Error::invalid(
                "dissipation coefficients must be non-negative",
            ));
        }
        if !(self.t_c > 0.0 && self.t_c < self.t_h && self.t_h.is_finite()) {
            return Err(Error::invalid(format!(
                "require 0 < T_c < T_h, got {} and {}",
                self.t_c, self.t_h
            )));
        }
        Ok(())
    }

    pub fn eta_carnot(&self) -> f64 {
        1.0 - self.t_c / self.t_h
    }
}

/// Heat exchanged on one isotherm, with the `Σ = 0` exact limit allowing
/// `τ = 0`.
fn isotherm_heat(temperature: f64, reversible: f64, sigma: f64, tau: f64) -> f64 {
    if sigma == 0.0 {
        temperature * reversible
    } else {
        temperature * (reversible - sigma / tau)
    }
}

/// `(Q_h, Q_c)` at stroke durations `(τ_h, τ_c)`.
pub fn ld_heats(inputs: &LowDissInputs, tau_h: f64, tau_c: f64) -> Result<(f64, f64)> {
    if !(tau_h > 0.0 && tau_c > 0.0) {
        return Err(Error::invalid(format!(
            "durations must be positive, got {tau_h} and {tau_c}"
        )));
    }
    Ok((
        isotherm_heat(inputs.t_h, inputs.delta_s, inputs.sigma_h, tau_h),
        isotherm_heat(inputs.t_c, -inputs.delta_s, inputs.sigma_c, tau_c),
    ))
}

/// Power of the low-dissipation cycle.
pub fn ld_power(inputs: &LowDissInputs, tau_h: f64, tau_c: f64) -> Result<f64> {
    let (q_h, q_c) = ld_heats(inputs, tau_h, tau_c)?;
    Ok((q_h + q_c) / (tau_h + tau_c))
}

/// Closed-form durations maximising the low-dissipation power.
///
/// Written as `τ_h* = 2 (T_h Σ_h + √(T_h Σ_h T_c Σ_c)) / ((T_h - T_c) ΔS)`
/// (and symmetrically for `τ_c*`), which is the usual form with the square
/// root distributed and stays finite when either `Σ` vanishes.
pub fn ld_optimal_times(inputs: &LowDissInputs) -> Result<(f64, f64)> {
    inputs.validate()?;
    let a_h = inputs.t_h * inputs.sigma_h;
    let a_c = inputs.t_c * inputs.sigma_c;
    if a_h == 0.0 && a_c == 0.0 {
        return Err(Error::invalid(
            "at least one dissipation coefficient must be positive",
        ));
    }
    let scale = 2.0 / ((inputs.t_h - inputs.t_c) * inputs.delta_s);
    let cross = (a_h * a_c).sqrt();
    Ok((scale * (a_h + cross), scale * (a_c + cross)))
}

/// Efficiency at maximum power of the low-dissipation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowDissEmp {
    pub tau_h_star: f64,
    pub tau_c_star: f64,
    #[serde(rename = "P_max")]
    pub p_max: f64,
    pub eta_star: f64,
    pub eta_minus: f64,
    pub eta_plus: f64,
}

/// `η_- = η_C/2`.
pub fn eta_minus(eta_c: f64) -> f64 {
    eta_c / 2.0
}

/// `η_+ = η_C/(2 - η_C)`.
pub fn eta_plus(eta_c: f64) -> f64 {
    eta_c / (2.0 - eta_c)
}

/// Evaluates power and efficiency at the closed-form optimal durations.
pub fn ld_emp(inputs: &LowDissInputs) -> Result<LowDissEmp> {
    let (tau_h, tau_c) = ld_optimal_times(inputs)?;
    let q_h = isotherm_heat(inputs.t_h, inputs.delta_s, inputs.sigma_h, tau_h);
    let q_c = isotherm_heat(inputs.t_c, -inputs.delta_s, inputs.sigma_c, tau_c);
    let eta_c = inputs.eta_carnot();
    Ok(LowDissEmp {
        tau_h_star: tau_h,
        tau_c_star: tau_c,
        p_max: (q_h + q_c) / (tau_h + tau_c),
        eta_star: (q_h + q_c) / q_h,
        eta_minus: eta_minus(eta_c),
        eta_plus: eta_plus(eta_c),
    })
}

/// High-temperature reversible entropy change `(ω_i² - ω_f²) / (8 T²)`.
pub fn high_t_entropy_change(omega_i: f64, omega_f: f64, temperature: f64) -> f64 {
    (omega_i * omega_i - omega_f * omega_f) / (8.0 * temperature * temperature)
}

/// `Σ = 2 ΔS / γ̃`.
pub fn high_t_dissipation(delta_s: f64, gamma_tilde: f64) -> f64 {
    2.0 * delta_s / gamma_tilde
}

/// High-temperature coefficients for an engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighTCoefficients {
    pub inputs: LowDissInputs,
    pub gamma_tilde_h: f64,
    pub gamma_tilde_c: Option<f64>,
    /// Entropy change recomputed from the cold-stroke endpoints.
    #[serde(rename = "dS_cold")]
    pub delta_s_cold: f64,
    /// Set when `ω_h^i / T_h` exceeds [`HIGH_T_WARNING_RATIO`].
    pub approximation_warning: bool,
}

pub fn high_t_coefficients(params: &EngineParams) -> Result<HighTCoefficients> {
    let d = derive(params)?;
    let delta_s = high_t_entropy_change(params.omega_h_i, params.omega_h_f, params.t_h);
    // The cold isotherm runs ω_c^i -> ω_c^f and returns ΔS to the bath; report it with the hot-side sign.
    let delta_s_cold = -high_t_entropy_change(d.omega_c_i, d.omega_c_f, params.t_c);
    Ok(HighTCoefficients {
        inputs: LowDissInputs {
            delta_s,
            sigma_h: high_t_dissipation(delta_s, d.gamma_tilde_h),
            sigma_c: d
                .gamma_tilde_c
                .map_or(0.0, |g| high_t_dissipation(delta_s, g)),
            t_h: params.t_h,
            t_c: params.t_c,
        },
        gamma_tilde_h: d.gamma_tilde_h,
        gamma_tilde_c: d.gamma_tilde_c,
        delta_s_cold,
        approximation_warning: params.omega_h_i / params.t_h > HIGH_T_WARNING_RATIO,
    })
}

/// Dimensionless optimal durations `τ̃* = τ* γ̃` in closed form.
///
/// `τ̃_c*` diverges in the infinite-coupling limit and is returned as `None`.
pub fn ld_dimensionless_times(params: &EngineParams) -> Result<(f64, Option<f64>)> {
    let d = derive(params)?;
    let ratio = params.gamma_c.ratio_from(params.gamma_h);
    let (wi, wf) = (params.omega_h_i, params.omega_h_f);
    let prefactor = 2.0 / d.eta_c * (wi - wf) / (wi + wf);
    let tau_h = prefactor * (1.0 + ((1.0 - d.eta_c) * ratio).sqrt());
    let tau_c =
        (ratio > 0.0).then(|| prefactor * (((1.0 - d.eta_c) / ratio).sqrt() + 1.0 - d.eta_c));
    Ok((tau_h, tau_c))
}

/// `2 (1 - δ) / (1 + δ)`.
pub fn regime_threshold(delta: f64) -> f64 {
    2.0 * (1.0 - delta) / (1.0 + delta)
}

/// Threshold on `η_C` and whether `η_C ≤ margin · threshold`.
pub fn regime_check(params: &EngineParams, margin: f64) -> Result<(f64, bool)> {
    if !(margin > 0.0 && margin <= 1.0) {
        return Err(Error::invalid(format!(
            "margin must lie in (0, 1], got {margin}"
        )));
    }
    let d = derive(params)?;
    let threshold = regime_threshold(d.delta);
    Ok((threshold, d.eta_c <= margin * threshold))
}

/// Everything the analytic model says about one engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowDissPrediction {
    pub coefficients: HighTCoefficients,
    pub emp: LowDissEmp,
    pub tau_tilde_h_star: f64,
    pub tau_tilde_c_star: Option<f64>,
    pub regime_threshold: f64,
    pub margin: f64,
    pub in_regime: bool,
}

pub fn predict(params: &EngineParams, margin: f64) -> Result<LowDissPrediction> {
    let coefficients = high_t_coefficients(params)?;
    let emp = ld_emp(&coefficients.inputs)?;
    let (tau_tilde_h_star, tau_tilde_c_star) = ld_dimensionless_times(params)?;
    let (regime_threshold, in_regime) = regime_check(params, margin)?;
    Ok(LowDissPrediction {
        coefficients,
        emp,
        tau_tilde_h_star,
        tau_tilde_c_star,
        regime_threshold,
        margin,
        in_regime,
    })
}
