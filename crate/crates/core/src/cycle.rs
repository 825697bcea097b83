//! Four-stroke Carnot-like cycle: hot quasi-isotherm, adiabat, cold
//! quasi-isotherm, adiabat. Adiabats freeze the population and take no time.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    integrate_stroke, stroke_affine_map, thermal_population, two_level_entropy, AffineMap,
    BathContact, Ramp, Sample, StrokeResult, TRAJECTORY_SAMPLES,
};
use crate::error::{Error, Result};
use crate::model::{derive, ColdCoupling, DerivedParams, EngineParams};

/// Default relative integrator tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default closure tolerance for finite-coupling limit cycles.
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-9;

/// How the cold stroke is resolved when `γ_c → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColdLimit {
    /// The cold adiabat ends on the spacing where the frozen population is
    /// thermal at `T_c`; the cold stroke is then a reversible isotherm to
    /// `ω_c^f`.
    #[default]
    Matched,
    /// The cold adiabat ends at the fixed `ω_c^i`; the population relaxes
    /// instantly there, followed by a reversible isotherm to `ω_c^f`. This
    /// is the `γ_c → ∞` limit of the fixed-endpoint finite cycle.
    Relaxation,
}

impl std::str::FromStr for ColdLimit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matched" => Ok(ColdLimit::Matched),
            "relaxation" => Ok(ColdLimit::Relaxation),
            other => Err(Error::invalid(format!(
                "unknown cold limit {other:?} (matched|relaxation)"
            ))),
        }
    }
}

impl std::fmt::Display for ColdLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ColdLimit::Matched => "matched",
            ColdLimit::Relaxation => "relaxation",
        })
    }
}

/// One cycle to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSpec {
    pub params: EngineParams,
    pub tau_h: f64,
    /// Required for finite `γ_c`, ignored otherwise.
    pub tau_c: Option<f64>,
    pub cold_limit: ColdLimit,
    pub tol: f64,
}

impl CycleSpec {
    pub fn ideal(params: EngineParams, tau_h: f64) -> Self {
        CycleSpec {
            params,
            tau_h,
            tau_c: None,
            cold_limit: ColdLimit::default(),
            tol: DEFAULT_TOL,
        }
    }

    pub fn finite(params: EngineParams, tau_h: f64, tau_c: f64) -> Self {
        CycleSpec {
            tau_c: Some(tau_c),
            ..Self::ideal(params, tau_h)
        }
    }

    pub fn with_cold_limit(self, cold_limit: ColdLimit) -> Self {
        CycleSpec { cold_limit, ..self }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        CycleSpec { tol, ..self }
    }

    fn hot_stroke(&self) -> Result<(Ramp, BathContact)> {
        let p = &self.params;
        Ok((
            Ramp::new(p.omega_h_i, p.omega_h_f, self.tau_h)?,
            BathContact::new(p.t_h, p.gamma_h)?,
        ))
    }

    fn cold_stroke(&self, derived: &DerivedParams) -> Result<(Ramp, BathContact)> {
        let gamma_c = match self.params.gamma_c {
            ColdCoupling::Finite(g) => g,
            ColdCoupling::Infinite => {
                return Err(Error::invalid(
                    "finite-coupling cycle needs a finite gamma_c",
                ))
            }
        };
        let tau_c = self
            .tau_c
            .ok_or_else(|| Error::invalid("finite-coupling cycle needs tau_c"))?;
        Ok((
            Ramp::new(derived.omega_c_i, derived.omega_c_f, tau_c)?,
            BathContact::new(self.params.t_c, gamma_c)?,
        ))
    }
}

/// Cold stroke in the `γ_c → ∞` limit: optional instantaneous relaxation at
/// fixed spacing followed by a reversible isotherm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealColdStroke {
    pub omega_start: f64,
    pub omega_end: f64,
    /// Population arriving from the adiabat.
    pub p_arrival: f64,
    /// Population after the instantaneous relaxation (equal to
    /// `p_arrival` in matched mode).
    pub p_relaxed: f64,
    pub p_end: f64,
    pub relaxation_heat: f64,
    pub isothermal_heat: f64,
    pub isothermal_work_on: f64,
    pub irreversible_entropy: f64,
    pub trajectory: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ColdStroke {
    Ideal(IdealColdStroke),
    Finite(StrokeResult),
}

impl ColdStroke {
    pub fn heat(&self) -> f64 {
        match self {
            ColdStroke::Ideal(c) => c.relaxation_heat + c.isothermal_heat,
            ColdStroke::Finite(s) => s.heat,
        }
    }

    pub fn irreversible_entropy(&self) -> f64 {
        match self {
            ColdStroke::Ideal(c) => c.irreversible_entropy,
            ColdStroke::Finite(s) => s.irreversible_entropy,
        }
    }

    pub fn trajectory(&self) -> &[Sample] {
        match self {
            ColdStroke::Ideal(c) => &c.trajectory,
            ColdStroke::Finite(s) => &s.trajectory,
        }
    }

    pub fn p_end(&self) -> f64 {
        match self {
            ColdStroke::Ideal(c) => c.p_end,
            ColdStroke::Finite(s) => s.p_end,
        }
    }

    /// Work done on the substance during the stroke itself.
    pub fn work_on(&self) -> f64 {
        match self {
            ColdStroke::Ideal(c) => c.isothermal_work_on,
            ColdStroke::Finite(s) => s.work_on,
        }
    }
}

/// Engine status of a simulated cycle. Non-engine outcomes are reported,
/// not raised, so optimisers can step around them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleStatus {
    Engine,
    NoHeatIntake,
    NoWork,
}

/// Thermodynamic totals of one (periodic) cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub q_h: f64,
    pub q_c: f64,
    /// Output work `Q_h + Q_c`.
    pub work: f64,
    pub power: f64,
    pub efficiency: f64,
    pub tau_h: f64,
    /// Zero in the ideal-cold-bath limit.
    pub tau_c: f64,
    pub s_ir_h: f64,
    pub s_ir_c: f64,
    pub p_start: f64,
    pub p_end: f64,
    pub status: CycleStatus,
    pub hot: StrokeResult,
    pub cold: ColdStroke,
}

impl CycleResult {
    fn assemble(tau_h: f64, tau_c: f64, hot: StrokeResult, cold: ColdStroke) -> Self {
        let q_h = hot.heat;
        let q_c = cold.heat();
        let work = q_h + q_c;
        let status = if q_h <= 0.0 {
            CycleStatus::NoHeatIntake
        } else if work <= 0.0 {
            CycleStatus::NoWork
        } else {
            CycleStatus::Engine
        };
        CycleResult {
            q_h,
            q_c,
            work,
            power: work / (tau_h + tau_c),
            efficiency: work / q_h,
            tau_h,
            tau_c,
            s_ir_h: hot.irreversible_entropy,
            s_ir_c: cold.irreversible_entropy(),
            p_start: hot.p_start,
            p_end: cold.p_end(),
            status,
            hot,
            cold,
        }
    }

    pub fn is_engine(&self) -> bool {
        self.status == CycleStatus::Engine
    }

    pub fn closure_error(&self) -> f64 {
        (self.p_end - self.p_start).abs()
    }

    /// Net internal-energy change over the cycle, adiabats included.
    pub fn energy_residual(&self) -> f64 {
        let (cold_start_omega, cold_end_omega) = match &self.cold {
            ColdStroke::Ideal(c) => (c.omega_start, c.omega_end),
            ColdStroke::Finite(s) => (s.omega_start, s.omega_end),
        };
        // adiabatic work on the substance: p Δω with frozen p
        let w_adiabat_1 = self.hot.p_end * (cold_start_omega - self.hot.omega_end);
        let w_adiabat_2 = self.p_end * (self.hot.omega_start - cold_end_omega);
        let stroke_sum = self.q_h + self.hot.work_on + self.q_c + self.cold.work_on();
        stroke_sum + w_adiabat_1 + w_adiabat_2 - self.hot.omega_start * (self.p_end - self.p_start)
    }
}

/// `∫ p_eq(ω, T) dω` from `a` to `b`.
fn isothermal_work_on(a: f64, b: f64, temperature: f64) -> f64 {
    let f = |w: f64| -temperature * (-w / temperature).exp().ln_1p();
    f(b) - f(a)
}

fn isotherm_samples(
    omega_start: f64,
    omega_end: f64,
    temperature: f64,
    t: f64,
    count: usize,
) -> Vec<Sample> {
    (0..count)
        .map(|i| {
            let omega = if i + 1 == count {
                omega_end
            } else {
                omega_start + (omega_end - omega_start) * i as f64 / (count - 1) as f64
            };
            Sample {
                t,
                omega,
                p_e: thermal_population(omega, temperature),
            }
        })
        .collect()
}

/// Cycle with an ideal cold bath (`γ_c → ∞`, cold-stroke duration ignored).
///
/// The hot stroke starts in equilibrium with the hot bath at `ω_h^i`; the
/// cycle then closes exactly because `p_eq(ω_c^f, T_c) = p_eq(ω_h^i, T_h)`.
pub fn run_ideal_cold_cycle(spec: &CycleSpec) -> Result<CycleResult> {
    if !spec.params.gamma_c.is_infinite() {
        return Err(Error::invalid("ideal-cold-bath cycle needs gamma_c = inf"));
    }
    let derived = derive(&spec.params)?;
    let p = &spec.params;
    let (ramp, contact) = spec.hot_stroke()?;
    let p0 = thermal_population(p.omega_h_i, p.t_h);
    let hot = integrate_stroke(p0, &ramp, &contact, spec.tol)?;
    let p_arrival = hot.p_end;
    let t_c = p.t_c;

    let (omega_start, p_relaxed, relaxation_heat) = match spec.cold_limit {
        ColdLimit::Matched => {
            if !(p_arrival > 0.0 && p_arrival < 0.5) {
                return Err(Error::invalid(format!(
                    "population {p_arrival} has no positive-temperature matching spacing"
                )));
            }
            let omega = t_c * ((1.0 - p_arrival) / p_arrival).ln();
            (omega, p_arrival, 0.0)
        }
        ColdLimit::Relaxation => {
            let relaxed = thermal_population(derived.omega_c_i, t_c);
            (
                derived.omega_c_i,
                relaxed,
                derived.omega_c_i * (relaxed - p_arrival),
            )
        }
    };
    let omega_end = derived.omega_c_f;
    let p_end = thermal_population(omega_end, t_c);
    let isothermal_heat = t_c * (two_level_entropy(p_end) - two_level_entropy(p_relaxed));
    let q_c = relaxation_heat + isothermal_heat;
    let irreversible_entropy = two_level_entropy(p_end) - two_level_entropy(p_arrival) - q_c / t_c;

    let mut trajectory = Vec::with_capacity(TRAJECTORY_SAMPLES);
    match spec.cold_limit {
        ColdLimit::Matched => {
            trajectory.extend(isotherm_samples(
                omega_start,
                omega_end,
                t_c,
                spec.tau_h,
                TRAJECTORY_SAMPLES,
            ));
            // exact arrival point rather than the round-tripped thermal value
            trajectory[0].p_e = p_arrival;
        }
        ColdLimit::Relaxation => {
            trajectory.push(Sample {
                t: spec.tau_h,
                omega: omega_start,
                p_e: p_arrival,
            });
            trajectory.extend(isotherm_samples(
                omega_start,
                omega_end,
                t_c,
                spec.tau_h,
                TRAJECTORY_SAMPLES - 1,
            ));
        }
    }

    let cold = IdealColdStroke {
        omega_start,
        omega_end,
        p_arrival,
        p_relaxed,
        p_end,
        relaxation_heat,
        isothermal_heat,
        isothermal_work_on: isothermal_work_on(omega_start, omega_end, t_c),
        irreversible_entropy,
        trajectory,
    };
    Ok(CycleResult::assemble(
        spec.tau_h,
        0.0,
        hot,
        ColdStroke::Ideal(cold),
    ))
}

/// Affine population maps of the hot and cold strokes of a finite cycle.
pub fn stroke_maps(spec: &CycleSpec) -> Result<(AffineMap, AffineMap)> {
    let derived = derive(&spec.params)?;
    let (hot_ramp, hot_contact) = spec.hot_stroke()?;
    let (cold_ramp, cold_contact) = spec.cold_stroke(&derived)?;
    Ok((
        stroke_affine_map(&hot_ramp, &hot_contact, spec.tol)?,
        stroke_affine_map(&cold_ramp, &cold_contact, spec.tol)?,
    ))
}

/// Population at the start of the hot stroke in the periodic steady state,
/// `p* = (G_c H_h + H_c) / (1 - G_c G_h)`.
pub fn limit_cycle_population(hot: &AffineMap, cold: &AffineMap) -> Result<f64> {
    let denom = 1.0 - cold.g * hot.g;
    if denom.abs() < 1e-12 {
        return Err(Error::NoContraction(denom));
    }
    Ok((cold.g * hot.h + cold.h) / denom)
}

/// One pass of the finite-coupling cycle starting the hot stroke at `p_start`.
pub fn run_finite_pass(spec: &CycleSpec, p_start: f64) -> Result<CycleResult> {
    let derived = derive(&spec.params)?;
    let (hot_ramp, hot_contact) = spec.hot_stroke()?;
    let (cold_ramp, cold_contact) = spec.cold_stroke(&derived)?;
    let hot = integrate_stroke(p_start, &hot_ramp, &hot_contact, spec.tol)?;
    let mut cold = integrate_stroke(hot.p_end, &cold_ramp, &cold_contact, spec.tol)?;
    for s in &mut cold.trajectory {
        s.t += spec.tau_h;
    }
    Ok(CycleResult::assemble(
        spec.tau_h,
        cold_ramp.duration,
        hot,
        ColdStroke::Finite(cold),
    ))
}

/// Periodic steady cycle with finite cold coupling, from the fixed point of
/// the composed affine stroke maps.
pub fn run_finite_cycle(spec: &CycleSpec, closure_tol: f64) -> Result<CycleResult> {
    let (hot, cold) = stroke_maps(spec)?;
    let p_star = limit_cycle_population(&hot, &cold)?.clamp(0.0, 1.0);
    let result = run_finite_pass(spec, p_star)?;
    let closure = result.closure_error();
    if closure > closure_tol {
        return Err(Error::ClosureFailed(closure));
    }
    Ok(result)
}

/// Dispatches on the cold coupling.
pub fn run_cycle(spec: &CycleSpec) -> Result<CycleResult> {
    match spec.params.gamma_c {
        ColdCoupling::Infinite => run_ideal_cold_cycle(spec),
        ColdCoupling::Finite(_) => run_finite_cycle(spec, DEFAULT_CLOSURE_TOL),
    }
}
