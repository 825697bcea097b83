//! Population dynamics of a two-level system coupled to one bath while its
//! level spacing is ramped linearly:
//!
//! ```text
//! dp/dt = -κ(t) p + C(t),   κ = γ (2n + 1),   C = γ n,   n = 1 / (exp(ω/T) - 1)
//! ```
//!
//! The equation is linear in `p`, so every stroke is an affine map
//! `p_end = G p_start + H` (see [`stroke_affine_map`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of trajectory samples emitted per stroke, endpoints included.
pub const TRAJECTORY_SAMPLES: usize = 512;

/// Largest number of RK4 steps a single stroke may use.
pub const MAX_STEPS: usize = 1 << 26;

/// Clamp applied to populations inside entropy logarithms only.
const LOG_GUARD: f64 = 1e-15;

/// Linear schedule `ω(t) = ω_start + (ω_end - ω_start) t / τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub omega_start: f64,
    pub omega_end: f64,
    pub duration: f64,
}

impl Ramp {
    pub fn new(omega_start: f64, omega_end: f64, duration: f64) -> Result<Self> {
        let ramp = Ramp {
            omega_start,
            omega_end,
            duration,
        };
        ramp.validate()?;
        Ok(ramp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::invalid(format!(
                "stroke duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.omega_start.is_finite() && self.omega_start > 0.0)
            || !(self.omega_end.is_finite() && self.omega_end > 0.0)
        {
            return Err(Error::invalid(format!(
                "ramp spacings must be positive, got {} -> {}",
                self.omega_start, self.omega_end
            )));
        }
        Ok(())
    }

    /// `dω/dt`.
    pub fn slope(&self) -> f64 {
        (self.omega_end - self.omega_start) / self.duration
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        self.omega_start + self.slope() * t
    }
}

/// A bath at temperature `T` with coupling strength `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathContact {
    pub temperature: f64,
    pub gamma: f64,
}

impl BathContact {
    pub fn new(temperature: f64, gamma: f64) -> Result<Self> {
        let c = BathContact { temperature, gamma };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid(format!(
                "bath temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid(format!(
                "bath coupling must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// One trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub omega: f64,
    pub p_e: f64,
}

/// Outcome of one system-bath stroke.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeResult {
    pub trajectory: Vec<Sample>,
    /// Heat absorbed by the working substance, `∫ ω ṗ dt`.
    pub heat: f64,
    /// Work done on the working substance, `∫ p ω̇ dt`.
    pub work_on: f64,
    /// `S(p_end) - S(p_start)`.
    pub entropy_change: f64,
    /// `ΔS - Q/T`.
    pub irreversible_entropy: f64,
    pub p_start: f64,
    pub p_end: f64,
    pub omega_start: f64,
    pub omega_end: f64,
    /// RK4 steps used by the accepted (finer) run.
    pub steps: usize,
}

impl StrokeResult {
    /// `ω_end p_end - ω_start p_start`.
    pub fn energy_change(&self) -> f64 {
        self.omega_end * self.p_end - self.omega_start * self.p_start
    }
}

/// Thermal excited-state population `1 / (exp(ω/T) + 1)`.
pub fn equilibrium_population(omega: f64, temperature: f64) -> Result<f64> {
    check_positive("omega", omega)?;
    check_positive("temperature", temperature)?;
    Ok(thermal_population(omega, temperature))
}

pub(crate) fn thermal_population(omega: f64, temperature: f64) -> f64 {
    1.0 / ((omega / temperature).exp() + 1.0)
}

/// Decay rate `κ` and feeding rate `C` at spacing `ω`.
pub fn rates(omega: f64, contact: &BathContact) -> Result<(f64, f64)> {
    check_positive("omega", omega)?;
    contact.validate()?;
    Ok(raw_rates(omega, contact))
}

#[inline]
fn raw_rates(omega: f64, contact: &BathContact) -> (f64, f64) {
    let n = 1.0 / (omega / contact.temperature).exp_m1();
    (contact.gamma * (2.0 * n + 1.0), contact.gamma * n)
}

/// Two-level Shannon entropy `-p ln p - (1-p) ln(1-p)`.
pub fn two_level_entropy(p: f64) -> f64 {
    let p = p.clamp(LOG_GUARD, 1.0 - LOG_GUARD);
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {x}")))
    }
}

/// Relaxation time scale `1/κ_max` over the ramp.
pub fn relaxation_time(ramp: &Ramp, contact: &BathContact) -> f64 {
    let (k0, _) = raw_rates(ramp.omega_start, contact);
    let (k1, _) = raw_rates(ramp.omega_end, contact);
    1.0 / k0.max(k1)
}

struct Run {
    samples: Vec<Sample>,
    p: f64,
    heat: f64,
    work_on: f64,
}

/// Fixed-step RK4 over `(p, Q, W_on)` with `(TRAJECTORY_SAMPLES - 1) * k`
/// steps, recording every `k`-th state.
fn rk4_run(p0: f64, ramp: &Ramp, contact: &BathContact, k: usize) -> Run {
    let intervals = TRAJECTORY_SAMPLES - 1;
    let n = intervals * k;
    let h = ramp.duration / n as f64;
    let slope = ramp.slope();

    let mut samples = Vec::with_capacity(TRAJECTORY_SAMPLES);
    samples.push(Sample {
        t: 0.0,
        omega: ramp.omega_start,
        p_e: p0,
    });

    let (mut p, mut heat, mut work) = (p0, 0.0, 0.0);
    let mut omega0 = ramp.omega_start;
    let mut rate0 = raw_rates(omega0, contact);
    for i in 0..n {
        let t0 = i as f64 * h;
        let omega_mid = ramp.omega_start + slope * (t0 + 0.5 * h);
        let omega1 = if i + 1 == n {
            ramp.omega_end
        } else {
            ramp.omega_start + slope * (t0 + h)
        };
        let (km, cm) = raw_rates(omega_mid, contact);
        let rate1 = raw_rates(omega1, contact);

        let f1 = -rate0.0 * p + rate0.1;
        let p2 = p + 0.5 * h * f1;
        let f2 = -km * p2 + cm;
        let p3 = p + 0.5 * h * f2;
        let f3 = -km * p3 + cm;
        let p4 = p + h * f3;
        let f4 = -rate1.0 * p4 + rate1.1;

        // Heat and work integrands evaluated at the same stage states.
        heat += h / 6.0 * (omega0 * f1 + 2.0 * omega_mid * (f2 + f3) + omega1 * f4);
        work += h / 6.0 * slope * (p + 2.0 * (p2 + p3) + p4);
        p += h / 6.0 * (f1 + 2.0 * (f2 + f3) + f4);

        omega0 = omega1;
        rate0 = rate1;
        if (i + 1) % k == 0 {
            let t = if i + 1 == n {
                ramp.duration
            } else {
                (i + 1) as f64 * h
            };
            samples.push(Sample {
                t,
                omega: omega1,
                p_e: p,
            });
        }
    }
    Run {
        samples,
        p,
        heat,
        work_on: work,
    }
}

/// Integrates one stroke from population `p0`.
///
/// The base step is `min(τ/2000, t_r/200)` with `t_r` from
/// [`relaxation_time`]; the run is repeated at half the step and accepted
/// once the final populations agree to `tol` (relative). Otherwise the step
/// keeps halving until [`MAX_STEPS`] is exceeded.
pub fn integrate_stroke(
    p0: f64,
    ramp: &Ramp,
    contact: &BathContact,
    tol: f64,
) -> Result<StrokeResult> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::invalid(format!(
            "initial population must lie in [0, 1], got {p0}"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    ramp.validate()?;
    contact.validate()?;

    let intervals = TRAJECTORY_SAMPLES - 1;
    let h_target = (ramp.duration / 2000.0).min(relaxation_time(ramp, contact) / 200.0);
    let n_min = (ramp.duration / h_target).ceil() as usize;
    let mut k = n_min.div_ceil(intervals).max(1);

    let mut coarse = rk4_run(p0, ramp, contact, k);
    loop {
        let steps = 2 * k * intervals;
        if steps > MAX_STEPS {
            return Err(Error::NoConvergence {
                achieved: f64::NAN,
                tol,
                steps: k * intervals,
            });
        }
        let fine = rk4_run(p0, ramp, contact, 2 * k);
        let change = (fine.p - coarse.p).abs();
        if change <= tol * fine.p.abs() + 1e-18 {
            return Ok(finish(p0, ramp, contact, fine, steps));
        }
        if 4 * k * intervals > MAX_STEPS {
            return Err(Error::NoConvergence {
                achieved: change / fine.p.abs(),
                tol,
                steps,
            });
        }
        coarse = fine;
        k *= 2;
    }
}

fn finish(p0: f64, ramp: &Ramp, contact: &BathContact, run: Run, steps: usize) -> StrokeResult {
    let entropy_change = two_level_entropy(run.p) - two_level_entropy(p0);
    StrokeResult {
        trajectory: run.samples,
        heat: run.heat,
        work_on: run.work_on,
        entropy_change,
        irreversible_entropy: entropy_change - run.heat / contact.temperature,
        p_start: p0,
        p_end: run.p,
        omega_start: ramp.omega_start,
        omega_end: ramp.omega_end,
        steps,
    }
}

/// Affine population map of a stroke, `p_end = g p_start + h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub g: f64,
    pub h: f64,
}

impl AffineMap {
    pub fn apply(&self, p: f64) -> f64 {
        self.g * p + self.h
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &AffineMap) -> AffineMap {
        AffineMap {
            g: self.g * first.g,
            h: self.g * first.h + self.h,
        }
    }
}

/// Builds the stroke's affine map from the two runs `p0 = 0` and `p0 = 1`.
pub fn stroke_affine_map(ramp: &Ramp, contact: &BathContact, tol: f64) -> Result<AffineMap> {
    let from_ground = integrate_stroke(0.0, ramp, contact, tol)?;
    let from_excited = integrate_stroke(1.0, ramp, contact, tol)?;
    Ok(AffineMap {
        g: from_excited.p_end - from_ground.p_end,
        h: from_ground.p_end,
    })
}
