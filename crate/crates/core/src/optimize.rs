//! Power maximisation over stroke durations.
//!
//! `P(τ_h)` is not unimodal over the whole duration axis (short strokes can
//! give negative work), so every search starts with a coarse log-spaced scan
//! that picks the best bracket, then refines it with golden-section search
//! in `ln τ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{
    run_finite_cycle, run_ideal_cold_cycle, ColdLimit, CycleResult, CycleSpec, DEFAULT_CLOSURE_TOL,
    DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::lowdiss::{eta_minus, eta_plus, regime_check};
use crate::model::{derive, EngineParams};

/// Default relative tolerance on optimal durations.
pub const DEFAULT_DURATION_TOL: f64 = 1e-4;

/// Pass cap for the alternating 2-D search.
pub const MAX_PASSES: usize = 100;

/// Log-spaced duration grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl ScanGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::invalid(format!(
                "scan grid needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        if n < 8 {
            return Err(Error::invalid(format!(
                "scan grid needs at least 8 points, got {n}"
            )));
        }
        Ok(ScanGrid { lo, hi, n })
    }

    /// `[0.05, 400] t_r` with 64 points.
    pub fn default_for(t_r: f64) -> Self {
        ScanGrid {
            lo: 0.05 * t_r,
            hi: 400.0 * t_r,
            n: 64,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..self.n)
            .map(|i| match i {
                0 => self.lo,
                i if i + 1 == self.n => self.hi,
                i => (a + (b - a) * i as f64 / (self.n - 1) as f64).exp(),
            })
            .collect()
    }
}

/// Knobs shared by the optimisers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSettings {
    /// Relative tolerance on the optimal durations.
    pub tol: f64,
    /// Relative tolerance handed to the stroke integrator.
    pub integrator_tol: f64,
    pub cold_limit: ColdLimit,
}

impl Default for OptimizeSettings {
    fn default() -> Self {
        OptimizeSettings {
            tol: DEFAULT_DURATION_TOL,
            integrator_tol: DEFAULT_TOL,
            cold_limit: ColdLimit::default(),
        }
    }
}

impl OptimizeSettings {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::invalid(format!(
                "duration tolerance must lie in (0, 1), got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximisation of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `width`. Returns the best point seen.
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    while (b - a).abs() > width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            if fc > best_f {
                (best_x, best_f) = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            if fd > best_f {
                (best_x, best_f) = (d, fd);
            }
        }
    }
    Ok((best_x, best_f))
}

/// Scans `grid` then refines around the best engine point. Returns
/// `(τ*, P*, hit_floor, hit_ceiling)`.
fn scan_and_refine<F>(f: &F, grid: &ScanGrid, width: f64) -> Result<(f64, f64, bool, bool)>
where
    F: Fn(f64) -> Result<(f64, bool)> + Sync,
{
    let xs = grid.points();
    let values = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .filter(|(_, (_, engine))| *engine)
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, _)| i)
        .ok_or(Error::NoEngineRegime(xs.len()))?;

    let lo = xs[best.saturating_sub(1)].ln();
    let hi = xs[(best + 1).min(xs.len() - 1)].ln();
    let (u, p) = golden_section_max(|u| f(u.exp()).map(|(p, _)| p), lo, hi, width)?;
    let (x, p) = if p >= values[best].0 {
        (u.exp(), p)
    } else {
        (xs[best], values[best].0)
    };
    let floor = (x / grid.lo).ln().abs() <= width;
    let ceiling = (x / grid.hi).ln().abs() <= width;
    Ok((x, p, floor, ceiling))
}

/// Result of a one-dimensional power maximisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptimum {
    pub tau_h_star: f64,
    #[serde(rename = "P_max")]
    pub p_max: f64,
    #[serde(rename = "eta_MP")]
    pub eta_mp: f64,
    /// The optimum sits on the lower end of the scan range: the supremum
    /// lies at or below `grid.lo`.
    pub at_scan_floor: bool,
    pub at_scan_ceiling: bool,
}

fn ideal_power(
    params: &EngineParams,
    settings: &OptimizeSettings,
    tau_h: f64,
) -> Result<CycleResult> {
    let spec = CycleSpec::ideal(*params, tau_h)
        .with_cold_limit(settings.cold_limit)
        .with_tol(settings.integrator_tol);
    run_ideal_cold_cycle(&spec)
}

/// Maximises the ideal-cold-bath cycle power over `τ_h`.
pub fn maximize_power_1d(
    params: &EngineParams,
    grid: &ScanGrid,
    settings: &OptimizeSettings,
) -> Result<PowerOptimum> {
    settings.validate()?;
    params.require_engine_orientation()?;
    if !params.gamma_c.is_infinite() {
        return Err(Error::invalid("1-D optimisation needs gamma_c = inf"));
    }
    ScanGrid::new(grid.lo, grid.hi, grid.n)?;
    let f = |tau: f64| ideal_power(params, settings, tau).map(|r| (r.power, r.is_engine()));
    let (tau, p_max, at_scan_floor, at_scan_ceiling) = scan_and_refine(&f, grid, settings.tol)?;
    let eta_mp = ideal_power(params, settings, tau)?.efficiency;
    Ok(PowerOptimum {
        tau_h_star: tau,
        p_max,
        eta_mp,
        at_scan_floor,
        at_scan_ceiling,
    })
}

/// Result of the two-duration maximisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptimum2d {
    pub tau_h_star: f64,
    pub tau_c_star: f64,
    #[serde(rename = "P_max")]
    pub p_max: f64,
    #[serde(rename = "eta_MP")]
    pub eta_mp: f64,
    pub passes: usize,
    /// False when the pass cap was reached; the fields then hold the last
    /// iterate.
    pub converged: bool,
}

/// Alternating golden-section maximisation of the finite-coupling
/// limit-cycle power over `(τ_h, τ_c)`.
pub fn maximize_power_2d(
    params: &EngineParams,
    grid_h: &ScanGrid,
    grid_c: &ScanGrid,
    settings: &OptimizeSettings,
) -> Result<PowerOptimum2d> {
    settings.validate()?;
    params.require_engine_orientation()?;
    if params.gamma_c.is_infinite() {
        return Err(Error::invalid("2-D optimisation needs a finite gamma_c"));
    }
    ScanGrid::new(grid_h.lo, grid_h.hi, grid_h.n)?;
    ScanGrid::new(grid_c.lo, grid_c.hi, grid_c.n)?;
    let cycle = |tau_h: f64, tau_c: f64| {
        let spec = CycleSpec::finite(*params, tau_h, tau_c).with_tol(settings.integrator_tol);
        run_finite_cycle(&spec, DEFAULT_CLOSURE_TOL)
    };
    let width = settings.tol / 10.0;

    // Seed along the diagonal that maps grid_h onto grid_c in log space.
    let slope = (grid_c.hi / grid_c.lo).ln() / (grid_h.hi / grid_h.lo).ln();
    let partner = |t: f64| grid_c.lo * ((t / grid_h.lo).ln() * slope).exp();
    let (mut tau_h, ..) = scan_and_refine(
        &|t| cycle(t, partner(t)).map(|r| (r.power, r.is_engine())),
        grid_h,
        width,
    )?;
    let (mut tau_c, ..) = scan_and_refine(
        &|t| cycle(tau_h, t).map(|r| (r.power, r.is_engine())),
        grid_c,
        width,
    )?;

    let mut passes = 1;
    let mut converged = false;
    while passes < MAX_PASSES {
        passes += 1;
        let window = |x: f64, g: &ScanGrid| ((x / 4.0).max(g.lo).ln(), (x * 4.0).min(g.hi).ln());

        let (a, b) = window(tau_h, grid_h);
        let (u, _) = golden_section_max(|u| cycle(u.exp(), tau_c).map(|r| r.power), a, b, width)?;
        let new_h = u.exp();
        let (a, b) = window(tau_c, grid_c);
        let (u, _) = golden_section_max(|u| cycle(new_h, u.exp()).map(|r| r.power), a, b, width)?;
        let new_c = u.exp();

        let moved_h = (new_h / tau_h).ln().abs();
        let moved_c = (new_c / tau_c).ln().abs();
        tau_h = new_h;
        tau_c = new_c;
        if moved_h < settings.tol && moved_c < settings.tol {
            converged = true;
            break;
        }
    }
    let r = cycle(tau_h, tau_c)?;
    if !r.is_engine() {
        return Err(Error::NoEngineRegime(grid_h.n));
    }
    Ok(PowerOptimum2d {
        tau_h_star: tau_h,
        tau_c_star: tau_c,
        p_max: r.power,
        eta_mp: r.efficiency,
        passes,
        converged,
    })
}

/// One row of an EMP sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpPoint {
    #[serde(rename = "eta_C")]
    pub eta_c: f64,
    #[serde(rename = "T_c")]
    pub t_c: f64,
    pub tau_h_star: f64,
    pub tau_h_star_over_tr: f64,
    #[serde(rename = "P_max")]
    pub p_max: f64,
    #[serde(rename = "eta_MP")]
    pub eta_mp: f64,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub in_regime: bool,
    pub exceeded_upper_bound: bool,
    pub at_scan_floor: bool,
}

/// Sweep result, sorted by `η_C`. Points without an engine regime are
/// listed in `skipped` with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpSweep {
    pub points: Vec<EmpPoint>,
    pub skipped: Vec<(f64, String)>,
}

/// Exact EMP for each Carnot efficiency (`T_c = T_h (1 - η_C)`), evaluated
/// in parallel.
pub fn emp_sweep(
    base: &EngineParams,
    eta_c_values: &[f64],
    grid: &ScanGrid,
    margin: f64,
    settings: &OptimizeSettings,
) -> Result<EmpSweep> {
    let engines = eta_c_values
        .iter()
        .map(|&eta| base.with_carnot_efficiency(eta).map(|p| (eta, p)))
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = engines;
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let t_r = derive(
        &sorted
            .first()
            .ok_or_else(|| Error::invalid("empty eta_C list"))?
            .1,
    )?
    .t_r;

    let outcomes: Vec<Result<std::result::Result<EmpPoint, (f64, String)>>> = sorted
        .par_iter()
        .map(|&(eta_c, params)| {
            let (_, in_regime) = regime_check(&params, margin)?;
            match maximize_power_1d(&params, grid, settings) {
                Ok(opt) => Ok(Ok(EmpPoint {
                    eta_c,
                    t_c: params.t_c,
                    tau_h_star: opt.tau_h_star,
                    tau_h_star_over_tr: opt.tau_h_star / t_r,
                    p_max: opt.p_max,
                    eta_mp: opt.eta_mp,
                    eta_minus: eta_minus(eta_c),
                    eta_plus: eta_plus(eta_c),
                    in_regime,
                    exceeded_upper_bound: opt.eta_mp > eta_plus(eta_c),
                    at_scan_floor: opt.at_scan_floor,
                })),
                Err(e @ Error::NoEngineRegime(_)) => Ok(Err((eta_c, e.to_string()))),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut sweep = EmpSweep {
        points: Vec::new(),
        skipped: Vec::new(),
    };
    for outcome in outcomes {
        match outcome? {
            Ok(point) => sweep.points.push(point),
            Err(skip) => sweep.skipped.push(skip),
        }
    }
    Ok(sweep)
}
