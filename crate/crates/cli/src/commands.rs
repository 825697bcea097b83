use std::fmt;
use std::path::PathBuf;

use carnot_core::cycle::{run_cycle, run_ideal_cold_cycle, CycleSpec};
use carnot_core::dynamics::{
    equilibrium_population, integrate_stroke, BathContact, Ramp, MAX_STEPS, TRAJECTORY_SAMPLES,
};
use carnot_core::lowdiss::{high_t_coefficients, predict};
use carnot_core::model::{ColdCoupling, EngineParams};
use carnot_core::optimize::{emp_sweep, maximize_power_1d, OptimizeSettings, ScanGrid};
use carnot_core::{derive, DerivedParams};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{
    CommonArgs, CycleArgs, Duration, DurationGrid, EmpCurveArgs, LowdissArgs, PowerSweepArgs,
    ScalingArgs,
};
use crate::artifact::{num, write_run, Artifact};

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Solver(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<carnot_core::Error> for Failure {
    fn from(e: carnot_core::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

type Outcome = Result<Vec<PathBuf>, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// Parameter-file layout; every field optional so flags can fill the gaps.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    #[serde(rename = "T_h")]
    t_h: Option<f64>,
    #[serde(rename = "T_c")]
    t_c: Option<f64>,
    gamma_h: Option<f64>,
    gamma_c: Option<ColdCoupling>,
    omega_h_i: Option<f64>,
    omega_h_f: Option<f64>,
}

/// Engine parameters from `--params` and flags. A missing `T_c` is filled
/// from `t_c_fallback` when given.
fn resolve_params(
    c: &CommonArgs,
    t_c_fallback: Option<&dyn Fn(f64) -> f64>,
) -> Result<EngineParams, Failure> {
    let file = match &c.params {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None => ParamsFile::default(),
    };
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| invalid(format!("missing {flag}")));
    let t_h = need(c.t_h.or(file.t_h), "--T-h")?;
    let t_c = match (c.t_c.or(file.t_c), t_c_fallback) {
        (Some(t), _) => t,
        (None, Some(fill)) => fill(t_h),
        (None, None) => return Err(invalid("missing --T-c")),
    };
    let params = EngineParams {
        t_h,
        t_c,
        gamma_h: need(c.gamma_h.or(file.gamma_h), "--gamma-h")?,
        gamma_c: c.gamma_c.or(file.gamma_c).unwrap_or(ColdCoupling::Infinite),
        omega_h_i: need(c.omega_i.or(file.omega_h_i), "--omega-i")?,
        omega_h_f: need(c.omega_f.or(file.omega_h_f), "--omega-f")?,
    };
    params.validate()?;
    if !(c.tol > 0.0 && c.tol < 1e-2) {
        return Err(invalid(format!(
            "--tol must lie in (0, 0.01), got {}",
            c.tol
        )));
    }
    if !(c.margin > 0.0 && c.margin <= 1.0) {
        return Err(invalid(format!(
            "--margin must lie in (0, 1], got {}",
            c.margin
        )));
    }
    Ok(params)
}

fn inputs(c: &CommonArgs, params: &EngineParams, d: &DerivedParams, extra: Value) -> Value {
    json!({
        "params": params,
        "derived": d,
        "integrator": { "tol": c.tol, "max_steps": MAX_STEPS, "trajectory_samples": TRAJECTORY_SAMPLES },
        "margin": c.margin,
        "cold_limit": c.cold_limit,
        "arguments": extra,
    })
}

fn scan_grid(g: &DurationGrid, t_r: f64) -> Result<ScanGrid, Failure> {
    Ok(ScanGrid::new(g.lo.resolve(t_r), g.hi.resolve(t_r), g.n)?)
}

fn settings(c: &CommonArgs, duration_tol: f64) -> OptimizeSettings {
    OptimizeSettings {
        tol: duration_tol,
        integrator_tol: c.tol,
        cold_limit: c.cold_limit,
    }
}

fn save(c: &CommonArgs, prefix: &str, inputs: Value, artifacts: &[Artifact]) -> Outcome {
    write_run(&c.out_dir, prefix, inputs, artifacts)
        .map_err(|e| Failure::Io(format!("{}: {e}", c.out_dir.display())))
}

pub fn cycle(a: &CycleArgs) -> Outcome {
    let c = &a.common;
    let params = resolve_params(c, None)?;
    let d = derive(&params)?;
    let resolve = |v: &[Duration]| v.iter().map(|t| t.resolve(d.t_r)).collect::<Vec<_>>();
    let taus_h = resolve(&a.tau_h);
    let taus_c: Vec<Option<f64>> = match (params.gamma_c, a.tau_c.len()) {
        (ColdCoupling::Infinite, 0) => vec![None; taus_h.len()],
        (ColdCoupling::Infinite, _) => {
            return Err(invalid("--tau-c only applies to a finite --gamma-c"))
        }
        (ColdCoupling::Finite(_), 0) => return Err(invalid("finite --gamma-c needs --tau-c")),
        (ColdCoupling::Finite(_), 1) => vec![Some(a.tau_c[0].resolve(d.t_r)); taus_h.len()],
        (ColdCoupling::Finite(_), n) if n == taus_h.len() => {
            resolve(&a.tau_c).into_iter().map(Some).collect()
        }
        (ColdCoupling::Finite(_), n) => {
            return Err(invalid(format!(
                "--tau-c has {n} values, expected 1 or {}",
                taus_h.len()
            )))
        }
    };

    let mut artifacts = Vec::new();
    for (i, (&tau_h, &tau_c)) in taus_h.iter().zip(&taus_c).enumerate() {
        let spec = CycleSpec {
            tau_c,
            ..CycleSpec::ideal(params, tau_h)
        }
        .with_tol(c.tol)
        .with_cold_limit(c.cold_limit);
        let r = run_cycle(&spec)?;
        let row = |stroke: &str, s: &carnot_core::dynamics::Sample| {
            format!("{stroke},{},{},{}", num(s.t), num(s.omega), num(s.p_e))
        };
        let rows = r
            .hot
            .trajectory
            .iter()
            .map(|s| row("hot", s))
            .chain(r.cold.trajectory().iter().map(|s| row("cold", s)))
            .collect();
        artifacts.push(Artifact::csv(
            format!("cycle_{i:02}_trajectory.csv"),
            "stroke,t,omega,p_e",
            rows,
        ));
        artifacts.push(Artifact::json(
            format!("cycle_{i:02}_summary.json"),
            json!({
                "tau_h": tau_h,
                "tau_h_over_tr": tau_h / d.t_r,
                "tau_c": tau_c,
                "Q_h": r.q_h,
                "Q_c": r.q_c,
                "W": r.work,
                "P": r.power,
                "eta": r.efficiency,
                "eta_C": d.eta_c,
                "S_ir_h": r.s_ir_h,
                "S_ir_c": r.s_ir_c,
                "status": r.status,
                "closure_error": r.closure_error(),
            }),
        ));
    }
    let extra = json!({ "tau_h": taus_h, "tau_c": taus_c });
    save(c, "cycle", inputs(c, &params, &d, extra), &artifacts)
}

pub fn power_sweep(a: &PowerSweepArgs) -> Outcome {
    let c = &a.common;
    let params = resolve_params(c, None)?;
    let d = derive(&params)?;
    if !params.gamma_c.is_infinite() {
        return Err(invalid("power-sweep needs --gamma-c inf"));
    }
    params.require_engine_orientation()?;
    let grid = scan_grid(&a.grid, d.t_r)?;
    let s = settings(c, a.duration_tol);
    let opt = maximize_power_1d(&params, &grid, &s)?;

    let mut rows = Vec::with_capacity(grid.n);
    for tau in grid.points() {
        let r = run_ideal_cold_cycle(
            &CycleSpec::ideal(params, tau)
                .with_tol(c.tol)
                .with_cold_limit(c.cold_limit),
        )?;
        rows.push(format!(
            "{},{},{},{},{}",
            num(tau),
            num(tau / d.t_r),
            num(r.power),
            num(r.power / opt.p_max),
            num(r.efficiency)
        ));
    }
    let artifacts = [
        Artifact::csv("power_sweep.csv", "tau_h,tau_h_over_tr,P,P_norm,eta", rows),
        Artifact::json(
            "power_sweep_optimum.json",
            json!({
                "tau_h_star": opt.tau_h_star,
                "tau_h_star_over_tr": opt.tau_h_star / d.t_r,
                "P_max": opt.p_max,
                "eta_MP": opt.eta_mp,
                "eta_C": d.eta_c,
                "at_scan_floor": opt.at_scan_floor,
                "at_scan_ceiling": opt.at_scan_ceiling,
            }),
        ),
    ];
    let extra = json!({ "grid": { "lo": grid.lo, "hi": grid.hi, "n": grid.n }, "duration_tol": a.duration_tol });
    save(c, "power_sweep", inputs(c, &params, &d, extra), &artifacts)
}

pub fn emp_curve(a: &EmpCurveArgs) -> Outcome {
    let c = &a.common;
    let etas = &a.eta_c.0;
    let first = etas[0];
    let params = resolve_params(c, Some(&|t_h| t_h * (1.0 - first)))?;
    let d = derive(&params)?;
    if !params.gamma_c.is_infinite() {
        return Err(invalid("emp-curve needs --gamma-c inf"));
    }
    params.require_engine_orientation()?;
    let grid = scan_grid(&a.grid, d.t_r)?;
    let sweep = emp_sweep(&params, etas, &grid, c.margin, &settings(c, a.duration_tol))?;
    for (eta, reason) in &sweep.skipped {
        eprintln!("carnot: skipped eta_C = {eta}: {reason}");
    }

    let flag = |b: bool| if b { "true" } else { "false" };
    let rows = sweep
        .points
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                num(p.eta_c),
                num(p.tau_h_star),
                num(p.tau_h_star_over_tr),
                num(p.p_max),
                num(p.eta_mp),
                num(p.eta_minus),
                num(p.eta_plus),
                flag(p.in_regime),
                flag(p.exceeded_upper_bound)
            )
        })
        .collect();
    let skipped: Vec<Value> = sweep
        .skipped
        .iter()
        .map(|(eta, why)| json!({ "eta_C": eta, "reason": why }))
        .collect();
    let artifacts = [
        Artifact::csv(
            "emp_curve.csv",
            "eta_C,tau_h_star,tau_h_star_over_tr,P_max,eta_MP,eta_minus,eta_plus,in_regime,exceeded_upper_bound",
            rows,
        ),
        Artifact::json(
            "emp_curve_summary.json",
            json!({
                "delta": d.delta,
                "points": sweep.points.len(),
                "exceeded_upper_bound": sweep.points.iter().filter(|p| p.exceeded_upper_bound).count(),
                "in_regime": sweep.points.iter().filter(|p| p.in_regime).count(),
                "at_scan_floor": sweep.points.iter().filter(|p| p.at_scan_floor).count(),
                "skipped": skipped,
            }),
        ),
    ];
    let extra = json!({
        "eta_C": etas,
        "grid": { "lo": grid.lo, "hi": grid.hi, "n": grid.n },
        "duration_tol": a.duration_tol,
    });
    save(c, "emp_curve", inputs(c, &params, &d, extra), &artifacts)
}

pub fn scaling(a: &ScalingArgs) -> Outcome {
    let c = &a.common;
    let params = resolve_params(c, None)?;
    let d = derive(&params)?;
    let grid = scan_grid(&a.tau, d.t_r)?;
    let contact = BathContact::new(params.t_h, params.gamma_h)?;
    let p0 = equilibrium_population(params.omega_h_i, params.t_h)?;

    let mut rows = Vec::with_capacity(grid.n);
    let mut top = Vec::new();
    for tau in grid.points() {
        let ramp = Ramp::new(params.omega_h_i, params.omega_h_f, tau)?;
        let s_ir = integrate_stroke(p0, &ramp, &contact, c.tol)?.irreversible_entropy;
        rows.push(format!(
            "{},{},{},{}",
            num(tau),
            num(tau / d.t_r),
            num(s_ir),
            num(s_ir * tau)
        ));
        if tau >= grid.hi / 10.0 {
            top.push(s_ir * tau);
        }
    }
    let sigma_fit = top.iter().sum::<f64>() / top.len() as f64;
    let sigma_analytic = high_t_coefficients(&params)?.inputs.sigma_h;
    let artifacts = [
        Artifact::csv("scaling.csv", "tau,tau_over_tr,S_ir,S_ir_times_tau", rows),
        Artifact::json(
            "scaling.json",
            json!({
                "sigma_fit": sigma_fit,
                "sigma_analytic": sigma_analytic,
                "ratio": sigma_fit / sigma_analytic,
                "fit_window": [grid.hi / 10.0, grid.hi],
                "fit_points": top.len(),
            }),
        ),
    ];
    let extra = json!({ "tau": { "lo": grid.lo, "hi": grid.hi, "n": grid.n } });
    save(c, "scaling", inputs(c, &params, &d, extra), &artifacts)
}

pub fn lowdiss(a: &LowdissArgs) -> Outcome {
    let c = &a.common;
    let params = resolve_params(c, None)?;
    let d = derive(&params)?;
    let p = predict(&params, c.margin)?;
    let report = json!({
        "high_T_coefficients": p.coefficients,
        "ld_optimal_times": { "tau_h_star": p.emp.tau_h_star, "tau_c_star": p.emp.tau_c_star },
        "ld_dimensionless_times": { "tau_tilde_h_star": p.tau_tilde_h_star, "tau_tilde_c_star": p.tau_tilde_c_star },
        "ld_emp": p.emp,
        "regime_check": {
            "eta_C": d.eta_c,
            "threshold": p.regime_threshold,
            "margin": p.margin,
            "in_regime": p.in_regime,
        },
    });
    save(
        c,
        "lowdiss",
        inputs(c, &params, &d, json!({})),
        &[Artifact::json("lowdiss.json", report)],
    )
}
