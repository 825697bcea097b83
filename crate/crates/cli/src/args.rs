use std::path::PathBuf;
use std::str::FromStr;

use carnot_core::cycle::{ColdLimit, DEFAULT_TOL};
use carnot_core::lowdiss::DEFAULT_MARGIN;
use carnot_core::model::ColdCoupling;
use carnot_core::optimize::DEFAULT_DURATION_TOL;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "carnot",
    version,
    about = "Finite-time Carnot-like cycles of a driven two-level engine"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate full cycles; writes trajectories and a summary per hot-stroke duration.
    Cycle(CycleArgs),
    /// Power and efficiency over a grid of hot-stroke durations.
    PowerSweep(PowerSweepArgs),
    /// Efficiency at maximum power as a function of the Carnot efficiency.
    EmpCurve(EmpCurveArgs),
    /// Irreversible entropy of the hot stroke against its duration.
    Scaling(ScalingArgs),
    /// Low-dissipation predictions for one engine.
    Lowdiss(LowdissArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON parameter file (`T_h`, `T_c`, `gamma_h`, `gamma_c`, `omega_h_i`, `omega_h_f`);
    /// flags override its fields.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long = "T-h")]
    pub t_h: Option<f64>,
    #[arg(long = "T-c")]
    pub t_c: Option<f64>,
    #[arg(long)]
    pub gamma_h: Option<f64>,
    /// Cold-bath coupling, a number or "inf" (default inf).
    #[arg(long)]
    pub gamma_c: Option<ColdCoupling>,
    /// Hot-stroke initial level spacing.
    #[arg(long)]
    pub omega_i: Option<f64>,
    /// Hot-stroke final level spacing.
    #[arg(long)]
    pub omega_f: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Relative tolerance of the stroke integrator.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Low-dissipation regime margin.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    /// Cold stroke for gamma_c = inf: matched | relaxation.
    #[arg(long, default_value_t = ColdLimit::Matched)]
    pub cold_limit: ColdLimit,
}

#[derive(Debug, Args)]
pub struct CycleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Hot-stroke durations, e.g. "2tr,10tr,0.5".
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau_h: Vec<Duration>,
    /// Cold-stroke durations for finite gamma_c; one value or one per --tau-h.
    #[arg(long, value_delimiter = ',')]
    pub tau_c: Vec<Duration>,
}

#[derive(Debug, Args)]
pub struct PowerSweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Log-spaced grid "lo:hi:n" of hot-stroke durations.
    #[arg(long, default_value = "0.05tr:400tr:64")]
    pub grid: DurationGrid,
    /// Relative tolerance on the optimal duration.
    #[arg(long, default_value_t = DEFAULT_DURATION_TOL)]
    pub duration_tol: f64,
}

#[derive(Debug, Args)]
pub struct EmpCurveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Carnot efficiencies: linear range "lo:hi:n" or a comma list.
    #[arg(long, default_value = "0.02:0.6:30")]
    pub eta_c: EtaValues,
    /// Log-spaced scan grid "lo:hi:n" for the optimiser.
    #[arg(long, default_value = "0.05tr:400tr:64")]
    pub grid: DurationGrid,
    #[arg(long, default_value_t = DEFAULT_DURATION_TOL)]
    pub duration_tol: f64,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Log-spaced grid "lo:hi:n" of stroke durations.
    #[arg(long, default_value = "0.05tr:400tr:48")]
    pub tau: DurationGrid,
}

#[derive(Debug, Args)]
pub struct LowdissArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

/// A duration, absolute or in units of the hot-bath relaxation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Duration {
    Absolute(f64),
    RelaxationTimes(f64),
}

impl Duration {
    pub fn resolve(self, t_r: f64) -> f64 {
        match self {
            Duration::Absolute(x) => x,
            Duration::RelaxationTimes(m) => m * t_r,
        }
    }
}

impl FromStr for Duration {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (number, unit): (&str, fn(f64) -> Duration) = match s.strip_suffix("tr") {
            Some(rest) => (rest, Duration::RelaxationTimes),
            None => (s, Duration::Absolute),
        };
        let x: f64 = number
            .trim()
            .parse()
            .map_err(|_| format!("bad duration {s:?}"))?;
        if !(x.is_finite() && x > 0.0) {
            return Err(format!("duration must be positive, got {s:?}"));
        }
        Ok(unit(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationGrid {
    pub lo: Duration,
    pub hi: Duration,
    pub n: usize,
}

impl FromStr for DurationGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("grid must look like lo:hi:n, got {s:?}"));
        };
        let n = n
            .trim()
            .parse()
            .map_err(|_| format!("bad grid size {n:?}"))?;
        Ok(DurationGrid {
            lo: lo.parse()?,
            hi: hi.parse()?,
            n,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaValues(pub Vec<f64>);

impl FromStr for EtaValues {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad efficiency {x:?}"))
        };
        let values = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(format!("range must look like lo:hi:n, got {s:?}"));
            };
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|_| format!("bad count {n:?}"))?;
            match n {
                0 => return Err("range needs at least one point".into()),
                1 => vec![lo],
                _ => (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .collect(),
            }
        } else {
            s.split(',').map(num).collect::<Result<_, _>>()?
        };
        if let Some(bad) = values.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(format!("Carnot efficiencies must lie in (0, 1), got {bad}"));
        }
        Ok(EtaValues(values))
    }
}
