//! Finite-time Carnot-like cycle of a two-level working substance.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: physical parameters and the quantities derived from them
//!   (reduced units, `ħ = k_B = 1`).
//! * [`dynamics`]: the single-population master equation along a linear
//!   frequency ramp, with heat/work/entropy bookkeeping.
//! * [`cycle`]: four-stroke cycles in the ideal-cold-bath limit and in the
//!   finite-coupling limit-cycle mode.
//! * [`lowdiss`]: the analytic low-dissipation model.
//! * [`optimize`]: power maximisation over stroke durations and EMP sweeps.

pub mod cycle;
pub mod dynamics;
pub mod error;
pub mod lowdiss;
pub mod model;
pub mod optimize;

pub use error::{Error, Result};
pub use model::{derive, ColdCoupling, DerivedParams, EngineParams};
