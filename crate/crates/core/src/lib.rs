//! Growth model with effectiveness and its optimal-planning solution.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: balance identity, effectiveness index and the equations of
//!   motion for capital per man `r` and output per man `p`.
//! - [`ode`]: fixed-step classical Runge-Kutta integration.
//! - [`control`]: costate dynamics, the control formula, the Riccati equation
//!   for saving per capital `omega`, asymptotic closed forms, welfare and
//!   initial-costate calibration.
//! - [`scenario`]: yearly projections, base-year indices, table audit and
//!   CSV/JSON export.
//! - [`cli`]: scenario configs and the command-line dispatcher.

pub mod cli;
pub mod control;
pub mod error;
pub mod model;
pub mod ode;
pub mod scenario;

pub use error::{Error, Result};
pub use model::{MacroState, ModelParams};
