//! Command-line front end.

mod check;
mod config;
mod run;

pub use check::{run_checks, CheckOutcome};
pub use config::{
    check_step, load_config, parse_config, ConfigError, InitialConfig, OutputConfig,
    ScenarioConfig, SolverConfig, Yp0Choice, BALANCE_TOL,
};
pub use run::{run, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
