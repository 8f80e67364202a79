//! Maximum-principle apparatus for the optimal-planning problem with linear
//! utility `U(z) = z`.
//!
//! With linear utility the costate equations decouple from the state, so the
//! optimal saving per capital obeys a scalar Riccati equation driven by the
//! closed-form costate `y_p(t)`. The state `(r, p)` is recovered afterwards
//! from the equations of motion.

mod asymptotic;
mod calibrate;
mod costate;
mod solve;
mod welfare;

pub use asymptotic::{
    asymptotic_capital, asymptotic_fixed_points, asymptotic_omega, asymptotic_rhs,
    AsymptoticSolution, FixedPoints,
};
pub use calibrate::{calibrate_yp0, BoundaryHit, BoundaryPolicy, Calibration, CalibrationOptions};
pub use costate::{
    chi_over_yp, costate_rhs, costate_root, costate_yp, omega_from_costates, riccati_rhs,
    stationarity_residual, transversal_yp0, CostatePoint, SINGULAR_COSTATE_TOL,
};
pub use solve::{solve_omega_path, solve_optimal_trajectory, Trajectory};
pub use welfare::{welfare, WelfareResult};

use crate::model::ModelError;
use crate::ode::OdeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error(
        "discount rate equals effectiveness rate (d = mu = {0}); costate closed form is singular"
    )]
    SingularDiscount(f64),
    #[error("singular costate y_p={y_p} at t={t}; control undefined")]
    SingularCostate { t: f64, y_p: f64 },
    #[error("infeasible control: negative consumption per man {psi} at t={t}")]
    InfeasibleConsumption { t: f64, psi: f64 },
    #[error("state left the model domain at t={t}: {reason}")]
    StateOutOfDomain { t: f64, reason: String },
    #[error("{value} is outside the open interval ({lower}, {upper}) between the fixed points")]
    OutsideFixedPoints { value: f64, lower: f64, upper: f64 },
    #[error("no bracketing minimum of the calibration objective on [{lower}, {upper}]")]
    NoBracket { lower: f64, upper: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integration diverged: {0}")]
    Diverged(OdeError),
    #[error(transparent)]
    Ode(OdeError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<OdeError> for ControlError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::NonFiniteRhs { .. } | OdeError::NonFiniteState { .. } => {
                ControlError::Diverged(e)
            }
            other => ControlError::Ode(other),
        }
    }
}

impl ControlError {
    /// Time at which the failure occurred, when it is tied to one.
    pub fn time(&self) -> Option<f64> {
        match self {
            ControlError::SingularCostate { t, .. }
            | ControlError::InfeasibleConsumption { t, .. }
            | ControlError::StateOutOfDomain { t, .. } => Some(*t),
            ControlError::Diverged(OdeError::NonFiniteRhs { t, .. })
            | ControlError::Diverged(OdeError::NonFiniteState { t, .. }) => Some(*t),
            _ => None,
        }
    }
}
