use super::costate::{chi_over_yp, costate_root, riccati_rhs, CostatePoint};
use super::ControlError;
use crate::model::{model_rhs, MacroState, ModelError, ModelParams};
use crate::ode::{try_integrate, try_integrate_with, IntegrationGrid};

/// Ordered `(t, r, p, omega)` samples. Consumption per man is derived from
/// each sample on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    /// Initial costate of output per man, when the control came from the
    /// Riccati equation.
    pub yp0: Option<f64>,
    /// Integration step in years.
    pub step: f64,
    pub samples: Vec<MacroState>,
}

impl Trajectory {
    /// Build a trajectory from externally produced samples. Times must be
    /// strictly increasing and every sample must be a valid state.
    pub fn from_samples(
        params: ModelParams,
        step: f64,
        samples: Vec<MacroState>,
    ) -> Result<Self, ControlError> {
        if samples.len() < 2 {
            return Err(ControlError::InvalidInput(
                "a trajectory needs at least two samples".into(),
            ));
        }
        for s in &samples {
            s.validate()?;
        }
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(ControlError::InvalidInput(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        Ok(Trajectory {
            params,
            yp0: None,
            step,
            samples,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t) - self.samples.first().map_or(0.0, |s| s.t)
    }

    /// Sample at an integer year offset from the start, if the grid hits it.
    pub fn at_year(&self, year: usize) -> Option<&MacroState> {
        let per_year = (1.0 / self.step).round() as usize;
        self.samples
            .get(year * per_year)
            .filter(|s| (s.t - self.samples[0].t - year as f64).abs() < 1e-9)
    }

    pub fn chi_over_yp(&self, index: usize) -> Option<f64> {
        let yp0 = self.yp0?;
        let s = self.samples.get(index)?;
        chi_over_yp(s.t, yp0, &self.params).ok()
    }

    /// Costates consistent with sample `index`, with `y_r` reconstructed from
    /// the stationarity condition.
    pub fn costate_at(&self, index: usize) -> Option<CostatePoint> {
        let yp0 = self.yp0?;
        let s = self.samples.get(index)?;
        CostatePoint::on_control(s.t, s.omega, yp0, &self.params).ok()
    }
}

fn state_error(e: ModelError, state: &MacroState) -> ControlError {
    if state.psi() < 0.0 && state.p > 0.0 && state.r > 0.0 {
        ControlError::InfeasibleConsumption {
            t: state.t,
            psi: state.psi(),
        }
    } else {
        match e {
            ModelError::InvalidState { t, reason } => ControlError::StateOutOfDomain { t, reason },
            other => ControlError::Model(other),
        }
    }
}

fn check_horizon(horizon: f64, step: f64) -> Result<(), ControlError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(ControlError::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    if !(horizon.is_finite() && horizon >= step) {
        return Err(ControlError::InvalidInput(format!(
            "horizon {horizon} must be at least one step ({step})"
        )));
    }
    Ok(())
}

/// Reject initial costates whose `y_p` changes sign within the horizon.
fn check_costate_sign(yp0: f64, horizon: f64, params: &ModelParams) -> Result<(), ControlError> {
    chi_over_yp(0.0, yp0, params)?;
    match costate_root(yp0, params)? {
        Some(t) if t <= horizon => Err(ControlError::SingularCostate { t, y_p: 0.0 }),
        _ => Ok(()),
    }
}

/// Integrate the Riccati equation for saving per capital alone.
pub fn solve_omega_path(
    params: &ModelParams,
    omega0: f64,
    yp0: f64,
    horizon: f64,
    step: f64,
) -> Result<IntegrationGrid<1>, ControlError> {
    check_horizon(horizon, step)?;
    check_costate_sign(yp0, horizon, params)?;
    try_integrate(
        |t, y: &[f64; 1]| Ok::<_, ControlError>([riccati_rhs(t, y[0], yp0, params)?]),
        0.0,
        [omega0],
        horizon,
        step,
    )
}

/// Optimal trajectory from `initial` (at `t = 0`) with initial costate
/// `yp0`.
///
/// Saving per capital follows the Riccati equation and drives the equations
/// of motion for `(r, p)`. The three equations are integrated together so
/// every stage sees the control at the same time as the state. The run aborts
/// on negative consumption, a singular costate or a non-finite value.
pub fn solve_optimal_trajectory(
    params: &ModelParams,
    initial: &MacroState,
    yp0: f64,
    horizon: f64,
    step: f64,
) -> Result<Trajectory, ControlError> {
    check_horizon(horizon, step)?;
    initial.validate()?;
    check_costate_sign(yp0, horizon, params)?;
    let rhs = |t: f64, y: &[f64; 3]| -> Result<[f64; 3], ControlError> {
        let omega_dot = riccati_rhs(t, y[0], yp0, params)?;
        let state = MacroState {
            t,
            r: y[1],
            p: y[2],
            omega: y[0],
        };
        let (r_dot, p_dot) = model_rhs(&state, y[0], params);
        Ok([omega_dot, r_dot, p_dot])
    };
    let accept = |t: f64, y: &[f64; 3]| -> Result<(), ControlError> {
        let state = MacroState {
            t,
            r: y[1],
            p: y[2],
            omega: y[0],
        };
        state.validate().map_err(|e| state_error(e, &state))
    };
    let grid = try_integrate_with(
        rhs,
        0.0,
        [initial.omega, initial.r, initial.p],
        horizon,
        step,
        accept,
    )?;
    let samples = grid
        .samples
        .iter()
        .map(|&(t, [omega, r, p])| MacroState { t, r, p, omega })
        .collect();
    Ok(Trajectory {
        params: *params,
        yp0: Some(yp0),
        step,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{stationarity_residual, transversal_yp0};

    fn belarus_start() -> MacroState {
        MacroState::new(0.0, 780.0, 150.0, 0.05).unwrap()
    }

    #[test]
    fn costate_sign_change_is_singular() {
        let p = ModelParams::belarus();
        let expected = costate_root(0.5, &p).unwrap().unwrap();
        for err in [
            solve_omega_path(&p, 0.05, 0.5, 20.0, 0.01).unwrap_err(),
            solve_optimal_trajectory(&p, &belarus_start(), 0.5, 20.0, 0.01).unwrap_err(),
        ] {
            assert_eq!(err.time(), Some(expected));
        }
        // A root beyond the horizon does not matter.
        assert!(solve_omega_path(&p, 0.05, 0.5, expected * 0.9, 0.01).is_ok());
    }

    #[test]
    fn omega_path_matches_joint_solve() {
        let p = ModelParams::belarus();
        let joint = solve_optimal_trajectory(&p, &belarus_start(), 40.0, 20.0, 0.01).unwrap();
        let alone = solve_omega_path(&p, 0.05, 40.0, 20.0, 0.01).unwrap();
        for (s, (t, [w])) in joint.samples.iter().zip(&alone.samples) {
            assert_eq!(s.t, *t);
            assert_eq!(s.omega, *w);
        }
    }

    #[test]
    fn transversal_costate_diverges_from_belarus_start() {
        let p = ModelParams::belarus();
        let yp0 = transversal_yp0(&p).unwrap();
        let err = solve_optimal_trajectory(&p, &belarus_start(), yp0, 20.0, 0.01).unwrap_err();
        let t = err.time().expect("failure carries its time");
        assert!(t > 11.0 && t < 13.0, "failed at t={t}: {err}");
    }

    #[test]
    fn singular_costate_at_start() {
        let p = ModelParams::belarus();
        let err = solve_optimal_trajectory(&p, &belarus_start(), 0.0, 5.0, 0.01).unwrap_err();
        assert!(matches!(err, ControlError::SingularCostate { t, .. } if t == 0.0));
    }

    #[test]
    fn infeasible_consumption_aborts() {
        // Large negative initial costate pulls omega towards 0.12 quickly,
        // which exceeds p / r for this state.
        let p = ModelParams::belarus();
        let start = MacroState::new(0.0, 1000.0, 60.0, 0.05).unwrap();
        let err = solve_optimal_trajectory(&p, &start, -0.05, 5.0, 0.001).unwrap_err();
        assert!(
            matches!(err, ControlError::InfeasibleConsumption { psi, .. } if psi < 0.0),
            "{err}"
        );
    }

    #[test]
    fn rejects_bad_horizon() {
        let p = ModelParams::belarus();
        assert!(solve_optimal_trajectory(&p, &belarus_start(), 40.0, 0.001, 0.01).is_err());
        assert!(solve_optimal_trajectory(&p, &belarus_start(), 40.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn reconstructed_costates_are_stationary() {
        let p = ModelParams::belarus();
        let traj = solve_optimal_trajectory(&p, &belarus_start(), 40.0, 20.0, 0.01).unwrap();
        for (i, s) in traj.samples.iter().enumerate() {
            let pt = traj.costate_at(i).unwrap();
            assert!(stationarity_residual(&pt, s.omega, p.lambda()).abs() <= 1e-9);
        }
        assert_eq!(traj.at_year(20).unwrap().t, 20.0);
        assert!(traj.at_year(21).is_none());
    }

    #[test]
    fn from_samples_validates() {
        let p = ModelParams::belarus();
        let a = MacroState::new(0.0, 1.0, 1.0, 0.0).unwrap();
        let b = MacroState::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(Trajectory::from_samples(p, 1.0, vec![a]).is_err());
        assert!(Trajectory::from_samples(p, 1.0, vec![b, a]).is_err());
        let bad = MacroState {
            t: 2.0,
            r: 1.0,
            p: 1.0,
            omega: 2.0,
        };
        assert!(Trajectory::from_samples(p, 1.0, vec![a, b, bad]).is_err());
        assert!(Trajectory::from_samples(p, 1.0, vec![a, b]).is_ok());
    }
}
