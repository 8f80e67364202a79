use super::ControlError;
use crate::model::ModelParams;

/// Below this magnitude `y_p` is treated as zero and the control formula is
/// undefined.
pub const SINGULAR_COSTATE_TOL: f64 = 1e-12;

/// `|d - mu|` below this makes the closed-form costate singular.
const DISCOUNT_GAP_TOL: f64 = 1e-12;

/// Adjoint values at time `t` together with the discount factor
/// `chi = exp(-d t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostatePoint {
    pub t: f64,
    pub y_r: f64,
    pub y_p: f64,
    pub chi: f64,
}

impl CostatePoint {
    pub fn new(t: f64, y_r: f64, y_p: f64, params: &ModelParams) -> Self {
        CostatePoint {
            t,
            y_r,
            y_p,
            chi: (-params.d() * t).exp(),
        }
    }

    /// Costate point consistent with the control `omega`: `y_p` from the
    /// closed form and `y_r` from the stationarity condition,
    /// `(y_r - chi) / y_p = lambda - 2 omega`.
    pub fn on_control(
        t: f64,
        omega: f64,
        yp0: f64,
        params: &ModelParams,
    ) -> Result<Self, ControlError> {
        let y_p = costate_yp(t, yp0, params)?;
        let chi = (-params.d() * t).exp();
        Ok(CostatePoint {
            t,
            y_r: chi + y_p * (params.lambda() - 2.0 * omega),
            y_p,
            chi,
        })
    }
}

fn discount_gap(params: &ModelParams) -> Result<f64, ControlError> {
    let gap = params.d() - params.mu();
    if gap.abs() <= DISCOUNT_GAP_TOL {
        Err(ControlError::SingularDiscount(params.d()))
    } else {
        Ok(gap)
    }
}

/// Initial costate `1 / (d - mu)`: the only choice for which `y_p` is a pure
/// decaying exponential, `y_p(t) = exp(-d t) / (d - mu)`.
pub fn transversal_yp0(params: &ModelParams) -> Result<f64, ControlError> {
    Ok(1.0 / discount_gap(params)?)
}

/// Closed-form costate of output per man.
pub fn costate_yp(t: f64, yp0: f64, params: &ModelParams) -> Result<f64, ControlError> {
    let gap = discount_gap(params)?;
    // Grouped so the transversal choice cancels exactly.
    let em = (-params.mu() * t).exp();
    let ed = (-params.d() * t).exp();
    Ok((yp0 - 1.0 / gap) * em + ed / gap)
}

/// First time `t > 0` at which the closed-form `y_p` vanishes, if any.
///
/// A fixed-step integrator can step across this pole of `chi / y_p` without
/// producing a non-finite value, so solvers check it up front.
pub fn costate_root(yp0: f64, params: &ModelParams) -> Result<Option<f64>, ControlError> {
    let gap = discount_gap(params)?;
    // y_p(t) = 0  <=>  exp(-gap t) = 1 - yp0 gap.
    let rhs = 1.0 - yp0 * gap;
    if yp0 <= 0.0 || rhs <= 0.0 {
        return Ok(None);
    }
    Ok(Some(-rhs.ln() / gap))
}

/// Costate right-hand sides `(dy_r/dt, dy_p/dt)` for the control `omega`.
///
/// With linear utility the marginal utility is one, so the costates do not
/// depend on `r` or `p`.
pub fn costate_rhs(point: &CostatePoint, omega: f64, params: &ModelParams) -> (f64, f64) {
    let lambda = params.lambda();
    let growth = omega - lambda;
    let y_r_dot = omega * point.chi - point.y_r * growth - point.y_p * omega * growth;
    let y_p_dot = -point.chi - point.y_p * params.mu();
    (y_r_dot, y_p_dot)
}

fn check_costate(t: f64, y_p: f64) -> Result<(), ControlError> {
    if !y_p.is_finite() || y_p.abs() < SINGULAR_COSTATE_TOL {
        Err(ControlError::SingularCostate { t, y_p })
    } else {
        Ok(())
    }
}

/// Control maximizing the Hamiltonian for the given costates.
pub fn omega_from_costates(point: &CostatePoint, lambda: f64) -> Result<f64, ControlError> {
    check_costate(point.t, point.y_p)?;
    Ok(lambda / 2.0 + (point.chi - point.y_r) / (2.0 * point.y_p))
}

/// Derivative of the Hamiltonian with respect to the control; zero exactly
/// at the maximizing control.
pub fn stationarity_residual(point: &CostatePoint, omega: f64, lambda: f64) -> f64 {
    -point.chi + point.y_r + 2.0 * point.y_p * omega - point.y_p * lambda
}

/// `chi(t) / y_p(t)`, the coefficient that couples the Riccati equation to
/// time.
pub fn chi_over_yp(t: f64, yp0: f64, params: &ModelParams) -> Result<f64, ControlError> {
    let y_p = costate_yp(t, yp0, params)?;
    check_costate(t, y_p)?;
    Ok((-params.d() * t).exp() / y_p)
}

/// Riccati right-hand side `d omega / dt` along the optimal path.
pub fn riccati_rhs(
    t: f64,
    omega: f64,
    yp0: f64,
    params: &ModelParams,
) -> Result<f64, ControlError> {
    let k = chi_over_yp(t, yp0, params)?;
    let (lambda, mu, d) = (params.lambda(), params.mu(), params.d());
    Ok(-0.5 * omega * omega + (mu + lambda + k) * omega
        - 0.5 * lambda * lambda
        - 0.5 * (2.0 * lambda + d) * k
        - 0.5 * mu * lambda)
}
