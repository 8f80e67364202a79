//! Built-in consistency checks exposed by the `check` subcommand.

use crate::control::{
    asymptotic_capital, asymptotic_fixed_points, asymptotic_omega, asymptotic_rhs, costate_rhs,
    costate_yp, riccati_rhs, solve_optimal_trajectory, stationarity_residual, transversal_yp0,
    AsymptoticSolution, CostatePoint,
};
use crate::model::{
    balance_output, decompose_productivity, effectiveness_rate, objective_functions, MacroState,
    ModelParams,
};
use crate::ode::integrate;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, value: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: value <= tol,
        detail: format!("max deviation {value:.3e} (tolerance {tol:.0e})"),
    }
}

fn balance() -> CheckOutcome {
    let state = MacroState::new(0.0, 780.0, 150.0, 0.05).expect("valid state");
    let mut worst = (balance_output(state.psi(), state.omega, state.r) - state.p).abs();
    let (psi, omega) = objective_functions(state.delta(), state.p, state.r).expect("norm in range");
    worst = worst
        .max((psi - state.psi()).abs())
        .max((omega - state.omega).abs());
    let dec = decompose_productivity(&state, 803.6, 153.5);
    let i_phi = effectiveness_rate(153.5 / 150.0 - 1.0, 803.6 / 780.0 - 1.0, state.delta());
    worst = worst.max(((dec.delta1 + dec.delta2) - (153.5 - 150.0)).abs());
    worst = worst.max((dec.i_phi_observed - i_phi).abs());
    outcome("balance identity and effectiveness rate", worst, 1e-12)
}

fn costate(params: &ModelParams) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    let yp0s = [0.0, transversal_yp0(params).unwrap_or(1.0), -1.0];
    for yp0 in yp0s {
        let grid = integrate(
            |t, y: &[f64; 1]| [-(-params.d() * t).exp() - params.mu() * y[0]],
            0.0,
            [yp0],
            50.0,
            1e-3,
        )
        .expect("fixed span and step are valid");
        for &(t, [y]) in grid.samples.iter().step_by(100) {
            let exact = costate_yp(t, yp0, params).expect("d differs from mu");
            worst = worst.max((y - exact).abs() / exact.abs().max(1e-12));
        }
    }
    outcome("costate closed form against integration", worst, 1e-9)
}

/// Differentiate the control formula along the costate equations and compare
/// with the Riccati right-hand side.
fn riccati(params: &ModelParams) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for yp0 in [-10.0, -1.0, 2.0, 40.0, 500.0] {
        for i in 0..40 {
            let t = 0.5 * i as f64;
            let omega = -0.1 + 0.01 * i as f64;
            let Ok(point) = CostatePoint::on_control(t, omega, yp0, params) else {
                continue;
            };
            if point.y_p.abs() < 1e-3 {
                continue;
            }
            let (y_r_dot, y_p_dot) = costate_rhs(&point, omega, params);
            let chi_dot = -params.d() * point.chi;
            let num = point.chi - point.y_r;
            let chained =
                ((chi_dot - y_r_dot) * point.y_p - num * y_p_dot) / (2.0 * point.y_p * point.y_p);
            let direct = riccati_rhs(t, omega, yp0, params).expect("costate non-singular");
            worst = worst.max((chained - direct).abs() / direct.abs().max(1e-12));
        }
    }
    outcome(
        "Riccati equation against chained costate evaluation",
        worst,
        1e-10,
    )
}

fn asymptotic(params: &ModelParams) -> CheckOutcome {
    let fp = asymptotic_fixed_points(params);
    let omega_inf = 0.5 * (fp.omega_minus + fp.omega_plus);
    let grid = integrate(
        |_, y: &[f64; 1]| [asymptotic_rhs(y[0], params)],
        0.0,
        [omega_inf],
        200.0,
        0.01,
    )
    .expect("fixed span and step are valid");
    let mut worst: f64 = 0.0;
    for &(t, [w]) in &grid.samples {
        let exact = asymptotic_omega(t, omega_inf, params).expect("inside fixed points");
        worst = worst.max((w - exact).abs());
    }
    outcome("asymptotic closed form against integration", worst, 1e-8)
}

fn capital(params: &ModelParams) -> CheckOutcome {
    let fp = asymptotic_fixed_points(params);
    let omega_inf = 0.5 * (fp.omega_minus + fp.omega_plus);
    let sol = AsymptoticSolution::new(params, omega_inf, 1.0).expect("inside fixed points");
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for i in 1..100 {
        let t = i as f64;
        let up = asymptotic_capital(t + h, sol.r_tilde, sol.c, params).ln();
        let down = asymptotic_capital(t - h, sol.r_tilde, sol.c, params).ln();
        let slope = (up - down) / (2.0 * h);
        worst = worst.max((slope - (sol.omega(t) - params.lambda())).abs());
    }
    outcome(
        "asymptotic capital growth equals omega - lambda",
        worst,
        1e-6,
    )
}

fn stationarity(params: &ModelParams) -> CheckOutcome {
    let start = MacroState::new(0.0, 780.0, 150.0, 0.05).expect("valid state");
    let yp0 = 40.0;
    match solve_optimal_trajectory(params, &start, yp0, 5.0, 0.01) {
        Ok(traj) => {
            let worst = (0..traj.samples.len())
                .filter_map(|i| traj.costate_at(i).map(|c| (c, traj.samples[i].omega)))
                .map(|(c, w)| stationarity_residual(&c, w, params.lambda()).abs())
                .fold(0.0, f64::max);
            outcome("stationarity along a solved trajectory", worst, 1e-9)
        }
        Err(e) => CheckOutcome {
            name: "stationarity along a solved trajectory",
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn richardson() -> CheckOutcome {
    let err = |h: f64| {
        let g = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, h).expect("valid step");
        (g.last().1[0] - 1f64.exp()).abs()
    };
    let ratio = err(0.1) / err(0.05);
    CheckOutcome {
        name: "Runge-Kutta order",
        passed: (12.0..=20.0).contains(&ratio),
        detail: format!("error ratio {ratio:.3} (expected 12..20)"),
    }
}

/// Run every check with `params` (the checks that need a concrete state use
/// the Belarus base row).
pub fn run_checks(params: &ModelParams) -> Vec<CheckOutcome> {
    vec![
        balance(),
        costate(params),
        riccati(params),
        asymptotic(params),
        capital(params),
        stationarity(params),
        richardson(),
    ]
}
