use effgrowth::model::{decompose_productivity, model_rhs};
use effgrowth::ode::{integrate, rk4_step, try_integrate, OdeError};
use effgrowth::{MacroState, ModelParams};

#[test]
fn linear_system_against_closed_form() {
    // x' = -y, y' = x: rotation, x = cos t, y = sin t.
    let g = integrate(|_, v: &[f64; 2]| [-v[1], v[0]], 0.0, [1.0, 0.0], 10.0, 1e-3).unwrap();
    let worst = g
        .samples
        .iter()
        .map(|&(t, [x, y])| (x - t.cos()).abs().max((y - t.sin()).abs()))
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn damped_system_against_closed_form() {
    // x' = -2x + y, y' = -y with x(0) = y(0) = 1: x = y = e^-t.
    let g = integrate(
        |_, v: &[f64; 2]| [-2.0 * v[0] + v[1], -v[1]],
        0.0,
        [1.0, 1.0],
        5.0,
        1e-3,
    )
    .unwrap();
    for &(t, [x, y]) in &g.samples {
        assert!((x - (-t).exp()).abs() < 1e-8);
        assert!((y - (-t).exp()).abs() < 1e-8);
    }
}

fn sin_problem_error(h: f64) -> f64 {
    // y' = sin(t) y, y(0) = 1  =>  y = exp(1 - cos t).
    let g = integrate(|t, y: &[f64; 1]| [t.sin() * y[0]], 0.0, [1.0], 2.0, h).unwrap();
    (g.last().1[0] - (1.0 - 2f64.cos()).exp()).abs()
}

#[test]
fn richardson_ratio_on_time_dependent_problem() {
    let ratio = sin_problem_error(0.1) / sin_problem_error(0.05);
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn partial_final_step_lands_on_endpoint() {
    let g = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.05, 0.1).unwrap();
    assert_eq!(g.last().0, 1.05);
    assert!((g.last().1[0] - 1.05f64.exp()).abs() < 1e-5);
    assert_eq!(g.len(), 12);
}

#[test]
fn exact_grid_has_no_spurious_step() {
    let g = integrate(|_, y: &[f64; 1]| [0.0 * y[0]], 0.0, [1.0], 20.0, 0.01).unwrap();
    assert_eq!(g.len(), 2001);
    assert_eq!(g.last().0, 20.0);
}

#[test]
fn one_step_matches_taylor_series() {
    let y = rk4_step(&mut |_, y: &[f64; 1]| [y[0]], 0.0, &[1.0], 0.1).unwrap();
    let taylor: f64 = 1.0 + 0.1 + 0.01 / 2.0 + 0.001 / 6.0 + 0.0001 / 24.0;
    assert!((y[0] - taylor).abs() < 1e-15);
}

#[test]
fn invalid_arguments() {
    let f = |_: f64, y: &[f64; 1]| Ok::<_, OdeError>([y[0]]);
    assert!(matches!(
        try_integrate(f, 0.0, [1.0], 1.0, 0.0),
        Err(OdeError::InvalidStep(_))
    ));
    assert!(matches!(
        try_integrate(f, 1.0, [1.0], 0.0, 0.1),
        Err(OdeError::InvalidSpan { .. })
    ));
    let blow = |_: f64, y: &[f64; 1]| Ok::<_, OdeError>([y[0] * y[0]]);
    assert!(try_integrate(blow, 0.0, [1.0], 2.0, 0.01).is_err());
}

/// Effectiveness rate measured over an interval of length `dt` along the
/// equations of motion, per unit time.
fn measured_rate(dt: f64) -> f64 {
    let params = ModelParams::new(0.02, 0.015, 0.2).unwrap();
    let s = MacroState::new(0.0, 780.0, 150.0, 0.05).unwrap();
    let g = integrate(
        |t, y: &[f64; 2]| {
            let st = MacroState {
                t,
                r: y[0],
                p: y[1],
                omega: s.omega,
            };
            let (a, b) = model_rhs(&st, s.omega, &params);
            [a, b]
        },
        0.0,
        [s.r, s.p],
        dt,
        dt / 100.0,
    )
    .unwrap();
    let [r1, p1] = g.last().1;
    decompose_productivity(&s, r1, p1).i_phi_observed / dt
}

#[test]
fn discrete_rate_converges_to_continuous_rate_at_first_order() {
    let mu = 0.015;
    let e1 = (measured_rate(0.2) - mu).abs();
    let e2 = (measured_rate(0.1) - mu).abs();
    let e3 = (measured_rate(0.05) - mu).abs();
    assert!(e1 > e2 && e2 > e3);
    for ratio in [e1 / e2, e2 / e3] {
        assert!((1.8..2.2).contains(&ratio), "{ratio}");
    }
}
