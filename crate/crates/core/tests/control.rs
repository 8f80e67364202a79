use effgrowth::control::{
    asymptotic_fixed_points, asymptotic_omega, calibrate_yp0, chi_over_yp, costate_rhs, costate_yp,
    solve_omega_path, solve_optimal_trajectory, stationarity_residual, transversal_yp0, welfare,
    CalibrationOptions, ControlError, CostatePoint,
};
use effgrowth::{MacroState, ModelParams};
use proptest::prelude::*;

const TABLE1_OMEGA: [f64; 21] = [
    0.050, 0.049, 0.048, 0.047, 0.046, 0.046, 0.045, 0.045, 0.044, 0.044, 0.043, 0.043, 0.042,
    0.042, 0.041, 0.041, 0.040, 0.040, 0.040, 0.039, 0.039,
];

fn start() -> MacroState {
    MacroState::new(0.0, 780.0, 150.0, 0.05).unwrap()
}

#[test]
fn double_root_riccati_closed_form() {
    // mu = lambda = 0 and chi / y_p = d give omega' = -(omega - d)^2 / 2,
    // so u = omega - d obeys u' = -u^2 / 2 with u(t) = u0 / (1 + u0 t / 2).
    let d = 0.2;
    let p = ModelParams::new(0.0, 0.0, d).unwrap();
    let yp0 = transversal_yp0(&p).unwrap();
    let g = solve_omega_path(&p, 0.05, yp0, 10.0, 1e-3).unwrap();
    let u0 = 0.05 - d;
    for &(t, [w]) in &g.samples {
        let exact = d + u0 / (1.0 + u0 * t / 2.0);
        assert!((w - exact).abs() < 1e-8, "t={t}");
    }
}

#[test]
fn constant_coefficient_riccati_is_logistic() {
    let p = ModelParams::belarus();
    let yp0 = transversal_yp0(&p).unwrap();
    let (lambda, mu, d): (f64, f64, f64) = (0.02, 0.015, 0.2);
    let k = d - mu;
    // omega' = -(omega^2 - 2 B omega + C) / 2 with the roots below.
    let b = mu + lambda + k;
    let c = lambda * lambda + (2.0 * lambda + d) * k + mu * lambda;
    let disc = (b * b - c).sqrt();
    let (lo, hi) = (b - disc, b + disc);
    assert!((lo - 0.16255).abs() < 1e-5 && (hi - 0.27745).abs() < 1e-5);
    let w0 = 0.2;
    let g = solve_omega_path(&p, w0, yp0, 50.0, 0.01).unwrap();
    let c0 = (w0 - lo) / (hi - w0);
    for &(t, [w]) in &g.samples {
        let e = c0 * ((hi - lo) * t / 2.0).exp();
        let exact = (lo + hi * e) / (1.0 + e);
        assert!((w - exact).abs() < 1e-9, "t={t}");
    }
}

#[test]
fn costate_rhs_matches_finite_difference_of_reconstructed_costates() {
    let p = ModelParams::belarus();
    let yp0 = 40.0;
    let h = 0.01;
    let g = solve_omega_path(&p, 0.05, yp0, 10.0, h).unwrap();
    let points: Vec<CostatePoint> = g
        .samples
        .iter()
        .map(|&(t, [w])| CostatePoint::on_control(t, w, yp0, &p).unwrap())
        .collect();
    for i in (1..points.len() - 1).step_by(25) {
        let (before, here, after) = (&points[i - 1], &points[i], &points[i + 1]);
        let fd_r = (after.y_r - before.y_r) / (2.0 * h);
        let fd_p = (after.y_p - before.y_p) / (2.0 * h);
        let (y_r_dot, y_p_dot) = costate_rhs(here, g.samples[i].1[0], &p);
        assert!(
            (fd_r - y_r_dot).abs() < 1e-5 * y_r_dot.abs().max(1.0),
            "t={}",
            here.t
        );
        assert!(
            (fd_p - y_p_dot).abs() < 1e-5 * y_p_dot.abs().max(1.0),
            "t={}",
            here.t
        );
    }
}

#[test]
fn long_run_solution_follows_asymptotic_closed_form() {
    // Once chi / y_p has decayed, the full solution and the asymptotic
    // solution reset at the same value stay together.
    let p = ModelParams::belarus();
    let fp = asymptotic_fixed_points(&p);
    let (yp0, reset) = (40.0, 40.0);
    let g = solve_omega_path(&p, 0.05, yp0, 150.0, 0.01).unwrap();
    assert!(chi_over_yp(reset, yp0, &p).unwrap() < 2e-5);
    let w_reset = g.samples[4000].1[0];
    assert_eq!(g.samples[4000].0, reset);
    let worst = g.samples[4000..]
        .iter()
        .map(|&(t, [w])| (w - asymptotic_omega(t - reset, w_reset, &p).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst}");
    let (_, [w_end]) = *g.last();
    assert!(w_end > w_reset && w_end < fp.omega_plus);
}

#[test]
fn calibrated_belarus_path_starts_high_and_declines() {
    let p = ModelParams::belarus();
    let cal = calibrate_yp0(&p, &TABLE1_OMEGA, &CalibrationOptions::for_params(&p)).unwrap();
    assert!(cal.boundary.is_none());
    let traj = solve_optimal_trajectory(&p, &start(), cal.yp0, 20.0, 0.01).unwrap();
    let yearly: Vec<f64> = (0..=20).map(|k| traj.at_year(k).unwrap().omega).collect();
    assert_eq!(yearly[0], 0.05);
    assert!(yearly[1] < yearly[0]);
    assert!(yearly[20] < yearly[0] - 0.005);
    assert!(cal.rms < 0.005);
    let worst = (0..traj.samples.len())
        .map(|i| {
            let c = traj.costate_at(i).unwrap();
            stationarity_residual(&c, traj.samples[i].omega, p.lambda()).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-9);
}

#[test]
fn transversal_costate_fails_with_time_of_failure() {
    let p = ModelParams::belarus();
    let yp0 = transversal_yp0(&p).unwrap();
    let err = solve_optimal_trajectory(&p, &start(), yp0, 20.0, 0.01).unwrap_err();
    let t = err.time().unwrap();
    assert!(t > 11.0 && t < 13.0);
    assert!(err.to_string().contains("t=12"), "{err}");
}

#[test]
fn closed_form_costate_of_singular_discount() {
    let p = ModelParams::new(0.02, 0.1, 0.1).unwrap();
    assert!(matches!(
        costate_yp(1.0, 1.0, &p),
        Err(ControlError::SingularDiscount(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn welfare_never_exceeds_consumption_bound(yp0 in prop_oneof![-50.0..-0.5f64, 20.0..200.0f64]) {
        let p = ModelParams::belarus();
        if let Ok(traj) = solve_optimal_trajectory(&p, &start(), yp0, 20.0, 0.05) {
            let w = welfare(&traj, &p);
            let psi_max = traj.samples.iter().map(|s| s.psi()).fold(0.0, f64::max);
            prop_assert!(w.value <= psi_max / p.d());
            prop_assert!(w.value + w.tail_bound <= psi_max / p.d() * (1.0 + 1e-12));
            prop_assert!(w.value > 0.0);
        }
    }
}
