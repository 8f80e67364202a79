//! Long-run regime `t >> 1 / (d - mu)`, where the terms of the Riccati
//! equation proportional to `chi / y_p` die out and the equation becomes
//! autonomous with two fixed points.

use super::ControlError;
use crate::model::ModelParams;

/// Fixed points of the asymptotic Riccati equation
/// `omega' = -(omega - omega_minus)(omega - omega_plus) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoints {
    /// Unstable fixed point.
    pub omega_minus: f64,
    /// Stable fixed point, the long-run optimal saving per capital.
    pub omega_plus: f64,
    /// Convergence rate `sqrt(mu (lambda + mu))`.
    pub s: f64,
}

pub fn asymptotic_fixed_points(params: &ModelParams) -> FixedPoints {
    let centre = params.lambda() + params.mu();
    let s = (params.mu() * centre).sqrt();
    FixedPoints {
        omega_minus: centre - s,
        omega_plus: centre + s,
        s,
    }
}

/// Factored asymptotic right-hand side.
pub fn asymptotic_rhs(omega: f64, params: &ModelParams) -> f64 {
    let fp = asymptotic_fixed_points(params);
    -0.5 * (omega - fp.omega_minus) * (omega - fp.omega_plus)
}

/// Asymptotic trajectory anchored at a reset value `omega_inf` and a capital
/// scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSolution {
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub s: f64,
    /// Integration constant `(omega_inf - omega_minus) / (omega_plus - omega_inf)`.
    pub c: f64,
    /// Capital scale; `r(0) = r_tilde (1 + c)^2`.
    pub r_tilde: f64,
}

impl AsymptoticSolution {
    /// Solution with `omega(0) = omega_inf` and `r(0) = r_at_reset`.
    pub fn new(
        params: &ModelParams,
        omega_inf: f64,
        r_at_reset: f64,
    ) -> Result<Self, ControlError> {
        if !(r_at_reset.is_finite() && r_at_reset > 0.0) {
            return Err(ControlError::InvalidInput(format!(
                "capital per man at reset must be positive, got {r_at_reset}"
            )));
        }
        let fp = asymptotic_fixed_points(params);
        let c = integration_constant(&fp, omega_inf)?;
        Ok(AsymptoticSolution {
            omega_minus: fp.omega_minus,
            omega_plus: fp.omega_plus,
            s: fp.s,
            c,
            r_tilde: r_at_reset / ((1.0 + c) * (1.0 + c)),
        })
    }

    pub fn omega(&self, t: f64) -> f64 {
        let e = (-self.s * t).exp();
        (self.omega_minus * e + self.c * self.omega_plus) / (e + self.c)
    }

    pub fn capital(&self, t: f64, params: &ModelParams) -> f64 {
        asymptotic_capital(t, self.r_tilde, self.c, params)
    }
}

fn integration_constant(fp: &FixedPoints, omega_inf: f64) -> Result<f64, ControlError> {
    if !(omega_inf > fp.omega_minus && omega_inf < fp.omega_plus) {
        return Err(ControlError::OutsideFixedPoints {
            value: omega_inf,
            lower: fp.omega_minus,
            upper: fp.omega_plus,
        });
    }
    Ok((omega_inf - fp.omega_minus) / (fp.omega_plus - omega_inf))
}

/// Saving per capital `t` years after the asymptotic reset at `omega_inf`.
///
/// Requires `omega_minus < omega_inf < omega_plus`; the trajectory then rises
/// monotonically towards `omega_plus`.
pub fn asymptotic_omega(t: f64, omega_inf: f64, params: &ModelParams) -> Result<f64, ControlError> {
    let fp = asymptotic_fixed_points(params);
    let c = integration_constant(&fp, omega_inf)?;
    let e = (-fp.s * t).exp();
    Ok((fp.omega_minus * e + c * fp.omega_plus) / (e + c))
}

/// Capital per man on the asymptotic trajectory with constant `c`.
pub fn asymptotic_capital(t: f64, r_tilde: f64, c: f64, params: &ModelParams) -> f64 {
    let s = asymptotic_fixed_points(params).s;
    let bracket = (-s * t).exp() + c;
    r_tilde * ((params.mu() + s) * t).exp() * bracket * bracket
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::belarus()
    }

    #[test]
    fn fixed_points_at_belarus_parameters() {
        // sqrt(0.015 * 0.035) = 0.02291287847477920...
        let fp = asymptotic_fixed_points(&params());
        assert!((fp.s - 0.022_912_878_474_779_2).abs() < 1e-15);
        assert!((fp.omega_minus - 0.012_087_121_525_220_8).abs() < 1e-15);
        assert!((fp.omega_plus - 0.057_912_878_474_779_2).abs() < 1e-15);
        assert!((fp.omega_minus + fp.omega_plus - 0.07).abs() < 1e-15);
        assert!((fp.omega_minus * fp.omega_plus - 7e-4).abs() < 1e-17);
    }

    #[test]
    fn zero_effectiveness_gives_double_root() {
        let fp = asymptotic_fixed_points(&ModelParams::new(0.02, 0.0, 0.2).unwrap());
        assert_eq!(fp.omega_minus, 0.02);
        assert_eq!(fp.omega_plus, 0.02);
        assert_eq!(fp.s, 0.0);
    }

    #[test]
    fn reset_condition_and_limit() {
        let p = params();
        assert_eq!(asymptotic_omega(0.0, 0.05, &p).unwrap(), 0.05);
        let fp = asymptotic_fixed_points(&p);
        assert!((asymptotic_omega(10_000.0, 0.05, &p).unwrap() - fp.omega_plus).abs() < 1e-12);
    }

    #[test]
    fn integration_constant_is_a_ratio() {
        let sol = AsymptoticSolution::new(&params(), 0.05, 780.0).unwrap();
        assert!((sol.c - 4.791288).abs() < 1e-6);
        assert!((sol.omega(0.0) - 0.05).abs() < 1e-17);
        assert!((sol.capital(0.0, &params()) - 780.0).abs() < 1e-10);
        assert_eq!(
            sol.capital(0.0, &params()),
            sol.r_tilde * (1.0 + sol.c).powi(2)
        );
    }

    #[test]
    fn rejects_start_outside_interval() {
        let p = params();
        let fp = asymptotic_fixed_points(&p);
        for w in [fp.omega_minus, fp.omega_plus, 0.0, 0.1] {
            assert!(matches!(
                asymptotic_omega(1.0, w, &p),
                Err(ControlError::OutsideFixedPoints { .. })
            ));
        }
    }

    #[test]
    fn stability_of_fixed_points() {
        let p = params();
        let fp = asymptotic_fixed_points(&p);
        let near_plus = fp.omega_plus - 1e-9;
        let near_minus = fp.omega_minus + 1e-9;
        for i in 0..200 {
            let t = i as f64;
            let w = asymptotic_omega(t, near_plus, &p).unwrap();
            assert!((w - fp.omega_plus).abs() <= 1e-9 + 1e-17);
        }
        let w = asymptotic_omega(500.0, near_minus, &p).unwrap();
        assert!(w - fp.omega_minus > 1e-6);
    }

    #[test]
    fn long_run_capital_growth_rate() {
        let p = params();
        let sol = AsymptoticSolution::new(&p, 0.05, 780.0).unwrap();
        let t = 2000.0;
        let rate = (sol.capital(t + 1.0, &p) / sol.capital(t, &p)).ln();
        assert!((rate - (p.mu() + sol.s)).abs() < 1e-12);
        assert!((rate - (sol.omega_plus - p.lambda())).abs() < 1e-12);
    }

    #[test]
    fn log_derivative_of_capital() {
        let p = params();
        let sol = AsymptoticSolution::new(&p, 0.05, 780.0).unwrap();
        let h = 1e-4;
        let t = 5.0;
        let fd = (sol.capital(t + h, &p).ln() - sol.capital(t - h, &p).ln()) / (2.0 * h);
        assert!((fd - (sol.omega(t) - p.lambda())).abs() < 1e-6);
    }
}
