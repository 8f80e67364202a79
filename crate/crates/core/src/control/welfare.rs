use super::solve::Trajectory;
use crate::model::ModelParams;

/// Discounted welfare over the sampled horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareResult {
    /// Integral of `exp(-d t) psi(t)` over the trajectory span.
    pub value: f64,
    /// Upper bound on the neglected tail beyond the horizon,
    /// `exp(-d T) psi_max / d`.
    pub tail_bound: f64,
    pub horizon: f64,
}

/// Discounted utility integral with linear utility.
///
/// Consumption per man is interpolated linearly between samples and the
/// discount factor is integrated exactly on each interval. The weights are
/// positive, so the value never exceeds `psi_max / d`.
pub fn welfare(trajectory: &Trajectory, params: &ModelParams) -> WelfareResult {
    let d = params.d();
    let samples = &trajectory.samples;
    let mut value = 0.0;
    let mut psi_max = samples.first().map_or(0.0, |s| s.psi());
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let x = d * (b.t - a.t);
        let ea = (-d * a.t).exp();
        // Integral over the interval of exp(-d t) times the two linear hat
        // functions, factored as exp(-d t_a) / d * (weight).
        let mass = -(-x).exp_m1();
        let tilt = (mass - x * (-x).exp()) / x;
        value += ea / d * ((mass - tilt) * a.psi() + tilt * b.psi());
        psi_max = psi_max.max(b.psi());
    }
    let t_end = samples.last().map_or(0.0, |s| s.t);
    WelfareResult {
        value,
        tail_bound: (-d * t_end).exp() * psi_max / d,
        horizon: trajectory.horizon(),
    }
}
