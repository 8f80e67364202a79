//! Fit of the initial costate `y_p(0)` to an observed yearly saving path.
//!
//! The objective is the sum of squared deviations between the Riccati
//! solution at integer years and the target series. A coarse scan of the
//! search interval locates a bracket, then golden-section search refines it.
//! Runs that fail (singular costate, divergence) score `+inf`.

use super::solve::solve_omega_path;
use super::ControlError;
use crate::model::ModelParams;
use crate::ode::DEFAULT_STEP;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// What to do when the best point lies on the edge of the feasible search
/// region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Return the boundary point and flag it.
    #[default]
    Warn,
    /// Fail with [`ControlError::NoBracket`].
    Reject,
}

/// Where a boundary minimum sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryHit {
    /// At `lower` or `upper` of the search interval.
    IntervalEnd,
    /// Next to initial costates for which the solve fails.
    Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub lower: f64,
    pub upper: f64,
    /// Points of the coarse scan, endpoints included.
    pub grid_points: usize,
    /// Relative width at which golden-section search stops.
    pub x_tol: f64,
    pub max_iter: usize,
    /// Integration step; must divide one year.
    pub step: f64,
    pub boundary: BoundaryPolicy,
}

impl CalibrationOptions {
    /// Search `[-20/|d - mu|, 20/|d - mu|]` with the default step.
    pub fn for_params(params: &ModelParams) -> Self {
        let gap = (params.d() - params.mu()).abs().max(1e-3);
        CalibrationOptions {
            lower: -20.0 / gap,
            upper: 20.0 / gap,
            grid_points: 81,
            x_tol: 1e-12,
            max_iter: 200,
            step: DEFAULT_STEP,
            boundary: BoundaryPolicy::Warn,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub yp0: f64,
    /// Sum of squared deviations at the optimum.
    pub sse: f64,
    /// Root-mean-square deviation over the fitted years.
    pub rms: f64,
    pub evaluations: usize,
    pub boundary: Option<BoundaryHit>,
}

struct Objective<'a> {
    params: &'a ModelParams,
    target: &'a [f64],
    step: f64,
    per_year: usize,
    evaluations: usize,
}

impl Objective<'_> {
    fn eval(&mut self, yp0: f64) -> f64 {
        self.evaluations += 1;
        let horizon = (self.target.len() - 1) as f64;
        match solve_omega_path(self.params, self.target[0], yp0, horizon, self.step) {
            Ok(grid) => self.target[1..]
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let diff = grid.samples[(k + 1) * self.per_year].1[0] - w;
                    diff * diff
                })
                .sum(),
            Err(_) => f64::INFINITY,
        }
    }
}

fn validate(target: &[f64], opts: &CalibrationOptions) -> Result<usize, ControlError> {
    if target.len() < 2 {
        return Err(ControlError::InvalidInput(
            "target series needs at least two yearly values".into(),
        ));
    }
    if let Some(w) = target.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
        return Err(ControlError::InvalidInput(format!(
            "target saving per capital {w} outside (0, 1)"
        )));
    }
    if !(opts.lower.is_finite() && opts.upper.is_finite() && opts.lower < opts.upper) {
        return Err(ControlError::InvalidInput(format!(
            "invalid search interval [{}, {}]",
            opts.lower, opts.upper
        )));
    }
    if opts.grid_points < 3 {
        return Err(ControlError::InvalidInput(
            "coarse scan needs at least 3 points".into(),
        ));
    }
    let per_year = 1.0 / opts.step;
    if !(opts.step > 0.0 && (per_year - per_year.round()).abs() < 1e-9) {
        return Err(ControlError::InvalidInput(format!(
            "step {} does not divide one year",
            opts.step
        )));
    }
    Ok(per_year.round() as usize)
}

/// Classify the final golden-section bracket `[a, b]`. `lower_end` and
/// `upper_end` are set when the coarse scan's best point was the first or
/// last grid point.
fn classify_boundary(
    x_best: f64,
    (a, fa): (f64, f64),
    (b, fb): (f64, f64),
    lower_end: Option<f64>,
    upper_end: Option<f64>,
) -> Option<BoundaryHit> {
    let width = (b - a).abs();
    let near = |edge: f64| (x_best - edge).abs() <= 2.0 * width + f64::EPSILON * edge.abs();
    if lower_end.is_some_and(near) || upper_end.is_some_and(near) {
        Some(BoundaryHit::IntervalEnd)
    } else if (!fa.is_finite() && near(a)) || (!fb.is_finite() && near(b)) {
        Some(BoundaryHit::Feasibility)
    } else {
        None
    }
}

/// Initial costate whose Riccati solution best matches `target`, where
/// `target[k]` is saving per capital `k` years after the start. The first
/// value is used as the initial control.
pub fn calibrate_yp0(
    params: &ModelParams,
    target: &[f64],
    opts: &CalibrationOptions,
) -> Result<Calibration, ControlError> {
    let per_year = validate(target, opts)?;
    let mut obj = Objective {
        params,
        target,
        step: opts.step,
        per_year,
        evaluations: 0,
    };

    let n = opts.grid_points;
    let span = opts.upper - opts.lower;
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                opts.upper
            } else {
                opts.lower + span * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| obj.eval(x)).collect();
    let best = fs
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(ControlError::NoBracket {
            lower: opts.lower,
            upper: opts.upper,
        })?;

    let lo = best.saturating_sub(1);
    let hi = (best + 1).min(n - 1);
    let (mut a, mut fa) = (xs[lo], fs[lo]);
    let (mut b, mut fb) = (xs[hi], fs[hi]);
    let (mut x_best, mut f_best) = (xs[best], fs[best]);

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = obj.eval(c);
    let mut fd = obj.eval(d);
    for _ in 0..opts.max_iter {
        if (b - a).abs() <= opts.x_tol * (1.0 + 0.5 * (a + b).abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            fb = fd;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj.eval(c);
        } else {
            a = c;
            fa = fc;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj.eval(d);
        }
    }
    for (x, f) in [(c, fc), (d, fd), (a, fa), (b, fb)] {
        if f < f_best {
            x_best = x;
            f_best = f;
        }
    }

    let boundary = classify_boundary(
        x_best,
        (a, fa),
        (b, fb),
        (best == 0).then_some(opts.lower),
        (best == n - 1).then_some(opts.upper),
    );
    if let Some(hit) = boundary {
        if opts.boundary == BoundaryPolicy::Reject {
            return Err(ControlError::NoBracket {
                lower: opts.lower,
                upper: opts.upper,
            });
        }
        log::warn!("calibrated initial costate {x_best} lies on a search boundary ({hit:?})");
    }

    let fitted = (target.len() - 1) as f64;
    Ok(Calibration {
        yp0: x_best,
        sse: f_best,
        rms: (f_best / fitted).sqrt(),
        evaluations: obj.evaluations,
        boundary,
    })
}
