//! Fixed-step classical Runge-Kutta integration.
//!
//! # Step policy
//! - Integrates forward in time only (`t1 > t0`).
//! - Uses a fixed step `h` except for the final step, which is shortened so
//!   the grid lands exactly on `t1`. When `(t1 - t0) / h` is an integer up to
//!   rounding no partial step is taken.
//! - Grid times are computed as `t0 + i * h`, never by accumulation.

/// Default step in years.
pub const DEFAULT_STEP: f64 = 0.01;

/// Relative slack when deciding that the span is an integer number of steps.
const STEP_COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step must be finite and positive, got {0}")]
    InvalidStep(f64),
    #[error("invalid span [{t0}, {t1}]: need finite t1 > t0")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("non-finite right-hand side at t={t}{}", step_suffix(*.step))]
    NonFiniteRhs { t: f64, step: Option<usize> },
    #[error("non-finite state at t={t}{}", step_suffix(*.step))]
    NonFiniteState { t: f64, step: Option<usize> },
}

fn step_suffix(step: Option<usize>) -> String {
    step.map(|s| format!(" (step {s})")).unwrap_or_default()
}

/// Ordered integration samples on a (nearly) uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationGrid<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
    pub samples: Vec<(f64, [f64; N])>,
}

impl<const N: usize> IntegrationGrid<N> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &(f64, [f64; N]) {
        self.samples
            .last()
            .expect("grid always holds the initial sample")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|(t, _)| *t)
    }

    /// Component `k` of every sample.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|(_, y)| y[k]).collect()
    }
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for (o, ki) in out.iter_mut().zip(k) {
        *o += a * ki;
    }
    out
}

fn finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Number of full steps and the length of the trailing partial step (zero
/// when the span is a whole number of steps).
fn step_plan(t0: f64, t1: f64, h: f64) -> (usize, f64) {
    let ratio = (t1 - t0) / h;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= STEP_COUNT_SLACK * nearest.max(1.0) && nearest >= 1.0 {
        (nearest as usize, 0.0)
    } else {
        let full = ratio.floor() as usize;
        (full, t1 - (t0 + full as f64 * h))
    }
}

/// One classical RK4 step with a fallible right-hand side.
///
/// Non-finite stage evaluations abort with [`OdeError::NonFiniteRhs`] at the
/// stage time.
pub fn try_rk4_step<const N: usize, E, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    E: From<OdeError>,
{
    stages(f, t, y, h, None)
}

fn stages<const N: usize, E, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    h: f64,
    step: Option<usize>,
) -> Result<[f64; N], E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    E: From<OdeError>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(OdeError::InvalidStep(h).into());
    }
    let mut eval = |t: f64, y: &[f64; N]| -> Result<[f64; N], E> {
        let k = f(t, y)?;
        if finite(&k) {
            Ok(k)
        } else {
            Err(OdeError::NonFiniteRhs { t, step }.into())
        }
    };
    let half = 0.5 * h;
    let k1 = eval(t, y)?;
    let k2 = eval(t + half, &axpy(y, half, &k1))?;
    let k3 = eval(t + half, &axpy(y, half, &k2))?;
    let k4 = eval(t + h, &axpy(y, h, &k3))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// One classical RK4 step.
pub fn rk4_step<const N: usize, F>(
    mut f: F,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    try_rk4_step(&mut |t, y: &[f64; N]| Ok::<_, OdeError>(f(t, y)), t, y, h)
}

/// Integrate from `(t0, y0)` to `t1` with a fallible right-hand side and a
/// per-sample acceptance hook.
///
/// `accept` sees every new sample `(t, y)` after it is computed and may
/// reject it, which aborts the integration with that error.
pub fn try_integrate_with<const N: usize, E, F, A>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    h: f64,
    mut accept: A,
) -> Result<IntegrationGrid<N>, E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    A: FnMut(f64, &[f64; N]) -> Result<(), E>,
    E: From<OdeError>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(OdeError::InvalidStep(h).into());
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(OdeError::InvalidSpan { t0, t1 }.into());
    }
    if !finite(&y0) {
        return Err(OdeError::NonFiniteState {
            t: t0,
            step: Some(0),
        }
        .into());
    }
    let (full, partial) = step_plan(t0, t1, h);
    let mut samples = Vec::with_capacity(full + 2);
    samples.push((t0, y0));
    let mut y = y0;
    let mut t = t0;
    let total = full + usize::from(partial > 0.0);
    for i in 0..total {
        let (t_next, step) = if i + 1 == total {
            (t1, t1 - t)
        } else {
            (t0 + (i + 1) as f64 * h, h)
        };
        y = stages(&mut f, t, &y, step, Some(i + 1))?;
        if !finite(&y) {
            return Err(OdeError::NonFiniteState {
                t: t_next,
                step: Some(i + 1),
            }
            .into());
        }
        accept(t_next, &y)?;
        t = t_next;
        samples.push((t, y));
    }
    Ok(IntegrationGrid { t0, t1, h, samples })
}

/// Fallible-RHS integration without an acceptance hook.
pub fn try_integrate<const N: usize, E, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    h: f64,
) -> Result<IntegrationGrid<N>, E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    E: From<OdeError>,
{
    try_integrate_with(f, t0, y0, t1, h, |_, _| Ok(()))
}

/// Integrate `y' = f(t, y)` from `(t0, y0)` to `t1` with step `h`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    h: f64,
) -> Result<IntegrationGrid<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    try_integrate(|t, y: &[f64; N]| Ok::<_, OdeError>(f(t, y)), t0, y0, t1, h)
}
