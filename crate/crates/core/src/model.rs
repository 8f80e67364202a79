//! Algebraic identities and equations of motion of the growth model with
//! effectiveness.
//!
//! All quantities are per man (per worker) and all rates are per year.

use serde::{Deserialize, Serialize};

/// Tolerance used when `lambda` is given both directly and as `n + beta`.
pub const LAMBDA_CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("invalid state at t={t}: {reason}")]
    InvalidState { t: f64, reason: String },
    #[error("accumulation norm {0} outside [0, 1]")]
    AccumulationNorm(f64),
}

/// Exogenous constants of the model.
///
/// `lambda` is the sum of the amortization rate `beta` and the population
/// growth rate `n`. It can be supplied directly, in which case `n` and `beta`
/// are absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    n: Option<f64>,
    beta: Option<f64>,
    lambda: f64,
    mu: f64,
    d: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub mu: f64,
    pub d: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = ModelError;

    fn try_from(raw: RawParams) -> Result<Self, ModelError> {
        let lambda = match (raw.n, raw.beta, raw.lambda) {
            (Some(n), Some(beta), lambda) => {
                check_finite("n", n)?;
                check_finite("beta", beta)?;
                let sum = n + beta;
                if let Some(l) = lambda {
                    if (l - sum).abs() > LAMBDA_CONSISTENCY_TOL {
                        return Err(ModelError::InvalidParam {
                            field: "lambda",
                            reason: format!("lambda={l} disagrees with n+beta={sum}"),
                        });
                    }
                }
                sum
            }
            (None, None, Some(l)) => l,
            (None, None, None) => {
                return Err(ModelError::InvalidParam {
                    field: "lambda",
                    reason: "either lambda or both n and beta must be given".into(),
                })
            }
            _ => {
                return Err(ModelError::InvalidParam {
                    field: "n/beta",
                    reason: "n and beta must be given together".into(),
                })
            }
        };
        let p = ModelParams {
            n: raw.n,
            beta: raw.beta,
            lambda,
            mu: raw.mu,
            d: raw.d,
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            n: p.n,
            beta: p.beta,
            lambda: Some(p.lambda),
            mu: p.mu,
            d: p.d,
        }
    }
}

fn check_finite(field: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParam {
            field,
            reason: format!("{v} is not finite"),
        })
    }
}

impl ModelParams {
    /// Parameters with `lambda` given directly.
    pub fn new(lambda: f64, mu: f64, d: f64) -> Result<Self, ModelError> {
        RawParams {
            n: None,
            beta: None,
            lambda: Some(lambda),
            mu,
            d,
        }
        .try_into()
    }

    /// Parameters with `lambda = n + beta`.
    pub fn from_components(n: f64, beta: f64, mu: f64, d: f64) -> Result<Self, ModelError> {
        RawParams {
            n: Some(n),
            beta: Some(beta),
            lambda: None,
            mu,
            d,
        }
        .try_into()
    }

    /// The parameter set used for the Belarus scenario:
    /// `mu = 0.015`, `d = 0.2`, `lambda = 0.02`.
    pub fn belarus() -> Self {
        Self::new(0.02, 0.015, 0.2).expect("static parameters are valid")
    }

    fn validate(&self) -> Result<(), ModelError> {
        check_finite("lambda", self.lambda)?;
        check_finite("mu", self.mu)?;
        check_finite("d", self.d)?;
        if self.d <= 0.0 {
            return Err(ModelError::InvalidParam {
                field: "d",
                reason: format!("discount rate must be positive, got {}", self.d),
            });
        }
        if self.mu < 0.0 {
            return Err(ModelError::InvalidParam {
                field: "mu",
                reason: format!("effectiveness rate must be non-negative, got {}", self.mu),
            });
        }
        if self.lambda < 0.0 {
            return Err(ModelError::InvalidParam {
                field: "lambda",
                reason: format!("lambda must be non-negative, got {}", self.lambda),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> Option<f64> {
        self.n
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    /// `n + beta`, the decay rate of capital per man without investment.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Effectiveness rate `i_phi`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Discount rate.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// True when the discount rate exceeds the effectiveness rate, the
    /// regime in which the asymptotic analysis applies.
    pub fn is_asymptotic_regime(&self) -> bool {
        self.d > self.mu
    }
}

/// Per-capita state of the economy at time `t`.
///
/// Consumption per man and the accumulation norm are derived on demand from
/// `(r, p, omega)` so the balance identity holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    pub t: f64,
    /// Capital per man.
    pub r: f64,
    /// Output per man.
    pub p: f64,
    /// Saving per capital.
    pub omega: f64,
}

impl MacroState {
    /// Validated state: `r > 0`, `p > 0`, finite values and non-negative
    /// consumption per man.
    pub fn new(t: f64, r: f64, p: f64, omega: f64) -> Result<Self, ModelError> {
        let s = MacroState { t, r, p, omega };
        s.validate()?;
        Ok(s)
    }

    /// State given consumption per man instead of output per man.
    pub fn from_consumption(t: f64, r: f64, psi: f64, omega: f64) -> Result<Self, ModelError> {
        Self::new(t, r, balance_output(psi, omega, r), omega)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: String| ModelError::InvalidState { t: self.t, reason };
        if ![self.t, self.r, self.p, self.omega]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(bad("non-finite component".into()));
        }
        if self.r <= 0.0 {
            return Err(bad(format!(
                "capital per man must be positive, got {}",
                self.r
            )));
        }
        if self.p <= 0.0 {
            return Err(bad(format!(
                "output per man must be positive, got {}",
                self.p
            )));
        }
        if self.psi() < 0.0 {
            return Err(bad(format!("negative consumption per man {}", self.psi())));
        }
        Ok(())
    }

    /// Consumption per man `p - omega * r`.
    pub fn psi(&self) -> f64 {
        self.p - self.omega * self.r
    }

    /// Accumulation norm `omega * r / p`.
    pub fn delta(&self) -> f64 {
        self.omega * self.r / self.p
    }
}

/// Split of the yearly productivity increment into the extensive part and
/// the part due to growing effectiveness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductivityDecomposition {
    pub delta1: f64,
    pub delta2: f64,
    pub i_phi_observed: f64,
}

/// Output per man from the balance identity.
pub fn balance_output(psi: f64, omega: f64, r: f64) -> f64 {
    psi + omega * r
}

/// Consumption per man and saving per capital fixed by the accumulation
/// norm. Returns `(psi, omega)`.
pub fn objective_functions(delta: f64, p: f64, r: f64) -> Result<(f64, f64), ModelError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(ModelError::AccumulationNorm(delta));
    }
    Ok(((1.0 - delta) * p, delta * p / r))
}

/// Effectiveness rate: productivity growth corrected for capital deepening.
pub fn effectiveness_rate(i_p: f64, i_r: f64, delta: f64) -> f64 {
    i_p - delta * i_r
}

pub fn decompose_productivity(
    state: &MacroState,
    r_next: f64,
    p_next: f64,
) -> ProductivityDecomposition {
    // Productivity needed next year to keep both objective functions at the
    // current level.
    let baseline = state.psi() + state.omega * r_next;
    let delta1 = baseline - state.p;
    let delta2 = p_next - baseline;
    ProductivityDecomposition {
        delta1,
        delta2,
        i_phi_observed: delta2 / state.p,
    }
}

/// Right-hand sides `(dr/dt, dp/dt)` of the equations of motion.
///
/// Only `r` and `p` of `state` are used; the control is passed separately.
pub fn model_rhs(state: &MacroState, omega: f64, params: &ModelParams) -> (f64, f64) {
    let r_dot = (omega - params.lambda()) * state.r;
    let p_dot = params.mu() * state.p + omega * r_dot;
    (r_dot, p_dot)
}
