//! JSON scenario configs with strict validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::SINGULAR_COSTATE_TOL;
use crate::model::{MacroState, ModelParams, RawParams};
use crate::ode::DEFAULT_STEP;
use crate::scenario::Format;

/// Balance tolerance when both `p0` and `psi0` are given.
pub const BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// How the initial costate `y_p(0)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Yp0Choice {
    /// `1 / (d - mu)`.
    Default,
    /// Fitted to `omega_series`.
    Calibrate,
    Value(f64),
}

impl std::str::FromStr for Yp0Choice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "default" => Ok(Yp0Choice::Default),
            "calibrate" => Ok(Yp0Choice::Calibrate),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Yp0Choice::Value)
                .ok_or_else(|| {
                    format!("expected a number, \"default\" or \"calibrate\", got {other:?}")
                }),
        }
    }
}

impl std::fmt::Display for Yp0Choice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Yp0Choice::Default => f.write_str("default"),
            Yp0Choice::Calibrate => f.write_str("calibrate"),
            Yp0Choice::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawYp0 {
    Number(f64),
    Word(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    r0: f64,
    #[serde(default)]
    p0: Option<f64>,
    #[serde(default)]
    psi0: Option<f64>,
    omega0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default)]
    yp0: Option<RawYp0>,
    horizon_years: u32,
    #[serde(default)]
    step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawFormat {
    Csv,
    Json,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    format: Option<RawFormat>,
    #[serde(default)]
    path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: RawParams,
    initial: RawInitial,
    #[serde(default)]
    solver: Option<RawSolver>,
    #[serde(default)]
    output: Option<RawOutput>,
    #[serde(default)]
    omega_series: Option<Vec<f64>>,
    #[serde(default)]
    base_year: Option<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConfig {
    pub r0: f64,
    pub p0: f64,
    pub psi0: f64,
    pub omega0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub yp0: Yp0Choice,
    pub horizon_years: u32,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
}

/// Validated scenario description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub initial: InitialConfig,
    /// Absent only when `omega_series` is given.
    pub solver: Option<SolverConfig>,
    pub output: OutputConfig,
    pub omega_series: Option<Vec<f64>>,
    pub base_year: i32,
}

impl ScenarioConfig {
    pub fn initial_state(&self) -> MacroState {
        MacroState {
            t: 0.0,
            r: self.initial.r0,
            p: self.initial.p0,
            omega: self.initial.omega0,
        }
    }

    /// Projection length: the solver horizon, otherwise the number of
    /// yearly steps covered by `omega_series`.
    pub fn horizon_years(&self) -> u32 {
        match (&self.solver, &self.omega_series) {
            (Some(s), _) => s.horizon_years,
            (None, Some(series)) => (series.len() - 1) as u32,
            (None, None) => unreachable!("validated config has a solver or a series"),
        }
    }

    pub fn step(&self) -> f64 {
        self.solver.map_or(DEFAULT_STEP, |s| s.step)
    }

    pub fn yp0(&self) -> Yp0Choice {
        self.solver.map_or(Yp0Choice::Default, |s| s.yp0)
    }

    /// Resolved parameters as `(key, value)` pairs, in a fixed order.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        let mut out = Vec::new();
        if let (Some(n), Some(beta)) = (p.n(), p.beta()) {
            out.push(("n", n.to_string()));
            out.push(("beta", beta.to_string()));
        }
        out.push(("lambda", p.lambda().to_string()));
        out.push(("mu", p.mu().to_string()));
        out.push(("d", p.d().to_string()));
        out.push(("r0", self.initial.r0.to_string()));
        out.push(("p0", self.initial.p0.to_string()));
        out.push(("psi0", self.initial.psi0.to_string()));
        out.push(("omega0", self.initial.omega0.to_string()));
        out.push(("base_year", self.base_year.to_string()));
        out.push(("horizon_years", self.horizon_years().to_string()));
        out.push(("step", self.step().to_string()));
        out.push(("yp0", self.yp0().to_string()));
        if let Some(series) = &self.omega_series {
            let values: Vec<String> = series.iter().map(|v| v.to_string()).collect();
            out.push(("omega_series", values.join(" ")));
        }
        out
    }
}

fn check_rate(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > -1.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("rate {v} must lie in (-1, 1)")))
    }
}

/// Check that `step` divides one year into a whole number of steps.
pub fn check_step(field: &str, step: f64) -> Result<(), ConfigError> {
    let per_year = 1.0 / step;
    if step.is_finite() && step > 0.0 && step <= 1.0 && (per_year - per_year.round()).abs() < 1e-9 {
        Ok(())
    } else {
        Err(invalid(field, format!("step {step} must divide 1.0")))
    }
}

fn validate(raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
    for (field, v) in [
        ("params.n", raw.params.n),
        ("params.beta", raw.params.beta),
        ("params.lambda", raw.params.lambda),
    ] {
        if let Some(v) = v {
            check_rate(field, v)?;
        }
    }
    check_rate("params.mu", raw.params.mu)?;
    check_rate("params.d", raw.params.d)?;
    let params = ModelParams::try_from(raw.params).map_err(|e| invalid("params", e.to_string()))?;
    if (params.d() - params.mu()).abs() <= SINGULAR_COSTATE_TOL {
        return Err(invalid(
            "params.d",
            format!(
                "d = mu = {} makes the costate closed form singular",
                params.d()
            ),
        ));
    }

    let ini = raw.initial;
    check_rate("initial.omega0", ini.omega0)?;
    if !(ini.r0.is_finite() && ini.r0 > 0.0) {
        return Err(invalid(
            "initial.r0",
            format!("capital per man {} must be positive", ini.r0),
        ));
    }
    let (p0, psi0) = match (ini.p0, ini.psi0) {
        (Some(p0), None) => (p0, p0 - ini.omega0 * ini.r0),
        (None, Some(psi0)) => (psi0 + ini.omega0 * ini.r0, psi0),
        (Some(p0), Some(psi0)) => {
            let implied = psi0 + ini.omega0 * ini.r0;
            if (p0 - implied).abs() > BALANCE_TOL * p0.abs().max(1.0) {
                return Err(invalid(
                    "initial.psi0",
                    format!(
                        "p0={p0} and psi0={psi0} violate p = psi + omega r (implied p0={implied})"
                    ),
                ));
            }
            (p0, psi0)
        }
        (None, None) => return Err(invalid("initial.p0", "one of p0 or psi0 is required")),
    };
    if !(p0.is_finite() && p0 > 0.0) {
        return Err(invalid(
            "initial.p0",
            format!("output per man {p0} must be positive"),
        ));
    }
    if !(psi0.is_finite() && psi0 >= 0.0) {
        return Err(invalid(
            "initial.psi0",
            format!("consumption per man {psi0} must be non-negative"),
        ));
    }
    let initial = InitialConfig {
        r0: ini.r0,
        p0,
        psi0,
        omega0: ini.omega0,
    };

    if let Some(series) = &raw.omega_series {
        if series.len() < 2 {
            return Err(invalid("omega_series", "needs at least two yearly values"));
        }
        for (k, &w) in series.iter().enumerate() {
            check_rate(&format!("omega_series[{k}]"), w)?;
        }
        if (series[0] - ini.omega0).abs() > 1e-12 {
            return Err(invalid(
                "omega_series[0]",
                format!("{} differs from initial.omega0={}", series[0], ini.omega0),
            ));
        }
    }

    let solver = match raw.solver {
        Some(s) => {
            if s.horizon_years < 1 {
                return Err(invalid(
                    "solver.horizon_years",
                    "horizon must be at least one year",
                ));
            }
            let step = s.step.unwrap_or(DEFAULT_STEP);
            check_step("solver.step", step)?;
            let yp0 = match s.yp0 {
                None => Yp0Choice::Default,
                Some(RawYp0::Number(v)) => Yp0Choice::Value(v),
                Some(RawYp0::Word(w)) => match w.as_str() {
                    "default" => Yp0Choice::Default,
                    "calibrate" => Yp0Choice::Calibrate,
                    _ => {
                        return Err(invalid(
                            "solver.yp0",
                            format!("expected a number, \"default\" or \"calibrate\", got {w:?}"),
                        ))
                    }
                },
            };
            if yp0 == Yp0Choice::Calibrate && raw.omega_series.is_none() {
                return Err(invalid("solver.yp0", "\"calibrate\" requires omega_series"));
            }
            Some(SolverConfig {
                yp0,
                horizon_years: s.horizon_years,
                step,
            })
        }
        None if raw.omega_series.is_some() => None,
        None => return Err(invalid("solver", "required unless omega_series is given")),
    };

    let output = match raw.output {
        Some(o) => OutputConfig {
            format: match o.format {
                Some(RawFormat::Json) => Format::Json,
                _ => Format::Csv,
            },
            path: o.path,
        },
        None => OutputConfig {
            format: Format::Csv,
            path: None,
        },
    };

    Ok(ScenarioConfig {
        params,
        initial,
        solver,
        output,
        omega_series: raw.omega_series,
        base_year: raw.base_year.unwrap_or(0),
    })
}

/// Parse and validate a config document. `origin` names it in errors.
pub fn parse_config(text: &str, origin: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}
