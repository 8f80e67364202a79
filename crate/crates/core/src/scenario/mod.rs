//! Yearly macroeconomic projections with base-year indices.

mod audit;
mod io;

pub use audit::{audit_table, AuditReport, AuditSummary, IndexDeviation, PairAudit, RowAudit};
pub use io::{export, read_csv, read_json, write_csv, write_json, Format};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::control::{asymptotic_omega, solve_optimal_trajectory, ControlError};
use crate::model::{model_rhs, MacroState, ModelParams};
use crate::ode::{try_integrate_with, OdeError};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("negative consumption per man {psi} in year {year}")]
    InfeasibleConsumption { year: i32, psi: f64 },
    #[error("invalid scenario: {0}")]
    InvalidInput(String),
    #[error("year {year}: {source}")]
    AtYear {
        year: i32,
        #[source]
        source: ControlError,
    },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<OdeError> for ScenarioError {
    fn from(e: OdeError) -> Self {
        ScenarioError::Control(e.into())
    }
}

/// One year of a projection. Indices are percentages of the base-year
/// values computed from unrounded values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearRow {
    pub year: i32,
    pub r: f64,
    pub psi: f64,
    pub p: f64,
    pub omega: f64,
    #[serde(with = "nan_as_null")]
    pub idx_r: f64,
    #[serde(with = "nan_as_null")]
    pub idx_psi: f64,
    #[serde(with = "nan_as_null")]
    pub idx_p: f64,
    #[serde(with = "nan_as_null")]
    pub idx_omega: f64,
}

impl YearRow {
    /// Row with indices left at 100; see [`index_columns`].
    pub fn new(year: i32, r: f64, psi: f64, p: f64, omega: f64) -> Self {
        YearRow {
            year,
            r,
            psi,
            p,
            omega,
            idx_r: 100.0,
            idx_psi: 100.0,
            idx_p: 100.0,
            idx_omega: 100.0,
        }
    }

    /// Relative violation of the balance identity, `(p - psi - omega r) / p`.
    pub fn balance_residual(&self) -> f64 {
        (self.p - self.psi - self.omega * self.r) / self.p
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// How the saving-per-capital path of a scenario was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Solver { yp0: f64, step: f64 },
    FixedSeries { step: f64 },
    Asymptotic { step: f64 },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Solver { yp0, step } => write!(f, "solver (yp0={yp0}, step={step})"),
            Provenance::FixedSeries { step } => write!(f, "fixed series (step={step})"),
            Provenance::Asymptotic { step } => write!(f, "asymptotic (step={step})"),
        }
    }
}

/// Source of the control for [`simulate_years`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaSource<'a> {
    /// Optimal trajectory for the given initial costate.
    Solver { yp0: f64 },
    /// Yearly values held constant within each year; `series[k]` applies on
    /// `[k, k + 1)`.
    Series(&'a [f64]),
    /// Asymptotic closed form reset at the initial control.
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTable {
    pub params: ModelParams,
    pub provenance: Provenance,
    pub rows: Vec<YearRow>,
}

impl ScenarioTable {
    pub fn new(
        params: ModelParams,
        provenance: Provenance,
        rows: Vec<YearRow>,
    ) -> Result<Self, ScenarioError> {
        check_rows(&rows)?;
        Ok(ScenarioTable {
            params,
            provenance,
            rows,
        })
    }

    pub fn base(&self) -> &YearRow {
        &self.rows[0]
    }

    pub fn last(&self) -> &YearRow {
        self.rows.last().expect("tables hold at least two rows")
    }

    /// Text rendering with display rounding: values to one decimal (saving
    /// per capital to three), indices to one decimal, base-year indices
    /// blank.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>6} {:>10} {:>7} {:>10} {:>7} {:>10} {:>7} {:>8} {:>7}\n",
            "year", "r", "%", "psi", "%", "p", "%", "omega", "%"
        ));
        for (i, row) in self.rows.iter().enumerate() {
            let idx = |v: f64| {
                if i == 0 {
                    String::new()
                } else {
                    format!("{v:.1}")
                }
            };
            out.push_str(&format!(
                "{:>6} {:>10.1} {:>7} {:>10.1} {:>7} {:>10.1} {:>7} {:>8.3} {:>7}\n",
                row.year,
                row.r,
                idx(row.idx_r),
                row.psi,
                idx(row.idx_psi),
                row.p,
                idx(row.idx_p),
                row.omega,
                idx(row.idx_omega),
            ));
        }
        out
    }
}

pub(crate) fn check_rows(rows: &[YearRow]) -> Result<(), ScenarioError> {
    if rows.len() < 2 {
        return Err(ScenarioError::InvalidInput(format!(
            "a table needs at least two rows, got {}",
            rows.len()
        )));
    }
    if let Some(w) = rows.windows(2).find(|w| w[1].year != w[0].year + 1) {
        return Err(ScenarioError::InvalidInput(format!(
            "years not consecutive: {} followed by {}",
            w[0].year, w[1].year
        )));
    }
    Ok(())
}

fn index(value: f64, base: f64) -> f64 {
    if base == 0.0 {
        f64::NAN
    } else {
        value / base * 100.0
    }
}

/// Fill the index columns relative to the first row.
pub fn index_columns(mut table: ScenarioTable) -> ScenarioTable {
    fill_indices(&mut table.rows);
    table
}

pub(crate) fn fill_indices(rows: &mut [YearRow]) {
    let Some(&base) = rows.first() else {
        return;
    };
    for (i, row) in rows.iter_mut().enumerate() {
        if i == 0 {
            row.idx_r = 100.0;
            row.idx_psi = 100.0;
            row.idx_p = 100.0;
            row.idx_omega = 100.0;
        } else {
            row.idx_r = index(row.r, base.r);
            row.idx_psi = index(row.psi, base.psi);
            row.idx_p = index(row.p, base.p);
            row.idx_omega = index(row.omega, base.omega);
        }
    }
}

/// Recommended yearly investment volume `K * omega`.
pub fn recommend_investment(capital_stock: f64, omega: f64) -> f64 {
    capital_stock * omega
}

fn row_from_state(year: i32, s: &MacroState) -> YearRow {
    YearRow::new(year, s.r, s.psi(), s.p, s.omega)
}

/// Project `n_years` years from `initial` (taken as the base year).
///
/// The equations of motion are integrated with RK4 at `step` (which must
/// divide one year) and sampled at year boundaries.
pub fn simulate_years(
    params: &ModelParams,
    initial: &MacroState,
    source: OmegaSource<'_>,
    n_years: usize,
    base_year: i32,
    step: f64,
) -> Result<ScenarioTable, ScenarioError> {
    if n_years == 0 {
        return Err(ScenarioError::InvalidInput("need at least one year".into()));
    }
    let per_year = 1.0 / step;
    if !(step > 0.0 && (per_year - per_year.round()).abs() < 1e-9) {
        return Err(ScenarioError::InvalidInput(format!(
            "step {step} does not divide one year"
        )));
    }
    initial.validate().map_err(ControlError::from)?;
    if initial.t != 0.0 {
        return Err(ScenarioError::InvalidInput(
            "initial state must be at t = 0".into(),
        ));
    }

    let (mut rows, provenance) = match source {
        OmegaSource::Solver { yp0 } => {
            let traj = solve_optimal_trajectory(params, initial, yp0, n_years as f64, step)
                .map_err(|e| match e.time() {
                    Some(t) => ScenarioError::AtYear {
                        year: base_year + t.floor() as i32,
                        source: e,
                    },
                    None => ScenarioError::Control(e),
                })?;
            let rows = (0..=n_years)
                .map(|k| {
                    let s = traj
                        .at_year(k)
                        .expect("grid with step dividing a year hits every year");
                    row_from_state(base_year + k as i32, s)
                })
                .collect();
            (rows, Provenance::Solver { yp0, step })
        }
        OmegaSource::Series(series) => {
            if series.len() < n_years {
                return Err(ScenarioError::InvalidInput(format!(
                    "omega series has {} values, need at least {n_years}",
                    series.len()
                )));
            }
            if (series[0] - initial.omega).abs() > 1e-12 {
                return Err(ScenarioError::InvalidInput(format!(
                    "omega series starts at {} but the initial state has omega={}",
                    series[0], initial.omega
                )));
            }
            let at_year = |k: usize, _t: f64| series[k.min(series.len() - 1)];
            (
                project(params, initial, n_years, base_year, step, at_year)?,
                Provenance::FixedSeries { step },
            )
        }
        OmegaSource::Asymptotic => {
            let omega_inf = initial.omega;
            asymptotic_omega(0.0, omega_inf, params)?;
            let at = |_k: usize, t: f64| {
                asymptotic_omega(t, omega_inf, params).expect("start checked above")
            };
            (
                project(params, initial, n_years, base_year, step, at)?,
                Provenance::Asymptotic { step },
            )
        }
    };
    fill_indices(&mut rows);
    ScenarioTable::new(*params, provenance, rows)
}

/// Integrate `(r, p)` year by year; `omega(k, t)` gives the control at time
/// `t` within year `k`.
fn project<W>(
    params: &ModelParams,
    initial: &MacroState,
    n_years: usize,
    base_year: i32,
    step: f64,
    omega: W,
) -> Result<Vec<YearRow>, ScenarioError>
where
    W: Fn(usize, f64) -> f64,
{
    let mut rows = Vec::with_capacity(n_years + 1);
    rows.push(row_from_state(base_year, initial));
    let (mut r, mut p) = (initial.r, initial.p);
    for k in 0..n_years {
        let year = base_year + k as i32;
        let t0 = k as f64;
        let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2], ScenarioError> {
            let w = omega(k, t);
            let s = MacroState {
                t,
                r: y[0],
                p: y[1],
                omega: w,
            };
            let (r_dot, p_dot) = model_rhs(&s, w, params);
            Ok([r_dot, p_dot])
        };
        let accept = |t: f64, y: &[f64; 2]| -> Result<(), ScenarioError> {
            let psi = y[1] - omega(k, t) * y[0];
            if psi < 0.0 {
                Err(ScenarioError::InfeasibleConsumption { year, psi })
            } else if y[0] <= 0.0 || y[1] <= 0.0 {
                Err(ScenarioError::InvalidInput(format!(
                    "state left the positive quadrant in year {year}"
                )))
            } else {
                Ok(())
            }
        };
        let grid = try_integrate_with(rhs, t0, [r, p], t0 + 1.0, step, accept)?;
        [r, p] = grid.last().1;
        let w = omega(k + 1, t0 + 1.0);
        let state = MacroState {
            t: t0 + 1.0,
            r,
            p,
            omega: w,
        };
        if state.psi() < 0.0 {
            return Err(ScenarioError::InfeasibleConsumption {
                year: year + 1,
                psi: state.psi(),
            });
        }
        rows.push(row_from_state(year + 1, &state));
    }
    Ok(rows)
}
