//! Consistency audit of yearly tables against the model identities.
//!
//! Imported tables are audited, never corrected.

use std::fmt;

use serde::Serialize;

use super::{check_rows, ScenarioError, YearRow};
use crate::model::effectiveness_rate;

/// Absolute gap between a stored index and the index recomputed from the
/// row values after one-decimal rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexDeviation {
    pub r: f64,
    pub psi: f64,
    pub p: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowAudit {
    pub year: i32,
    /// `(p - psi - omega r) / p`.
    pub balance_residual: f64,
    pub index_deviation: IndexDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairAudit {
    pub from_year: i32,
    pub to_year: i32,
    pub i_p: f64,
    pub i_r: f64,
    /// Accumulation norm `omega r / p` of the earlier year.
    pub delta: f64,
    pub implied_i_phi: f64,
    /// Saving per capital implied by capital growth, `r1 / r0 - 1 + lambda`.
    pub implied_omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditSummary {
    pub rows: usize,
    pub max_abs_balance_residual: f64,
    pub mean_i_phi: f64,
    pub min_i_phi: f64,
    pub max_i_phi: f64,
    pub mean_implied_omega: Option<f64>,
    pub max_index_deviation: IndexDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub rows: Vec<RowAudit>,
    pub pairs: Vec<PairAudit>,
    pub summary: AuditSummary,
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn deviation(row: &YearRow, base: &YearRow, is_base: bool) -> IndexDeviation {
    let dev = |stored: f64, value: f64, base: f64| {
        let recomputed = if is_base {
            100.0
        } else {
            round1(value / base * 100.0)
        };
        (stored - recomputed).abs()
    };
    IndexDeviation {
        r: dev(row.idx_r, row.r, base.r),
        psi: dev(row.idx_psi, row.psi, base.psi),
        p: dev(row.idx_p, row.p, base.p),
        omega: dev(row.idx_omega, row.omega, base.omega),
    }
}

/// Audit yearly rows. `lambda` enables the implied-saving column.
pub fn audit_table(rows: &[YearRow], lambda: Option<f64>) -> Result<AuditReport, ScenarioError> {
    check_rows(rows)?;
    let base = rows[0];
    let row_audits: Vec<RowAudit> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| RowAudit {
            year: row.year,
            balance_residual: row.balance_residual(),
            index_deviation: deviation(row, &base, i == 0),
        })
        .collect();

    let pairs: Vec<PairAudit> = rows
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let i_p = (b.p - a.p) / a.p;
            let i_r = (b.r - a.r) / a.r;
            let delta = a.omega * a.r / a.p;
            PairAudit {
                from_year: a.year,
                to_year: b.year,
                i_p,
                i_r,
                delta,
                implied_i_phi: effectiveness_rate(i_p, i_r, delta),
                implied_omega: lambda.map(|l| b.r / a.r - 1.0 + l),
            }
        })
        .collect();

    let n = pairs.len() as f64;
    let phis = pairs.iter().map(|p| p.implied_i_phi);
    let max_dev = row_audits.iter().fold(
        IndexDeviation {
            r: 0.0,
            psi: 0.0,
            p: 0.0,
            omega: 0.0,
        },
        |m, r| IndexDeviation {
            r: m.r.max(r.index_deviation.r),
            psi: m.psi.max(r.index_deviation.psi),
            p: m.p.max(r.index_deviation.p),
            omega: m.omega.max(r.index_deviation.omega),
        },
    );
    let summary = AuditSummary {
        rows: rows.len(),
        max_abs_balance_residual: row_audits
            .iter()
            .map(|r| r.balance_residual.abs())
            .fold(0.0, f64::max),
        mean_i_phi: phis.clone().sum::<f64>() / n,
        min_i_phi: phis.clone().fold(f64::INFINITY, f64::min),
        max_i_phi: phis.fold(f64::NEG_INFINITY, f64::max),
        mean_implied_omega: lambda
            .map(|_| pairs.iter().filter_map(|p| p.implied_omega).sum::<f64>() / n),
        max_index_deviation: max_dev,
    };
    Ok(AuditReport {
        rows: row_audits,
        pairs,
        summary,
    })
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>6} {:>12}   index deviation (r psi p omega)",
            "year", "balance"
        )?;
        for r in &self.rows {
            let d = &r.index_deviation;
            writeln!(
                f,
                "{:>6} {:>+11.4}%   {:.1} {:.1} {:.1} {:.1}",
                r.year,
                100.0 * r.balance_residual,
                d.r,
                d.psi,
                d.p,
                d.omega
            )?;
        }
        writeln!(f)?;
        writeln!(f, "{:>11} {:>10} {:>10}", "pair", "i_phi", "omega_impl")?;
        for p in &self.pairs {
            let w = p
                .implied_omega
                .map_or_else(|| "-".to_string(), |w| format!("{w:.5}"));
            writeln!(
                f,
                "{}-{} {:>10.5} {:>10}",
                p.from_year, p.to_year, p.implied_i_phi, w
            )?;
        }
        let s = &self.summary;
        writeln!(f)?;
        writeln!(f, "rows: {}", s.rows)?;
        writeln!(
            f,
            "max |balance residual|: {:.4}%",
            100.0 * s.max_abs_balance_residual
        )?;
        writeln!(
            f,
            "implied i_phi: mean {:.5} min {:.5} max {:.5}",
            s.mean_i_phi, s.min_i_phi, s.max_i_phi
        )?;
        if let Some(w) = s.mean_implied_omega {
            writeln!(f, "mean implied omega: {w:.5}")?;
        }
        let d = &s.max_index_deviation;
        write!(
            f,
            "max index deviation: r {:.2} psi {:.2} p {:.2} omega {:.2}",
            d.r, d.psi, d.p, d.omega
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first_rows() -> Vec<YearRow> {
        let mut b = YearRow::new(2001, 803.6, 113.3, 153.5, 0.049);
        b.idx_r = 103.0;
        b.idx_psi = 102.1;
        b.idx_p = 102.3;
        b.idx_omega = 99.3;
        vec![YearRow::new(2000, 780.0, 111.0, 150.0, 0.05), b]
    }

    #[test]
    fn base_row_balances_exactly() {
        let report = audit_table(&first_rows(), Some(0.02)).unwrap();
        assert_eq!(report.rows[0].balance_residual, 0.0);
    }

    #[test]
    fn first_pair_effectiveness() {
        let report = audit_table(&first_rows(), Some(0.02)).unwrap();
        let pair = &report.pairs[0];
        assert!((pair.implied_i_phi - 0.015467).abs() < 1e-5);
        assert!((pair.implied_omega.unwrap() - 0.0502564).abs() < 1e-6);
        assert!((pair.delta - 0.26).abs() < 1e-15);
        let dev = &report.rows[1].index_deviation;
        assert!(dev.r < 1e-9 && dev.psi < 1e-9 && dev.p < 1e-9);
        assert!((dev.omega - 1.3).abs() < 1e-9);
    }

    #[test]
    fn lambda_is_optional() {
        let report = audit_table(&first_rows(), None).unwrap();
        assert!(report.pairs[0].implied_omega.is_none());
        assert!(report.summary.mean_implied_omega.is_none());
        assert!(report.to_string().contains("max index deviation"));
    }

    #[test]
    fn needs_two_rows() {
        assert!(audit_table(&first_rows()[..1], None).is_err());
    }
}
