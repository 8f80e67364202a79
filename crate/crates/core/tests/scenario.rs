use std::path::PathBuf;

use effgrowth::control::{asymptotic_capital, AsymptoticSolution};
use effgrowth::scenario::{
    audit_table, index_columns, read_csv, read_json, simulate_years, write_csv, write_json,
    OmegaSource, Provenance, ScenarioError, ScenarioTable, YearRow,
};
use effgrowth::{MacroState, ModelParams};
use proptest::prelude::*;

const TABLE1_OMEGA: [f64; 21] = [
    0.050, 0.049, 0.048, 0.047, 0.046, 0.046, 0.045, 0.045, 0.044, 0.044, 0.043, 0.043, 0.042,
    0.042, 0.041, 0.041, 0.040, 0.040, 0.040, 0.039, 0.039,
];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn start() -> MacroState {
    MacroState::new(0.0, 780.0, 150.0, 0.05).unwrap()
}

#[test]
fn audit_of_printed_table() {
    let rows = read_csv(std::fs::File::open(fixture("table1.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0].idx_r, 100.0);
    let report = audit_table(&rows, Some(0.02)).unwrap();
    assert_eq!(report.rows[0].balance_residual, 0.0);
    let oracle_2020 = (233.3 - 168.3 - 0.039 * 1344.6) / 233.3;
    assert!((report.rows[20].balance_residual - oracle_2020).abs() < 1e-12);
    assert!((oracle_2020 - 0.054).abs() < 0.001);
    assert!((0.014..=0.017).contains(&report.summary.mean_i_phi));
}

#[test]
fn constant_saving_against_closed_form() {
    let p = ModelParams::belarus();
    let w = 0.05;
    let table =
        simulate_years(&p, &start(), OmegaSource::Series(&[w; 10]), 10, 2000, 0.01).unwrap();
    let g = w - p.lambda();
    let mu = p.mu();
    for (k, row) in table.rows.iter().enumerate() {
        let t = k as f64;
        let r = 780.0 * (g * t).exp();
        let pp =
            150.0 * (mu * t).exp() + w * g * 780.0 * ((g * t).exp() - (mu * t).exp()) / (g - mu);
        assert!(((row.r - r) / r).abs() < 1e-10, "year {}", row.year);
        assert!(((row.p - pp) / pp).abs() < 1e-10, "year {}", row.year);
        assert!((row.psi - (pp - w * r)).abs() < 1e-7);
    }
    assert_eq!(table.provenance, Provenance::FixedSeries { step: 0.01 });
}

#[test]
fn asymptotic_projection_matches_closed_form_capital() {
    let p = ModelParams::belarus();
    let table = simulate_years(&p, &start(), OmegaSource::Asymptotic, 30, 0, 0.01).unwrap();
    let sol = AsymptoticSolution::new(&p, 0.05, 780.0).unwrap();
    for (k, row) in table.rows.iter().enumerate() {
        let r = asymptotic_capital(k as f64, sol.r_tilde, sol.c, &p);
        assert!(((row.r - r) / r).abs() < 1e-9, "year {k}");
        assert!((row.omega - sol.omega(k as f64)).abs() < 1e-15);
    }
}

#[test]
fn series_regeneration_matches_golden_file() {
    let p = ModelParams::belarus();
    let table = simulate_years(
        &p,
        &start(),
        OmegaSource::Series(&TABLE1_OMEGA),
        20,
        2000,
        0.01,
    )
    .unwrap();
    let golden = read_csv(std::fs::File::open(fixture("table1_regenerated.csv")).unwrap()).unwrap();
    assert_eq!(golden.len(), table.rows.len());
    for (a, b) in table.rows.iter().zip(&golden) {
        assert_eq!(a.year, b.year);
        for (x, y) in [(a.r, b.r), (a.p, b.p), (a.psi, b.psi), (a.idx_r, b.idx_r)] {
            assert!(((x - y) / y).abs() < 1e-12, "year {}", a.year);
        }
    }
}

#[test]
fn infeasible_series_reports_year() {
    let p = ModelParams::belarus();
    let err = simulate_years(
        &p,
        &start(),
        OmegaSource::Series(&[0.05, 0.9]),
        2,
        2000,
        0.01,
    )
    .unwrap_err();
    assert!(
        matches!(err, ScenarioError::InfeasibleConsumption { year: 2001, .. }),
        "{err}"
    );
    let short = simulate_years(&p, &start(), OmegaSource::Series(&[0.05]), 3, 2000, 0.01);
    assert!(matches!(short, Err(ScenarioError::InvalidInput(_))));
}

#[test]
fn solver_failure_reports_year() {
    let p = ModelParams::belarus();
    let yp0 = 1.0 / (p.d() - p.mu());
    let err =
        simulate_years(&p, &start(), OmegaSource::Solver { yp0 }, 20, 2000, 0.01).unwrap_err();
    assert!(
        matches!(err, ScenarioError::AtYear { year: 2012, .. }),
        "{err}"
    );
}

#[test]
fn json_round_trip_keeps_provenance() {
    let p = ModelParams::belarus();
    let table = simulate_years(
        &p,
        &start(),
        OmegaSource::Solver { yp0: 40.0 },
        5,
        2000,
        0.01,
    )
    .unwrap();
    let mut buf = Vec::new();
    write_json(&table, &mut buf).unwrap();
    let back = read_json(buf.as_slice()).unwrap();
    assert_eq!(back, table);
    assert_eq!(
        back.provenance,
        Provenance::Solver {
            yp0: 40.0,
            step: 0.01
        }
    );
}

fn rows() -> impl Strategy<Value = Vec<YearRow>> {
    (
        1900..2100i32,
        prop::collection::vec((1.0..1e4f64, 0.0..1e3f64, 1.0..1e3f64, -0.5..0.9f64), 2..12),
    )
        .prop_map(|(y0, vals)| {
            vals.into_iter()
                .enumerate()
                .map(|(i, (r, psi, p, w))| YearRow::new(y0 + i as i32, r, psi, p, w))
                .collect()
        })
}

proptest! {
    #[test]
    fn csv_round_trip(rows in rows()) {
        let table = index_columns(
            ScenarioTable::new(ModelParams::belarus(), Provenance::FixedSeries { step: 0.1 }, rows)
                .unwrap(),
        );
        let mut buf = Vec::new();
        write_csv(&table, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        for (a, b) in table.rows.iter().zip(&back) {
            prop_assert_eq!(a.year, b.year);
            prop_assert_eq!(a.r.to_bits(), b.r.to_bits());
            prop_assert_eq!(a.psi.to_bits(), b.psi.to_bits());
            prop_assert_eq!(a.p.to_bits(), b.p.to_bits());
            prop_assert_eq!(a.omega.to_bits(), b.omega.to_bits());
            prop_assert_eq!(a.idx_r.to_bits(), b.idx_r.to_bits());
            prop_assert!(a.idx_omega == b.idx_omega || (a.idx_omega.is_nan() && b.idx_omega.is_nan()));
        }
    }

    #[test]
    fn indices_are_idempotent(rows in rows()) {
        let table =
            ScenarioTable::new(ModelParams::belarus(), Provenance::FixedSeries { step: 0.1 }, rows)
                .unwrap();
        let once = index_columns(table);
        let twice = index_columns(once.clone());
        prop_assert_eq!(once.rows[0].idx_r, 100.0);
        prop_assert_eq!(once.rows[0].idx_p, 100.0);
        for (a, b) in once.rows.iter().zip(&twice.rows) {
            prop_assert_eq!(a.idx_r.to_bits(), b.idx_r.to_bits());
            prop_assert_eq!(a.idx_p.to_bits(), b.idx_p.to_bits());
        }
    }

    #[test]
    fn projections_are_deterministic(w in 0.01..0.1f64, n in 1usize..6) {
        let p = ModelParams::belarus();
        let s = MacroState::new(0.0, 780.0, 150.0, w).unwrap();
        let series = vec![w; n];
        let a = simulate_years(&p, &s, OmegaSource::Series(&series), n, 0, 0.05).unwrap();
        let b = simulate_years(&p, &s, OmegaSource::Series(&series), n, 0, 0.05).unwrap();
        prop_assert_eq!(a, b);
    }
}
