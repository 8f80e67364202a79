//! CSV and JSON serialization of scenario tables.
//!
//! CSV columns are `year,r,r_idx,psi,psi_idx,p,p_idx,omega,omega_idx` with
//! values written at full (round-trip) precision. Lines starting with `#`
//! are comments and are skipped on import.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{fill_indices, ScenarioError, ScenarioTable, YearRow};

pub const CSV_HEADER: [&str; 9] = [
    "year",
    "r",
    "r_idx",
    "psi",
    "psi_idx",
    "p",
    "p_idx",
    "omega",
    "omega_idx",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn csv_err(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Csv(e.to_string())
}

pub fn write_csv<W: Write>(table: &ScenarioTable, writer: W) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record([
            row.year.to_string(),
            row.r.to_string(),
            row.idx_r.to_string(),
            row.psi.to_string(),
            row.idx_psi.to_string(),
            row.p.to_string(),
            row.idx_p.to_string(),
            row.omega.to_string(),
            row.idx_omega.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)?;
    Ok(())
}

pub fn write_json<W: Write>(table: &ScenarioTable, mut writer: W) -> Result<(), ScenarioError> {
    serde_json::to_writer_pretty(&mut writer, table)?;
    writeln!(writer).map_err(csv_err)?;
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<ScenarioTable, ScenarioError> {
    let table: ScenarioTable = serde_json::from_reader(reader)?;
    super::check_rows(&table.rows)?;
    Ok(table)
}

/// Write `table` to `path`.
pub fn export(table: &ScenarioTable, format: Format, path: &Path) -> Result<(), ScenarioError> {
    let io_err = |source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut buf = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(table, &mut buf)?,
        Format::Json => write_json(table, &mut buf)?,
    }
    buf.flush().map_err(io_err)
}

fn parse_number(field: &str, column: &str, line: u64) -> Result<Option<f64>, ScenarioError> {
    let s = field.trim();
    if s.is_empty() {
        return Ok(None);
    }
    // Comma decimal separators are a locale artifact.
    s.replace(',', ".").parse::<f64>().map(Some).map_err(|_| {
        ScenarioError::Csv(format!(
            "line {line}: column `{column}`: cannot parse {s:?}"
        ))
    })
}

/// Read yearly rows. Required columns: `year,r,psi,p,omega`. Index columns
/// (`r_idx` or `idx_r`, and so on) are kept when present; blank or missing
/// index cells are recomputed from the values (the first row is the base
/// year, index 100).
pub fn read_csv<R: Read>(mut reader: R) -> Result<Vec<YearRow>, ScenarioError> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(csv_err)?;
    let header_line = text
        .lines()
        .find(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .unwrap_or("");
    let delimiter = if header_line.contains(';') {
        b';'
    } else {
        b','
    };

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let find = |names: &[&str]| headers.iter().position(|h| names.contains(&h.as_str()));
    let require = |name: &'static str| {
        find(&[name]).ok_or_else(|| ScenarioError::Csv(format!("missing required column `{name}`")))
    };
    let cols = [
        require("year")?,
        require("r")?,
        require("psi")?,
        require("p")?,
        require("omega")?,
    ];
    let idx_cols = [
        find(&["r_idx", "idx_r"]),
        find(&["psi_idx", "idx_psi"]),
        find(&["p_idx", "idx_p"]),
        find(&["omega_idx", "idx_omega"]),
    ];

    let mut rows = Vec::new();
    let mut given: Vec<[Option<f64>; 4]> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let get = |i: usize, name: &str| -> Result<f64, ScenarioError> {
            parse_number(record.get(i).unwrap_or(""), name, line)?
                .ok_or_else(|| ScenarioError::Csv(format!("line {line}: empty `{name}`")))
        };
        let year_text = record.get(cols[0]).unwrap_or("").trim();
        let year: i32 = year_text
            .parse()
            .map_err(|_| ScenarioError::Csv(format!("line {line}: bad year {year_text:?}")))?;
        rows.push(YearRow::new(
            year,
            get(cols[1], "r")?,
            get(cols[2], "psi")?,
            get(cols[3], "p")?,
            get(cols[4], "omega")?,
        ));
        let mut idx = [None; 4];
        for (slot, col) in idx.iter_mut().zip(idx_cols) {
            if let Some(c) = col {
                *slot = parse_number(record.get(c).unwrap_or(""), &headers[c], line)?;
            }
        }
        given.push(idx);
    }
    super::check_rows(&rows)?;

    fill_indices(&mut rows);
    for (row, idx) in rows.iter_mut().zip(&given) {
        let [r, psi, p, omega] = *idx;
        if let Some(v) = r {
            row.idx_r = v;
        }
        if let Some(v) = psi {
            row.idx_psi = v;
        }
        if let Some(v) = p {
            row.idx_p = v;
        }
        if let Some(v) = omega {
            row.idx_omega = v;
        }
    }
    Ok(rows)
}
