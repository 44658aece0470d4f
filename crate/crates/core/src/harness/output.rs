//! CSV, JSON and snapshot artifacts.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::diagnostics::LyapunovSample;
use crate::error::{Error, Result};
use crate::field::State;
use crate::snapshot;

/// Column order of every time-series CSV.
pub const COLUMNS: [&str; 10] = [
    "t", "X0", "X1", "Xc", "Y1", "W", "perp_h10", "avg_h10", "gap_h10", "pulse_x",
];

/// One CSV row. `None` is written as an empty cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Row {
    pub t: f64,
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    pub xc: Option<f64>,
    pub y1: Option<f64>,
    pub w: Option<f64>,
    pub perp_h10: Option<f64>,
    pub avg_h10: Option<f64>,
    pub gap_h10: Option<f64>,
    pub pulse_x: Option<f64>,
}

impl Row {
    fn cells(&self) -> [Option<f64>; 10] {
        [
            Some(self.t),
            self.x0,
            self.x1,
            self.xc,
            self.y1,
            self.w,
            self.perp_h10,
            self.avg_h10,
            self.gap_h10,
            self.pulse_x,
        ]
    }

    fn from_cells(c: [Option<f64>; 10]) -> Option<Self> {
        Some(Self {
            t: c[0]?,
            x0: c[1],
            x1: c[2],
            xc: c[3],
            y1: c[4],
            w: c[5],
            perp_h10: c[6],
            avg_h10: c[7],
            gap_h10: c[8],
            pulse_x: c[9],
        })
    }
}

/// Surface-run rows: every Lyapunov column except `Y1` and `gap_h10`.
pub fn surface_rows(samples: &[LyapunovSample<f64>]) -> Vec<Row> {
    samples
        .iter()
        .map(|s| Row {
            t: s.t,
            x0: Some(s.x0),
            x1: Some(s.x1),
            xc: s.xc,
            y1: s.y1,
            w: Some(s.w),
            perp_h10: Some(s.perp_h10),
            avg_h10: Some(s.avg_h10),
            gap_h10: s.gap_h10,
            pulse_x: None,
        })
        .collect()
}

/// Shortest round-trip representation in scientific notation.
pub fn format_number(v: f64) -> String {
    format!("{v:e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_timeseries(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in rows {
        let cells = r.cells().map(|c| c.map(format_number).unwrap_or_default());
        w.write_record(&cells).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_timeseries(path: &Path) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(COLUMNS) {
        return Err(Error::Io(format!("unexpected header in {}", path.display())));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let mut cells = [None; 10];
        for (k, field) in record.iter().enumerate().take(10) {
            if !field.is_empty() {
                cells[k] = Some(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                );
            }
        }
        rows.push(Row::from_cells(cells).ok_or_else(|| Error::Io("row without time".into()))?);
    }
    Ok(rows)
}

/// Two-column `t,x_front` file of front crossings.
pub fn write_crossings(path: &Path, crossings: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "x_front"]).map_err(csv_err)?;
    for &(t, x) in crossings {
        w.write_record([format_number(t), format_number(x)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn write_snapshot(path: &Path, u: &State<f64>) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    snapshot::write_state(f, u)
}
