//! CSV series. Floats are written with 17 significant digits, rows end in LF.

use std::fmt::Write;

use dgl_core::canonical::CounterexampleReport;
use dgl_core::observables::RunRecord;
use dgl_core::Grid1D;

pub const SERIES_HEADER: &str = "t,x,J,rho,sea_energy";

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per snapshot and site.
pub fn series_csv(record: &RunRecord, grid: &Grid1D) -> String {
    let mut out = String::with_capacity(90 * record.times.len() * grid.sites() + 32);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (s, &t) in record.times.iter().enumerate() {
        for j in 0..grid.sites() {
            writeln!(
                out,
                "{},{},{},{},{}",
                float(t),
                float(grid.position(j)),
                float(record.current[s][j]),
                float(record.density[s][j]),
                float(record.energy[s])
            )
            .unwrap();
        }
    }
    out
}

/// `t, energy, max|J|` per snapshot of the truncated pure-gauge run.
pub fn counterexample_csv(report: &CounterexampleReport) -> String {
    let mut out = String::from("t,energy,max_abs_J\n");
    for (s, &t) in report.times.iter().enumerate() {
        let peak = report.current[s].iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        writeln!(out, "{},{},{}", float(t), float(report.energy[s]), float(peak)).unwrap();
    }
    out
}

/// Parses a series file back into `(t, x, J, rho, sea_energy)` rows.
pub fn parse_series(text: &str) -> Result<Vec<[f64; 5]>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(SERIES_HEADER) => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let mut row = [0.0; 5];
            let mut fields = line.split(',');
            for slot in row.iter_mut() {
                let field = fields.next().ok_or_else(|| format!("row {}: too few columns", n + 1))?;
                *slot = field.parse().map_err(|e| format!("row {}: {e}", n + 1))?;
            }
            if fields.next().is_some() {
                return Err(format!("row {}: too many columns", n + 1));
            }
            Ok(row)
        })
        .collect()
}
