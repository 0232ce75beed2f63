//! Per-step CSV export of a scenario run.

use std::io::Write;

use cusign_core::ugv::ScenarioTrace;

use crate::CliError;

/// Bumped whenever [`TRACE_COLUMNS`] changes.
pub const TRACE_SCHEMA_VERSION: &str = "1";

pub const TRACE_COLUMNS: [&str; 30] = [
    "k",
    "t",
    "x1",
    "x2",
    "x3",
    "xhat1",
    "xhat2",
    "xhat3",
    "y1",
    "y2",
    "y3",
    "xi1",
    "xi2",
    "xi3",
    "r1",
    "r2",
    "r3",
    "z",
    "S_plus",
    "S_minus",
    "zeta_plus",
    "zeta_minus",
    "alpha_plus",
    "alpha_minus",
    "C",
    "zeta_C",
    "alpha_C",
    "cusign_detect",
    "cusum_detect",
    "waypoint",
];

fn bit(b: bool) -> String {
    u8::from(b).to_string()
}

pub fn write_trace(trace: &ScenarioTrace, out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    let mut row: Vec<String> = Vec::with_capacity(TRACE_COLUMNS.len());
    for rec in &trace.records {
        row.clear();
        row.push(rec.k.to_string());
        row.push(rec.t.to_string());
        for v in [&rec.x, &rec.xhat, &rec.y, &rec.xi, &rec.r] {
            row.extend(v.iter().map(f64::to_string));
        }
        row.push(rec.z.to_string());
        row.push(rec.s_plus.to_string());
        row.push(rec.s_minus.to_string());
        row.push(bit(rec.zeta_plus));
        row.push(bit(rec.zeta_minus));
        row.push(rec.alpha_plus.to_string());
        row.push(rec.alpha_minus.to_string());
        row.push(rec.c.to_string());
        row.push(bit(rec.zeta_c));
        row.push(rec.alpha_c.to_string());
        row.push(bit(rec.cusign_detect));
        row.push(bit(rec.cusum_detect));
        row.push(rec.waypoint.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
