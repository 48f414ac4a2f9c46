//! Diagnostics tables and NDJSON streams.

use std::io::Write;

use serde::Serialize;

use crate::ac::DiagnosticsRecord;
use crate::error::Result;

pub const DIAGNOSTICS_HEADER: &str =
    "t,E,D,balance_residual,div_u_L2,Qu_L2,Qu_L4,sqrt_eps_p_L2,u_L2,theta_L2";

pub fn diagnostics_row(r: &DiagnosticsRecord) -> String {
    [
        r.t,
        r.energy,
        r.dissipation,
        r.balance_residual,
        r.div_u_l2,
        r.qu_l2,
        r.qu_l4,
        r.sqrt_eps_p_l2,
        r.u_l2,
        r.theta_l2,
    ]
    .iter()
    .map(|v| format!("{v:.16e}"))
    .collect::<Vec<_>>()
    .join(",")
}

pub fn write_diagnostics_csv<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for r in records {
        writeln!(w, "{}", diagnostics_row(r))?;
    }
    Ok(())
}

/// One compact JSON document per line.
pub fn write_ndjson<W: Write, T: Serialize>(mut w: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
