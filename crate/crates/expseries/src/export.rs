//! CSV export of sampled fields.

use std::io::Write;

use expseries_core::fieldeval::PointSample;

use crate::error::CliError;

pub const HEADER: [&str; 12] = ["x1", "x2", "x3", "t", "u1", "u2", "u3", "p", "r1", "r2", "r3", "div"];

/// One row per sample, 17 significant digits per value.
pub fn write_csv<W: Write>(out: W, samples: &[PointSample]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::config(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(io)?;
    for s in samples {
        let values = [
            s.x[0],
            s.x[1],
            s.x[2],
            s.t,
            s.field.u[0],
            s.field.u[1],
            s.field.u[2],
            s.field.p,
            s.residual.r[0],
            s.residual.r[1],
            s.residual.r[2],
            s.residual.div,
        ];
        w.write_record(values.iter().map(|v| format!("{v:.16e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::config(format!("csv: {e}")))
}
