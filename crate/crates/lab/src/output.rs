//! CSV and JSON writers.

use std::io::Write;

use serde::Serialize;

use crate::options::OutFormat;
use crate::LabError;

/// Writes flat rows as CSV with a header, or as a JSON array.
pub fn write_rows<T: Serialize, W: Write>(rows: &[T], format: OutFormat, out: W) -> Result<(), LabError> {
    match format {
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutFormat::Json => write_json(&rows, out)?,
    }
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<(), LabError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
