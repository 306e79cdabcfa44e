//! CSV output with a manifest header and optional comment footer.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::CliError;

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_csv(
    path: &Path,
    header: &str,
    columns: &[&str],
    rows: &[Vec<String>],
    footer: &[String],
) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(header.as_bytes())?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(columns)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    for line in footer {
        writeln!(out, "# {line}")?;
    }
    out.flush()?;
    Ok(())
}
