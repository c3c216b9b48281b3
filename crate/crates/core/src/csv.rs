//! Deterministic CSV output: header row, LF endings, 17 significant digits.

use std::io::{self, Write};

/// `x` in scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_table<W: Write>(mut out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(fmt17).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
