//! Streaming CSV emission: header plus rows, RFC-4180 quoting, fixed
//! column order, floats printed with 9 significant digits, `nan` and
//! `-inf`/`inf` as literal tokens.  Rows are written as they arrive, so
//! arbitrarily long sweeps never buffer the whole table.

use std::io::Write;

use crate::error::Result;

/// One row of a result table; cells follow the header order exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub values: Vec<f64>,
}

/// Format one cell with 9 significant digits.
pub fn format_cell(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.8e}")
    }
}

fn quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Incremental CSV writer over any sink.
pub struct CsvWriter<W: Write> {
    sink: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    /// Write the header and return the writer.
    pub fn new(mut sink: W, header: &[&str]) -> Result<Self> {
        let line = header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(",");
        writeln!(sink, "{line}")?;
        Ok(CsvWriter {
            sink,
            columns: header.len(),
        })
    }

    /// Append one row; the cell count must match the header.
    pub fn write_row(&mut self, row: &ResultRow) -> Result<()> {
        assert_eq!(
            row.values.len(),
            self.columns,
            "row width {} != header width {}",
            row.values.len(),
            self.columns
        );
        let line = row
            .values
            .iter()
            .map(|&x| format_cell(x))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(self.sink, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.sink.flush()?;
        Ok(())
    }
}

/// Write a whole table from an iterator of rows, streaming.
pub fn emit_plotdata<W: Write, I: IntoIterator<Item = ResultRow>>(
    sink: W,
    header: &[&str],
    rows: I,
) -> Result<usize> {
    let mut w = CsvWriter::new(sink, header)?;
    let mut n = 0;
    for row in rows {
        w.write_row(&row)?;
        n += 1;
    }
    w.finish()?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_gives_two_lines() {
        let mut buf = Vec::new();
        let n = emit_plotdata(
            &mut buf,
            &["x", "y"],
            vec![ResultRow {
                values: vec![1.0, 2.5],
            }],
        )
        .unwrap();
        assert_eq!(n, 1);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "x,y");
        assert_eq!(lines[1], "1.00000000e0,2.50000000e0");
    }

    #[test]
    fn nan_cell_prints_literal_token() {
        assert_eq!(format_cell(f64::NAN), "nan");
        assert_eq!(format_cell(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_cell(1.0 / 3.0), "3.33333333e-1");
    }

    #[test]
    fn header_with_comma_is_quoted() {
        let mut buf = Vec::new();
        emit_plotdata(&mut buf, &["a,b", "c\"d"], std::iter::empty()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "\"a,b\",\"c\"\"d\"");
    }

    #[test]
    fn streams_many_rows_through_a_counting_sink() {
        // A sink that counts bytes without retaining them: the writer
        // must not require the full table in memory.
        struct Counter {
            bytes: usize,
        }
        impl Write for Counter {
            fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
                self.bytes += buf.len();
                Ok(buf.len())
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let rows = (0..100_000).map(|i| ResultRow {
            values: vec![i as f64, (i as f64).sqrt()],
        });
        let mut sink = Counter { bytes: 0 };
        let n = emit_plotdata(&mut sink, &["i", "sqrt"], rows).unwrap();
        assert_eq!(n, 100_000);
        assert!(sink.bytes > 100_000 * 10);
    }
}
