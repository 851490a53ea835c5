use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Scientific notation with 17 significant digits; parses back exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv<W: Write>(out: W, y: &[f64], w: Option<&[f64]>) -> Result<()> {
    if let Some(w) = w {
        crate::error::check_len(y.len(), w.len())?;
    }
    let mut writer = csv::Writer::from_writer(out);
    if w.is_some() {
        writer.write_record(["t", "Y", "W"])?;
    } else {
        writer.write_record(["t", "Y"])?;
    }
    for (t, yt) in y.iter().enumerate() {
        let mut rec = vec![t.to_string(), format_float(*yt)];
        if let Some(w) = w {
            rec.push(format_float(w[t]));
        }
        writer.write_record(&rec)?;
    }
    writer.flush()?;
    Ok(())
}

/// Parsed trajectory file: outputs and, when the `W` column is present,
/// the noise.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryData {
    pub y: Vec<f64>,
    pub w: Option<Vec<f64>>,
}

/// Reads a CSV with a `Y` column and optional `t` and `W` columns. Rows
/// must be ordered by `t` starting at 0.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<TrajectoryData> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let y_col = col("Y").ok_or_else(|| Error::config("trajectory CSV lacks a `Y` column"))?;
    let (t_col, w_col) = (col("t"), col("W"));
    let mut y = Vec::new();
    let mut w = w_col.map(|_| Vec::new());
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = |c: usize| -> Result<f64> {
            let s = rec.get(c).unwrap_or("");
            s.parse::<f64>()
                .map_err(|_| Error::config(format!("row {}: cannot parse `{s}`", row + 1)))
        };
        if let Some(tc) = t_col {
            if rec.get(tc) != Some(row.to_string().as_str()) {
                return Err(Error::config(format!("row {}: expected t = {row}", row + 1)));
            }
        }
        y.push(field(y_col)?);
        if let (Some(wc), Some(w)) = (w_col, w.as_mut()) {
            w.push(field(wc)?);
        }
    }
    if y.is_empty() {
        return Err(Error::config("trajectory CSV has no rows"));
    }
    Ok(TrajectoryData { y, w })
}

/// `key = value` lines.
pub fn write_key_values<W: Write>(mut out: W, entries: &[(String, String)]) -> Result<()> {
    for (k, v) in entries {
        writeln!(out, "{k} = {v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a header and rows of already formatted fields.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header)?;
    for r in rows {
        writer.write_record(r)?;
    }
    writer.flush()?;
    Ok(())
}
