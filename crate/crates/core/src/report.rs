//! Serialization of reports and plot data.
//!
//! JSON output writes every float as a decimal string with 17 significant
//! digits so values survive a round trip bit for bit. CSV output uses the same
//! format and always a `.` decimal separator.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::audit::{AuditReport, ThresholdCurve};
use crate::error::{Error, Result};

/// `f64` in scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn stringify_floats(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => Value::String(format_float(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(items) => Value::Array(items.into_iter().map(stringify_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect()),
        other => other,
    }
}

/// JSON value of `item` with floats as 17-digit strings.
pub fn to_json_value<T: Serialize>(item: &T) -> Result<Value> {
    let value = serde_json::to_value(item).map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    Ok(stringify_floats(value))
}

/// Pretty JSON with floats as 17-digit strings.
pub fn to_json_string<T: Serialize>(item: &T) -> Result<String> {
    serde_json::to_string_pretty(&to_json_value(item)?)
        .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))
}

pub fn report_json(report: &AuditReport) -> Result<String> {
    to_json_string(report)
}

fn io(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("write failed: {e}"))
}

/// `block,maximum` rows.
pub fn write_block_maxima_csv<W: Write>(mut out: W, maxima: &[f64]) -> Result<()> {
    writeln!(out, "block,maximum").map_err(io)?;
    for (i, v) in maxima.iter().enumerate() {
        writeln!(out, "{i},{}", format_float(*v)).map_err(io)?;
    }
    Ok(())
}

/// `alpha,delta_star,x,upper,lower` rows; missing boundaries are empty cells.
pub fn write_threshold_csv<W: Write>(mut out: W, curves: &[ThresholdCurve]) -> Result<()> {
    writeln!(out, "alpha,delta_star,x,upper,lower").map_err(io)?;
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for c in curves {
        for p in &c.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                format_float(c.alpha),
                format_float(c.delta_star),
                format_float(p.x),
                opt(p.upper),
                opt(p.lower)
            )
            .map_err(io)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, f64::MIN_POSITIVE] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_floats_are_strings() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            n: usize,
            v: Vec<f64>,
        }
        let j = to_json_value(&S { a: 0.5, n: 3, v: vec![1.0] }).unwrap();
        assert_eq!(j["a"], Value::String("5.0000000000000000e-1".into()));
        assert_eq!(j["n"], Value::from(3));
        assert_eq!(j["v"][0], Value::String("1.0000000000000000e0".into()));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_block_maxima_csv(&mut buf, &[0.25]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "block,maximum\n0,2.5000000000000000e-1\n");
    }
}
