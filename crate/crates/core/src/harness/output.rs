use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::ResultSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::config("format", format!("unknown format `{other}`"))),
        }
    }
}

/// Six significant digits, `%g` style: fixed notation for moderate
/// exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // round first so 9.999996 reports exponent 1, not 0
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exp}")
    }
}

/// `threshold_db,ccdf_theory,ccdf_<method>...[,rx_ccdf_<method>...]`.
pub fn to_csv(rs: &ResultSet) -> String {
    let mut out = String::from("threshold_db,ccdf_theory");
    for c in &rs.transmit {
        write!(out, ",ccdf_{}", c.method).unwrap();
    }
    for c in rs.receive.iter().flatten() {
        write!(out, ",rx_ccdf_{}", c.method).unwrap();
    }
    out.push('\n');
    for (i, &t) in rs.thresholds_db.iter().enumerate() {
        out.push_str(&format_sig6(t));
        out.push(',');
        out.push_str(&format_sig6(rs.theory[i]));
        for c in rs.transmit.iter().chain(rs.receive.iter().flatten()) {
            out.push(',');
            out.push_str(&format_sig6(c.curve.probs[i]));
        }
        out.push('\n');
    }
    out
}

pub fn to_json(rs: &ResultSet) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rs)?;
    s.push('\n');
    Ok(s)
}

pub fn write_results(rs: &ResultSet, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(rs),
        OutputFormat::Json => to_json(rs)?,
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
