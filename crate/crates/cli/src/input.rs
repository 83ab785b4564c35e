use std::path::Path;

use serde_json::Value;
use trace_laplace::exactnum::{parse_rational, ExactRational, Log2Multiple};
use trace_laplace::linalg::HermitianMatrix;
use trace_laplace::{Error, Result};

/// Inline JSON, a path to a JSON file, or rows such as `"1,0;0,2"`.
pub fn matrix(arg: &str, prec: usize) -> Result<HermitianMatrix> {
    let text = arg.trim();
    if text.starts_with('{') {
        return HermitianMatrix::parse_json(text, prec);
    }
    if Path::new(text).is_file() {
        return HermitianMatrix::parse_json(&std::fs::read_to_string(text)?, prec);
    }
    let rows = text.split(';').map(|row| row.split(',').map(parse_rational).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    if rows.len() != rows[0].len() {
        return Err(Error::Parse(format!("matrix {text:?} is not square")));
    }
    HermitianMatrix::from_rational_rows(rows)
}

/// JSON value from inline text or a file.
pub fn json(arg: &str) -> Result<Value> {
    let text = arg.trim();
    if text.starts_with('{') || text.starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    Ok(serde_json::from_str(&std::fs::read_to_string(text)?)?)
}

pub fn rationals(arg: &str) -> Result<Vec<ExactRational>> {
    arg.split(',').map(parse_rational).collect()
}

/// `"69,33,0"`: multiples of `ln 2`.
pub fn log2_multiples(arg: &str) -> Result<Vec<Log2Multiple>> {
    Ok(rationals(arg)?.into_iter().map(Log2Multiple::new).collect())
}
