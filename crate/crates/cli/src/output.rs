//! Machine-readable output: one JSON object or one CSV table per invocation.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";
const CSV_SIGNIFICANT_DIGITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub residual: Option<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: String,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    /// Non-finite cells are `null`.
    pub rows: Vec<Vec<Option<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdicts: Option<Vec<Verdict>>,
}

impl OutputRecord {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            params: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            tail_mass: None,
            verdicts: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows
            .push(row.iter().map(|&x| x.is_finite().then_some(x)).collect());
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Json => write_json(self, out),
            Format::Csv => write_csv(self, out),
        }
    }
}

/// Compact JSON with every float printed to 17 significant digits.
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

fn write_json(record: &OutputRecord, out: &mut impl Write) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, SignificantDigits);
    record.serialize(&mut ser).map_err(io::Error::other)?;
    writeln!(out)
}

/// `x` with `digits` significant digits, positional when that is short,
/// scientific otherwise, without trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let text = if (-5..digits as i32).contains(&exponent) {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.prec$e}", prec = digits - 1)
    };
    trim_zeros(&text)
}

fn trim_zeros(text: &str) -> String {
    let (mantissa, exponent) = match text.find('e') {
        Some(i) => text.split_at(i),
        None => (text, ""),
    };
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}{exponent}")
}

fn csv_cell(x: Option<f64>) -> String {
    x.map(|v| format_significant(v, CSV_SIGNIFICANT_DIGITS))
        .unwrap_or_default()
}

fn write_csv(record: &OutputRecord, out: &mut impl Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(verdicts) = &record.verdicts {
        w.write_record(["check", "passed", "residual", "tolerance"])?;
        for v in verdicts {
            w.write_record([
                v.check.clone(),
                v.passed.to_string(),
                csv_cell(v.residual),
                csv_cell(Some(v.tolerance)),
            ])?;
        }
    } else {
        w.write_record(&record.columns)?;
        for row in &record.rows {
            w.write_record(row.iter().map(|&x| csv_cell(x)))?;
        }
        if let Some(tail) = record.tail_mass {
            let mut fields = vec![String::new(); record.columns.len()];
            fields[0] = "tail".to_string();
            if fields.len() > 1 {
                fields[1] = csv_cell(Some(tail));
            }
            w.write_record(&fields)?;
        }
    }
    w.flush()
}
