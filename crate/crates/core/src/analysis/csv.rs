use std::fmt::Display;
use std::path::Path;

use super::complexity::ComplexityCurve;
use super::histogram::Histogram;
use crate::error::{Error, Result};

/// Significant digits for non-integer output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Plain decimal with [`SIGNIFICANT_DIGITS`] significant digits, trailing
/// zeros removed. Integral values print in full.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{x:.0}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (SIGNIFICANT_DIGITS as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Anything written as a CSV table.
pub trait CsvTable {
    fn to_csv(&self) -> String;
}

/// `key,value` rows in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    rows: Vec<(String, String)>,
}

/// Value cell of a report row.
pub trait ReportValue {
    fn render(&self) -> String;
}

impl ReportValue for f64 {
    fn render(&self) -> String {
        format_number(*self)
    }
}

macro_rules! display_value {
    ($($t:ty)*) => {
        $(impl ReportValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        })*
    };
}

display_value!(u32 u64 u128 usize i64 bool String &str crate::Backend num_bigint::BigInt);

impl ReportValue for num_rational::BigRational {
    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Display, value: impl ReportValue) {
        self.rows.push((key.to_string(), value.render()));
    }

    pub fn rows(&self) -> &[(String, String)] {
        &self.rows
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.rows.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }
}

impl CsvTable for Report {
    fn to_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        for (k, v) in &self.rows {
            s.push_str(&format!("{k},{v}\n"));
        }
        s
    }
}

impl CsvTable for Histogram {
    /// Header only when nothing was sampled.
    fn to_csv(&self) -> String {
        let mut s = String::from("value,count,frequency,theoretical\n");
        if self.samples() == 0 {
            return s;
        }
        for a in 0..self.counts().len() as u64 {
            s.push_str(&format!(
                "{a},{},{},{}\n",
                self.count(a),
                format_number(self.frequency(a)),
                format_number(self.theoretical(a))
            ));
        }
        s
    }
}

impl CsvTable for ComplexityCurve {
    fn to_csv(&self) -> String {
        let mut s = String::from("alpha,log2_com\n");
        for (alpha, log2) in &self.points {
            s.push_str(&format!("{},{}\n", format_number(*alpha), format_number(*log2)));
        }
        s
    }
}

pub fn emit_csv<C: CsvTable + ?Sized>(table: &C, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}
