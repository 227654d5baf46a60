//! The JSON eigenvalue file format shared by fixtures and the download cache.
//!
//! ```json
//! {"d": 5, "weight": [2, 2], "label": "...",
//!  "entries": [{"norm": 4, "rational_prime": 2, "root_label": 0, "c_num": "-1", "c_den": "4"}],
//!  "bad": [{"norm": 5, "rational_prime": 5, "root_label": 0}]}
//! ```
//! `c_num` and `c_den` may be JSON integers or decimal strings; they are written as strings.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{write_atomic, IoError};
use crate::field_arith::{PrimeIdeal, QuadField};
use crate::sign_pipeline::{EigenvalueSeries, PipelineError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenFile {
    pub d: u64,
    pub weight: Vec<u32>,
    pub label: String,
    pub entries: Vec<EigenEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bad: Vec<PrimeRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenEntry {
    pub norm: u64,
    pub rational_prime: u64,
    pub root_label: u8,
    pub c_num: IntText,
    pub c_den: IntText,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeRef {
    pub norm: u64,
    pub rational_prime: u64,
    pub root_label: u8,
}

/// An integer given either as a JSON number or as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntText {
    Number(i64),
    Text(String),
}

impl IntText {
    fn value(&self, what: &str, index: usize) -> Result<BigInt, IoError> {
        match self {
            IntText::Number(n) => Ok(BigInt::from(*n)),
            IntText::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| IoError::Validation(format!("entries[{index}].{what}: {s:?} is not an integer"))),
        }
    }
}

impl PrimeRef {
    fn of(p: &PrimeIdeal) -> Self {
        PrimeRef { norm: p.norm(), rational_prime: p.rational_prime(), root_label: p.root_label() }
    }

    fn resolve(&self, field: &QuadField) -> Result<PrimeIdeal, IoError> {
        field
            .prime_ideal(self.rational_prime, self.norm, self.root_label)
            .map_err(|e| IoError::Validation(e.to_string()))
    }
}

impl EigenFile {
    pub fn from_series(series: &EigenvalueSeries) -> Self {
        EigenFile {
            d: series.field().d(),
            weight: series.weight().to_vec(),
            label: series.label().to_string(),
            entries: series
                .entries()
                .iter()
                .map(|(p, c)| {
                    let r = PrimeRef::of(p);
                    EigenEntry {
                        norm: r.norm,
                        rational_prime: r.rational_prime,
                        root_label: r.root_label,
                        c_num: IntText::Text(c.numer().to_string()),
                        c_den: IntText::Text(c.denom().to_string()),
                    }
                })
                .collect(),
            bad: series.bad_primes().iter().map(PrimeRef::of).collect(),
        }
    }

    /// Validates field, weight parity and the bound `c^2 N(P) <= 4` of every entry.
    pub fn to_series(&self) -> Result<EigenvalueSeries, IoError> {
        let field = QuadField::new(self.d).map_err(|e| IoError::Validation(e.to_string()))?;
        let mut series = EigenvalueSeries::new(field, self.weight.clone(), self.label.clone()).map_err(|e| match e {
            PipelineError::InvalidWeight(w) => {
                IoError::Validation(format!("weight {w:?} must have {} even components >= 2", field.degree()))
            }
            other => other.into(),
        })?;
        for (i, e) in self.entries.iter().enumerate() {
            let p = PrimeRef { norm: e.norm, rational_prime: e.rational_prime, root_label: e.root_label }
                .resolve(&field)?;
            let den = e.c_den.value("c_den", i)?;
            if den.is_zero() {
                return Err(IoError::Validation(format!("entries[{i}].c_den is zero")));
            }
            let c = BigRational::new(e.c_num.value("c_num", i)?, den);
            series.insert(p, c).map_err(|err| IoError::Validation(format!("entries[{i}]: {err}")))?;
        }
        for b in &self.bad {
            series.mark_bad(b.resolve(&field)?);
        }
        Ok(series)
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Parse {
            source_name: source_name.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

pub fn parse_series(text: &str, source_name: &str) -> Result<EigenvalueSeries, IoError> {
    EigenFile::parse(text, source_name)?.to_series()
}

pub fn serialize_series(series: &EigenvalueSeries) -> String {
    EigenFile::from_series(series).to_json()
}

pub fn load_fixture(path: &Path) -> Result<EigenvalueSeries, IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_series(&text, &path.display().to_string())
}

pub fn save_fixture(series: &EigenvalueSeries, path: &Path) -> Result<(), IoError> {
    write_atomic(path, serialize_series(series).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"d": 1, "weight": [2], "label": "one",
        "entries": [{"norm": 3, "rational_prime": 3, "root_label": 0, "c_num": -1, "c_den": "3"}]}"#;

    #[test]
    fn minimal_round_trip() {
        let s = parse_series(MINIMAL, "minimal").unwrap();
        assert_eq!(s.len(), 1);
        let text = serialize_series(&s);
        let again = parse_series(&text, "again").unwrap();
        assert_eq!(again, s);
        assert_eq!(serialize_series(&again), text);
    }

    #[test]
    fn validation_errors() {
        let odd = MINIMAL.replace("[2]", "[3]");
        assert!(matches!(parse_series(&odd, "odd"), Err(IoError::Validation(_))));
        let hasse = MINIMAL.replace("-1,", "-7,");
        assert!(matches!(parse_series(&hasse, "hasse"), Err(IoError::Validation(_))));
        let inert = MINIMAL.replace("\"d\": 1", "\"d\": 5").replace("[2]", "[2, 2]");
        assert!(matches!(parse_series(&inert, "inert"), Err(IoError::Validation(_))));
        let zero = MINIMAL.replace("\"c_den\": \"3\"", "\"c_den\": 0");
        assert!(matches!(parse_series(&zero, "zero"), Err(IoError::Validation(_))));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let broken = "{\"d\": 1,\n \"weight\": [2],\n \"label\": 7}";
        match parse_series(broken, "broken.json") {
            Err(IoError::Parse { source_name, line, .. }) => {
                assert_eq!(source_name, "broken.json");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
        let extra = MINIMAL.replace("\"label\"", "\"colour\": 1, \"label\"");
        assert!(matches!(parse_series(&extra, "extra"), Err(IoError::Parse { .. })));
    }
}
