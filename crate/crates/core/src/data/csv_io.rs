use std::fmt::Write as _;
use std::path::Path;

use super::{Dataset, PatientRecord, FEATURE_NAMES, LABEL_NAME, N_FEATURES, N_SYMPTOMS};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "age,body_temperature,fatigue,cough,body_pain,sore_throat,breathing_difficulty,infected";

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Parses the patient CSV schema. The `infected` column may be omitted.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let labeled = match names.len() {
        n if n == N_FEATURES && names == FEATURE_NAMES => false,
        n if n == N_FEATURES + 1
            && names[..N_FEATURES] == FEATURE_NAMES
            && names[N_FEATURES] == LABEL_NAME =>
        {
            true
        }
        _ => return Err(Error::Header(names.join(","))),
    };

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |j: usize| row.get(j).unwrap_or_default().trim();
        let real = |j: usize| -> Result<f64> {
            let v: f64 = field(j).parse().map_err(|_| Error::Parse {
                line,
                message: format!(
                    "{}: cannot parse {:?} as a number",
                    header_name(j),
                    field(j)
                ),
            })?;
            if !v.is_finite() {
                return Err(Error::RowRange {
                    line,
                    message: format!("{} is not finite", header_name(j)),
                });
            }
            Ok(v)
        };
        let binary = |j: usize| -> Result<u8> {
            let v: i64 = field(j).parse().map_err(|_| Error::Parse {
                line,
                message: format!("{}: cannot parse {:?} as 0 or 1", header_name(j), field(j)),
            })?;
            match v {
                0 | 1 => Ok(v as u8),
                _ => Err(Error::RowRange {
                    line,
                    message: format!("{}={v} is not 0 or 1", header_name(j)),
                }),
            }
        };

        let mut symptoms = [0u8; N_SYMPTOMS];
        for (k, s) in symptoms.iter_mut().enumerate() {
            *s = binary(2 + k)?;
        }
        let record = PatientRecord {
            age: real(0)?,
            body_temperature: real(1)?,
            symptoms,
            infected: if labeled {
                Some(binary(N_FEATURES)?)
            } else {
                None
            },
        };
        record
            .validate()
            .map_err(|message| Error::RowRange { line, message })?;
        records.push(record);
    }
    Dataset::new(records)
}

fn header_name(j: usize) -> &'static str {
    FEATURE_NAMES.get(j).copied().unwrap_or(LABEL_NAME)
}

/// Serializes with shortest round-trip float formatting, LF line endings.
pub fn to_csv_string(dataset: &Dataset) -> String {
    let labeled = dataset.is_labeled() || dataset.is_empty();
    let mut out = String::new();
    if labeled {
        out.push_str(CSV_HEADER);
    } else {
        out.push_str(&FEATURE_NAMES.join(","));
    }
    out.push('\n');
    for r in dataset.records() {
        write!(out, "{},{}", r.age, r.body_temperature).unwrap();
        for s in r.symptoms {
            write!(out, ",{s}").unwrap();
        }
        if let Some(y) = r.infected {
            write!(out, ",{y}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv_string(dataset)).map_err(|e| Error::io(path, e))
}
