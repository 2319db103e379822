//! On-disk formats: coefficient fields as `level,position,value` CSV and
//! noisy-data bundles as a pair of CSV files plus a JSON sidecar.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::field::{CoefField, DyadicIndex, FieldError};
use crate::sequence::NoisyData;

pub const COEF_CSV_HEADER: &str = "level,position,value";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line 1: expected header {COEF_CSV_HEADER:?}, found {found:?}")]
    Header { found: String },
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Serializes a field with rows sorted by `(level, position)`; the output
/// is byte-deterministic for a given field.
pub fn coef_field_to_csv(field: &CoefField) -> String {
    let mut out = String::from(COEF_CSV_HEADER);
    out.push('\n');
    for (idx, value) in field.iter() {
        out.push_str(&format!("{},{},{}\n", idx.level(), idx.position(), value));
    }
    out
}

/// Parses a field, inferring the depth from the deepest stored row. Use
/// [`coef_field_from_csv_with_depth`] to pin the capacity explicitly.
pub fn coef_field_from_csv(text: &str) -> Result<CoefField, IoError> {
    coef_field_from_csv_with_depth(text, None)
}

pub fn coef_field_from_csv_with_depth(
    text: &str,
    max_level: Option<u32>,
) -> Result<CoefField, IoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == COEF_CSV_HEADER => {}
        other => {
            return Err(IoError::Header {
                found: other.map(|(_, h)| h.to_owned()).unwrap_or_default(),
            })
        }
    }

    let mut entries = Vec::new();
    let mut deepest = 0u32;
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(IoError::Row {
                line: lineno,
                reason: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let level: u32 = fields[0].trim().parse().map_err(|_| IoError::Row {
            line: lineno,
            reason: format!("invalid level {:?}", fields[0]),
        })?;
        let position: u64 = fields[1].trim().parse().map_err(|_| IoError::Row {
            line: lineno,
            reason: format!("invalid position {:?}", fields[1]),
        })?;
        let value: f64 = fields[2].trim().parse().map_err(|_| IoError::Row {
            line: lineno,
            reason: format!("invalid value {:?}", fields[2]),
        })?;
        let idx = DyadicIndex::new(level, position).map_err(|e| IoError::Row {
            line: lineno,
            reason: e.to_string(),
        })?;
        if !value.is_finite() {
            return Err(IoError::Row {
                line: lineno,
                reason: format!("non-finite value {value}"),
            });
        }
        deepest = deepest.max(level);
        entries.push((idx, value));
    }

    let depth = max_level.unwrap_or(deepest);
    let mut field = CoefField::new(depth)?;
    for (idx, value) in entries {
        field.set(idx, value)?;
    }
    Ok(field)
}

pub fn write_coef_field(path: &Path, field: &CoefField) -> Result<(), IoError> {
    fs::write(path, coef_field_to_csv(field)).map_err(|e| io_err(path, e))
}

pub fn read_coef_field(path: &Path) -> Result<CoefField, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    coef_field_from_csv(&text)
}

#[derive(Debug, Serialize, Deserialize)]
struct NoisyDataMeta {
    delta: f64,
    seed: u64,
}

/// Writes `clean.csv`, `noisy.csv`, and `meta.json` into `dir`.
pub fn save_noisy_data(dir: &Path, data: &NoisyData) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_coef_field(&dir.join("clean.csv"), &data.clean)?;
    write_coef_field(&dir.join("noisy.csv"), &data.noisy)?;
    let meta = NoisyDataMeta {
        delta: data.delta,
        seed: data.seed,
    };
    let path = dir.join("meta.json");
    let text = serde_json::to_string_pretty(&meta).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

pub fn load_noisy_data(dir: &Path) -> Result<NoisyData, IoError> {
    let clean = read_coef_field(&dir.join("clean.csv"))?;
    let noisy = read_coef_field(&dir.join("noisy.csv"))?;
    let path = dir.join("meta.json");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let meta: NoisyDataMeta = serde_json::from_str(&text).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(NoisyData {
        clean,
        noisy,
        delta: meta.delta,
        seed: meta.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::add_noise;

    fn sample_field() -> CoefField {
        CoefField::from_entries(
            3,
            [
                (DyadicIndex::new(0, 0).unwrap(), 1.5),
                (DyadicIndex::new(3, 5).unwrap(), -0.25),
            ],
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let field = sample_field();
        let text = coef_field_to_csv(&field);
        assert!(text.starts_with("level,position,value\n"));
        let back = coef_field_from_csv(&text).unwrap();
        assert_eq!(back, field);
    }

    #[test]
    fn csv_round_trip_with_capacity() {
        let field = CoefField::from_entries(6, [(DyadicIndex::new(1, 0).unwrap(), 2.0)]).unwrap();
        let text = coef_field_to_csv(&field);
        let back = coef_field_from_csv_with_depth(&text, Some(6)).unwrap();
        assert_eq!(back, field);
    }

    #[test]
    fn csv_diagnostics_carry_line_numbers() {
        let bad_header = "lvl,pos,val\n0,0,1\n";
        assert!(matches!(
            coef_field_from_csv(bad_header),
            Err(IoError::Header { .. })
        ));

        let bad_row = "level,position,value\n0,0,1\n1,2\n";
        match coef_field_from_csv(bad_row) {
            Err(IoError::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected row error, got {other:?}"),
        }

        let bad_value = "level,position,value\n0,0,abc\n";
        match coef_field_from_csv(bad_value) {
            Err(IoError::Row { line, reason }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("abc"));
            }
            other => panic!("expected row error, got {other:?}"),
        }

        let bad_position = "level,position,value\n2,4,1\n";
        assert!(matches!(
            coef_field_from_csv(bad_position),
            Err(IoError::Row { line: 2, .. })
        ));
    }

    #[test]
    fn noisy_data_bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let clean = sample_field();
        let data = add_noise(&clean, 0.125, 9).unwrap();
        save_noisy_data(dir.path(), &data).unwrap();
        let back = load_noisy_data(dir.path()).unwrap();
        assert_eq!(back.clean, data.clean);
        assert_eq!(back.noisy, data.noisy);
        assert_eq!(back.delta, data.delta);
        assert_eq!(back.seed, data.seed);
    }
}
