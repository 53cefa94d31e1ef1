//! Line-delimited JSON record schemas shared by the batch tools.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::reward::GroundTruthStep;
use crate::scalar::Scalar;

/// Step identifier used to join completions with ground truth. Accepts a
/// JSON string or integer and normalizes to its text form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepId(pub String);

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StepId {
    fn from(s: &str) -> Self {
        StepId(s.to_string())
    }
}

impl Serialize for StepId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for StepId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(deserializer)? {
            serde_json::Value::String(s) => Ok(StepId(s)),
            serde_json::Value::Number(n) => Ok(StepId(n.to_string())),
            other => Err(serde::de::Error::custom(format!(
                "id must be a string or integer, got {other}"
            ))),
        }
    }
}

/// One raw completion keyed by step id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: StepId,
    pub completion: String,
}

/// One ground-truth step keyed by step id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GtRecord<T = f64> {
    pub id: StepId,
    #[serde(flatten)]
    pub step: GroundTruthStep<T>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

/// Reads a whole JSONL file; blank lines are skipped.
pub fn read_jsonl<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>, RecordError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| RecordError::Io {
        path: display.clone(),
        source,
    })?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| RecordError::Io {
            path: display.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| RecordError::Parse {
            path: display.clone(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_id_accepts_string_or_integer() {
        let a: StepId = serde_json::from_str("\"s1\"").unwrap();
        assert_eq!(a, StepId("s1".into()));
        let b: StepId = serde_json::from_str("42").unwrap();
        assert_eq!(b, StepId("42".into()));
        assert!(serde_json::from_str::<StepId>("[1]").is_err());
    }

    #[test]
    fn reads_prediction_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        std::fs::write(
            &path,
            "{\"id\": 1, \"completion\": \"x\"}\n\n{\"id\": \"b\", \"completion\": \"y\"}\n",
        )
        .unwrap();
        let records: Vec<PredictionRecord> = read_jsonl(&path).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].id, StepId("1".into()));
        assert_eq!(records[1].id, StepId("b".into()));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        std::fs::write(&path, "{\"id\": 1, \"completion\": \"x\"}\nnot json\n").unwrap();
        let err = read_jsonl::<PredictionRecord>(&path).unwrap_err();
        assert!(matches!(err, RecordError::Parse { line: 2, .. }));
    }
}
