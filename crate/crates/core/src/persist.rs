//! Versioned JSON persistence for fitted models and training runs.
//!
//! Every document carries `schema_version` (currently 1) and a tagged
//! `record`. Readers reject unknown versions instead of guessing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distill::{DistillConfig, EpochLoss, ToyNet};
use crate::regress::{LinearModel, YieldModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("unsupported schema version {found}, this build reads version {SCHEMA_VERSION}")]
    UnsupportedVersion { found: u32 },
    #[error("document holds a {found} record, expected {expected}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid network weights: {0}")]
    InvalidNet(#[from] crate::distill::DistillError),
}

/// A distillation run: the configuration, the frozen teacher, both student
/// variants trained from the same initialization, and their loss histories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillRunRecord {
    pub config: DistillConfig,
    pub teacher: ToyNet,
    pub student_distilled: ToyNet,
    pub student_supervised: ToyNet,
    pub distilled_history: Vec<EpochLoss>,
    pub supervised_history: Vec<EpochLoss>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Record {
    LinearModel(LinearModel),
    YieldModel(YieldModel),
    DistillRun(Box<DistillRunRecord>),
}

impl Record {
    fn kind_name(&self) -> &'static str {
        match self {
            Record::LinearModel(_) => "linear_model",
            Record::YieldModel(_) => "yield_model",
            Record::DistillRun(_) => "distill_run",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    #[serde(flatten)]
    pub record: Record,
}

/// Serializes a record under the current schema version.
pub fn to_json(record: &Record) -> Result<String, PersistError> {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        record: record.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

/// Parses a document, rejecting unknown schema versions and validating any
/// embedded network shapes.
pub fn from_json(text: &str) -> Result<Record, PersistError> {
    let doc: Document = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(PersistError::UnsupportedVersion {
            found: doc.schema_version,
        });
    }
    if let Record::DistillRun(run) = &doc.record {
        run.teacher.validate()?;
        run.student_distilled.validate()?;
        run.student_supervised.validate()?;
    }
    Ok(doc.record)
}

/// Extracts a linear model from a document that may hold either a bare
/// linear model or a full yield model.
pub fn expect_linear_model(record: &Record) -> Result<LinearModel, PersistError> {
    match record {
        Record::LinearModel(m) => Ok(*m),
        Record::YieldModel(ym) => Ok(ym.count_correction),
        other => Err(PersistError::WrongKind {
            expected: "linear_model",
            found: other.kind_name(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_round_trip() {
        let record = Record::LinearModel(LinearModel {
            a: 1.0700536062378168,
            b: -23.48611111111111,
        });
        let text = to_json(&record).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(back, record);
        let m = expect_linear_model(&back).unwrap();
        assert_eq!(m.a.to_bits(), 1.0700536062378168f64.to_bits());
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let record = Record::LinearModel(LinearModel { a: 1.0, b: 0.0 });
        let text = to_json(&record).unwrap().replace(
            "\"schema_version\": 1",
            "\"schema_version\": 99",
        );
        assert!(matches!(
            from_json(&text),
            Err(PersistError::UnsupportedVersion { found: 99 })
        ));
    }

    #[test]
    fn wrong_kind_is_reported() {
        let run = DistillRunRecord {
            config: DistillConfig::default(),
            teacher: ToyNet::seeded(&[2, 2], 1).unwrap(),
            student_distilled: ToyNet::seeded(&[2, 2], 2).unwrap(),
            student_supervised: ToyNet::seeded(&[2, 2], 2).unwrap(),
            distilled_history: vec![],
            supervised_history: vec![],
        };
        let text = to_json(&Record::DistillRun(Box::new(run))).unwrap();
        let record = from_json(&text).unwrap();
        assert!(matches!(
            expect_linear_model(&record),
            Err(PersistError::WrongKind { .. })
        ));
    }

    #[test]
    fn garbage_is_a_json_error() {
        assert!(matches!(
            from_json("{\"schema_version\": 1}"),
            Err(PersistError::Json(_))
        ));
    }
}
