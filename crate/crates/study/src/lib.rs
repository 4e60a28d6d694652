//! Analytics for the human study: failure-tag rates per model, expert
//! rubric statistics, inter-rater reliability and arena agreement.

pub mod agreement;
pub mod alpha;
pub mod expert;
pub mod tags;

use thiserror::Error;

pub use agreement::{arena_agreement, Agreement, LabeledBattle, Side};
pub use alpha::krippendorff_alpha;
pub use expert::{
    dimension_stats, expert_overall, read_expert_csv, DimensionStat, DimensionStats, ExpertEvaluation, DIMENSIONS,
};
pub use tags::{aggregate_failure_tags, read_tags_jsonl, FailureTable, ModelTagRates, TaggedLoss, TAG_NAMES};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("battle `{battle_id}`: tag {tag} outside 0-7")]
    InvalidTag { battle_id: String, tag: i64 },
    #[error("battle `{0}` has no tags")]
    EmptyTags(String),
    #[error("score {0} outside 1-5")]
    OutOfRange(i64),
    #[error("no evaluations")]
    EmptyInput,
    #[error("need at least 2 items with 2 or more ratings")]
    InsufficientData,
    #[error("no expert evaluation for spreadsheet `{0}`")]
    MissingEvaluation(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
