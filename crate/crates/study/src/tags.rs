use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::StudyError;

/// Tag 0 is folded into tag 1 on ingest, so rates cover tags 1-7.
pub const TAG_NAMES: [&str; 7] = [
    "Non-functional",
    "Spec Non-compliance",
    "Integrity",
    "Incorrect Logic",
    "Interpretability",
    "Low User Value",
    "Presentation",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedLoss {
    pub battle_id: String,
    pub loser: String,
    pub tags: BTreeSet<u8>,
    #[serde(default)]
    pub rationale: String,
}

#[derive(Deserialize)]
struct RawLoss {
    battle_id: String,
    loser: String,
    tags: Vec<i64>,
    #[serde(default)]
    rationale: String,
}

impl TaggedLoss {
    /// Validate raw judge tags and merge "unjudgeable" into "non-functional".
    pub fn ingest(battle_id: &str, loser: &str, tags: &[i64], rationale: &str) -> Result<Self, StudyError> {
        let mut set = BTreeSet::new();
        for &t in tags {
            if !(0..=7).contains(&t) {
                return Err(StudyError::InvalidTag {
                    battle_id: battle_id.to_string(),
                    tag: t,
                });
            }
            set.insert(if t == 0 { 1 } else { t as u8 });
        }
        if set.is_empty() {
            return Err(StudyError::EmptyTags(battle_id.to_string()));
        }
        Ok(Self {
            battle_id: battle_id.to_string(),
            loser: loser.to_string(),
            tags: set,
            rationale: rationale.to_string(),
        })
    }
}

pub fn read_tags_jsonl(reader: impl BufRead) -> Result<Vec<TaggedLoss>, StudyError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawLoss = serde_json::from_str(&line).map_err(|e| StudyError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(TaggedLoss::ingest(&raw.battle_id, &raw.loser, &raw.tags, &raw.rationale)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTagRates {
    pub model: String,
    pub losses: usize,
    /// Share of this model's losses carrying tags 1-7.
    pub rates: [f64; 7],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureTable {
    pub rows: Vec<ModelTagRates>,
    /// Absent when there are no losses.
    pub avg_tags_per_loss: Option<f64>,
}

pub fn aggregate_failure_tags(losses: &[TaggedLoss]) -> FailureTable {
    let mut counts: BTreeMap<&str, (usize, [usize; 7])> = BTreeMap::new();
    let mut total_tags = 0usize;
    for loss in losses {
        let entry = counts.entry(loss.loser.as_str()).or_default();
        entry.0 += 1;
        for &t in &loss.tags {
            entry.1[usize::from(t) - 1] += 1;
        }
        total_tags += loss.tags.len();
    }
    let rows = counts
        .into_iter()
        .map(|(model, (n, tags))| ModelTagRates {
            model: model.to_string(),
            losses: n,
            rates: tags.map(|c| c as f64 / n as f64),
        })
        .collect();
    FailureTable {
        rows,
        avg_tags_per_loss: (!losses.is_empty()).then(|| total_tags as f64 / losses.len() as f64),
    }
}

impl FailureTable {
    /// One row per model: `model,losses,<tag rates>`.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), StudyError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["model", "losses"];
        header.extend(TAG_NAMES);
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.model.clone(), row.losses.to_string()];
            rec.extend(row.rates.iter().map(|r| format!("{r:.4}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
