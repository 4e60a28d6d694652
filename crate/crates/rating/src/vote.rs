use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    AWins,
    BWins,
    Tie,
    BothBad,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::AWins, Outcome::BWins, Outcome::Tie, Outcome::BothBad];

    pub fn is_decisive(self) -> bool {
        matches!(self, Outcome::AWins | Outcome::BWins)
    }

    /// The same judgement with the two sides swapped.
    pub fn flipped(self) -> Self {
        match self {
            Outcome::AWins => Outcome::BWins,
            Outcome::BWins => Outcome::AWins,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::AWins => "A_WINS",
            Outcome::BWins => "B_WINS",
            Outcome::Tie => "TIE",
            Outcome::BothBad => "BOTH_BAD",
        }
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown outcome `{s}`; expected A_WINS, B_WINS, TIE or BOTH_BAD"))
    }
}

/// One blind pairwise judgement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub battle_id: String,
    pub prompt_id: String,
    pub category: String,
    pub model_a: String,
    pub model_b: String,
    pub workbook_a: String,
    pub workbook_b: String,
    pub outcome: Outcome,
    pub timestamp: DateTime<Utc>,
}

impl VoteRecord {
    /// The same vote seen from the other side.
    pub fn swapped(&self) -> Self {
        Self {
            model_a: self.model_b.clone(),
            model_b: self.model_a.clone(),
            workbook_a: self.workbook_b.clone(),
            workbook_b: self.workbook_a.clone(),
            outcome: self.outcome.flipped(),
            ..self.clone()
        }
    }

    pub fn involves(&self, model: &str) -> bool {
        self.model_a == model || self.model_b == model
    }
}

#[derive(Debug, Error)]
pub enum VoteError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: model_a and model_b are both `{model}`")]
    SelfMatch { line: usize, model: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Read one vote per line; blank lines are skipped.
pub fn read_votes_jsonl(reader: impl BufRead) -> Result<Vec<VoteRecord>, VoteError> {
    let mut votes = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vote: VoteRecord = serde_json::from_str(&line).map_err(|e| VoteError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if vote.model_a == vote.model_b {
            return Err(VoteError::SelfMatch {
                line: i + 1,
                model: vote.model_a,
            });
        }
        votes.push(vote);
    }
    Ok(votes)
}

pub fn write_votes_jsonl(mut writer: impl Write, votes: &[VoteRecord]) -> std::io::Result<()> {
    for v in votes {
        serde_json::to_writer(&mut writer, v)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
