use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::StudyError;

/// Rubric dimensions as `(CSV column, display name)`.
pub const DIMENSIONS: [(&str, &str); 6] = [
    ("errors_accuracy", "Errors & Accuracy"),
    ("formula_conventions", "Formula Conventions"),
    ("color_formatting", "Color/Formatting"),
    ("structure_organization", "Structure & Organization"),
    ("modeling_conventions", "Modeling Conventions"),
    ("purpose_utility", "Purpose & Utility"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpertEvaluation {
    pub spreadsheet_id: String,
    pub rater_id: String,
    pub scores: [u8; 6],
    pub overall: u8,
}

impl ExpertEvaluation {
    pub fn new(spreadsheet_id: &str, rater_id: &str, scores: [i64; 6]) -> Result<Self, StudyError> {
        let overall = expert_overall(scores)?;
        Ok(Self {
            spreadsheet_id: spreadsheet_id.to_string(),
            rater_id: rater_id.to_string(),
            scores: scores.map(|s| s as u8),
            overall,
        })
    }
}

/// Mean of six 1-5 scores rounded half up.
pub fn expert_overall(scores: [i64; 6]) -> Result<u8, StudyError> {
    if let Some(&bad) = scores.iter().find(|s| !(1..=5).contains(*s)) {
        return Err(StudyError::OutOfRange(bad));
    }
    // floor(sum / 6 + 1/2) in integers.
    let sum: i64 = scores.iter().sum();
    Ok(((2 * sum + 6) / 12) as u8)
}

#[derive(Deserialize)]
struct Row {
    spreadsheet_id: String,
    rater_id: String,
    errors_accuracy: i64,
    formula_conventions: i64,
    color_formatting: i64,
    structure_organization: i64,
    modeling_conventions: i64,
    purpose_utility: i64,
}

/// CSV with `spreadsheet_id`, `rater_id` and one column per dimension.
/// Any `overall` column is ignored and recomputed.
pub fn read_expert_csv(reader: impl Read) -> Result<Vec<ExpertEvaluation>, StudyError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: Row = row?;
        out.push(ExpertEvaluation::new(
            &r.spreadsheet_id,
            &r.rater_id,
            [
                r.errors_accuracy,
                r.formula_conventions,
                r.color_formatting,
                r.structure_organization,
                r.modeling_conventions,
                r.purpose_utility,
            ],
        )?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionStat {
    pub name: String,
    pub mean: f64,
    pub std_dev: f64,
    pub pct_high: f64,
    pub pct_low: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionStats {
    pub n: usize,
    pub dimensions: Vec<DimensionStat>,
    pub overall: DimensionStat,
}

fn stat(name: &str, xs: impl Iterator<Item = u8> + Clone) -> DimensionStat {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().map(f64::from).sum::<f64>() / n;
    let var = xs.clone().map(|x| (f64::from(x) - mean).powi(2)).sum::<f64>() / n;
    DimensionStat {
        name: name.to_string(),
        mean,
        std_dev: var.sqrt(),
        pct_high: xs.clone().filter(|&x| x >= 4).count() as f64 / n,
        pct_low: xs.filter(|&x| x <= 2).count() as f64 / n,
    }
}

/// Population mean and standard deviation, and the shares scoring at least
/// 4 and at most 2, per dimension and for the overall score.
pub fn dimension_stats(evals: &[ExpertEvaluation]) -> Result<DimensionStats, StudyError> {
    if evals.is_empty() {
        return Err(StudyError::EmptyInput);
    }
    let dimensions = DIMENSIONS
        .iter()
        .enumerate()
        .map(|(d, (_, name))| stat(name, evals.iter().map(move |e| e.scores[d])))
        .collect();
    Ok(DimensionStats {
        n: evals.len(),
        dimensions,
        overall: stat("Overall", evals.iter().map(|e| e.overall)),
    })
}
