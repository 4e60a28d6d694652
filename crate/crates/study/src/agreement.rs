use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::expert::ExpertEvaluation;
use crate::StudyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// A decisive arena battle between two spreadsheets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledBattle {
    pub battle_id: String,
    pub spreadsheet_a: String,
    pub spreadsheet_b: String,
    pub winner: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub battles: usize,
    pub agree: usize,
    pub disagree: usize,
    pub tie: usize,
    pub agree_rate: f64,
    pub disagree_rate: f64,
    pub tie_rate: f64,
    /// Agreement among battles where the experts had a preference.
    pub decisive_agreement: Option<f64>,
}

/// Compare arena winners with the side experts scored higher on mean
/// overall rating; equal means count as a tie.
pub fn arena_agreement(battles: &[LabeledBattle], evals: &[ExpertEvaluation]) -> Result<Agreement, StudyError> {
    let mut sums: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
    for e in evals {
        let s = sums.entry(e.spreadsheet_id.as_str()).or_default();
        s.0 += u32::from(e.overall);
        s.1 += 1;
    }
    let (mut agree, mut disagree, mut tie) = (0, 0, 0);
    for b in battles {
        let get = |id: &str| sums.get(id).copied().ok_or_else(|| StudyError::MissingEvaluation(id.to_string()));
        let (sa, na) = get(&b.spreadsheet_a)?;
        let (sb, nb) = get(&b.spreadsheet_b)?;
        // Compare sa/na with sb/nb exactly.
        let expert = match (u64::from(sa) * u64::from(nb)).cmp(&(u64::from(sb) * u64::from(na))) {
            std::cmp::Ordering::Greater => Some(Side::A),
            std::cmp::Ordering::Less => Some(Side::B),
            std::cmp::Ordering::Equal => None,
        };
        match expert {
            None => tie += 1,
            Some(s) if s == b.winner => agree += 1,
            Some(_) => disagree += 1,
        }
    }
    let n = battles.len();
    let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    Ok(Agreement {
        battles: n,
        agree,
        disagree,
        tie,
        agree_rate: rate(agree),
        disagree_rate: rate(disagree),
        tie_rate: rate(tie),
        decisive_agreement: (agree + disagree > 0).then(|| agree as f64 / (agree + disagree) as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(sheet: &str, score: i64) -> ExpertEvaluation {
        ExpertEvaluation::new(sheet, "r", [score; 6]).unwrap()
    }

    fn battle(a: &str, b: &str, winner: Side) -> LabeledBattle {
        LabeledBattle {
            battle_id: format!("{a}{b}"),
            spreadsheet_a: a.into(),
            spreadsheet_b: b.into(),
            winner,
        }
    }

    #[test]
    fn agree_and_tie() {
        let evals = [eval("x", 4), eval("y", 2), eval("z", 2)];
        let r = arena_agreement(&[battle("x", "y", Side::A)], &evals).unwrap();
        assert_eq!(r.agree, 1);
        let r = arena_agreement(&[battle("y", "z", Side::A)], &evals).unwrap();
        assert_eq!((r.tie, r.decisive_agreement), (1, None));
        assert!(matches!(
            arena_agreement(&[battle("x", "w", Side::A)], &evals),
            Err(StudyError::MissingEvaluation(id)) if id == "w"
        ));
    }

    #[test]
    fn ten_battle_counts() {
        let evals = [eval("hi", 5), eval("lo", 1), eval("mid", 3), eval("mid2", 3)];
        let mut battles = vec![battle("hi", "lo", Side::A); 4];
        battles.extend(vec![battle("hi", "lo", Side::B); 3]);
        battles.extend(vec![battle("mid", "mid2", Side::A); 3]);
        let r = arena_agreement(&battles, &evals).unwrap();
        assert_eq!((r.agree_rate, r.disagree_rate, r.tie_rate), (0.4, 0.3, 0.3));
        assert_eq!(r.decisive_agreement, Some(4.0 / 7.0));
    }

    #[test]
    fn means_across_raters() {
        // x: mean 3.5 from two raters, y: 3.
        let evals = [eval("x", 3), eval("x", 4), eval("y", 3)];
        let r = arena_agreement(&[battle("x", "y", Side::B)], &evals).unwrap();
        assert_eq!(r.disagree, 1);
    }
}
