use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fit::{FitError, RatingFit};

pub const ANCHOR_RATING: f64 = 1000.0;
pub const DEFAULT_MIN_VOTES: usize = 50;
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Elo points per unit of log-strength.
pub fn elo_scale() -> f64 {
    400.0 / std::f64::consts::LN_10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloConfig {
    pub anchor_rating: f64,
    pub scale: f64,
    pub min_votes: usize,
}

impl Default for EloConfig {
    fn default() -> Self {
        Self {
            anchor_rating: ANCHOR_RATING,
            scale: elo_scale(),
            min_votes: DEFAULT_MIN_VOTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub model: String,
    pub elo: f64,
    pub elo_se: f64,
    pub n_votes: usize,
    /// Dense 1-based rank; `None` below the vote threshold.
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub anchor: String,
    pub rows: Vec<LeaderboardRow>,
    pub unranked: Vec<LeaderboardRow>,
}

fn sort_rows(rows: &mut [LeaderboardRow]) {
    rows.sort_by(|a, b| b.elo.total_cmp(&a.elo).then_with(|| a.model.cmp(&b.model)));
}

/// Map log-strengths to Elo with the anchor pinned at `anchor_rating`.
pub fn to_elo(fit: &RatingFit, config: &EloConfig) -> Leaderboard {
    let base = fit.theta[&fit.anchor];
    let mut rows: Vec<LeaderboardRow> = fit
        .models
        .iter()
        .map(|m| LeaderboardRow {
            model: m.clone(),
            elo: if *m == fit.anchor {
                config.anchor_rating
            } else {
                config.anchor_rating + config.scale * (fit.theta[m] - base)
            },
            elo_se: config.scale * fit.theta_se[m],
            n_votes: fit.votes_per_model.get(m).copied().unwrap_or(0),
            rank: None,
        })
        .collect();
    sort_rows(&mut rows);
    let (mut ranked, unranked): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.n_votes >= config.min_votes);
    for (i, r) in ranked.iter_mut().enumerate() {
        r.rank = Some(i + 1);
    }
    Leaderboard {
        anchor: fit.anchor.clone(),
        rows: ranked,
        unranked,
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinMatrix {
    pub models: Vec<String>,
    /// `p[i][j]` is the chance that model i beats model j on equal features.
    pub p: Vec<Vec<f64>>,
}

pub fn win_matrix(fit: &RatingFit) -> WinMatrix {
    let k = fit.models.len();
    let mut p = vec![vec![0.5; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let pij = sigmoid(fit.theta[&fit.models[i]] - fit.theta[&fit.models[j]]);
            p[i][j] = pij;
            p[j][i] = 1.0 - pij;
        }
    }
    WinMatrix {
        models: fit.models.clone(),
        p,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankShift {
    pub model: String,
    pub baseline_elo: f64,
    pub adjusted_elo: f64,
    pub delta_elo: f64,
    pub baseline_rank: usize,
    pub adjusted_rank: usize,
    /// Positive when the model climbs after adjustment.
    pub delta_rank: i64,
}

fn ranks(board: &[LeaderboardRow]) -> BTreeMap<String, (f64, usize)> {
    board.iter().enumerate().map(|(i, r)| (r.model.clone(), (r.elo, i + 1))).collect()
}

/// Per-model Elo and rank movement between two fits over the same models.
/// Ranks are taken over every model, ignoring the vote threshold.
pub fn compare_fits(baseline: &RatingFit, adjusted: &RatingFit, config: &EloConfig) -> Result<Vec<RankShift>, FitError> {
    if baseline.models != adjusted.models {
        let mut diff: Vec<String> = baseline
            .models
            .iter()
            .filter(|m| !adjusted.models.contains(m))
            .chain(adjusted.models.iter().filter(|m| !baseline.models.contains(m)))
            .cloned()
            .collect();
        diff.sort();
        return Err(FitError::ModelSetMismatch(diff));
    }
    if baseline.anchor != adjusted.anchor {
        return Err(FitError::AnchorMismatch(baseline.anchor.clone(), adjusted.anchor.clone()));
    }
    let all = EloConfig { min_votes: 0, ..*config };
    let b = ranks(&to_elo(baseline, &all).rows);
    let a = ranks(&to_elo(adjusted, &all).rows);
    let mut out: Vec<RankShift> = b
        .iter()
        .map(|(m, &(be, br))| {
            let (ae, ar) = a[m];
            RankShift {
                model: m.clone(),
                baseline_elo: be,
                adjusted_elo: ae,
                delta_elo: ae - be,
                baseline_rank: br,
                adjusted_rank: ar,
                delta_rank: br as i64 - ar as i64,
            }
        })
        .collect();
    out.sort_by_key(|s| s.baseline_rank);
    Ok(out)
}

/// Max minus min Elo over a board.
pub fn elo_spread(board: &Leaderboard) -> f64 {
    let elos = board.rows.iter().chain(&board.unranked).map(|r| r.elo);
    let (lo, hi) = elos.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub feature: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Feature coefficients ordered by p-value; empty for a fit without features.
pub fn significance_table(fit: &RatingFit, alpha: f64) -> Vec<SignificanceRow> {
    let mut rows: Vec<SignificanceRow> = fit
        .coefficients
        .iter()
        .flatten()
        .map(|c| SignificanceRow {
            feature: c.feature.clone(),
            coefficient: c.estimate,
            std_error: c.std_error,
            p_value: c.p_value,
            significant: c.p_value < alpha,
        })
        .collect();
    rows.sort_by(|a, b| a.p_value.total_cmp(&b.p_value).then_with(|| a.feature.cmp(&b.feature)));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit_bt, FitConfig};
    use crate::vote::{Outcome, VoteRecord};
    use approx::assert_abs_diff_eq;
    use chrono::TimeZone;

    fn vote(a: &str, b: &str, outcome: Outcome) -> VoteRecord {
        VoteRecord {
            battle_id: String::new(),
            prompt_id: String::new(),
            category: String::new(),
            model_a: a.into(),
            model_b: b.into(),
            workbook_a: String::new(),
            workbook_b: String::new(),
            outcome,
            timestamp: chrono::Utc.timestamp_opt(0, 0).unwrap(),
        }
    }

    fn fixture() -> RatingFit {
        let mut votes = Vec::new();
        for (a, b, wins, losses) in [("A", "B", 30, 10), ("B", "C", 20, 20), ("A", "C", 35, 5)] {
            votes.extend(std::iter::repeat_n(vote(a, b, Outcome::AWins), wins));
            votes.extend(std::iter::repeat_n(vote(a, b, Outcome::BWins), losses));
        }
        fit_bt(&votes, &FitConfig { anchor: Some("B".into()), ..FitConfig::default() }).unwrap()
    }

    #[test]
    fn anchor_is_exactly_the_anchor_rating() {
        let fit = fixture();
        let board = to_elo(&fit, &EloConfig { min_votes: 0, ..EloConfig::default() });
        let b = board.rows.iter().find(|r| r.model == "B").unwrap();
        assert_eq!(b.elo, 1000.0);
        assert_eq!(board.rows[0].model, "A");
        assert_eq!(board.rows.iter().map(|r| r.rank.unwrap()).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn four_hundred_points_is_ten_to_one() {
        let mut fit = fixture();
        fit.theta.insert("A".into(), 400.0 / elo_scale());
        let board = to_elo(&fit, &EloConfig::default());
        let a = board.rows.iter().chain(&board.unranked).find(|r| r.model == "A").unwrap();
        assert_abs_diff_eq!(a.elo, 1400.0, epsilon = 1e-9);
        let m = win_matrix(&fit);
        assert_abs_diff_eq!(m.p[0][1], 10.0 / 11.0, epsilon = 1e-12);
    }

    #[test]
    fn vote_threshold_moves_rows_to_unranked() {
        let fit = fixture();
        // A has 80 votes, B 80, C 80.
        let board = to_elo(&fit, &EloConfig { min_votes: 81, ..EloConfig::default() });
        assert!(board.rows.is_empty());
        assert_eq!(board.unranked.len(), 3);
        assert!(board.unranked.iter().all(|r| r.rank.is_none()));
    }

    #[test]
    fn win_matrix_shape() {
        let m = win_matrix(&fixture());
        for i in 0..3 {
            assert_eq!(m.p[i][i], 0.5);
            for j in 0..3 {
                assert_abs_diff_eq!(m.p[i][j] + m.p[j][i], 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn compare_requires_matching_fits() {
        let fit = fixture();
        let shifts = compare_fits(&fit, &fit, &EloConfig::default()).unwrap();
        assert!(shifts.iter().all(|s| s.delta_elo == 0.0 && s.delta_rank == 0));
        let mut other = fit.clone();
        other.models.pop();
        assert!(matches!(compare_fits(&fit, &other, &EloConfig::default()), Err(FitError::ModelSetMismatch(_))));
        let mut other = fit.clone();
        other.anchor = "A".into();
        assert!(matches!(compare_fits(&fit, &other, &EloConfig::default()), Err(FitError::AnchorMismatch(..))));
    }
}
