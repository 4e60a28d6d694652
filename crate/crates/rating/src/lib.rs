//! Bradley-Terry ratings with workbook-feature covariates, anchored Elo
//! leaderboards, segment fits and a vote simulator.

pub mod elo;
pub mod fit;
pub mod segment;
pub mod sim;
pub mod table;
pub mod vote;

pub use elo::{
    compare_fits, elo_scale, elo_spread, significance_table, to_elo, win_matrix, EloConfig, Leaderboard,
    LeaderboardRow, RankShift, SignificanceRow, WinMatrix,
};
pub use fit::{
    fit_bt, fit_bt_with_features, wald_p_value, Coefficient, CovariateMode, FitConfig, FitError, Objective, RatingFit,
    TieMode,
};
pub use segment::{segment_fit, CategoryFilter, CATEGORIES, FINANCE, MIN_SEGMENT_VOTES};
pub use sim::{simulate, PlantedFeature, SimConfig, SimError, SimOutput, SimTruth};
pub use table::{FeatureTable, TableError};
pub use vote::{read_votes_jsonl, write_votes_jsonl, Outcome, VoteError, VoteRecord};
