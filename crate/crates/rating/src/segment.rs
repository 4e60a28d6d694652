use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::fit::{fit_bt, fit_bt_with_features, FitConfig, FitError, RatingFit};
use crate::table::FeatureTable;
use crate::vote::VoteRecord;

pub const CATEGORIES: [&str; 6] = [
    "Academic & Research",
    "Corporate Finance & FP&A",
    "Creative & Generative",
    "Operations & Supply Chain",
    "Professional Finance",
    "SMB & Personal",
];

/// Name of the merged finance segment.
pub const FINANCE: &str = "Finance";
pub const FINANCE_CATEGORIES: [&str; 2] = ["Professional Finance", "Corporate Finance & FP&A"];

/// Fewest usable votes a segment fit accepts.
pub const MIN_SEGMENT_VOTES: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryFilter {
    pub label: String,
    pub categories: BTreeSet<String>,
}

impl CategoryFilter {
    /// A single category, or the merged finance segment for `Finance`.
    pub fn parse(label: &str) -> Self {
        let categories = if label.eq_ignore_ascii_case(FINANCE) {
            FINANCE_CATEGORIES.iter().map(|s| s.to_string()).collect()
        } else {
            BTreeSet::from([label.to_string()])
        };
        Self {
            label: label.to_string(),
            categories,
        }
    }

    pub fn matches(&self, vote: &VoteRecord) -> bool {
        self.categories.contains(&vote.category)
    }
}

/// Fit restricted to the votes of one segment.
pub fn segment_fit(
    votes: &[VoteRecord],
    filter: &CategoryFilter,
    features: Option<&FeatureTable>,
    config: &FitConfig,
    min_votes: usize,
) -> Result<RatingFit, FitError> {
    let subset: Vec<VoteRecord> = votes.iter().filter(|v| filter.matches(v)).cloned().collect();
    let usable = subset
        .iter()
        .filter(|v| v.outcome.is_decisive() || (config.tie_mode == crate::fit::TieMode::HalfWin && v.outcome == crate::vote::Outcome::Tie))
        .count();
    if usable < min_votes {
        return Err(FitError::InsufficientVotes {
            found: usable,
            required: min_votes,
        });
    }
    match features {
        Some(t) => fit_bt_with_features(&subset, t, config),
        None => fit_bt(&subset, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finance_merges_two_categories() {
        let f = CategoryFilter::parse("finance");
        assert_eq!(f.categories.len(), 2);
        assert!(f.categories.contains("Professional Finance"));
        let g = CategoryFilter::parse("SMB & Personal");
        assert_eq!(g.categories.len(), 1);
    }

    #[test]
    fn small_segments_are_rejected() {
        let err = segment_fit(&[], &CategoryFilter::parse(FINANCE), None, &FitConfig::default(), MIN_SEGMENT_VOTES);
        assert_eq!(err, Err(FitError::InsufficientVotes { found: 0, required: 30 }));
    }
}
