use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PAIRS: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("need at least 2 eligible models, got {0}")]
    TooFewModels(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRequest {
    pub eligible: Vec<String>,
    /// Missing models count as zero votes.
    pub vote_counts: BTreeMap<String, u64>,
    pub n_pairs: usize,
    pub seed: u64,
}

impl MatchRequest {
    pub fn new(eligible: Vec<String>, vote_counts: BTreeMap<String, u64>, seed: u64) -> Self {
        Self {
            eligible,
            vote_counts,
            n_pairs: DEFAULT_PAIRS,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSet {
    pub pairs: Vec<(String, String)>,
    pub discarded: Vec<(String, String)>,
    /// Fewer valid pairs than requested.
    pub insufficient: bool,
}

/// Pair weight `((V_i + 1)(V_j + 1))^(-1/2)`.
pub fn pair_weight(v_i: u64, v_j: u64) -> f64 {
    (((v_i + 1) as f64) * ((v_j + 1) as f64)).powf(-0.5)
}

/// Every unordered pair, shuffled by the seed and then stably sorted by
/// descending weight.
pub fn ranked_pairs(req: &MatchRequest) -> Result<Vec<(String, String)>, MatchError> {
    let mut models = req.eligible.clone();
    models.dedup();
    if models.len() < 2 {
        return Err(MatchError::TooFewModels(models.len()));
    }
    let count = |m: &str| req.vote_counts.get(m).copied().unwrap_or(0);
    let mut pairs: Vec<(String, String)> = Vec::new();
    for i in 0..models.len() {
        for j in i + 1..models.len() {
            pairs.push((models[i].clone(), models[j].clone()));
        }
    }
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(req.seed));
    // Descending weight is ascending product of smoothed counts; integers keep ties exact.
    pairs.sort_by_key(|(a, b)| u128::from(count(a) + 1) * u128::from(count(b) + 1));
    Ok(pairs)
}

/// Walk the ranked pairs keeping those `valid` accepts until `n_pairs` are found.
pub fn select_matches(
    req: &MatchRequest,
    mut valid: impl FnMut(&str, &str) -> bool,
) -> Result<MatchSet, MatchError> {
    let ranked = ranked_pairs(req)?;
    let mut set = MatchSet {
        pairs: Vec::new(),
        discarded: Vec::new(),
        insufficient: false,
    };
    for (a, b) in ranked {
        if set.pairs.len() == req.n_pairs {
            break;
        }
        if valid(&a, &b) {
            set.pairs.push((a, b));
        } else {
            set.discarded.push((a, b));
        }
    }
    set.insufficient = set.pairs.len() < req.n_pairs;
    Ok(set)
}
