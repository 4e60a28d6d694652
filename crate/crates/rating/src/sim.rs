use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segment::CATEGORIES;
use crate::table::FeatureTable;
use crate::vote::{Outcome, VoteRecord};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("need at least 2 models, got {0}")]
    TooFewModels(usize),
    #[error("{0} strengths given for {1} models")]
    ThetaLength(usize, usize),
    #[error("feature `{0}` has {1} model means for {2} models")]
    MeansLength(String, usize, usize),
    #[error("tie and both-bad rates must be non-negative and sum to at most 1")]
    BadRates,
    #[error("no categories")]
    NoCategories,
}

/// A workbook feature whose effect on outcomes is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedFeature {
    pub name: String,
    /// Effect per standard deviation of the feature difference.
    pub beta: f64,
    /// Per-model mean of the raw feature; zero for every model when absent.
    pub model_means: Option<Vec<f64>>,
    pub noise_sd: f64,
    /// Restrict the effect to votes in this category.
    pub category: Option<String>,
}

impl PlantedFeature {
    pub fn noise(name: &str, beta: f64) -> Self {
        Self {
            name: name.to_string(),
            beta,
            model_means: None,
            noise_sd: 1.0,
            category: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_models: usize,
    /// True strengths; drawn uniformly from `[-theta_range, theta_range]` when absent.
    pub theta: Option<Vec<f64>>,
    pub theta_range: f64,
    pub n_votes: usize,
    pub seed: u64,
    pub features: Vec<PlantedFeature>,
    pub tie_rate: f64,
    pub both_bad_rate: f64,
    pub categories: Vec<String>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_models: 16,
            theta: None,
            theta_range: 2.0,
            n_votes: 5000,
            seed: 0,
            features: Vec::new(),
            tie_rate: 0.0,
            both_bad_rate: 0.0,
            categories: CATEGORIES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SimConfig {
    /// Half of each model's advantage comes from strength and half from a
    /// feature the model's outputs carry.
    pub fn compression(n_models: usize, n_votes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FFEE);
        let full: Vec<f64> = (0..n_models).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let half: Vec<f64> = full.iter().map(|t| t / 2.0).collect();
        let mean = half.iter().sum::<f64>() / n_models as f64;
        let var = half.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n_models as f64;
        let noise_sd = 0.25;
        Self {
            n_models,
            theta: Some(half.clone()),
            n_votes,
            seed,
            features: vec![PlantedFeature {
                name: "presentation".into(),
                // One standardized unit maps back to one raw unit.
                beta: (var + noise_sd * noise_sd).sqrt(),
                model_means: Some(half),
                noise_sd,
                category: None,
            }],
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub seed: u64,
    pub models: Vec<String>,
    pub theta: BTreeMap<String, f64>,
    pub features: Vec<PlantedFeature>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub votes: Vec<VoteRecord>,
    pub features: FeatureTable,
    pub truth: SimTruth,
}

pub fn model_name(i: usize) -> String {
    format!("model-{:02}", i + 1)
}

fn epoch() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2025-01-01T00:00:00Z").unwrap().with_timezone(&Utc)
}

/// Draw a vote log from a known Bradley-Terry model with covariates.
/// Identical configs give identical output.
pub fn simulate(config: &SimConfig) -> Result<SimOutput, SimError> {
    let k = config.n_models;
    if k < 2 {
        return Err(SimError::TooFewModels(k));
    }
    if config.categories.is_empty() {
        return Err(SimError::NoCategories);
    }
    if config.tie_rate < 0.0 || config.both_bad_rate < 0.0 || config.tie_rate + config.both_bad_rate > 1.0 {
        return Err(SimError::BadRates);
    }
    for f in &config.features {
        if let Some(m) = &f.model_means {
            if m.len() != k {
                return Err(SimError::MeansLength(f.name.clone(), m.len(), k));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let theta: Vec<f64> = match &config.theta {
        Some(t) if t.len() != k => return Err(SimError::ThetaLength(t.len(), k)),
        Some(t) => t.clone(),
        None => (0..k)
            .map(|_| rng.random_range(-config.theta_range..=config.theta_range))
            .collect(),
    };

    struct Draft {
        a: usize,
        b: usize,
        category: usize,
        xa: Vec<f64>,
        xb: Vec<f64>,
    }
    let nf = config.features.len();
    let raw = |rng: &mut ChaCha8Rng, m: usize| -> Vec<f64> {
        config
            .features
            .iter()
            .map(|f| {
                let mu = f.model_means.as_ref().map_or(0.0, |v| v[m]);
                let e: f64 = StandardNormal.sample(rng);
                mu + f.noise_sd * e
            })
            .collect()
    };
    let drafts: Vec<Draft> = (0..config.n_votes)
        .map(|_| {
            let a = rng.random_range(0..k);
            let mut b = rng.random_range(0..k - 1);
            if b >= a {
                b += 1;
            }
            let category = rng.random_range(0..config.categories.len());
            let xa = raw(&mut rng, a);
            let xb = raw(&mut rng, b);
            Draft { a, b, category, xa, xb }
        })
        .collect();

    // Standardize over every generated workbook.
    let n = (2 * drafts.len()).max(1) as f64;
    let mut mean = vec![0.0; nf];
    let mut sd = vec![0.0; nf];
    for j in 0..nf {
        mean[j] = drafts.iter().map(|d| d.xa[j] + d.xb[j]).sum::<f64>() / n;
        let ss: f64 = drafts
            .iter()
            .map(|d| (d.xa[j] - mean[j]).powi(2) + (d.xb[j] - mean[j]).powi(2))
            .sum();
        sd[j] = (ss / n).sqrt();
    }

    let names: Vec<String> = config.features.iter().map(|f| f.name.clone()).collect();
    let mut table = FeatureTable::new(names);
    let mut votes = Vec::with_capacity(drafts.len());
    for (i, d) in drafts.into_iter().enumerate() {
        let category = &config.categories[d.category];
        let mut logit = theta[d.a] - theta[d.b];
        for (j, f) in config.features.iter().enumerate() {
            if sd[j] == 0.0 || f.category.as_ref().is_some_and(|c| c != category) {
                continue;
            }
            logit += f.beta * (d.xa[j] - d.xb[j]) / sd[j];
        }
        let u: f64 = rng.random();
        let outcome = if u < config.both_bad_rate {
            Outcome::BothBad
        } else if u < config.both_bad_rate + config.tie_rate {
            Outcome::Tie
        } else if rng.random::<f64>() < 1.0 / (1.0 + (-logit).exp()) {
            Outcome::AWins
        } else {
            Outcome::BWins
        };
        let (wa, wb) = (format!("wb-{i:06}-a"), format!("wb-{i:06}-b"));
        table.insert(wa.clone(), d.xa).expect("fresh workbook id");
        table.insert(wb.clone(), d.xb).expect("fresh workbook id");
        votes.push(VoteRecord {
            battle_id: format!("battle-{i:06}"),
            prompt_id: format!("prompt-{i:06}"),
            category: category.clone(),
            model_a: model_name(d.a),
            model_b: model_name(d.b),
            workbook_a: wa,
            workbook_b: wb,
            outcome,
            timestamp: epoch() + Duration::seconds(i as i64),
        });
    }

    let models: Vec<String> = (0..k).map(model_name).collect();
    Ok(SimOutput {
        votes,
        features: table,
        truth: SimTruth {
            seed: config.seed,
            theta: models.iter().cloned().zip(theta).collect(),
            models,
            features: config.features.clone(),
        },
    })
}
