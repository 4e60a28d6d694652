use serde::{Deserialize, Serialize};

use crate::categorizer::DEFAULT_K;
use crate::matchmaker::DEFAULT_PAIRS;

pub const MAX_PROMPT_CHARS: usize = 20_000;
pub const DEFAULT_TIMEOUT_SECS: u64 = 180;
pub const DEFAULT_MAX_TOKENS: u64 = 60_000;

/// Where a model's completions come from. Absent for replay-only rosters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    /// Model name sent to the provider; defaults to the roster name.
    #[serde(default)]
    pub api_model: Option<String>,
    /// Environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// Use the provider's JSON-schema response format; otherwise the schema
    /// is appended to the system prompt.
    #[serde(default = "yes")]
    pub structured_outputs: bool,
}

fn yes() -> bool {
    true
}

fn default_max_tokens() -> u64 {
    DEFAULT_MAX_TOKENS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    /// `None` leaves the provider default.
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u64,
    #[serde(default)]
    pub provider: Option<ProviderConfig>,
}

impl ModelConfig {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            temperature: Some(0.7),
            max_tokens: DEFAULT_MAX_TOKENS,
            provider: None,
        }
    }

    pub fn public(&self) -> PublicModel {
        PublicModel {
            name: self.name.clone(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        }
    }
}

/// What `GET /models` exposes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicModel {
    pub name: String,
    pub temperature: Option<f64>,
    pub max_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArenaConfig {
    pub models: Vec<ModelConfig>,
    pub seed: u64,
    pub min_votes: usize,
    pub n_pairs: usize,
    pub timeout_secs: u64,
    pub anchor: Option<String>,
    pub neighbors: usize,
}

impl Default for ArenaConfig {
    fn default() -> Self {
        Self {
            models: Vec::new(),
            seed: 0,
            min_votes: sheetarena_rating::elo::DEFAULT_MIN_VOTES,
            n_pairs: DEFAULT_PAIRS,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            anchor: None,
            neighbors: DEFAULT_K,
        }
    }
}

impl ArenaConfig {
    pub fn with_models<S: AsRef<str>>(names: &[S]) -> Self {
        Self {
            models: names.iter().map(|n| ModelConfig::new(n.as_ref())).collect(),
            ..Self::default()
        }
    }

    pub fn model(&self, name: &str) -> Option<&ModelConfig> {
        self.models.iter().find(|m| m.name == name)
    }
}
