use std::path::{Path, PathBuf};

use serde::Deserialize;

use sheetarena_arena::config::DEFAULT_TIMEOUT_SECS;
use sheetarena_arena::matchmaker::DEFAULT_PAIRS;
use sheetarena_arena::{ArenaConfig, ModelConfig};
use sheetarena_rating::elo::DEFAULT_MIN_VOTES;
use sheetarena_rating::fit::DEFAULT_LAMBDA;
use sheetarena_rating::CovariateMode;

use crate::args::Common;
use crate::CliError;

pub const ENV_PREFIX: &str = "SHEETARENA_";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub min_votes: Option<usize>,
    pub anchor: Option<String>,
    pub lambda: Option<f64>,
    pub mode: Option<CovariateMode>,
    pub models: Vec<ModelConfig>,
    pub serve: ServeFile,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeFile {
    pub bind: Option<String>,
    pub log: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub n_pairs: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub neighbors: Option<usize>,
    pub embedding: Option<EmbeddingFile>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingFile {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("config {}: {e}", path.display())))
    }
}

/// `SHEETARENA_*` variables, parsed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvConfig {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub min_votes: Option<usize>,
    pub anchor: Option<String>,
    pub lambda: Option<f64>,
    pub mode: Option<CovariateMode>,
    pub bind: Option<String>,
    pub log: Option<PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::input(format!("{ENV_PREFIX}{key}={value}: {e}")))
}

impl EnvConfig {
    pub fn from_vars(vars: impl IntoIterator<Item = (String, String)>) -> Result<Self, CliError> {
        let mut env = Self::default();
        for (k, v) in vars {
            let Some(key) = k.strip_prefix(ENV_PREFIX) else { continue };
            match key {
                "CONFIG" => env.config = Some(v.into()),
                "SEED" => env.seed = Some(parse(key, &v)?),
                "MIN_VOTES" => env.min_votes = Some(parse(key, &v)?),
                "ANCHOR" => env.anchor = Some(v),
                "LAMBDA" => env.lambda = Some(parse(key, &v)?),
                "MODE" => env.mode = Some(parse(key, &v)?),
                "BIND" => env.bind = Some(v),
                "LOG" => env.log = Some(v.into()),
                _ => {}
            }
        }
        Ok(env)
    }

    pub fn from_process() -> Result<Self, CliError> {
        Self::from_vars(std::env::vars())
    }
}

/// Settings after layering flags over the config file over the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub min_votes: usize,
    pub anchor: Option<String>,
    pub lambda: f64,
    pub mode: CovariateMode,
    pub file: FileConfig,
    pub env: EnvConfig,
}

impl Settings {
    pub fn resolve(flags: &Common, env: EnvConfig) -> Result<Self, CliError> {
        let file = match flags.config.as_ref().or(env.config.as_ref()) {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Ok(Self::layer(flags, file, env))
    }

    pub fn layer(flags: &Common, file: FileConfig, env: EnvConfig) -> Self {
        Self {
            seed: flags.seed.or(file.seed).or(env.seed).unwrap_or(0),
            min_votes: flags.min_votes.or(file.min_votes).or(env.min_votes).unwrap_or(DEFAULT_MIN_VOTES),
            anchor: flags.anchor.clone().or(file.anchor.clone()).or(env.anchor.clone()),
            lambda: flags.lambda.or(file.lambda).or(env.lambda).unwrap_or(DEFAULT_LAMBDA),
            mode: file.mode.or(env.mode).unwrap_or(CovariateMode::PerBattle),
            file,
            env,
        }
    }

    pub fn bind(&self, flag: Option<&str>) -> String {
        flag.map(str::to_string)
            .or(self.file.serve.bind.clone())
            .or(self.env.bind.clone())
            .unwrap_or_else(|| DEFAULT_BIND.to_string())
    }

    pub fn log(&self, flag: Option<&Path>) -> Option<PathBuf> {
        flag.map(Path::to_path_buf)
            .or(self.file.serve.log.clone())
            .or(self.env.log.clone())
    }

    pub fn arena_config(&self) -> ArenaConfig {
        let serve = &self.file.serve;
        ArenaConfig {
            models: self.file.models.clone(),
            seed: self.seed,
            min_votes: self.min_votes,
            n_pairs: serve.n_pairs.unwrap_or(DEFAULT_PAIRS),
            timeout_secs: serve.timeout_secs.unwrap_or(DEFAULT_TIMEOUT_SECS),
            anchor: self.anchor.clone(),
            neighbors: serve.neighbors.unwrap_or(ArenaConfig::default().neighbors),
        }
    }
}
