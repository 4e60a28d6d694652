//! Arena service: prompt intake and categorization, generation through
//! pluggable clients, weighted matchmaking, blind voting and leaderboards,
//! all persisted to an append-only event log.

pub mod categorizer;
pub mod config;
pub mod events;
pub mod generator;
pub mod http;
pub mod matchmaker;
pub mod service;
pub mod state;

use thiserror::Error;

pub use categorizer::{CategorizerError, CategoryIndex, EmbeddingProvider, HashingEmbedder, HttpEmbedder, SeedPrompt};
pub use config::{ArenaConfig, ModelConfig, ProviderConfig, PublicModel};
pub use events::{ArenaEvent, EventLog, EVENT_LOG_VERSION};
pub use generator::{GenerationError, GeneratorClient, HttpGenerator, ReplayGenerator};
pub use matchmaker::{select_matches, MatchError, MatchRequest, MatchSet};
pub use service::{Arena, BattleView, LeaderboardQuery, LeaderboardResponse, SubmitResponse, VoteAck};
pub use state::ArenaState;

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("prompt has {0} characters; the limit is 20000")]
    PromptTooLong(usize),
    #[error("unknown battle `{0}`")]
    UnknownBattle(String),
    #[error("this voter already voted on battle `{0}`")]
    DuplicateVote(String),
    #[error("missing voter token")]
    MissingVoterToken,
    #[error(transparent)]
    Categorizer(#[from] CategorizerError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("event log line {line}: {message}")]
    CorruptLog { line: usize, message: String },
    #[error("inconsistent event: {0}")]
    InvalidEvent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
