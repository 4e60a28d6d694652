use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use sheetarena_core::features::{extract_features, FEATURE_NAMES};
use sheetarena_core::sheetspec::parse_workbook_str;
use sheetarena_core::evaluate_workbook;
use sheetarena_rating::{
    compare_fits, fit_bt, fit_bt_with_features, significance_table, to_elo, CategoryFilter, EloConfig, FeatureTable,
    FitConfig, Outcome, SignificanceRow, VoteRecord,
};

use crate::categorizer::{CategoryIndex, EmbeddingProvider, SeedPrompt};
use crate::config::{ArenaConfig, PublicModel, MAX_PROMPT_CHARS};
use crate::events::{hash_token, ArenaEvent, EventLog};
use crate::generator::{default_prompt_parts, is_valid_output, GenerationRequest, GeneratorClient};
use crate::matchmaker::{ranked_pairs, select_matches, MatchRequest};
use crate::state::ArenaState;
use crate::ArenaError;

type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BattleRef {
    pub battle_id: String,
    pub workbook_a: String,
    pub workbook_b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub prompt_id: String,
    pub category: String,
    pub battles: Vec<BattleRef>,
    /// Fewer battles than requested could be assembled.
    pub exhausted: bool,
    pub discarded_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkbookView {
    pub workbook_id: String,
    pub document: Value,
    pub grid: Value,
}

/// A battle as shown to voters. Carries no model identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BattleView {
    pub battle_id: String,
    pub prompt_id: String,
    pub prompt: String,
    pub category: String,
    pub workbook_a: WorkbookView,
    pub workbook_b: WorkbookView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteAck {
    pub battle_id: String,
    pub outcome: Outcome,
    pub model_a: String,
    pub model_b: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeaderboardQuery {
    pub category: Option<String>,
    pub adjusted: bool,
    pub min_votes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardRow {
    pub model: String,
    pub rank: Option<usize>,
    pub elo: f64,
    pub n_votes: usize,
    pub adjusted_elo: Option<f64>,
    pub delta_elo: Option<f64>,
    pub delta_rank: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardResponse {
    pub category: Option<String>,
    pub adjusted: bool,
    pub min_votes: usize,
    pub total_votes: usize,
    pub anchor: Option<String>,
    pub rows: Vec<BoardRow>,
    pub unranked: Vec<BoardRow>,
    pub significance: Vec<SignificanceRow>,
    /// Why the board is empty or the adjusted columns are missing.
    pub reason: Option<String>,
    pub warnings: Vec<String>,
}

impl LeaderboardResponse {
    fn empty(query: &LeaderboardQuery, min_votes: usize, total_votes: usize, reason: String) -> Self {
        Self {
            category: query.category.clone(),
            adjusted: query.adjusted,
            min_votes,
            total_votes,
            anchor: None,
            rows: Vec::new(),
            unranked: Vec::new(),
            significance: Vec::new(),
            reason: Some(reason),
            warnings: Vec::new(),
        }
    }
}

struct Inner {
    state: ArenaState,
    log: Option<EventLog>,
    /// Keyed by query; valid while the vote count is unchanged.
    boards: BTreeMap<LeaderboardQuery, (usize, Arc<LeaderboardResponse>)>,
    features: BTreeMap<String, Vec<f64>>,
}

pub struct Arena {
    config: ArenaConfig,
    generator: Arc<dyn GeneratorClient>,
    embedder: Arc<dyn EmbeddingProvider>,
    index: CategoryIndex,
    clock: Clock,
    inner: Mutex<Inner>,
}

impl Arena {
    /// Build the service, replaying `log_path` when given; without a log
    /// the state lives in memory only.
    pub fn open(
        config: ArenaConfig,
        log_path: Option<&Path>,
        generator: Arc<dyn GeneratorClient>,
        embedder: Arc<dyn EmbeddingProvider>,
        seeds: &[SeedPrompt],
    ) -> Result<Self, ArenaError> {
        let index = CategoryIndex::build(seeds, config.neighbors.min(seeds.len()))?;
        let (log, state) = match log_path {
            Some(p) => {
                let (log, events) = EventLog::open(p)?;
                let state = ArenaState::replay(&events)?;
                tracing::info!(events = events.len(), path = %p.display(), "replayed event log");
                (Some(log), state)
            }
            None => (None, ArenaState::default()),
        };
        Ok(Self {
            config,
            generator,
            embedder,
            index,
            clock: Box::new(Utc::now),
            inner: Mutex::new(Inner {
                state,
                log,
                boards: BTreeMap::new(),
                features: BTreeMap::new(),
            }),
        })
    }

    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn config(&self) -> &ArenaConfig {
        &self.config
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn state(&self) -> ArenaState {
        self.lock().state.clone()
    }

    pub fn models(&self) -> Vec<PublicModel> {
        self.config.models.iter().map(|m| m.public()).collect()
    }

    fn commit(inner: &mut Inner, events: &[ArenaEvent]) -> Result<(), ArenaError> {
        let mut next = inner.state.clone();
        for e in events {
            next.apply(e)?;
        }
        if let Some(log) = inner.log.as_mut() {
            log.append(events)?;
        }
        inner.state = next;
        Ok(())
    }

    fn generate(&self, model: &str, prompt: &str) -> (String, bool, Option<String>) {
        let cfg = self.config.model(model).expect("roster model");
        let (system_prompt, schema) = default_prompt_parts();
        let req = GenerationRequest {
            model: cfg,
            prompt,
            system_prompt,
            schema: &schema,
        };
        match self.generator.generate(&req) {
            Ok(doc) => {
                let valid = is_valid_output(&doc);
                (doc, valid, None)
            }
            Err(e) => (String::new(), false, Some(e.to_string())),
        }
    }

    pub fn submit_prompt(&self, text: &str) -> Result<SubmitResponse, ArenaError> {
        if text.trim().is_empty() {
            return Err(ArenaError::EmptyPrompt);
        }
        let chars = text.chars().count();
        if chars > MAX_PROMPT_CHARS {
            return Err(ArenaError::PromptTooLong(chars));
        }
        let embedding = self.embedder.embed(text)?;
        let category = self.index.classify(&embedding)?.category;

        let (counts, seq) = {
            let inner = self.lock();
            (inner.state.vote_counts(), inner.state.prompts.len() as u64)
        };
        let seed = self.config.seed ^ seq.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let request = MatchRequest {
            eligible: self.config.models.iter().map(|m| m.name.clone()).collect(),
            vote_counts: counts,
            n_pairs: self.config.n_pairs,
            seed,
        };

        // Generate up front, in parallel, for the models the top pairs need.
        let ranked = ranked_pairs(&request)?;
        let mut first: Vec<String> = Vec::new();
        for (a, b) in ranked.iter().take(request.n_pairs) {
            for m in [a, b] {
                if !first.contains(m) {
                    first.push(m.clone());
                }
            }
        }
        let mut outputs: BTreeMap<String, (String, bool, Option<String>)> = std::thread::scope(|s| {
            let handles: Vec<_> = first
                .iter()
                .map(|m| (m.clone(), s.spawn(|| self.generate(m, text))))
                .collect();
            handles
                .into_iter()
                .map(|(m, h)| (m, h.join().expect("generation thread")))
                .collect()
        });
        let mut order = first.clone();
        let set = select_matches(&request, |a, b| {
            for m in [a, b] {
                if !outputs.contains_key(m) {
                    outputs.insert(m.to_string(), self.generate(m, text));
                    order.push(m.to_string());
                }
            }
            outputs[a].1 && outputs[b].1
        })?;

        let mut sides = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let mut inner = self.lock();
        let prompt_id = inner.state.next_prompt_id();
        let mut events = vec![ArenaEvent::PromptSubmitted {
            prompt_id: prompt_id.clone(),
            text: text.to_string(),
            category: category.clone(),
            timestamp: (self.clock)(),
        }];
        let mut workbook_of = BTreeMap::new();
        for (i, m) in order.iter().enumerate() {
            let (document, valid, error) = outputs[m].clone();
            let workbook_id = inner.state.next_workbook_id(i);
            workbook_of.insert(m.clone(), workbook_id.clone());
            events.push(ArenaEvent::GenerationStored {
                workbook_id,
                prompt_id: prompt_id.clone(),
                model_id: m.clone(),
                document,
                valid,
                error,
            });
        }
        let mut battles = Vec::new();
        for (i, (a, b)) in set.pairs.iter().enumerate() {
            let (a, b) = if sides.random_bool(0.5) { (b, a) } else { (a, b) };
            let battle = BattleRef {
                battle_id: inner.state.next_battle_id(i),
                workbook_a: workbook_of[a].clone(),
                workbook_b: workbook_of[b].clone(),
            };
            events.push(ArenaEvent::BattleCreated {
                battle_id: battle.battle_id.clone(),
                prompt_id: prompt_id.clone(),
                workbook_a: battle.workbook_a.clone(),
                workbook_b: battle.workbook_b.clone(),
            });
            battles.push(battle);
        }
        Self::commit(&mut inner, &events)?;
        if set.insufficient {
            tracing::warn!(%prompt_id, battles = battles.len(), "could not assemble the requested battles");
        }
        Ok(SubmitResponse {
            prompt_id,
            category,
            battles,
            exhausted: set.insufficient,
            discarded_pairs: set.discarded.len(),
        })
    }

    pub fn get_battle(&self, battle_id: &str) -> Result<BattleView, ArenaError> {
        let inner = self.lock();
        let s = &inner.state;
        let battle = s
            .battles
            .get(battle_id)
            .ok_or_else(|| ArenaError::UnknownBattle(battle_id.to_string()))?;
        let prompt = &s.prompts[&battle.prompt_id];
        let view = |id: &str| -> Result<WorkbookView, ArenaError> {
            let doc = &s.generations[id].document;
            let wb = parse_workbook_str(doc).map_err(|e| ArenaError::InvalidEvent(e.to_string()))?;
            Ok(WorkbookView {
                workbook_id: id.to_string(),
                document: serde_json::from_str(doc).map_err(|e| ArenaError::InvalidEvent(e.to_string()))?,
                grid: evaluate_workbook(&wb).to_json(),
            })
        };
        Ok(BattleView {
            battle_id: battle_id.to_string(),
            prompt_id: battle.prompt_id.clone(),
            prompt: prompt.text.clone(),
            category: prompt.category.clone(),
            workbook_a: view(&battle.workbook_a)?,
            workbook_b: view(&battle.workbook_b)?,
        })
    }

    pub fn cast_vote(&self, battle_id: &str, outcome: Outcome, voter_token: &str) -> Result<VoteAck, ArenaError> {
        if voter_token.trim().is_empty() {
            return Err(ArenaError::MissingVoterToken);
        }
        let mut inner = self.lock();
        let battle = inner
            .state
            .battles
            .get(battle_id)
            .ok_or_else(|| ArenaError::UnknownBattle(battle_id.to_string()))?
            .clone();
        let (model_a, model_b) = inner.state.battle_models(&battle);
        let vote = VoteRecord {
            battle_id: battle_id.to_string(),
            prompt_id: battle.prompt_id.clone(),
            category: inner.state.prompts[&battle.prompt_id].category.clone(),
            model_a: model_a.clone(),
            model_b: model_b.clone(),
            workbook_a: battle.workbook_a.clone(),
            workbook_b: battle.workbook_b.clone(),
            outcome,
            timestamp: (self.clock)(),
        };
        Self::commit(
            &mut inner,
            &[ArenaEvent::VoteCast {
                vote,
                voter: hash_token(voter_token),
            }],
        )?;
        Ok(VoteAck {
            battle_id: battle_id.to_string(),
            outcome,
            model_a,
            model_b,
        })
    }

    /// Fit from the current votes. Results are cached until the next vote,
    /// and the fit itself runs without holding the state lock.
    pub fn leaderboard(&self, query: &LeaderboardQuery) -> Arc<LeaderboardResponse> {
        let (votes, table) = {
            let mut inner = self.lock();
            let n = inner.state.votes.len();
            if let Some((at, board)) = inner.boards.get(query) {
                if *at == n {
                    return board.clone();
                }
            }
            let votes = inner.state.votes.clone();
            let table = query.adjusted.then(|| Self::feature_table(&mut inner, &votes));
            (votes, table)
        };
        let board = Arc::new(compute_leaderboard(&votes, table.as_ref(), query, &self.config));
        self.lock().boards.insert(query.clone(), (votes.len(), board.clone()));
        board
    }

    fn feature_table(inner: &mut Inner, votes: &[VoteRecord]) -> FeatureTable {
        let ids: BTreeSet<&str> = votes
            .iter()
            .flat_map(|v| [v.workbook_a.as_str(), v.workbook_b.as_str()])
            .collect();
        let mut table = FeatureTable::new(FEATURE_NAMES);
        for id in ids {
            if !inner.features.contains_key(id) {
                let Some(g) = inner.state.generations.get(id) else { continue };
                let Ok(wb) = parse_workbook_str(&g.document) else { continue };
                let values = extract_features(&wb, &evaluate_workbook(&wb)).values().to_vec();
                inner.features.insert(id.to_string(), values);
            }
            table.insert(id, inner.features[id].clone()).expect("one row per workbook");
        }
        table
    }
}

/// Baseline board, plus adjusted columns when `features` is given.
pub fn compute_leaderboard(
    votes: &[VoteRecord],
    features: Option<&FeatureTable>,
    query: &LeaderboardQuery,
    config: &ArenaConfig,
) -> LeaderboardResponse {
    let min_votes = query.min_votes.unwrap_or(config.min_votes);
    let subset: Vec<VoteRecord> = match &query.category {
        Some(c) => {
            let filter = CategoryFilter::parse(c);
            votes.iter().filter(|v| filter.matches(v)).cloned().collect()
        }
        None => votes.to_vec(),
    };
    if subset.is_empty() {
        let reason = if query.category.is_some() { "no votes in segment" } else { "no votes yet" };
        return LeaderboardResponse::empty(query, min_votes, 0, reason.into());
    }
    let mut fit_config = FitConfig {
        anchor: config.anchor.clone(),
        ..FitConfig::default()
    };
    let mut warnings = Vec::new();
    if let Some(a) = &config.anchor {
        let decisive = subset.iter().any(|v| v.outcome.is_decisive() && v.involves(a));
        if !decisive {
            warnings.push(format!("anchor `{a}` has no decisive votes here; using the first model instead"));
            fit_config.anchor = None;
        }
    }
    let base = match fit_bt(&subset, &fit_config) {
        Ok(f) => f,
        Err(e) => return LeaderboardResponse::empty(query, min_votes, subset.len(), format!("cannot fit: {e}")),
    };
    warnings.extend(base.warnings.iter().cloned());
    if !base.converged {
        warnings.push("baseline fit did not converge".into());
    }
    let elo = EloConfig {
        min_votes,
        ..EloConfig::default()
    };
    let board = to_elo(&base, &elo);
    let mut response = LeaderboardResponse {
        category: query.category.clone(),
        adjusted: query.adjusted,
        min_votes,
        total_votes: subset.len(),
        anchor: Some(base.anchor.clone()),
        rows: Vec::new(),
        unranked: Vec::new(),
        significance: Vec::new(),
        reason: None,
        warnings,
    };
    let row = |r: &sheetarena_rating::LeaderboardRow| BoardRow {
        model: r.model.clone(),
        rank: r.rank,
        elo: r.elo,
        n_votes: r.n_votes,
        adjusted_elo: None,
        delta_elo: None,
        delta_rank: None,
    };
    response.rows = board.rows.iter().map(row).collect();
    response.unranked = board.unranked.iter().map(row).collect();

    if let Some(table) = features {
        let adjusted = fit_bt_with_features(&subset, table, &fit_config)
            .and_then(|adj| compare_fits(&base, &adj, &elo).map(|shifts| (adj, shifts)));
        match adjusted {
            Ok((adj, shifts)) => {
                let by_model: BTreeMap<&str, _> = shifts.iter().map(|s| (s.model.as_str(), s)).collect();
                for r in response.rows.iter_mut().chain(response.unranked.iter_mut()) {
                    let s = by_model[r.model.as_str()];
                    r.adjusted_elo = Some(s.adjusted_elo);
                    r.delta_elo = Some(s.delta_elo);
                    r.delta_rank = Some(s.delta_rank);
                }
                response.significance = significance_table(&adj, sheetarena_rating::elo::SIGNIFICANCE_LEVEL);
                if !adj.converged {
                    response.warnings.push("adjusted fit did not converge".into());
                }
            }
            Err(e) => response.reason = Some(format!("feature-adjusted fit unavailable: {e}")),
        }
    }
    response
}
