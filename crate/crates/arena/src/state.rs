use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::Serialize;

use sheetarena_rating::VoteRecord;

use crate::events::ArenaEvent;
use crate::ArenaError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prompt {
    pub text: String,
    pub category: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generation {
    pub prompt_id: String,
    pub model_id: String,
    pub document: String,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Battle {
    pub prompt_id: String,
    pub workbook_a: String,
    pub workbook_b: String,
}

/// Everything the service knows, rebuilt by folding the event log.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ArenaState {
    pub prompts: BTreeMap<String, Prompt>,
    pub generations: BTreeMap<String, Generation>,
    pub battles: BTreeMap<String, Battle>,
    pub votes: Vec<VoteRecord>,
    /// `(battle_id, voter hash)` pairs already counted.
    pub voters: BTreeSet<(String, String)>,
}

fn next_id(prefix: &str, n: usize) -> String {
    format!("{prefix}-{:06}", n + 1)
}

impl ArenaState {
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a ArenaEvent>) -> Result<Self, ArenaError> {
        let mut s = Self::default();
        for e in events {
            s.apply(e)?;
        }
        Ok(s)
    }

    pub fn next_prompt_id(&self) -> String {
        next_id("p", self.prompts.len())
    }

    pub fn next_workbook_id(&self, offset: usize) -> String {
        next_id("w", self.generations.len() + offset)
    }

    pub fn next_battle_id(&self, offset: usize) -> String {
        next_id("b", self.battles.len() + offset)
    }

    pub fn battle_models(&self, battle: &Battle) -> (String, String) {
        (
            self.generations[&battle.workbook_a].model_id.clone(),
            self.generations[&battle.workbook_b].model_id.clone(),
        )
    }

    /// Battles per model that received at least one vote.
    pub fn vote_counts(&self) -> BTreeMap<String, u64> {
        let voted: BTreeSet<&str> = self.votes.iter().map(|v| v.battle_id.as_str()).collect();
        let mut counts = BTreeMap::new();
        for id in voted {
            let (a, b) = self.battle_models(&self.battles[id]);
            *counts.entry(a).or_insert(0) += 1;
            *counts.entry(b).or_insert(0) += 1;
        }
        counts
    }

    /// Check an event against the current state without applying it.
    pub fn check(&self, event: &ArenaEvent) -> Result<(), ArenaError> {
        let bad = |m: String| Err(ArenaError::InvalidEvent(m));
        match event {
            ArenaEvent::PromptSubmitted { prompt_id, .. } => {
                if self.prompts.contains_key(prompt_id) {
                    return bad(format!("duplicate prompt {prompt_id}"));
                }
            }
            ArenaEvent::GenerationStored {
                workbook_id, prompt_id, ..
            } => {
                if self.generations.contains_key(workbook_id) {
                    return bad(format!("duplicate workbook {workbook_id}"));
                }
                if !self.prompts.contains_key(prompt_id) {
                    return bad(format!("generation for unknown prompt {prompt_id}"));
                }
            }
            ArenaEvent::BattleCreated {
                battle_id,
                prompt_id,
                workbook_a,
                workbook_b,
            } => {
                if self.battles.contains_key(battle_id) {
                    return bad(format!("duplicate battle {battle_id}"));
                }
                if !self.prompts.contains_key(prompt_id) {
                    return bad(format!("battle for unknown prompt {prompt_id}"));
                }
                for w in [workbook_a, workbook_b] {
                    match self.generations.get(w) {
                        Some(g) if g.valid && g.prompt_id == *prompt_id => {}
                        _ => return bad(format!("battle {battle_id} uses unusable workbook {w}")),
                    }
                }
            }
            ArenaEvent::VoteCast { vote, voter } => {
                if !self.battles.contains_key(&vote.battle_id) {
                    return Err(ArenaError::UnknownBattle(vote.battle_id.clone()));
                }
                if self.voters.contains(&(vote.battle_id.clone(), voter.clone())) {
                    return Err(ArenaError::DuplicateVote(vote.battle_id.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, event: &ArenaEvent) -> Result<(), ArenaError> {
        self.check(event)?;
        match event.clone() {
            ArenaEvent::PromptSubmitted {
                prompt_id,
                text,
                category,
                timestamp,
            } => {
                self.prompts.insert(
                    prompt_id,
                    Prompt {
                        text,
                        category,
                        timestamp,
                    },
                );
            }
            ArenaEvent::GenerationStored {
                workbook_id,
                prompt_id,
                model_id,
                document,
                valid,
                ..
            } => {
                self.generations.insert(
                    workbook_id,
                    Generation {
                        prompt_id,
                        model_id,
                        document,
                        valid,
                    },
                );
            }
            ArenaEvent::BattleCreated {
                battle_id,
                prompt_id,
                workbook_a,
                workbook_b,
            } => {
                self.battles.insert(
                    battle_id,
                    Battle {
                        prompt_id,
                        workbook_a,
                        workbook_b,
                    },
                );
            }
            ArenaEvent::VoteCast { vote, voter } => {
                self.voters.insert((vote.battle_id.clone(), voter));
                self.votes.push(vote);
            }
        }
        Ok(())
    }
}
