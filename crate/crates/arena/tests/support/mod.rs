#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use serde_json::json;

use sheetarena_arena::categorizer::builtin_seeds;
use sheetarena_arena::matchmaker::{select_matches, MatchRequest, DEFAULT_PAIRS};
use sheetarena_arena::{Arena, ArenaConfig, HashingEmbedder, LeaderboardQuery, LeaderboardResponse, ReplayGenerator};
use sheetarena_rating::Outcome;

pub const MODELS: [&str; 5] = ["alpha-large", "bravo-mini", "charlie-pro", "delta-7b", "echo-turbo"];

pub const PROMPTS: [&str; 3] = [
    "Monthly household budget with rent, groceries and a savings goal",
    "Inventory tracker with reorder points and supplier lead times",
    "Discounted cash flow valuation with WACC and terminal value",
];

/// A small valid workbook; `variant` changes sizes, formulas and fills.
pub fn workbook(variant: usize) -> String {
    let rows = 3 + variant % 4;
    let mut cells = vec![json!({"ref": "A1", "text": "Item"}), json!({"ref": "B1", "text": "Amount"})];
    for r in 0..rows {
        let row = r + 2;
        cells.push(json!({"ref": format!("A{row}"), "text": format!("Line {}", r + 1)}));
        let mut cell = json!({"ref": format!("B{row}"), "number": (r + 1) as f64 * (variant + 1) as f64});
        if variant % 2 == 1 {
            cell["style"] = json!({"fill": "#FFF2CC", "fontColor": "#0000FF"});
        }
        cells.push(cell);
    }
    let total = rows + 2;
    cells.push(json!({"ref": format!("A{total}"), "text": "Total"}));
    let formula = if variant % 3 == 0 {
        format!("=SUM(B2:B{})", total - 1)
    } else {
        format!("=SUM(B2:B{})*{}", total - 1, variant + 1)
    };
    cells.push(json!({"ref": format!("B{total}"), "formula": formula}));
    json!({"version": "SheetSpec@2", "sheets": [{"name": "Main", "cells": cells}]}).to_string()
}

pub fn fixed_clock() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 6, 1, 12, 0, 0).unwrap()
}

pub fn config() -> ArenaConfig {
    ArenaConfig {
        seed: 7,
        min_votes: 1,
        anchor: Some(MODELS[0].to_string()),
        ..ArenaConfig::with_models(&MODELS)
    }
}

/// Every model answers every prompt with its own valid workbook, except
/// those listed in `broken`, which answer with malformed output.
pub fn generator(broken: &[&str]) -> ReplayGenerator {
    let mut g = ReplayGenerator::new();
    for (i, m) in MODELS.iter().enumerate() {
        if broken.contains(m) {
            g.insert_fallback(m, "{\"version\": \"SheetSpec@2\", \"sheets\": [");
        } else {
            g.insert_fallback(m, workbook(i));
        }
    }
    g
}

pub fn open(log: Option<&Path>, broken: &[&str]) -> Result<Arena, String> {
    let embedder = Arc::new(HashingEmbedder::default());
    let seeds = builtin_seeds(embedder.as_ref()).map_err(|e| e.to_string())?;
    Arena::open(config(), log, Arc::new(generator(broken)), embedder, &seeds)
        .map(|a| a.with_clock(fixed_clock))
        .map_err(|e| e.to_string())
}

pub const SCRIPTED_OUTCOMES: [Outcome; 4] = [Outcome::AWins, Outcome::BWins, Outcome::AWins, Outcome::Tie];

fn play(arena: &Arena, prompt: usize, voted: &mut usize) -> Result<(), String> {
    let resp = arena.submit_prompt(PROMPTS[prompt]).map_err(|e| e.to_string())?;
    if resp.battles.len() != 4 {
        return Err(format!("prompt {prompt}: {} battles", resp.battles.len()));
    }
    for b in &resp.battles {
        let outcome = SCRIPTED_OUTCOMES[*voted % SCRIPTED_OUTCOMES.len()];
        arena
            .cast_vote(&b.battle_id, outcome, &format!("voter-{}", *voted % 3))
            .map_err(|e| e.to_string())?;
        *voted += 1;
    }
    Ok(())
}

pub struct Replay {
    pub battles: usize,
    pub votes: usize,
    pub live: LeaderboardResponse,
    pub restored: LeaderboardResponse,
    pub uninterrupted: LeaderboardResponse,
    pub same_state: bool,
}

/// Three prompts, four battles and four votes each. The service is
/// dropped after the second prompt with a torn line at the end of the
/// log, then reopened to finish the session.
pub fn scripted_session(dir: &Path) -> Result<Replay, String> {
    let log = dir.join("events.jsonl");
    let query = LeaderboardQuery::default();
    let mut voted = 0;
    {
        let arena = open(Some(&log), &[])?;
        play(&arena, 0, &mut voted)?;
        play(&arena, 1, &mut voted)?;
    }
    {
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new().append(true).open(&log).map_err(|e| e.to_string())?;
        f.write_all(b"{\"v\":1,\"type\":\"VoteCast\",\"battle_").map_err(|e| e.to_string())?;
    }
    let arena = open(Some(&log), &[])?;
    play(&arena, 2, &mut voted)?;
    let live = (*arena.leaderboard(&query)).clone();
    let live_state = arena.state();
    drop(arena);

    let restored_arena = open(Some(&log), &[])?;
    let restored = (*restored_arena.leaderboard(&query)).clone();

    let memory = open(None, &[])?;
    let mut again = 0;
    for p in 0..3 {
        play(&memory, p, &mut again)?;
    }
    let uninterrupted = (*memory.leaderboard(&query)).clone();
    Ok(Replay {
        battles: live_state.battles.len(),
        votes: live_state.votes.len(),
        live,
        restored,
        uninterrupted,
        same_state: live_state == restored_arena.state() && live_state == memory.state(),
    })
}

/// Rounds of matchmaking where every returned pair adds a vote to both
/// models. Returns the max/min vote-count ratio after `rounds`.
pub fn balance_ratio(k: usize, rounds: usize, seed: u64) -> f64 {
    let models: Vec<String> = (0..k).map(|i| format!("m{i:02}")).collect();
    let mut counts: BTreeMap<String, u64> = models.iter().map(|m| (m.clone(), 0)).collect();
    for round in 0..rounds {
        let req = MatchRequest {
            eligible: models.clone(),
            vote_counts: counts.clone(),
            n_pairs: DEFAULT_PAIRS,
            seed: seed.wrapping_mul(1_000_003).wrapping_add(round as u64),
        };
        let set = select_matches(&req, |_, _| true).expect("enough models");
        for (a, b) in set.pairs {
            *counts.get_mut(&a).unwrap() += 1;
            *counts.get_mut(&b).unwrap() += 1;
        }
    }
    let max = *counts.values().max().unwrap() as f64;
    let min = *counts.values().min().unwrap() as f64;
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
