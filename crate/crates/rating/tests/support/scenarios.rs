//! Simulation scenarios with known ground truth.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sheetarena_rating::{
    elo_spread, fit_bt, fit_bt_with_features, simulate, to_elo, EloConfig, FitConfig, Objective, PlantedFeature,
    SimConfig,
};

use super::spearman;

pub struct Recovery {
    pub spearman: f64,
    pub seconds: f64,
}

/// K = 16 strengths evenly spaced on [-2, 2], 5000 decisive votes.
pub fn bt_recovery(seed: u64) -> Recovery {
    let out = simulate(&SimConfig {
        n_models: 16,
        theta: Some((0..16).map(|i| -2.0 + 4.0 * i as f64 / 15.0).collect()),
        n_votes: 5000,
        seed,
        ..SimConfig::default()
    })
    .unwrap();
    let start = Instant::now();
    let fit = fit_bt(&out.votes, &FitConfig::default()).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    assert!(fit.converged);
    let truth: Vec<f64> = fit.models.iter().map(|m| out.truth.theta[m]).collect();
    let est: Vec<f64> = fit.models.iter().map(|m| fit.theta[m]).collect();
    Recovery {
        spearman: spearman(&truth, &est),
        seconds,
    }
}

pub struct Planted {
    pub estimate: f64,
    pub std_error: f64,
    pub p_value: f64,
}

/// One planted feature effect plus an inert distractor.
pub fn covariate_recovery(beta: f64, n_votes: usize, seed: u64) -> Planted {
    let out = simulate(&SimConfig {
        n_models: 8,
        n_votes,
        seed,
        features: vec![PlantedFeature::noise("planted", beta), PlantedFeature::noise("inert", 0.0)],
        ..SimConfig::default()
    })
    .unwrap();
    let fit = fit_bt_with_features(&out.votes, &out.features, &FitConfig::default()).unwrap();
    assert!(fit.converged);
    let c = fit.coefficient("planted").unwrap();
    Planted {
        estimate: c.estimate,
        std_error: c.std_error,
        p_value: c.p_value,
    }
}

/// How many of `seeds` label a null feature significant at 0.05.
pub fn null_significance_count(seeds: std::ops::Range<u64>) -> usize {
    seeds
        .filter(|&s| covariate_recovery(0.0, 2000, 1000 + s).p_value < 0.05)
        .count()
}

pub struct Nesting {
    pub max_theta_diff: f64,
    pub ll_vanilla: f64,
    pub ll_features: f64,
    pub ll_zeroed: f64,
}

pub fn nesting(seed: u64) -> Nesting {
    let out = simulate(&SimConfig {
        n_models: 10,
        n_votes: 3000,
        seed,
        features: vec![PlantedFeature::noise("f1", 0.5), PlantedFeature::noise("f2", -0.3)],
        ..SimConfig::default()
    })
    .unwrap();
    let cfg = FitConfig::default();
    let vanilla = fit_bt(&out.votes, &cfg).unwrap();
    let zeroed = fit_bt_with_features(&out.votes, &out.features.zeroed(), &cfg).unwrap();
    let full = fit_bt_with_features(&out.votes, &out.features, &cfg).unwrap();
    let max_theta_diff = vanilla
        .models
        .iter()
        .map(|m| (vanilla.theta[m] - zeroed.theta[m]).abs())
        .fold(0.0, f64::max);
    Nesting {
        max_theta_diff,
        ll_vanilla: vanilla.log_likelihood,
        ll_features: full.log_likelihood,
        ll_zeroed: zeroed.log_likelihood,
    }
}

/// Largest relative gap between the analytic gradient and central
/// differences with step `h`, over `instances` random problems.
pub fn gradient_check(instances: usize, h: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let out = simulate(&SimConfig {
            n_models: rng.random_range(2..7),
            n_votes: rng.random_range(20..200),
            seed: rng.random(),
            features: (0..rng.random_range(0..4))
                .map(|k| PlantedFeature::noise(&format!("f{k}"), rng.random_range(-1.0..1.0)))
                .collect(),
            tie_rate: if i % 3 == 0 { 0.2 } else { 0.0 },
            ..SimConfig::default()
        })
        .unwrap();
        let cfg = FitConfig {
            lambda: rng.random_range(0.0..0.5),
            tie_mode: if i % 2 == 0 {
                sheetarena_rating::TieMode::HalfWin
            } else {
                sheetarena_rating::TieMode::Exclude
            },
            ..FitConfig::default()
        };
        let features = (!out.features.names().is_empty()).then_some(&out.features);
        let obj = Objective::new(&out.votes, features, &cfg).unwrap();
        let p: Vec<f64> = (0..obj.dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
        let g = obj.gradient(&p);
        for j in 0..p.len() {
            let mut up = p.clone();
            let mut down = p.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (obj.value(&up) - obj.value(&down)) / (2.0 * h);
            let rel = (g[j] - fd).abs() / g[j].abs().max(fd.abs()).max(1.0);
            worst = worst.max(rel);
        }
    }
    worst
}

pub struct Compression {
    pub baseline_spread: f64,
    pub adjusted_spread: f64,
}

/// Half of each model's edge rides on a feature of its outputs.
pub fn compression(seed: u64) -> Compression {
    let out = simulate(&SimConfig::compression(12, 6000, seed)).unwrap();
    let cfg = FitConfig::default();
    let base = fit_bt(&out.votes, &cfg).unwrap();
    let adj = fit_bt_with_features(&out.votes, &out.features, &cfg).unwrap();
    let elo = EloConfig::default();
    Compression {
        baseline_spread: elo_spread(&to_elo(&base, &elo)),
        adjusted_spread: elo_spread(&to_elo(&adj, &elo)),
    }
}
