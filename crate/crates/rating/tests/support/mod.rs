#![allow(dead_code)]

pub mod scenarios;

use std::collections::BTreeMap;

use sheetarena_rating::{Outcome, VoteRecord};

/// Average ranks, ties sharing the mean position.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

/// Unpenalized Bradley-Terry strengths by minorization-maximization,
/// shifted so `anchor` is zero. Decisive votes only.
pub fn mm_strengths(votes: &[VoteRecord], anchor: &str, iterations: usize) -> BTreeMap<String, f64> {
    let mut models: Vec<&str> = votes.iter().flat_map(|v| [v.model_a.as_str(), v.model_b.as_str()]).collect();
    models.sort();
    models.dedup();
    let idx: BTreeMap<&str, usize> = models.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let k = models.len();
    let mut wins = vec![0.0; k];
    let mut games = vec![vec![0.0; k]; k];
    for v in votes.iter().filter(|v| v.outcome.is_decisive()) {
        let (a, b) = (idx[v.model_a.as_str()], idx[v.model_b.as_str()]);
        games[a][b] += 1.0;
        games[b][a] += 1.0;
        wins[if v.outcome == Outcome::AWins { a } else { b }] += 1.0;
    }
    let mut pi = vec![1.0; k];
    for _ in 0..iterations {
        let next: Vec<f64> = (0..k)
            .map(|i| {
                let denom: f64 = (0..k).filter(|&j| j != i).map(|j| games[i][j] / (pi[i] + pi[j])).sum();
                wins[i] / denom
            })
            .collect();
        let norm = next[idx[anchor]];
        pi = next.into_iter().map(|p| p / norm).collect();
    }
    models.iter().map(|m| (m.to_string(), pi[idx[m]].ln())).collect()
}
