use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use sheetarena_rating::CATEGORIES;

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum CategorizerError {
    #[error("no seed prompts")]
    EmptySeedSet,
    #[error("embedding has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("k must be between 1 and the seed count ({seeds}), got {k}")]
    InvalidK { k: usize, seeds: usize },
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("embedding has zero length")]
    ZeroVector,
    #[error("seed line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("embedding provider: {0}")]
    Provider(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedPrompt {
    pub text: String,
    pub category: String,
    pub embedding: Vec<f64>,
}

pub fn read_seeds_jsonl(reader: impl BufRead) -> Result<Vec<SeedPrompt>, CategorizerError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CategorizerError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CategorizerError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn unit(v: &[f64]) -> Result<Vec<f64>, CategorizerError> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(CategorizerError::ZeroVector);
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryIndex {
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub category: String,
    /// Neighbor count per category among the top k.
    pub votes: BTreeMap<String, usize>,
    /// `(category, cosine similarity)` nearest first.
    pub neighbors: Vec<(String, f64)>,
}

impl CategoryIndex {
    pub fn build(seeds: &[SeedPrompt], k: usize) -> Result<Self, CategorizerError> {
        let first = seeds.first().ok_or(CategorizerError::EmptySeedSet)?;
        if k == 0 || k > seeds.len() {
            return Err(CategorizerError::InvalidK { k, seeds: seeds.len() });
        }
        let dim = first.embedding.len();
        let mut rows = Vec::with_capacity(seeds.len());
        for s in seeds {
            if s.embedding.len() != dim {
                return Err(CategorizerError::DimensionMismatch {
                    expected: dim,
                    got: s.embedding.len(),
                });
            }
            if !CATEGORIES.contains(&s.category.as_str()) {
                return Err(CategorizerError::UnknownCategory(s.category.clone()));
            }
            rows.push(unit(&s.embedding)?);
        }
        Ok(Self {
            rows,
            labels: seeds.iter().map(|s| s.category.clone()).collect(),
            k,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    /// Majority label among the k most similar seeds; ties go to the
    /// nearest seed's label.
    pub fn classify(&self, embedding: &[f64]) -> Result<Classification, CategorizerError> {
        if embedding.len() != self.dim() {
            return Err(CategorizerError::DimensionMismatch {
                expected: self.dim(),
                got: embedding.len(),
            });
        }
        let q = unit(embedding)?;
        let mut sims: Vec<(usize, f64)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.iter().zip(&q).map(|(a, b)| a * b).sum()))
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        sims.truncate(self.k);
        let mut votes: BTreeMap<String, usize> = BTreeMap::new();
        for (i, _) in &sims {
            *votes.entry(self.labels[*i].clone()).or_default() += 1;
        }
        let top = votes.values().copied().max().unwrap_or(0);
        let category = sims
            .iter()
            .map(|(i, _)| &self.labels[*i])
            .find(|l| votes[*l] == top)
            .expect("k >= 1")
            .clone();
        Ok(Classification {
            category,
            votes,
            neighbors: sims.iter().map(|(i, s)| (self.labels[*i].clone(), *s)).collect(),
        })
    }
}

/// Text to embedding vector.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>, CategorizerError>;
}

/// Offline provider: hashed character n-gram counts in a fixed dimension.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    pub dim: usize,
    pub n: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self { dim: 512, n: 3 }
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, CategorizerError> {
        let mut v = vec![0.0; self.dim];
        let padded: Vec<char> = format!(" {} ", text.to_lowercase()).chars().collect();
        for gram in padded.windows(self.n.min(padded.len())) {
            let s: String = gram.iter().collect();
            let h = Sha256::digest(s.as_bytes());
            let bucket = u64::from_le_bytes(h[..8].try_into().expect("8 bytes")) % self.dim as u64;
            let sign = if h[8] & 1 == 0 { 1.0 } else { -1.0 };
            v[bucket as usize] += sign;
        }
        Ok(v)
    }
}

/// Embedding service speaking the common `{model, input}` to
/// `{data: [{embedding}]}` protocol.
#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, CategorizerError> {
        let mut req = ureq::post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let body: serde_json::Value = req
            .send_json(serde_json::json!({"model": self.model, "input": text}))
            .map_err(|e| CategorizerError::Provider(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| CategorizerError::Provider(e.to_string()))?;
        body["data"][0]["embedding"]
            .as_array()
            .and_then(|a| a.iter().map(|x| x.as_f64()).collect::<Option<Vec<f64>>>())
            .ok_or_else(|| CategorizerError::Provider("response has no data[0].embedding".into()))
    }
}

/// Built-in example prompts per category for offline use.
pub const BUILTIN_SEED_TEXTS: [(&str, &str); 18] = [
    ("Academic & Research", "Gradebook for a university course with weighted assignments, exams and letter grades"),
    ("Academic & Research", "Lab experiment data log with replicate measurements, means, standard deviations and error bars"),
    ("Academic & Research", "Literature review tracker listing papers, authors, year, method and key findings"),
    ("Corporate Finance & FP&A", "Annual operating budget with monthly forecast versus actuals and variance analysis by department"),
    ("Corporate Finance & FP&A", "Three statement financial model with income statement, balance sheet and cash flow forecast"),
    ("Corporate Finance & FP&A", "Headcount planning model with salaries, benefits and quarterly opex forecast"),
    ("Creative & Generative", "Novel writing planner with chapters, characters, word count goals and plot beats"),
    ("Creative & Generative", "Interactive bingo card generator for a party game with random words"),
    ("Creative & Generative", "Content calendar for a youtube channel with video ideas, thumbnails and publishing dates"),
    ("Operations & Supply Chain", "Inventory tracker with reorder points, safety stock, supplier lead times and stock levels"),
    ("Operations & Supply Chain", "Warehouse shipment log with carriers, delivery dates, freight cost and on-time rate"),
    ("Operations & Supply Chain", "Production schedule for a factory with machine capacity, shifts and utilization"),
    ("Professional Finance", "Discounted cash flow valuation with WACC, terminal value and sensitivity table"),
    ("Professional Finance", "Leveraged buyout model with debt schedule, IRR and MOIC returns analysis"),
    ("Professional Finance", "Bond portfolio analysis with yield to maturity, duration and convexity"),
    ("SMB & Personal", "Personal monthly household budget with income, rent, groceries and savings goals"),
    ("SMB & Personal", "Small bakery sales tracker with daily revenue, product costs and profit"),
    ("SMB & Personal", "Wedding planning checklist with guest list, vendors and costs"),
];

/// Seeds built from [`BUILTIN_SEED_TEXTS`] with the given provider.
pub fn builtin_seeds(provider: &dyn EmbeddingProvider) -> Result<Vec<SeedPrompt>, CategorizerError> {
    BUILTIN_SEED_TEXTS
        .iter()
        .map(|(cat, text)| {
            Ok(SeedPrompt {
                text: text.to_string(),
                category: cat.to_string(),
                embedding: provider.embed(text)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(cat: &str, e: Vec<f64>) -> SeedPrompt {
        SeedPrompt {
            text: String::new(),
            category: cat.into(),
            embedding: e,
        }
    }

    fn one_per_category() -> Vec<SeedPrompt> {
        CATEGORIES
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut e = vec![0.0; 6];
                e[i] = 1.0;
                seed(c, e)
            })
            .collect()
    }

    #[test]
    fn build_errors() {
        assert_eq!(CategoryIndex::build(&one_per_category(), 1).unwrap().len(), 6);
        assert_eq!(CategoryIndex::build(&[], 1), Err(CategorizerError::EmptySeedSet));
        assert!(matches!(
            CategoryIndex::build(&one_per_category(), 0),
            Err(CategorizerError::InvalidK { k: 0, .. })
        ));
        let mut mixed = one_per_category();
        mixed[3].embedding = vec![1.0; 4];
        assert!(matches!(
            CategoryIndex::build(&mixed, 1),
            Err(CategorizerError::DimensionMismatch { expected: 6, got: 4 })
        ));
        let bad = vec![seed("Finance", vec![1.0])];
        assert!(matches!(CategoryIndex::build(&bad, 1), Err(CategorizerError::UnknownCategory(_))));
    }

    #[test]
    fn exact_match_and_majority() {
        let idx = CategoryIndex::build(&one_per_category(), 1).unwrap();
        for (i, c) in CATEGORIES.iter().enumerate() {
            let mut q = vec![0.0; 6];
            q[i] = 2.5;
            assert_eq!(idx.classify(&q).unwrap().category, *c);
        }
        let fin = "Professional Finance";
        let acad = "Academic & Research";
        let seeds = vec![seed(fin, vec![1.0, 0.1]), seed(fin, vec![1.0, 0.2]), seed(acad, vec![1.0, 0.0])];
        let idx = CategoryIndex::build(&seeds, 3).unwrap();
        let c = idx.classify(&[1.0, 0.0]).unwrap();
        assert_eq!(c.category, fin);
        assert_eq!(c.votes[fin], 2);
        assert_eq!(c.neighbors[0].0, acad);
    }

    #[test]
    fn tie_goes_to_nearest() {
        let fin = "Professional Finance";
        let seeds = vec![seed("Academic & Research", vec![1.0, 0.5]), seed(fin, vec![1.0, 0.1])];
        let idx = CategoryIndex::build(&seeds, 2).unwrap();
        assert_eq!(idx.classify(&[1.0, 0.0]).unwrap().category, fin);
        assert!(matches!(idx.classify(&[1.0]), Err(CategorizerError::DimensionMismatch { .. })));
        assert_eq!(idx.classify(&[0.0, 0.0]), Err(CategorizerError::ZeroVector));
    }

    #[test]
    fn builtin_seeds_self_classify() {
        let p = HashingEmbedder::default();
        let seeds = builtin_seeds(&p).unwrap();
        let idx = CategoryIndex::build(&seeds, 1).unwrap();
        for s in &seeds {
            assert_eq!(idx.classify(&s.embedding).unwrap().category, s.category);
        }
        let idx = CategoryIndex::build(&seeds, 3).unwrap();
        let q = p.embed("DCF valuation model with WACC and terminal value").unwrap();
        assert_eq!(idx.classify(&q).unwrap().category, "Professional Finance");
    }
}
