use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use sheetarena_rating::elo::SIGNIFICANCE_LEVEL;
use sheetarena_rating::{
    fit_bt, fit_bt_with_features, segment_fit, significance_table, to_elo, CategoryFilter, CovariateMode, EloConfig,
    FeatureTable, FitConfig, RatingFit, SignificanceRow, VoteRecord, CATEGORIES, FINANCE, MIN_SEGMENT_VOTES,
};
use sheetarena_study::{FailureTable, TAG_NAMES};

use crate::config::Settings;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardRow {
    pub model: String,
    pub n_votes: usize,
    pub baseline_rank: Option<usize>,
    pub baseline_elo: f64,
    pub baseline_se: f64,
    pub adjusted_rank: Option<usize>,
    pub adjusted_elo: Option<f64>,
    pub delta_elo: Option<f64>,
    /// Positive when the model climbs after adjustment.
    pub delta_rank: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainTable {
    pub label: String,
    pub n_votes: usize,
    pub rows: Vec<BoardRow>,
    pub significance: Vec<SignificanceRow>,
    /// Why the segment has no table.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub category: Option<String>,
    pub adjusted: bool,
    pub mode: CovariateMode,
    pub min_votes: usize,
    pub lambda: f64,
    pub anchor: String,
    pub n_votes: usize,
    pub n_decisive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub meta: ReportMeta,
    /// Ranked models by baseline Elo, then unranked ones.
    pub leaderboard: Vec<BoardRow>,
    pub significance: Vec<SignificanceRow>,
    pub domains: Vec<DomainTable>,
    pub failure_tags: Option<FailureTable>,
    pub warnings: Vec<String>,
}

struct Fitted {
    base: RatingFit,
    adjusted: Option<RatingFit>,
}

fn checked(fit: RatingFit, what: &str) -> Result<RatingFit, CliError> {
    if fit.converged {
        Ok(fit)
    } else {
        Err(CliError::Numerical(format!(
            "{what} fit did not converge after {} iterations (gradient norm {:.3e})",
            fit.iterations, fit.gradient_norm
        )))
    }
}

fn rows(fitted: &Fitted, elo: &EloConfig) -> Vec<BoardRow> {
    let base = to_elo(&fitted.base, elo);
    let adjusted = fitted.adjusted.as_ref().map(|f| to_elo(f, elo));
    let adj: BTreeMap<&str, (Option<usize>, f64)> = adjusted
        .iter()
        .flat_map(|b| b.rows.iter().chain(&b.unranked))
        .map(|r| (r.model.as_str(), (r.rank, r.elo)))
        .collect();
    base.rows
        .iter()
        .chain(&base.unranked)
        .map(|r| {
            let a = adj.get(r.model.as_str());
            let adjusted_rank = a.and_then(|a| a.0);
            BoardRow {
                model: r.model.clone(),
                n_votes: r.n_votes,
                baseline_rank: r.rank,
                baseline_elo: r.elo,
                baseline_se: r.elo_se,
                adjusted_rank,
                adjusted_elo: a.map(|a| a.1),
                delta_elo: a.map(|a| a.1 - r.elo),
                delta_rank: r.rank.zip(adjusted_rank).map(|(b, a)| b as i64 - a as i64),
            }
        })
        .collect()
}

fn fit_config(settings: &Settings) -> FitConfig {
    FitConfig {
        lambda: settings.lambda,
        anchor: settings.anchor.clone(),
        covariate_mode: settings.mode,
        ..FitConfig::default()
    }
}

fn fit_all(votes: &[VoteRecord], features: Option<&FeatureTable>, config: &FitConfig) -> Result<Fitted, CliError> {
    let base = checked(fit_bt(votes, config)?, "baseline")?;
    let adjusted = match features {
        Some(t) => Some(checked(fit_bt_with_features(votes, t, config)?, "adjusted")?),
        None => None,
    };
    Ok(Fitted { base, adjusted })
}

fn fit_segment(
    votes: &[VoteRecord],
    filter: &CategoryFilter,
    features: Option<&FeatureTable>,
    config: &FitConfig,
) -> Result<Fitted, CliError> {
    let base = checked(segment_fit(votes, filter, None, config, MIN_SEGMENT_VOTES)?, "baseline")?;
    let adjusted = match features {
        Some(t) => Some(checked(segment_fit(votes, filter, Some(t), config, MIN_SEGMENT_VOTES)?, "adjusted")?),
        None => None,
    };
    Ok(Fitted { base, adjusted })
}

fn significance(fitted: &Fitted) -> Vec<SignificanceRow> {
    fitted
        .adjusted
        .as_ref()
        .map(|f| significance_table(f, SIGNIFICANCE_LEVEL))
        .unwrap_or_default()
}

/// Fit the requested board and, when `domains` is set, one table per
/// category plus the combined finance segment.
pub fn build_bundle(
    votes: &[VoteRecord],
    features: Option<&FeatureTable>,
    settings: &Settings,
    category: Option<&str>,
    domains: bool,
) -> Result<ReportBundle, CliError> {
    let config = fit_config(settings);
    let elo = EloConfig {
        min_votes: settings.min_votes,
        ..EloConfig::default()
    };
    let fitted = match category {
        Some(c) => fit_segment(votes, &CategoryFilter::parse(c), features, &config)?,
        None => fit_all(votes, features, &config)?,
    };
    let mut warnings = fitted.base.warnings.clone();
    if let Some(a) = &fitted.adjusted {
        warnings.extend(a.warnings.iter().filter(|w| !warnings.contains(w)).cloned().collect::<Vec<_>>());
        if !a.dropped_features.is_empty() {
            warnings.push(format!("constant features dropped: {}", a.dropped_features.join(", ")));
        }
    }
    let mut tables = Vec::new();
    if domains {
        for label in CATEGORIES.iter().copied().chain([FINANCE]) {
            let filter = CategoryFilter::parse(label);
            let n_votes = votes.iter().filter(|v| filter.matches(v)).count();
            let table = match fit_segment(votes, &filter, features, &config) {
                Ok(f) => DomainTable {
                    label: label.to_string(),
                    n_votes,
                    rows: rows(&f, &elo),
                    significance: significance(&f),
                    skipped: None,
                },
                Err(e) => DomainTable {
                    label: label.to_string(),
                    n_votes,
                    rows: Vec::new(),
                    significance: Vec::new(),
                    skipped: Some(e.to_string()),
                },
            };
            tables.push(table);
        }
    }
    let n_votes = match category {
        Some(c) => {
            let f = CategoryFilter::parse(c);
            votes.iter().filter(|v| f.matches(v)).count()
        }
        None => votes.len(),
    };
    Ok(ReportBundle {
        meta: ReportMeta {
            seed: settings.seed,
            category: category.map(str::to_string),
            adjusted: features.is_some(),
            mode: settings.mode,
            min_votes: settings.min_votes,
            lambda: settings.lambda,
            anchor: fitted.base.anchor.clone(),
            n_votes,
            n_decisive: fitted.base.n_votes_used,
        },
        leaderboard: rows(&fitted, &elo),
        significance: significance(&fitted),
        domains: tables,
        failure_tags: None,
        warnings,
    })
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn signed(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:+.1}"))
}

fn board_markdown(out: &mut String, rows: &[BoardRow], adjusted: bool) {
    if adjusted {
        out.push_str("| Rank | Model | Votes | Baseline Elo | Adjusted Elo | ΔElo | ΔRank |\n");
        out.push_str("|---:|---|---:|---:|---:|---:|---:|\n");
    } else {
        out.push_str("| Rank | Model | Votes | Elo | ± SE |\n|---:|---|---:|---:|---:|\n");
    }
    for r in rows {
        if adjusted {
            let delta_rank = r.delta_rank.map_or_else(|| "-".to_string(), |d| format!("{d:+}"));
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.1} | {} | {} | {} |",
                opt(r.baseline_rank),
                r.model,
                r.n_votes,
                r.baseline_elo,
                r.adjusted_elo.map_or_else(|| "-".to_string(), |e| format!("{e:.1}")),
                signed(r.delta_elo),
                delta_rank
            );
        } else {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.1} | {:.1} |",
                opt(r.baseline_rank),
                r.model,
                r.n_votes,
                r.baseline_elo,
                r.baseline_se
            );
        }
    }
}

fn significance_markdown(out: &mut String, rows: &[SignificanceRow]) {
    out.push_str("| Feature | Coefficient | SE | p | Significant |\n|---|---:|---:|---:|:---:|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {:.4} | {:.4} | {:.3e} | {} |",
            r.feature,
            r.coefficient,
            r.std_error,
            r.p_value,
            if r.significant { "yes" } else { "" }
        );
    }
}

impl ReportBundle {
    pub fn to_markdown(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        let scope = m.category.as_deref().unwrap_or("all categories");
        let _ = writeln!(out, "# Leaderboard ({scope})\n");
        let _ = writeln!(
            out,
            "{} votes, {} decisive. Anchor `{}` at 1000. Models need {} votes to be ranked. Seed {}.\n",
            m.n_votes, m.n_decisive, m.anchor, m.min_votes, m.seed
        );
        board_markdown(&mut out, &self.leaderboard, m.adjusted);
        if m.adjusted {
            out.push_str("\n## Feature coefficients\n\n");
            significance_markdown(&mut out, &self.significance);
        }
        for d in &self.domains {
            let _ = writeln!(out, "\n## {} ({} votes)\n", d.label, d.n_votes);
            match &d.skipped {
                Some(reason) => {
                    let _ = writeln!(out, "Skipped: {reason}");
                }
                None => {
                    board_markdown(&mut out, &d.rows, m.adjusted);
                    let significant: Vec<SignificanceRow> =
                        d.significance.iter().filter(|r| r.significant).cloned().collect();
                    if !significant.is_empty() {
                        out.push('\n');
                        significance_markdown(&mut out, &significant);
                    }
                }
            }
        }
        if let Some(t) = &self.failure_tags {
            out.push_str("\n## Failure tags (share of losses)\n\n| Model | Losses |");
            for name in TAG_NAMES {
                let _ = write!(out, " {name} |");
            }
            out.push_str("\n|---|---:|");
            out.push_str(&"---:|".repeat(TAG_NAMES.len()));
            out.push('\n');
            for r in &t.rows {
                let _ = write!(out, "| {} | {} |", r.model, r.losses);
                for rate in r.rates {
                    let _ = write!(out, " {:.1}% |", rate * 100.0);
                }
                out.push('\n');
            }
            if let Some(avg) = t.avg_tags_per_loss {
                let _ = writeln!(out, "\nAverage tags per loss: {avg:.2}");
            }
        }
        if !self.warnings.is_empty() {
            out.push_str("\n## Warnings\n\n");
            for w in &self.warnings {
                let _ = writeln!(out, "- {w}");
            }
        }
        out
    }
}

pub fn write_rows_csv<T: Serialize>(writer: impl Write, rows: &[T]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows_csv<T: for<'de> Deserialize<'de>>(reader: impl Read) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

/// File-system friendly form of a category label.
pub fn slug(label: &str) -> String {
    let mut s = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('_') && !s.is_empty() {
            s.push('_');
        }
    }
    s.trim_end_matches('_').to_string()
}
