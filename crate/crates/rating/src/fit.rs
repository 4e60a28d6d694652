use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::table::FeatureTable;
use crate::vote::{Outcome, VoteRecord};

pub const DEFAULT_LAMBDA: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Relative residual below which a design column counts as collinear.
const COLLINEAR_TOL: f64 = 1e-9;

/// Relative change in the objective treated as evaluation noise.
pub const OBJECTIVE_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    #[default]
    Exclude,
    HalfWin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateMode {
    #[default]
    PerBattle,
    ModelMean,
}

impl std::str::FromStr for CovariateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_battle" => Ok(Self::PerBattle),
            "model_mean" => Ok(Self::ModelMean),
            _ => Err(format!("unknown covariate mode `{s}`; expected per_battle or model_mean")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub tie_mode: TieMode,
    /// Defaults to the lexicographically first model.
    pub anchor: Option<String>,
    pub covariate_mode: CovariateMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            tie_mode: TieMode::Exclude,
            anchor: None,
            covariate_mode: CovariateMode::PerBattle,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("no usable votes")]
    NoUsableVotes,
    #[error("anchor model `{0}` does not appear in any usable vote")]
    UnknownAnchor(String),
    #[error("models {0:?} only win or only lose and the penalty is zero")]
    DegenerateData(Vec<String>),
    #[error("feature columns {0:?} are collinear with the design")]
    SingularInformation(Vec<String>),
    #[error("no features for workbook `{0}`")]
    MissingFeatures(String),
    #[error("{found} usable votes, at least {required} required")]
    InsufficientVotes { found: usize, required: usize },
    #[error("fits cover different models: {0:?}")]
    ModelSetMismatch(Vec<String>),
    #[error("fits use different anchors: `{0}` and `{1}`")]
    AnchorMismatch(String, String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub feature: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingFit {
    pub models: Vec<String>,
    pub anchor: String,
    /// Log-strengths; the anchor is exactly 0.
    pub theta: BTreeMap<String, f64>,
    pub theta_se: BTreeMap<String, f64>,
    pub coefficients: Option<Vec<Coefficient>>,
    pub dropped_features: Vec<String>,
    /// All votes a model took part in, including ties and BOTH_BAD.
    pub votes_per_model: BTreeMap<String, usize>,
    pub n_votes_used: usize,
    pub log_likelihood: f64,
    pub objective: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub config: FitConfig,
    pub warnings: Vec<String>,
}

impl RatingFit {
    pub fn theta_of(&self, model: &str) -> Option<f64> {
        self.theta.get(model).copied()
    }

    pub fn coefficient(&self, feature: &str) -> Option<&Coefficient> {
        self.coefficients.as_ref()?.iter().find(|c| c.feature == feature)
    }
}

#[derive(Debug, Clone)]
struct Observation {
    lo: usize,
    hi: usize,
    /// 1 when `lo` won, 0 when `hi` won, 0.5 for a tie.
    y: f64,
    x: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Penalized negative log-likelihood of a Bradley-Terry model with
/// differenced covariates. Parameters are the strengths of every model
/// except the anchor, followed by one coefficient per kept feature.
#[derive(Debug, Clone)]
pub struct Objective {
    models: Vec<String>,
    anchor: usize,
    features: Vec<String>,
    dropped: Vec<String>,
    obs: Vec<Observation>,
    lambda: f64,
    n_votes_used: usize,
}

impl Objective {
    pub fn new(votes: &[VoteRecord], features: Option<&FeatureTable>, config: &FitConfig) -> Result<Self, FitError> {
        if !(config.lambda >= 0.0 && config.lambda.is_finite()) {
            return Err(FitError::InvalidConfig(format!("lambda must be >= 0, got {}", config.lambda)));
        }
        let used: Vec<&VoteRecord> = votes
            .iter()
            .filter(|v| v.outcome.is_decisive() || (v.outcome == Outcome::Tie && config.tie_mode == TieMode::HalfWin))
            .filter(|v| v.model_a != v.model_b)
            .collect();
        if used.is_empty() {
            return Err(FitError::NoUsableVotes);
        }
        let models: Vec<String> = used
            .iter()
            .flat_map(|v| [v.model_a.clone(), v.model_b.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&str, usize> = models.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
        let anchor_name = config.anchor.clone().unwrap_or_else(|| models[0].clone());
        let anchor = *index
            .get(anchor_name.as_str())
            .ok_or_else(|| FitError::UnknownAnchor(anchor_name.clone()))?;

        let (names, covariates) = match features {
            None => (Vec::new(), vec![Vec::new(); used.len()]),
            Some(table) => (
                table.names().to_vec(),
                differenced_covariates(&used, table, &index, config.covariate_mode)?,
            ),
        };

        let mut obs: Vec<Observation> = used
            .iter()
            .zip(covariates)
            .map(|(v, x)| {
                let (a, b) = (index[v.model_a.as_str()], index[v.model_b.as_str()]);
                let y = match v.outcome {
                    Outcome::AWins => 1.0,
                    Outcome::BWins => 0.0,
                    _ => 0.5,
                };
                if a < b {
                    Observation { lo: a, hi: b, y, x }
                } else {
                    Observation {
                        lo: b,
                        hi: a,
                        y: 1.0 - y,
                        x: x.into_iter().map(|d| -d).collect(),
                    }
                }
            })
            .collect();

        // Columns with no variation in the differences carry no information.
        let keep: Vec<bool> = (0..names.len()).map(|k| obs.iter().any(|o| o.x[k] != 0.0)).collect();
        let dropped = names.iter().zip(&keep).filter(|(_, k)| !**k).map(|(n, _)| n.clone()).collect();
        let features = names.iter().zip(&keep).filter(|(_, k)| **k).map(|(n, _)| n.clone()).collect();
        for o in &mut obs {
            o.x = o.x.iter().zip(&keep).filter(|(_, k)| **k).map(|(v, _)| *v).collect();
        }

        Ok(Self {
            models,
            anchor,
            features,
            dropped,
            obs,
            lambda: config.lambda,
            n_votes_used: used.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.models.len() - 1 + self.features.len()
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    /// Kept feature names, in parameter order.
    pub fn features(&self) -> &[String] {
        &self.features
    }

    fn theta_index(&self, model: usize) -> Option<usize> {
        match model.cmp(&self.anchor) {
            std::cmp::Ordering::Less => Some(model),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(model - 1),
        }
    }

    fn margin(&self, p: &[f64], o: &Observation) -> f64 {
        let t = |m| self.theta_index(m).map_or(0.0, |i| p[i]);
        let off = self.models.len() - 1;
        t(o.lo) - t(o.hi) + o.x.iter().zip(&p[off..]).map(|(x, b)| x * b).sum::<f64>()
    }

    /// Sparse design row: (parameter index, coefficient) pairs.
    fn row(&self, o: &Observation) -> Vec<(usize, f64)> {
        let mut r = Vec::with_capacity(2 + o.x.len());
        if let Some(i) = self.theta_index(o.lo) {
            r.push((i, 1.0));
        }
        if let Some(i) = self.theta_index(o.hi) {
            r.push((i, -1.0));
        }
        let off = self.models.len() - 1;
        r.extend(o.x.iter().enumerate().map(|(k, v)| (off + k, *v)));
        r
    }

    pub fn negative_log_likelihood(&self, p: &[f64]) -> f64 {
        self.obs
            .iter()
            .map(|o| {
                let d = self.margin(p, o);
                o.y * softplus(-d) + (1.0 - o.y) * softplus(d)
            })
            .sum()
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        self.negative_log_likelihood(p) + self.lambda * p.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = p.iter().map(|v| 2.0 * self.lambda * v).collect();
        for o in &self.obs {
            let r = sigmoid(self.margin(p, o)) - o.y;
            for (i, c) in self.row(o) {
                g[i] += r * c;
            }
        }
        g
    }

    pub fn hessian(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::from_diagonal_element(n, n, 2.0 * self.lambda);
        for o in &self.obs {
            let s = sigmoid(self.margin(p, o));
            let w = s * (1.0 - s);
            let row = self.row(o);
            for &(i, a) in &row {
                for &(j, b) in &row {
                    h[(i, j)] += w * a * b;
                }
            }
        }
        h
    }

    /// Feature columns whose residual against the strength columns and the
    /// earlier feature columns vanishes (weighted Gram-Schmidt).
    fn collinear_features(&self) -> Vec<String> {
        let n_obs = self.obs.len();
        let n = self.dim();
        let mut columns = vec![vec![0.0; n_obs]; n];
        for (r, o) in self.obs.iter().enumerate() {
            for (i, c) in self.row(o) {
                columns[i][r] = c;
            }
        }
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut bad = Vec::new();
        let off = self.models.len() - 1;
        for (j, mut col) in columns.into_iter().enumerate() {
            let norm0: f64 = col.iter().map(|v| v * v).sum();
            for q in &basis {
                let dot: f64 = col.iter().zip(q).map(|(a, b)| a * b).sum();
                col.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
            }
            let norm: f64 = col.iter().map(|v| v * v).sum();
            if norm0 == 0.0 || norm <= COLLINEAR_TOL * norm0 {
                if j >= off {
                    bad.push(self.features[j - off].clone());
                }
                continue;
            }
            let s = norm.sqrt();
            col.iter_mut().for_each(|v| *v /= s);
            basis.push(col);
        }
        bad
    }

    /// Models that never lose or never win among the usable votes.
    fn one_sided_models(&self) -> Vec<String> {
        let mut won = vec![false; self.models.len()];
        let mut lost = vec![false; self.models.len()];
        for o in &self.obs {
            if o.y > 0.0 {
                won[o.lo] = true;
                lost[o.hi] = true;
            }
            if o.y < 1.0 {
                won[o.hi] = true;
                lost[o.lo] = true;
            }
        }
        (0..self.models.len())
            .filter(|&m| !(won[m] && lost[m]))
            .map(|m| self.models[m].clone())
            .collect()
    }

    /// Models with no chain of comparisons to the anchor.
    fn disconnected_models(&self) -> Vec<String> {
        let mut parent: Vec<usize> = (0..self.models.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for o in &self.obs {
            let (a, b) = (find(&mut parent, o.lo), find(&mut parent, o.hi));
            parent[a] = b;
        }
        let root = find(&mut parent, self.anchor);
        (0..self.models.len())
            .filter(|&m| find(&mut parent, m) != root)
            .map(|m| self.models[m].clone())
            .collect()
    }
}

/// Z-score each output's features over the workbooks in `used`, then take
/// per-vote differences A minus B.
fn differenced_covariates(
    used: &[&VoteRecord],
    table: &FeatureTable,
    index: &BTreeMap<&str, usize>,
    mode: CovariateMode,
) -> Result<Vec<Vec<f64>>, FitError> {
    let workbooks: BTreeSet<&str> = used
        .iter()
        .flat_map(|v| [v.workbook_a.as_str(), v.workbook_b.as_str()])
        .collect();
    let mut raw: BTreeMap<&str, &[f64]> = BTreeMap::new();
    for id in &workbooks {
        let row = table.get(id).ok_or_else(|| FitError::MissingFeatures(id.to_string()))?;
        raw.insert(id, row);
    }
    let k = table.names().len();
    let n = raw.len() as f64;
    let mut mean = vec![0.0; k];
    let mut sd = vec![0.0; k];
    for j in 0..k {
        mean[j] = raw.values().map(|r| r[j]).sum::<f64>() / n;
        sd[j] = (raw.values().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
    }
    let z: BTreeMap<&str, Vec<f64>> = raw
        .iter()
        .map(|(id, r)| {
            let row = (0..k)
                .map(|j| {
                    if sd[j] <= 1e-12 * mean[j].abs().max(1.0) {
                        0.0
                    } else {
                        (r[j] - mean[j]) / sd[j]
                    }
                })
                .collect();
            (*id, row)
        })
        .collect();

    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>();
    match mode {
        CovariateMode::PerBattle => Ok(used
            .iter()
            .map(|v| diff(&z[v.workbook_a.as_str()], &z[v.workbook_b.as_str()]))
            .collect()),
        CovariateMode::ModelMean => {
            let mut outputs: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); index.len()];
            for v in used {
                outputs[index[v.model_a.as_str()]].insert(v.workbook_a.as_str());
                outputs[index[v.model_b.as_str()]].insert(v.workbook_b.as_str());
            }
            let means: Vec<Vec<f64>> = outputs
                .iter()
                .map(|ids| {
                    let mut m = vec![0.0; k];
                    for id in ids {
                        m.iter_mut().zip(&z[id]).for_each(|(a, b)| *a += b);
                    }
                    m.iter_mut().for_each(|a| *a /= ids.len() as f64);
                    m
                })
                .collect();
            Ok(used
                .iter()
                .map(|v| diff(&means[index[v.model_a.as_str()]], &means[index[v.model_b.as_str()]]))
                .collect())
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Newton's method with step halving; the objective never increases.
fn newton(obj: &Objective, tol: f64, max_iter: usize) -> Result<(Vec<f64>, bool, usize, f64, Vec<f64>), FitError> {
    let mut p = vec![0.0; obj.dim()];
    let mut f = obj.value(&p);
    let mut trace = vec![f];
    let mut iterations = 0;
    loop {
        let g = obj.gradient(&p);
        let gnorm = max_abs(&g);
        if gnorm < tol {
            return Ok((p, true, iterations, gnorm, trace));
        }
        if iterations >= max_iter {
            return Ok((p, false, iterations, gnorm, trace));
        }
        iterations += 1;
        let h = obj.hessian(&p);
        let step = match h.clone().cholesky() {
            Some(c) => c.solve(&DVector::from_vec(g.clone())),
            None => {
                // Unpenalized and rank deficient: fall back to a least-squares step.
                let svd = h.svd(true, true);
                svd.solve(&DVector::from_vec(g.clone()), 1e-12)
                    .map_err(|e| FitError::Numerical(e.to_string()))?
            }
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = p.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let fc = obj.value(&cand);
            // Near the optimum the true decrease falls below the rounding
            // error of the objective; the gradient norm decides there.
            let flat = fc - f <= OBJECTIVE_NOISE * f.abs().max(1.0) && max_abs(&obj.gradient(&cand)) < gnorm;
            if fc < f || flat {
                p = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        trace.push(f);
        if !accepted {
            // No representable descent left along the Newton direction.
            return Ok((p, false, iterations, gnorm, trace));
        }
    }
}

/// Two-sided Wald p-value for a z statistic.
pub fn wald_p_value(z: f64) -> f64 {
    let normal = Normal::standard();
    (2.0 * normal.cdf(-z.abs())).clamp(0.0, 1.0)
}

/// Bradley-Terry fit without covariates.
pub fn fit_bt(votes: &[VoteRecord], config: &FitConfig) -> Result<RatingFit, FitError> {
    fit_inner(votes, None, config)
}

/// Bradley-Terry fit with differenced, standardized workbook features.
pub fn fit_bt_with_features(
    votes: &[VoteRecord],
    features: &FeatureTable,
    config: &FitConfig,
) -> Result<RatingFit, FitError> {
    fit_inner(votes, Some(features), config)
}

fn fit_inner(votes: &[VoteRecord], features: Option<&FeatureTable>, config: &FitConfig) -> Result<RatingFit, FitError> {
    let obj = Objective::new(votes, features, config)?;
    let collinear = obj.collinear_features();
    if !collinear.is_empty() {
        return Err(FitError::SingularInformation(collinear));
    }
    let mut warnings = Vec::new();
    let one_sided = obj.one_sided_models();
    if !one_sided.is_empty() {
        if config.lambda == 0.0 {
            return Err(FitError::DegenerateData(one_sided));
        }
        warnings.push(format!(
            "models with only wins or only losses, estimates are held finite by the penalty: {}",
            one_sided.join(", ")
        ));
    }
    let disconnected = obj.disconnected_models();
    if !disconnected.is_empty() {
        warnings.push(format!(
            "models not connected to anchor `{}`: {}",
            obj.models[obj.anchor],
            disconnected.join(", ")
        ));
    }

    let (p, converged, iterations, gradient_norm, objective_trace) = newton(&obj, config.tol, config.max_iter)?;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(FitError::Numerical("non-finite parameters".into()));
    }
    let h = obj.hessian(&p);
    let cov = h
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| h.try_inverse())
        .ok_or_else(|| FitError::Numerical("information matrix is singular at the optimum".into()))?;
    let se = |i: usize| cov[(i, i)].max(0.0).sqrt();

    let mut theta = BTreeMap::new();
    let mut theta_se = BTreeMap::new();
    for (m, name) in obj.models.iter().enumerate() {
        let i = obj.theta_index(m);
        theta.insert(name.clone(), i.map_or(0.0, |i| p[i]));
        theta_se.insert(name.clone(), i.map_or(0.0, se));
    }
    let off = obj.models.len() - 1;
    let coefficients = features.map(|_| {
        obj.features
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let estimate = p[off + k];
                let std_error = se(off + k);
                let z = if std_error > 0.0 { estimate / std_error } else { 0.0 };
                Coefficient {
                    feature: name.clone(),
                    estimate,
                    std_error,
                    z,
                    p_value: wald_p_value(z),
                }
            })
            .collect()
    });

    let mut votes_per_model: BTreeMap<String, usize> = obj.models.iter().map(|m| (m.clone(), 0)).collect();
    for v in votes {
        for m in [&v.model_a, &v.model_b] {
            if let Some(n) = votes_per_model.get_mut(m) {
                *n += 1;
            }
        }
    }

    let nll = obj.negative_log_likelihood(&p);
    Ok(RatingFit {
        anchor: obj.models[obj.anchor].clone(),
        models: obj.models.clone(),
        theta,
        theta_se,
        coefficients,
        dropped_features: obj.dropped.clone(),
        votes_per_model,
        n_votes_used: obj.n_votes_used,
        log_likelihood: -nll,
        objective: obj.value(&p),
        gradient_norm,
        converged,
        iterations,
        objective_trace,
        config: config.clone(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use chrono::TimeZone;

    pub(crate) fn vote(a: &str, b: &str, outcome: Outcome) -> VoteRecord {
        VoteRecord {
            battle_id: format!("{a}-{b}"),
            prompt_id: "p".into(),
            category: "SMB & Personal".into(),
            model_a: a.into(),
            model_b: b.into(),
            workbook_a: format!("{a}-wb"),
            workbook_b: format!("{b}-wb"),
            outcome,
            timestamp: chrono::Utc.timestamp_opt(0, 0).unwrap(),
        }
    }

    #[test]
    fn symmetric_pair_is_level() {
        let mut votes = Vec::new();
        for _ in 0..10 {
            votes.push(vote("A", "B", Outcome::AWins));
            votes.push(vote("A", "B", Outcome::BWins));
        }
        let fit = fit_bt(&votes, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.anchor, "A");
        assert_eq!(fit.theta["A"], 0.0);
        assert_abs_diff_eq!(fit.theta["B"], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn two_model_closed_form() {
        // 30 wins to 10: theta_B - theta_A = ln(1/3) up to the ridge.
        let mut votes = vec![vote("A", "B", Outcome::BWins); 30];
        votes.extend(vec![vote("B", "A", Outcome::BWins); 10]);
        let fit = fit_bt(&votes, &FitConfig::default()).unwrap();
        assert_abs_diff_eq!(fit.theta["B"], 3.0f64.ln(), epsilon = 1e-4);
        // Observed information for one parameter: n p (1 - p).
        assert_abs_diff_eq!(fit.theta_se["B"], (1.0f64 / (40.0 * 0.75 * 0.25)).sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn ties_and_both_bad() {
        let votes = vec![
            vote("A", "B", Outcome::AWins),
            vote("A", "B", Outcome::BWins),
            vote("A", "C", Outcome::Tie),
            vote("A", "C", Outcome::BothBad),
        ];
        let fit = fit_bt(&votes, &FitConfig::default()).unwrap();
        assert_eq!(fit.models, ["A", "B"]);
        assert_eq!(fit.n_votes_used, 2);
        assert_eq!(fit.votes_per_model["A"], 4);
        let half = FitConfig {
            tie_mode: TieMode::HalfWin,
            ..FitConfig::default()
        };
        let fit = fit_bt(&votes, &half).unwrap();
        assert_eq!(fit.models, ["A", "B", "C"]);
        assert_abs_diff_eq!(fit.theta["C"], 0.0, epsilon = 1e-8);

        let only_noise = vec![vote("A", "B", Outcome::BothBad)];
        assert_eq!(fit_bt(&only_noise, &FitConfig::default()), Err(FitError::NoUsableVotes));
    }

    #[test]
    fn degenerate_and_disconnected() {
        let votes = vec![vote("A", "B", Outcome::AWins), vote("C", "D", Outcome::AWins), vote("D", "C", Outcome::AWins)];
        let fit = fit_bt(&votes, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.warnings.iter().any(|w| w.contains("only wins")));
        assert!(fit.warnings.iter().any(|w| w.contains("not connected") && w.contains("C, D")));
        assert!(fit.theta["B"] < -5.0);
        let unpenalized = FitConfig {
            lambda: 0.0,
            ..FitConfig::default()
        };
        assert_eq!(
            fit_bt(&votes, &unpenalized),
            Err(FitError::DegenerateData(vec!["A".into(), "B".into()]))
        );
        let bad_anchor = FitConfig {
            anchor: Some("Z".into()),
            ..FitConfig::default()
        };
        assert_eq!(fit_bt(&votes, &bad_anchor), Err(FitError::UnknownAnchor("Z".into())));
    }

    #[test]
    fn newton_trace_never_increases() {
        let mut votes = Vec::new();
        for (i, (a, b)) in [("A", "B"), ("B", "C"), ("C", "A"), ("A", "D")].iter().enumerate() {
            for j in 0..(5 + i) {
                let o = if j % 3 == 0 { Outcome::BWins } else { Outcome::AWins };
                votes.push(vote(a, b, o));
            }
        }
        let fit = fit_bt(&votes, &FitConfig::default()).unwrap();
        assert!(fit.converged && fit.gradient_norm < 1e-8);
        assert!(fit.objective_trace.windows(2).all(|w| w[1] <= w[0] + OBJECTIVE_NOISE * w[0].abs()));
    }

    #[test]
    fn wald_p_values() {
        assert_abs_diff_eq!(wald_p_value(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wald_p_value(1.959963984540054), 0.05, epsilon = 1e-10);
        assert_eq!(wald_p_value(-3.0), wald_p_value(3.0));
    }
}
