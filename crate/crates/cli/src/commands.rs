use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use serde_json::json;

use sheetarena_arena::categorizer::{builtin_seeds, read_seeds_jsonl};
use sheetarena_arena::{Arena, EmbeddingProvider, GeneratorClient, HashingEmbedder, HttpEmbedder, HttpGenerator, ReplayGenerator};
use sheetarena_core::features::{extract_features, FEATURE_NAMES};
use sheetarena_core::sheetspec::parse_workbook_str;
use sheetarena_core::evaluate_workbook;
use sheetarena_rating::{read_votes_jsonl, simulate as draw, write_votes_jsonl, CovariateMode, FeatureTable, PlantedFeature, SimConfig};
use sheetarena_study::{aggregate_failure_tags, read_tags_jsonl};

use crate::args::{FeatureFormat, FeaturesArgs, FitArgs, Mode, ReportArgs, ServeArgs, SimulateArgs};
use crate::config::{EnvConfig, Settings};
use crate::report::{build_bundle, read_rows_csv, slug, write_rows_csv, BoardRow, ReportBundle};
use crate::CliError;

pub const DEFAULT_LOG: &str = "events.jsonl";

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    ))
}

fn workbook_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in inputs {
        let meta = fs::metadata(p).map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display())))?;
        if meta.is_dir() {
            let entries = fs::read_dir(p).map_err(|e| CliError::input(format!("cannot list {}: {e}", p.display())))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

/// One row per workbook that parses; the rest are reported on `err`.
pub fn features(args: &FeaturesArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let files = workbook_files(&args.inputs)?;
    let mut table = FeatureTable::new(FEATURE_NAMES);
    let mut failed = 0;
    for f in &files {
        let id = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let parsed = fs::read_to_string(f)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_workbook_str(&text).map_err(|e| e.to_string()));
        match parsed {
            Ok(wb) => {
                let values = extract_features(&wb, &evaluate_workbook(&wb)).values().to_vec();
                table.insert(id, values).map_err(|e| CliError::input(e.to_string()))?;
            }
            Err(e) => {
                failed += 1;
                writeln!(err, "warning: skipping {}: {e}", f.display())?;
            }
        }
    }
    if !files.is_empty() && failed == files.len() {
        return Err(CliError::input(format!("none of the {failed} workbooks parsed")).into());
    }
    let mut sink: Box<dyn Write + '_> = match &args.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(out),
    };
    match args.format {
        FeatureFormat::Csv => table.write_csv(&mut sink)?,
        FeatureFormat::Json => {
            let rows: Vec<_> = table
                .rows()
                .map(|(id, v)| json!({"workbook_id": id, "values": v}))
                .collect();
            serde_json::to_writer_pretty(&mut sink, &json!({"names": FEATURE_NAMES, "rows": rows}))?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn fit(args: &FitArgs, env: EnvConfig, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let mut settings = Settings::resolve(&args.common, env)?;
    if let Some(m) = args.mode {
        settings.mode = match m {
            Mode::PerBattle => CovariateMode::PerBattle,
            Mode::ModelMean => CovariateMode::ModelMean,
        };
    }
    let votes = read_votes_jsonl(open(&args.votes)?)
        .map_err(|e| CliError::input(format!("{}: {e}", args.votes.display())))?;
    let features = match (&args.features, args.adjusted) {
        (Some(p), true) => Some(
            FeatureTable::read_csv(open(p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        ),
        (None, true) => {
            return Err(CliError::input(
                "--adjusted needs --features FILE: a CSV keyed by workbook_id, as written by `sheetarena features` or `sheetarena simulate`",
            )
            .into())
        }
        (Some(_), false) => {
            writeln!(err, "warning: --features is ignored without --adjusted")?;
            None
        }
        (None, false) => None,
    };
    let bundle = build_bundle(&votes, features.as_ref(), &settings, args.category.as_deref(), args.domains)?;
    for w in &bundle.warnings {
        writeln!(err, "warning: {w}")?;
    }
    match &args.out {
        Some(p) => {
            let mut f = create(p)?;
            serde_json::to_writer_pretty(&mut f, &bundle)?;
            writeln!(f)?;
            f.flush()?;
        }
        None => out.write_all(bundle.to_markdown().as_bytes())?,
    }
    Ok(())
}

/// `NAME=BETA` or `NAME=BETA@CATEGORY`.
pub fn parse_planted(spec: &str) -> Result<PlantedFeature, CliError> {
    let bad = || CliError::input(format!("--feature `{spec}`: expected NAME=BETA or NAME=BETA@CATEGORY"));
    let (name, rest) = spec.split_once('=').ok_or_else(bad)?;
    let (beta, category) = match rest.split_once('@') {
        Some((b, c)) => (b, Some(c.to_string())),
        None => (rest, None),
    };
    let beta: f64 = beta.trim().parse().map_err(|_| bad())?;
    if name.trim().is_empty() || !beta.is_finite() {
        return Err(bad());
    }
    Ok(PlantedFeature {
        category,
        ..PlantedFeature::noise(name.trim(), beta)
    })
}

pub fn simulate(args: &SimulateArgs, env: EnvConfig, out: &mut dyn Write) -> anyhow::Result<()> {
    let settings = Settings::resolve(&args.common, env)?;
    if args.models < 2 {
        return Err(CliError::input(format!("--models must be at least 2, got {}", args.models)).into());
    }
    if args.votes == 0 {
        return Err(CliError::input("--votes must be at least 1").into());
    }
    let theta = match (&args.theta, args.spaced) {
        (Some(t), _) => Some(t.clone()),
        (None, true) => {
            let k = args.models;
            Some(
                (0..k)
                    .map(|i| -args.theta_range + 2.0 * args.theta_range * i as f64 / (k - 1) as f64)
                    .collect(),
            )
        }
        (None, false) => None,
    };
    let features = if args.features.is_empty() {
        vec![PlantedFeature::noise("presentation", 0.5), PlantedFeature::noise("inert", 0.0)]
    } else {
        args.features.iter().map(|s| parse_planted(s)).collect::<Result<_, _>>()?
    };
    let config = SimConfig {
        n_models: args.models,
        theta,
        theta_range: args.theta_range,
        n_votes: args.votes,
        seed: settings.seed,
        features,
        tie_rate: args.tie_rate,
        both_bad_rate: args.both_bad_rate,
        ..SimConfig::default()
    };
    let sim = draw(&config).map_err(|e| CliError::input(e.to_string()))?;
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut f = create(&args.out.join("votes.jsonl"))?;
    write_votes_jsonl(&mut f, &sim.votes)?;
    f.flush()?;
    let mut f = create(&args.out.join("features.csv"))?;
    sim.features.write_csv(&mut f)?;
    f.flush()?;
    let mut f = create(&args.out.join("truth.json"))?;
    serde_json::to_writer_pretty(&mut f, &sim.truth)?;
    writeln!(f)?;
    f.flush()?;
    writeln!(
        out,
        "wrote {} votes over {} models to {}",
        sim.votes.len(),
        args.models,
        args.out.display()
    )?;
    Ok(())
}

pub fn report(args: &ReportArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut bundle: ReportBundle = serde_json::from_reader(open(&args.bundle)?)
        .map_err(|e| CliError::input(format!("{}: {e}", args.bundle.display())))?;
    if let Some(p) = &args.tags {
        let tags = read_tags_jsonl(open(p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        bundle.failure_tags = Some(aggregate_failure_tags(&tags));
    }
    let markdown = bundle.to_markdown();
    let Some(dir) = &args.out else {
        out.write_all(markdown.as_bytes())?;
        return Ok(());
    };
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = vec!["report.md", "leaderboard.csv"].into_iter().map(String::from).collect::<Vec<_>>();
    fs::write(dir.join("report.md"), &markdown)?;
    write_rows_csv(create(&dir.join("leaderboard.csv"))?, &bundle.leaderboard)?;
    if bundle.meta.adjusted {
        write_rows_csv(create(&dir.join("significance.csv"))?, &bundle.significance)?;
        written.push("significance.csv".into());
    }
    for d in bundle.domains.iter().filter(|d| d.skipped.is_none()) {
        let name = format!("domain_{}.csv", slug(&d.label));
        write_rows_csv(create(&dir.join(&name))?, &d.rows)?;
        written.push(name);
    }
    if let Some(t) = &bundle.failure_tags {
        let mut f = create(&dir.join("failure_tags.csv"))?;
        t.write_csv(&mut f)?;
        f.flush()?;
        written.push("failure_tags.csv".into());
    }
    let mut f = create(&dir.join("bundle.json"))?;
    serde_json::to_writer_pretty(&mut f, &bundle)?;
    f.flush()?;
    written.push("bundle.json".into());

    // The leaderboard must survive its CSV encoding.
    let back: Vec<BoardRow> = read_rows_csv(open(&dir.join("leaderboard.csv"))?)?;
    anyhow::ensure!(back == bundle.leaderboard, "leaderboard.csv does not round-trip");
    writeln!(out, "wrote {} to {}", written.join(", "), dir.display())?;
    Ok(())
}

fn embedder(settings: &Settings) -> Result<Arc<dyn EmbeddingProvider>, CliError> {
    match &settings.file.serve.embedding {
        Some(e) => {
            let api_key = match &e.api_key_env {
                Some(var) => Some(std::env::var(var).map_err(|_| CliError::input(format!("environment variable `{var}` is not set")))?),
                None => None,
            };
            Ok(Arc::new(HttpEmbedder {
                endpoint: e.endpoint.clone(),
                model: e.model.clone(),
                api_key,
            }))
        }
        None => Ok(Arc::new(HashingEmbedder::default())),
    }
}

/// Build the service from settings without starting a listener.
pub fn build_arena(args: &ServeArgs, settings: &Settings) -> anyhow::Result<Arena> {
    let config = settings.arena_config();
    if config.models.len() < 2 {
        return Err(CliError::input("the config file must list at least two [[models]]").into());
    }
    let fixtures = args.fixtures.clone().or(settings.file.serve.fixtures.clone());
    let generator: Arc<dyn GeneratorClient> = match fixtures {
        Some(p) => Arc::new(
            ReplayGenerator::from_jsonl(open(&p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        ),
        None => Arc::new(HttpGenerator::new(Duration::from_secs(config.timeout_secs))),
    };
    let embedder = embedder(settings)?;
    let seeds = match args.seeds.clone().or(settings.file.serve.seeds.clone()) {
        Some(p) => read_seeds_jsonl(open(&p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        None => builtin_seeds(embedder.as_ref()).map_err(|e| CliError::input(e.to_string()))?,
    };
    let log = settings.log(args.log.as_deref()).unwrap_or_else(|| PathBuf::from(DEFAULT_LOG));
    Arena::open(config, Some(&log), generator, embedder, &seeds)
        .map_err(|e| CliError::input(format!("cannot open event log {}: {e}", log.display())).into())
}

pub fn serve(args: &ServeArgs, env: EnvConfig) -> anyhow::Result<()> {
    let settings = Settings::resolve(&args.common, env)?;
    let arena = Arc::new(build_arena(args, &settings)?);
    let bind = settings.bind(args.bind.as_deref());
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&bind)
            .await
            .with_context(|| format!("cannot listen on {bind}"))?;
        sheetarena_arena::http::serve(arena, listener, async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await?;
        Ok(())
    })
}
