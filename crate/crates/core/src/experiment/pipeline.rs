use super::{io_err, provenance_line, sha256_hex, ExperimentConfig, ExperimentError, Result};
use crate::a2c::{self, A2cError, EpisodicTradingEnv};
use crate::baselines::{self, Strategy};
use crate::env::{self, EnvData, TradeRecord, TradingEnv};
use crate::indicators::{build_feature_matrix, max_warmup, FeatureFrame, OHLCV_COLUMNS};
use crate::market_data::{clean, index_range, load_ohlcv, DateRange, MarketFrame, NormStats};
use crate::metrics::{write_table, EquityCurve, MetricsReport, TableRow};
use crate::nn::{Checkpoint, Mlp};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// What a stage wrote, plus human-readable notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageSummary {
    pub stage: &'static str,
    pub outputs: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl StageSummary {
    fn new(stage: &'static str) -> Self {
        Self {
            stage,
            ..Self::default()
        }
    }
}

fn write_file(path: &Path, contents: &str, summary: &mut StageSummary) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))?;
    summary.outputs.push(path.to_path_buf());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T, summary: &mut StageSummary) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| ExperimentError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    write_file(path, &(text + "\n"), summary)
}

fn read_json<T: DeserializeOwned>(path: &Path, stage: &'static str) -> Result<T> {
    if !path.exists() {
        return Err(ExperimentError::MissingCache {
            stage,
            path: path.to_path_buf(),
        });
    }
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub stage_hash: String,
    pub config_hash: String,
    pub data_fingerprint: String,
    pub source: String,
    pub tickers: Vec<String>,
    pub rows: usize,
    pub range: DateRange,
}

fn frame_csv(frame: &MarketFrame) -> String {
    let mut out = String::from("date,ticker,open,high,low,close,volume\n");
    for t in 0..frame.len() {
        for s in &frame.series {
            let b = &s.bars[t];
            writeln!(out, "{},{},{},{},{},{},{}", b.date, s.ticker, b.open, b.high, b.low, b.close, b.volume).unwrap();
        }
    }
    out
}

/// Load, restrict, clean and cache the price data.
pub fn cmd_ingest(cfg: &ExperimentConfig) -> Result<StageSummary> {
    let mut summary = StageSummary::new("ingest");
    let raw = load_ohlcv(&cfg.data.path, &cfg.data.tickers, DateRange::new(cfg.data.start, cfg.data.end))?;
    let raw = match cfg.data.max_assets {
        Some(k) if k < raw.num_assets() => {
            summary
                .notes
                .push(format!("kept the first {k} of {} tickers", raw.num_assets()));
            raw.select(&raw.tickers[..k])?
        }
        _ => raw,
    };
    let frame = clean(&raw)?;
    if frame.len() < raw.len() {
        summary
            .notes
            .push(format!("dropped {} leading rows without prices for every asset", raw.len() - frame.len()));
    }
    let body = frame_csv(&frame);
    let fingerprint = sha256_hex(body.as_bytes());
    let config_hash = cfg.config_hash();
    let dir = cfg.output_dir.join("ingest");
    write_file(
        &dir.join("frame.csv"),
        &format!("{}\n{body}", provenance_line(&config_hash, &fingerprint)),
        &mut summary,
    )?;
    let manifest = IngestManifest {
        stage_hash: cfg.ingest_hash(),
        config_hash,
        data_fingerprint: fingerprint.clone(),
        source: cfg
            .data
            .path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        tickers: frame.tickers.clone(),
        rows: frame.len(),
        range: DateRange::new(frame.calendar[0], frame.calendar[frame.len() - 1]),
    };
    write_json(&dir.join("manifest.json"), &manifest, &mut summary)?;
    summary.notes.push(format!(
        "{} assets x {} days, fingerprint {}",
        frame.num_assets(),
        frame.len(),
        &fingerprint[..12]
    ));
    Ok(summary)
}

pub fn load_frame_cache(cfg: &ExperimentConfig) -> Result<(MarketFrame, IngestManifest)> {
    let dir = cfg.output_dir.join("ingest");
    let manifest: IngestManifest = read_json(&dir.join("manifest.json"), "ingest")?;
    if manifest.stage_hash != cfg.ingest_hash() {
        return Err(ExperimentError::StaleCache { stage: "ingest", path: dir });
    }
    let frame = load_ohlcv(dir.join("frame.csv"), &manifest.tickers, manifest.range)?;
    Ok((frame, manifest))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCache {
    pub stage_hash: String,
    pub config_hash: String,
    pub data_fingerprint: String,
    pub warmup_rows: usize,
    pub frame: FeatureFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FeatureManifest {
    stage_hash: String,
    config_hash: String,
    data_fingerprint: String,
    feature_names: Vec<String>,
    feature_names_hash: String,
    tickers: Vec<String>,
    rows: usize,
    warmup_rows: usize,
}

fn feature_names_hash(names: &[String]) -> String {
    sha256_hex(names.join("\n").as_bytes())
}

pub fn cmd_features(cfg: &ExperimentConfig) -> Result<StageSummary> {
    let mut summary = StageSummary::new("features");
    let (frame, ingest) = load_frame_cache(cfg)?;
    let features = build_feature_matrix(&frame, &cfg.indicators)?;
    let warmup = max_warmup(&cfg.indicators);
    summary.notes.push(format!(
        "{} features per asset; dropped {warmup} warmup rows, {} remain",
        features.num_features(),
        features.len()
    ));
    let config_hash = cfg.config_hash();
    let dir = cfg.output_dir.join("features");
    let manifest = FeatureManifest {
        stage_hash: cfg.features_hash(),
        config_hash: config_hash.clone(),
        data_fingerprint: ingest.data_fingerprint.clone(),
        feature_names_hash: feature_names_hash(&features.feature_names),
        feature_names: features.feature_names.clone(),
        tickers: features.tickers.clone(),
        rows: features.len(),
        warmup_rows: warmup,
    };
    let cache = FeatureCache {
        stage_hash: cfg.features_hash(),
        config_hash,
        data_fingerprint: ingest.data_fingerprint,
        warmup_rows: warmup,
        frame: features,
    };
    let text = serde_json::to_string(&cache).map_err(|e| ExperimentError::Format {
        path: dir.join("features.json"),
        message: e.to_string(),
    })?;
    write_file(&dir.join("features.json"), &text, &mut summary)?;
    write_json(&dir.join("manifest.json"), &manifest, &mut summary)?;
    Ok(summary)
}

pub fn load_feature_cache(cfg: &ExperimentConfig) -> Result<FeatureCache> {
    let dir = cfg.output_dir.join("features");
    let cache: FeatureCache = read_json(&dir.join("features.json"), "features")?;
    if cache.stage_hash != cfg.features_hash() {
        return Err(ExperimentError::StaleCache { stage: "features", path: dir });
    }
    Ok(cache)
}

fn rows_of(frame: &FeatureFrame, range: DateRange, which: &str) -> Result<std::ops::Range<usize>> {
    index_range(&frame.calendar, range)
        .filter(|r| r.len() >= 2)
        .ok_or_else(|| ExperimentError::Config(format!("{which} range {}..={} covers fewer than 2 feature rows", range.start, range.end)))
}

fn slice(frame: &FeatureFrame, rows: std::ops::Range<usize>) -> FeatureFrame {
    use crate::market_data::DateIndexed;
    frame.slice_rows(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub seed: u64,
    pub updates: u64,
    pub timesteps: u64,
    pub initial_entropy: Option<f64>,
    pub final_entropy: Option<f64>,
    pub final_policy_loss: Option<f64>,
    pub final_value_loss: Option<f64>,
    pub aborted: bool,
    pub config_hash: String,
    pub data_fingerprint: String,
}

fn make_checkpoint(
    actor: &Mlp,
    critic: &Mlp,
    names_hash: &str,
    config_hash: &str,
    fingerprint: &str,
    stats: &Option<NormStats>,
    updates: u64,
    timesteps: u64,
) -> Checkpoint {
    let mut c = Checkpoint::new(actor, critic, names_hash.into(), config_hash.into(), fingerprint.into());
    c.updates = updates;
    c.timesteps = timesteps;
    c.norm_stats = stats.clone();
    c
}

fn save_checkpoint(ckpt: &Checkpoint, path: &Path, summary: &mut StageSummary) -> Result<()> {
    write_file(path, &ckpt.to_json()?, summary)
}

/// Train the agent for `cfg.agent.seed` on the training split.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<StageSummary> {
    let mut summary = StageSummary::new("train");
    let cache = load_feature_cache(cfg)?;
    let config_hash = cfg.config_hash();
    let fingerprint = cache.data_fingerprint.clone();
    let train = slice(&cache.frame, rows_of(&cache.frame, cfg.split.train, "train")?);
    let stats = if cfg.normalize { Some(train.fit_norm_stats()?) } else { None };
    let features = match &stats {
        Some(s) => train.normalized(s)?,
        None => train.clone(),
    };
    let prices = train.to_market_frame()?;
    let data = Arc::new(EnvData::new(features, prices)?);
    let env = TradingEnv::new(cfg.env.clone(), data.clone())?;
    let first = env.first_start();
    if data.len() < first + 2 {
        return Err(ExperimentError::Config(format!(
            "training split has {} rows; a {}-day window needs at least {}",
            data.len(),
            cfg.env.window,
            first + 2
        )));
    }
    let (input_len, num_actions) = (env.input_len(), env.num_actions());
    let mut episodic = EpisodicTradingEnv::new(env, first..data.len() - 1)?;
    let (actor, critic) = a2c::init_networks(input_len, num_actions, &cfg.agent)?;
    let names_hash = feature_names_hash(&cache.frame.feature_names);
    let dir = cfg.train_dir(cfg.agent.seed);

    let mut periodic = StageSummary::new("train");
    let result = a2c::train(&mut episodic, &cfg.agent, actor, critic, &mut |update, steps, a, c| {
        let ckpt = make_checkpoint(a, c, &names_hash, &config_hash, &fingerprint, &stats, update, steps);
        save_checkpoint(&ckpt, &dir.join(format!("checkpoint_u{update:06}.json")), &mut periodic)
            .map_err(|e| A2cError::InvalidConfig(format!("checkpoint write failed: {e}")))
    });
    summary.outputs.append(&mut periodic.outputs);

    let (log, outcome) = match result {
        Ok(out) => {
            let ckpt = make_checkpoint(
                &out.actor,
                &out.critic,
                &names_hash,
                &config_hash,
                &fingerprint,
                &stats,
                out.log.len() as u64,
                out.timesteps,
            );
            save_checkpoint(&ckpt, &dir.join("checkpoint_final.json"), &mut summary)?;
            (out.log, Ok(()))
        }
        Err(A2cError::NonFiniteLoss {
            update,
            last_good,
            log,
            timesteps,
        }) => {
            let path = dir.join("checkpoint_last_good.json");
            let ckpt = make_checkpoint(&last_good.0, &last_good.1, &names_hash, &config_hash, &fingerprint, &stats, update, timesteps);
            save_checkpoint(&ckpt, &path, &mut summary)?;
            (log, Err(ExperimentError::TrainingAborted { update, checkpoint: path }))
        }
        Err(e) => return Err(e.into()),
    };

    let mut text = provenance_line(&config_hash, &fingerprint) + "\n";
    let mut buf = Vec::new();
    a2c::write_training_log(&mut buf, &log).map_err(io_err(&dir))?;
    text.push_str(&String::from_utf8(buf).expect("ascii log"));
    write_file(&dir.join("training_log.csv"), &text, &mut summary)?;

    let train_summary = TrainSummary {
        seed: cfg.agent.seed,
        updates: log.len() as u64,
        timesteps: log.last().map_or(0, |u| u.timesteps),
        initial_entropy: log.first().map(|u| u.entropy),
        final_entropy: log.last().map(|u| u.entropy),
        final_policy_loss: log.last().map(|u| u.policy_loss),
        final_value_loss: log.last().map(|u| u.value_loss),
        aborted: outcome.is_err(),
        config_hash,
        data_fingerprint: fingerprint,
    };
    write_json(&dir.join("summary.json"), &train_summary, &mut summary)?;
    summary.notes.push(format!(
        "seed {}: {} updates over {} timesteps",
        train_summary.seed, train_summary.updates, train_summary.timesteps
    ));
    outcome.map(|_| summary)
}

/// Train several seeds concurrently, each into its own directory.
pub fn cmd_train_seeds(cfg: &ExperimentConfig, seeds: &[u64]) -> Vec<Result<StageSummary>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let mut c = cfg.clone();
                c.agent.seed = seed;
                scope.spawn(move || cmd_train(&c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(ExperimentError::Config("training thread panicked".into()))))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyChoice {
    Agent,
    Rule(Strategy),
}

/// `a2c`, `random`, `hold`, `index`, `arima`, or `ma<N>` such as `ma20`.
pub fn parse_strategy(name: &str) -> Result<StrategyChoice> {
    let lower = name.to_ascii_lowercase();
    let rule = match lower.as_str() {
        "a2c" | "agent" => return Ok(StrategyChoice::Agent),
        "random" => Strategy::Random {
            probs: baselines::RANDOM_PROBS,
        },
        "hold" => Strategy::Hold,
        "index" | "index_tracking" => Strategy::IndexTracking {
            tracker: Default::default(),
        },
        "arima" => Strategy::Arima { params: Default::default() },
        other => {
            let digits = other.strip_prefix("ma").map(|d| d.trim_start_matches([':', '_', '-']));
            match digits.and_then(|d| d.parse::<usize>().ok()) {
                Some(period) => Strategy::MaCrossover { period },
                None => {
                    return Err(ExperimentError::Config(format!(
                        "unknown strategy `{name}` (expected a2c, random, hold, index, arima or ma<N>)"
                    )))
                }
            }
        }
    };
    Ok(StrategyChoice::Rule(rule))
}

/// Directory-safe form of a strategy name.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RowsFile {
    config_hash: String,
    data_fingerprint: String,
    rows: Vec<TableRow>,
}

struct StrategyResult {
    name: String,
    reports: Vec<MetricsReport>,
    rows: Vec<TableRow>,
    /// Trades and curves per run, labelled by seed when several.
    runs: Vec<(String, Vec<TradeRecord>, Vec<EquityCurve>)>,
}

fn agent_label(frame: &FeatureFrame) -> String {
    if frame.num_features() > OHLCV_COLUMNS.len() {
        "A2C (multi-indicator)".into()
    } else {
        "A2C (OHLCV)".into()
    }
}

fn run_agent(
    cfg: &ExperimentConfig,
    cache: &FeatureCache,
    prices: &MarketFrame,
    start: usize,
    end: usize,
    checkpoint: &Path,
) -> Result<(Vec<TradeRecord>, EquityCurve)> {
    if !checkpoint.exists() {
        return Err(ExperimentError::MissingCache {
            stage: "train",
            path: checkpoint.to_path_buf(),
        });
    }
    let ckpt = Checkpoint::load(checkpoint)?;
    if ckpt.header.feature_names_hash != feature_names_hash(&cache.frame.feature_names) {
        return Err(ExperimentError::CheckpointMismatch(
            "checkpoint was trained on a different feature set".into(),
        ));
    }
    let (actor, _) = ckpt.networks()?;
    let features = match &ckpt.norm_stats {
        Some(s) => cache.frame.normalized(s).map_err(|e| ExperimentError::CheckpointMismatch(e.to_string()))?,
        None => cache.frame.clone(),
    };
    let data = Arc::new(EnvData::new(features, prices.clone())?);
    let mut env = TradingEnv::new(cfg.env.clone(), data)?;
    if actor.input_len() != env.input_len() || actor.output_len() != env.num_actions() {
        return Err(ExperimentError::CheckpointMismatch(format!(
            "actor maps {} inputs to {} actions, environment needs {} to {}",
            actor.input_len(),
            actor.output_len(),
            env.input_len(),
            env.num_actions()
        )));
    }
    let mut state = env.reset_range(start, end)?;
    let mut values = vec![env.equity()];
    let mut trades = Vec::new();
    while !env.is_done() {
        let action = a2c::greedy_action(&actor, &state.policy_input())?;
        let r = env.step(env::ActionCode(action))?;
        values.push(r.info.equity_after);
        trades.extend(r.info.trades);
        state = r.next_state;
    }
    let curve = EquityCurve::new("portfolio", prices.calendar[start..=end].to_vec(), values)?;
    Ok((trades, curve))
}

fn equity_csv(header: &str, runs: &[(String, Vec<TradeRecord>, Vec<EquityCurve>)]) -> String {
    let mut out = format!("{header}\ndate,run,account,equity\n");
    for (run, _, curves) in runs {
        for c in curves {
            for (d, v) in c.dates.iter().zip(&c.values) {
                writeln!(out, "{d},{run},{},{v}", c.label).unwrap();
            }
        }
    }
    out
}

fn trades_csv(header: &str, runs: &[(String, Vec<TradeRecord>, Vec<EquityCurve>)]) -> Result<String> {
    let mut out = format!("{header}\n");
    for (k, (run, trades, _)) in runs.iter().enumerate() {
        let mut buf = Vec::new();
        env::write_trade_log(&mut buf, trades)?;
        let text = String::from_utf8(buf).expect("ascii log");
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if k == 0 {
                    writeln!(out, "run,{line}").unwrap();
                }
                continue;
            }
            writeln!(out, "{run},{line}").unwrap();
        }
    }
    Ok(out)
}

/// Evaluate strategies on the test split.
///
/// With `choice` unset, every configured rule strategy runs, plus the agent
/// when `include_agent` is set and its checkpoint exists.
pub fn cmd_backtest(cfg: &ExperimentConfig, choice: Option<StrategyChoice>, checkpoint: Option<&Path>) -> Result<StageSummary> {
    let mut summary = StageSummary::new("backtest");
    let cache = load_feature_cache(cfg)?;
    let prices = cache.frame.to_market_frame()?;
    let rows = rows_of(&cache.frame, cfg.split.test, "test")?;
    let (start, end) = (rows.start, rows.end - 1);
    let year = cfg.year_label();
    let config_hash = cfg.config_hash();
    let header = provenance_line(&config_hash, &cache.data_fingerprint);
    let default_ckpt = cfg.train_dir(cfg.agent.seed).join("checkpoint_final.json");
    let ckpt_path = checkpoint.map(Path::to_path_buf).unwrap_or(default_ckpt);

    let choices = match choice {
        Some(c) => vec![c],
        None => {
            let mut v: Vec<StrategyChoice> = cfg.backtest.strategies.iter().cloned().map(StrategyChoice::Rule).collect();
            if cfg.backtest.include_agent {
                if ckpt_path.exists() {
                    v.push(StrategyChoice::Agent);
                } else {
                    summary
                        .notes
                        .push(format!("no checkpoint at {}; agent skipped", ckpt_path.display()));
                }
            }
            v
        }
    };

    let stamp = |mut r: MetricsReport| {
        r.config_hash = config_hash.clone();
        r.data_fingerprint = cache.data_fingerprint.clone();
        r
    };

    for choice in choices {
        let result = match &choice {
            StrategyChoice::Agent => {
                let name = agent_label(&cache.frame);
                let (trades, curve) = run_agent(cfg, &cache, &prices, start, end, &ckpt_path)?;
                let curves = vec![curve];
                let report = stamp(MetricsReport::from_curves(&name, &year, Some(cfg.agent.seed), &curves)?);
                StrategyResult {
                    rows: vec![report.row()],
                    reports: vec![report],
                    runs: vec![(format!("seed_{}", cfg.agent.seed), trades, curves)],
                    name,
                }
            }
            StrategyChoice::Rule(strategy) => {
                let name = strategy.name();
                let seeds: Vec<u64> = if strategy.is_seeded() {
                    cfg.backtest.seeds.clone()
                } else {
                    vec![cfg.agent.seed]
                };
                let mut res = StrategyResult {
                    name: name.clone(),
                    reports: Vec::new(),
                    rows: Vec::new(),
                    runs: Vec::new(),
                };
                for &seed in &seeds {
                    let run = baselines::run_rule_based(strategy, seed, &prices, start, end, &cfg.env)?;
                    let curves = run.curves();
                    let label = if strategy.is_seeded() {
                        format!("{name} (seed {seed})")
                    } else {
                        name.clone()
                    };
                    let report = stamp(MetricsReport::from_curves(&label, &year, strategy.is_seeded().then_some(seed), &curves)?);
                    res.rows.push(report.row());
                    res.reports.push(report);
                    res.runs.push((format!("seed_{seed}"), run.trades(), curves));
                }
                if strategy.is_seeded() && seeds.len() > 1 {
                    let per_seed = res.rows.clone();
                    res.rows.extend(TableRow::mean(&year, &name, &per_seed));
                }
                res
            }
        };

        let dir = cfg.output_dir.join("backtest").join(slug(&result.name));
        let mut table = Vec::new();
        write_table(&mut table, &result.rows).map_err(io_err(&dir))?;
        write_file(
            &dir.join("table.csv"),
            &format!("{header}\n{}", String::from_utf8(table).expect("ascii table")),
            &mut summary,
        )?;
        write_json(
            &dir.join("rows.json"),
            &RowsFile {
                config_hash: config_hash.clone(),
                data_fingerprint: cache.data_fingerprint.clone(),
                rows: result.rows.clone(),
            },
            &mut summary,
        )?;
        write_json(&dir.join("report.json"), &result.reports, &mut summary)?;
        write_file(&dir.join("trades.csv"), &trades_csv(&header, &result.runs)?, &mut summary)?;
        write_file(&dir.join("equity.csv"), &equity_csv(&header, &result.runs), &mut summary)?;
        for row in &result.rows {
            summary.notes.push(format!(
                "{} {}: return {:.2}%, sharpe {:.2}, vol {:.2}%, mdd {:.2}%",
                row.year, row.strategy, row.return_rate, row.sharpe_ratio, row.volatility, row.max_drawdown
            ));
        }
    }
    Ok(summary)
}

/// Merge every backtest under `out_dir` into one table sorted by year and
/// strategy, and gather the equity curves for plotting.
pub fn cmd_report(out_dir: &Path) -> Result<StageSummary> {
    let mut summary = StageSummary::new("report");
    let backtest = out_dir.join("backtest");
    let mut dirs: Vec<PathBuf> = match std::fs::read_dir(&backtest) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("rows.json").exists())
            .collect(),
        Err(_) => Vec::new(),
    };
    if dirs.is_empty() {
        return Err(ExperimentError::EmptyRun(out_dir.to_path_buf()));
    }
    dirs.sort();

    let mut rows = Vec::new();
    let mut hashes = Vec::new();
    let mut prints = Vec::new();
    for d in &dirs {
        let file: RowsFile = read_json(&d.join("rows.json"), "backtest")?;
        if !hashes.contains(&file.config_hash) {
            hashes.push(file.config_hash.clone());
        }
        if !prints.contains(&file.data_fingerprint) {
            prints.push(file.data_fingerprint.clone());
        }
        rows.extend(file.rows);
        let equity = d.join("equity.csv");
        if equity.exists() {
            let name = d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let text = std::fs::read_to_string(&equity).map_err(io_err(&equity))?;
            write_file(&out_dir.join("report").join(format!("equity_{name}.csv")), &text, &mut summary)?;
        }
    }
    rows.sort_by(|a, b| (&a.year, &a.strategy).cmp(&(&b.year, &b.strategy)));
    let (config_hash, data_fingerprint) = (hashes.join(";"), prints.join(";"));
    let header = provenance_line(&config_hash, &data_fingerprint);
    let mut table = Vec::new();
    write_table(&mut table, &rows).map_err(io_err(out_dir))?;
    let dir = out_dir.join("report");
    write_file(
        &dir.join("table.csv"),
        &format!("{header}\n{}", String::from_utf8(table).expect("ascii table")),
        &mut summary,
    )?;
    let count = rows.len();
    write_json(
        &dir.join("table.json"),
        &RowsFile {
            config_hash,
            data_fingerprint,
            rows,
        },
        &mut summary,
    )?;
    summary
        .notes
        .push(format!("{count} rows from {} backtests", dirs.len()));
    Ok(summary)
}
