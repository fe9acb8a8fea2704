//! End-to-end study: for every (split, augmentation) pair prepare windows,
//! augment, train, predict and backtest, then aggregate a comparison table.
//!
//! Results land in a bundle directory:
//!
//! ```text
//! <output>/runs/<spec>/<split>/model.json
//! <output>/runs/<spec>/<split>/predictions.csv
//! <output>/runs/<spec>/<split>/portfolio.csv
//! <output>/runs/<spec>/<split>/record.json
//! <output>/summary.json
//! <output>/table.csv, table.md
//! <output>/cumprofit_<spec>.csv, cumprofit_benchmark.csv
//! ```
//!
//! A pair whose `record.json` exists is loaded instead of recomputed.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{augment_dataset, AugmentParams, Method, Sample};
use crate::backtest::{
    cumulative_profit, run_backtest, write_cumprofit_csv, write_portfolio_csv, BacktestConfig, DailyPrediction,
};
use crate::classifier::{predict_batch, train, write_checkpoint, Architecture, Checkpoint, EpochLog, ModelKind, TrainConfig};
use crate::error::{Error, Result};
use crate::metrics::{classification_metrics, excess, MetricReport};
use crate::pipeline::{
    make_splits, prepare_split, read_panel_csv, synth_panel, train_val_split, ReturnPanel, Split, SplitPlan,
    SynthParams, Universe,
};
use crate::rng::RngStream;

/// Where the return panel comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic(SynthParams),
    Csv { path: PathBuf },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SynthParams::default())
    }
}

impl DataSource {
    /// Loads or generates the panel. Synthetic panels draw from `seed / "data"`.
    pub fn load(&self, seed: u64) -> Result<ReturnPanel> {
        match self {
            DataSource::Synthetic(p) => synth_panel(p, &RngStream::new(seed).derive_named("data")),
            DataSource::Csv { path } => read_panel_csv(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub hidden: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { kind: ModelKind::Lstm, hidden: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentPlan {
    pub data: DataSource,
    pub universe: Universe,
    pub splits: SplitPlan,
    /// Method names such as `magnify` or `magnify+time_warp`; `none` is always run.
    pub specs: Vec<String>,
    pub augment: AugmentParams,
    /// Augmented copies per training window.
    pub factor: usize,
    pub train_fraction: f64,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub backtest: BacktestConfig,
    pub seed: u64,
    pub output: PathBuf,
    pub workers: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            data: DataSource::default(),
            universe: Universe::Full,
            splits: SplitPlan::full(),
            specs: vec!["none".into()],
            augment: AugmentParams::default(),
            factor: 1,
            train_fraction: 0.8,
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            backtest: BacktestConfig::default(),
            seed: 0,
            output: PathBuf::from("results"),
            workers: 1,
        }
    }
}

impl ExperimentPlan {
    /// Synthetic 50 × 1250 panel, half-size splits, LSTM-25 trained for a few epochs.
    pub fn desk() -> Self {
        ExperimentPlan {
            splits: SplitPlan::desk(),
            specs: ["none", "magnify", "time_warp", "jitter"].map(String::from).to_vec(),
            train: TrainConfig {
                max_epochs: 4,
                patience: 2,
                learning_rate: 0.003,
                ..TrainConfig::default()
            },
            output: PathBuf::from("results/desk"),
            ..ExperimentPlan::default()
        }
    }

    /// Spec names with `none` first and duplicates removed.
    pub fn spec_names(&self) -> Vec<String> {
        let mut out = vec!["none".to_string()];
        for s in &self.specs {
            let s = s.trim().to_string();
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        self.spec_names().iter().map(|n| Method::from_name(n, &self.augment)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.splits.validate()?;
        self.train.validate()?;
        self.methods()?;
        if self.factor == 0 {
            return Err(Error::InvalidParameter("augmentation factor must be >= 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!("train_fraction {} outside (0, 1)", self.train_fraction)));
        }
        if self.backtest.k == 0 || !(self.backtest.cost_bps >= 0.0) {
            return Err(Error::InvalidParameter("backtest needs k >= 1 and cost_bps >= 0".into()));
        }
        if self.model.kind == ModelKind::Lstm && self.model.hidden == 0 {
            return Err(Error::InvalidParameter("LSTM needs at least one hidden unit".into()));
        }
        Ok(())
    }

    pub fn architecture(&self) -> Architecture {
        match self.model.kind {
            ModelKind::Lstm => Architecture::lstm(self.splits.window_length, self.model.hidden),
            ModelKind::Logistic => Architecture::logistic(self.splits.window_length),
        }
    }

    pub fn run_dir(&self, spec: &str, split: usize) -> PathBuf {
        self.output.join("runs").join(spec).join(split.to_string())
    }
}

/// Outcome of one (split, spec) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub split: usize,
    pub spec: String,
    /// Checkpoint path relative to the bundle root.
    pub checkpoint: String,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub epochs: Vec<EpochLog>,
    pub dates: Vec<NaiveDate>,
    pub net: Vec<f64>,
    pub gross: Vec<f64>,
    pub benchmark: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub split: usize,
    pub spec: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecSummary {
    pub spec: String,
    pub splits: usize,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SpecSummary>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub failures: Vec<Failure>,
    pub summary: Summary,
}

/// Streams for one split. The shuffle and the model initialization depend
/// on the split only, so every spec sees the same train/validation cut.
fn split_stream(seed: u64, split: usize) -> RngStream {
    RngStream::new(seed).derive_named("split").derive(split as u64)
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_predictions_csv(preds: &[DailyPrediction], labels: &[u8], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "stock", "prob_up", "label"])?;
    for (p, y) in preds.iter().zip(labels) {
        w.write_record([p.date.to_string(), p.stock.clone(), p.prob_up.to_string(), y.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a `predictions.csv` written by [`run_pair`]: predictions and true labels.
pub fn read_predictions_csv(path: &Path) -> Result<(Vec<DailyPrediction>, Vec<u8>)> {
    let mut r = csv::Reader::from_path(path)?;
    let mut preds = Vec::new();
    let mut labels = Vec::new();
    for rec in r.deserialize::<(NaiveDate, String, f64, u8)>() {
        let (date, stock, prob_up, label) = rec?;
        preds.push(DailyPrediction { date, stock, prob_up });
        labels.push(label);
    }
    Ok((preds, labels))
}

/// Runs one (split, spec) pair and persists its artifacts.
pub fn run_pair(plan: &ExperimentPlan, panel: &ReturnPanel, split: &Split, method: &Method) -> Result<RunRecord> {
    let spec = method.name();
    let dir = plan.run_dir(&spec, split.index);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let stream = split_stream(plan.seed, split.index);

    let prepared = prepare_split(panel, split, &plan.splits, plan.universe)?;
    let samples: Vec<Sample> = prepared.train_windows().iter().map(|w| w.to_sample()).collect();
    let (train_set, val_set) = train_val_split(&samples, plan.train_fraction, &stream.derive_named("shuffle"))?;
    drop(samples);
    let train_set = match method {
        Method::None => train_set,
        m => augment_dataset(
            &train_set,
            m,
            &stream.derive_named("augment").derive_named(&spec),
            plan.factor,
        )?,
    };
    let (params, epochs) = train(plan.architecture(), &train_set, &val_set, &plan.train, &stream.derive_named("train"))?;
    let (n_train, n_val) = (train_set.len(), val_set.len());
    drop(train_set);
    drop(val_set);
    write_checkpoint(&Checkpoint::new(params.clone(), plan.train.clone()), dir.join("model.json"))?;

    let test = prepared.test_windows();
    let refs: Vec<&[f64]> = test.iter().map(|w| w.values.as_slice()).collect();
    let out = predict_batch(&params, &refs)?;
    let labels: Vec<u8> = test.iter().map(|w| w.label).collect();
    let classes: Vec<u8> = out.iter().map(|p| p.class()).collect();
    let (accuracy, f1) = classification_metrics(&labels, &classes)?;
    let preds: Vec<DailyPrediction> = test
        .iter()
        .zip(&out)
        .map(|(w, p)| DailyPrediction {
            date: w.end_date,
            stock: w.stock.clone(),
            prob_up: p.prob_up,
        })
        .collect();
    write_predictions_csv(&preds, &labels, &dir.join("predictions.csv"))?;

    let bt = run_backtest(&preds, &prepared.panel, &plan.backtest)?;
    write_portfolio_csv(&bt.days, dir.join("portfolio.csv"))?;

    let record = RunRecord {
        split: split.index,
        spec,
        checkpoint: format!("runs/{}/{}/model.json", method.name(), split.index),
        n_train,
        n_val,
        n_test: test.len(),
        accuracy,
        f1,
        epochs,
        dates: bt.dates(),
        net: bt.net_returns(),
        gross: bt.gross_returns(),
        benchmark: bt.benchmark,
    };
    write_atomic(&dir.join("record.json"), &serde_json::to_string(&record)?)?;
    Ok(record)
}

pub fn read_record(path: &Path) -> Result<RunRecord> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Runs every pending pair, then assembles and writes the summary.
pub fn run(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let methods = plan.methods()?;
    let panel = plan.data.load(plan.seed)?;
    let splits = make_splits(panel.n_days(), &plan.splits)?;
    info!(
        "{} stocks x {} days, {} splits, specs {:?}",
        panel.n_stocks(),
        panel.n_days(),
        splits.len(),
        plan.spec_names()
    );
    fs::create_dir_all(&plan.output).map_err(|e| Error::io(&plan.output, e))?;

    let pairs: Vec<(&Split, &Method)> = splits.iter().flat_map(|s| methods.iter().map(move |m| (s, m))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let outcomes: Vec<std::result::Result<RunRecord, Failure>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(split, method)| {
                let spec = method.name();
                let done = plan.run_dir(&spec, split.index).join("record.json");
                let res = if done.exists() {
                    info!("split {} {spec}: already complete", split.index);
                    read_record(&done)
                } else {
                    info!("split {} {spec}: running", split.index);
                    run_pair(plan, &panel, split, method)
                };
                match res {
                    Ok(r) => {
                        info!("split {} {spec}: accuracy {:.2}%", split.index, r.accuracy);
                        Ok(r)
                    }
                    Err(e) => {
                        warn!("split {} {spec}: failed: {e}", split.index);
                        Err(Failure {
                            split: split.index,
                            spec,
                            error: e.to_string(),
                        })
                    }
                }
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    let summary = assemble(&plan.spec_names(), &records, failures.clone())?;
    write_bundle(&plan.output, &summary, &records)?;
    Ok(ExperimentResult { records, failures, summary })
}

/// Aggregates records into one [`MetricReport`] per spec, in `specs` order.
/// Specs without any completed split are left out.
pub fn assemble(specs: &[String], records: &[RunRecord], failures: Vec<Failure>) -> Result<Summary> {
    let mut rows = Vec::new();
    for spec in specs {
        let mut recs: Vec<&RunRecord> = records.iter().filter(|r| &r.spec == spec).collect();
        if recs.is_empty() {
            continue;
        }
        recs.sort_by_key(|r| r.split);
        let net: Vec<f64> = recs.iter().flat_map(|r| r.net.iter().copied()).collect();
        let bench: Vec<f64> = recs.iter().flat_map(|r| r.benchmark.iter().copied()).collect();
        let ex = excess(&net, &bench)?;
        let accs: Vec<f64> = recs.iter().map(|r| r.accuracy).collect();
        let f1s: Vec<f64> = recs.iter().map(|r| r.f1).collect();
        rows.push(SpecSummary {
            spec: spec.clone(),
            splits: recs.len(),
            report: MetricReport::new(&ex, &accs, &f1s)?,
        });
    }
    Ok(Summary { rows, failures })
}

/// Rows with `none` first, the rest in summary order.
pub fn compare_table(summary: &Summary) -> Vec<&SpecSummary> {
    let mut rows: Vec<&SpecSummary> = summary.rows.iter().filter(|r| r.spec == "none").collect();
    rows.extend(summary.rows.iter().filter(|r| r.spec != "none"));
    rows
}

pub fn table_csv(summary: &Summary) -> String {
    let mut s = String::from("spec,ann_ret_pct,ann_vol_pct,ir,downside_risk_pct,dir,acc_mean,acc_std,f1_mean,f1_std\n");
    for row in compare_table(summary) {
        s.push_str(&row.spec);
        for c in row.report.cells() {
            s.push(',');
            s.push_str(&c);
        }
        s.push('\n');
    }
    s
}

pub fn table_markdown(summary: &Summary) -> String {
    let mut s = format!("| Method | {} |\n", MetricReport::HEADER.join(" | "));
    s.push_str(&format!("|---{}|\n", "|---:".repeat(MetricReport::HEADER.len())));
    for row in compare_table(summary) {
        s.push_str(&format!("| {} | {} |\n", row.spec, row.report.cells().join(" | ")));
    }
    s
}

fn concat_series<'a>(recs: impl Iterator<Item = &'a RunRecord>, pick: fn(&RunRecord) -> &[f64]) -> (Vec<NaiveDate>, Vec<f64>) {
    let mut recs: Vec<&RunRecord> = recs.collect();
    recs.sort_by_key(|r| r.split);
    let dates = recs.iter().flat_map(|r| r.dates.iter().copied()).collect();
    let vals: Vec<f64> = recs.iter().flat_map(|r| pick(r).iter().copied()).collect();
    (dates, vals)
}

/// Writes `summary.json`, the tables and the cumulative-profit curves.
pub fn write_bundle(dir: &Path, summary: &Summary, records: &[RunRecord]) -> Result<()> {
    write_atomic(&dir.join("summary.json"), &serde_json::to_string_pretty(summary)?)?;
    write_atomic(&dir.join("table.csv"), &table_csv(summary))?;
    write_atomic(&dir.join("table.md"), &table_markdown(summary))?;
    for row in &summary.rows {
        let (dates, net) = concat_series(records.iter().filter(|r| r.spec == row.spec), |r| &r.net);
        write_cumprofit_csv(&dates, &cumulative_profit(&net), dir.join(format!("cumprofit_{}.csv", row.spec)))?;
    }
    if let Some(first) = summary.rows.first() {
        let (dates, bench) = concat_series(records.iter().filter(|r| r.spec == first.spec), |r| &r.benchmark);
        write_cumprofit_csv(&dates, &cumulative_profit(&bench), dir.join("cumprofit_benchmark.csv"))?;
    }
    Ok(())
}

/// Reads every `record.json` under `dir/runs`, sorted by (spec, split).
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let runs = dir.join("runs");
    let mut out = Vec::new();
    let Ok(specs) = fs::read_dir(&runs) else { return Ok(out) };
    for spec in specs {
        let spec = spec.map_err(|e| Error::io(&runs, e))?.path();
        for split in fs::read_dir(&spec).map_err(|e| Error::io(&spec, e))? {
            let rec = split.map_err(|e| Error::io(&spec, e))?.path().join("record.json");
            if rec.exists() {
                out.push(read_record(&rec)?);
            }
        }
    }
    out.sort_by(|a, b| a.spec.cmp(&b.spec).then(a.split.cmp(&b.split)));
    Ok(out)
}

/// Rebuilds the summary files from the records on disk.
pub fn report(plan: &ExperimentPlan) -> Result<Summary> {
    let records = load_records(&plan.output)?;
    let summary = assemble(&plan.spec_names(), &records, Vec::new())?;
    if summary.rows.is_empty() {
        return Err(Error::MissingData(format!("no completed runs under {}", plan.output.display())));
    }
    write_bundle(&plan.output, &summary, &records)?;
    Ok(summary)
}

pub fn read_summary(dir: &Path) -> Result<Summary> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Per-split data preparation statistics, as written by `prepare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedStats {
    pub split: usize,
    pub train_days: (usize, usize),
    pub test_days: (usize, usize),
    pub stocks: usize,
    pub train_windows: usize,
    pub test_windows: usize,
    pub positive_fraction: f64,
    pub mu_train: f64,
    pub sigma_train: f64,
    pub skipped: Vec<String>,
}

/// Prepares every split without training and writes `prepared.json`.
pub fn prepare(plan: &ExperimentPlan) -> Result<Vec<PreparedStats>> {
    plan.splits.validate()?;
    let panel = plan.data.load(plan.seed)?;
    let splits = make_splits(panel.n_days(), &plan.splits)?;
    let stats = splits
        .iter()
        .map(|split| {
            let p = prepare_split(&panel, split, &plan.splits, plan.universe)?;
            let pos = p.windows.train.iter().filter(|w| w.label == 1).count();
            Ok(PreparedStats {
                split: split.index,
                train_days: (split.train.start, split.train.end),
                test_days: (split.test.start, split.test.end),
                stocks: p.panel.n_stocks(),
                train_windows: p.windows.train.len(),
                test_windows: p.windows.test.len(),
                positive_fraction: pos as f64 / p.windows.train.len().max(1) as f64,
                mu_train: p.standardizer.mu_train,
                sigma_train: p.standardizer.sigma_train,
                skipped: p.windows.skipped.iter().map(|s| s.stock.clone()).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&plan.output).map_err(|e| Error::io(&plan.output, e))?;
    write_atomic(&plan.output.join("prepared.json"), &serde_json::to_string_pretty(&stats)?)?;
    Ok(stats)
}
