use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::run::{run_trial_with, MetricsRow, TrialSink};
use super::ExperimentConfig;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const SMOOTHING_WINDOW: usize = 10;
const Z_95: f64 = 1.96;

pub fn trial_csv_name(trial: usize) -> String {
    format!("trial_{trial:03}.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub episode: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub smoothed_mean: f64,
}

/// Per-checkpoint mean, normal-approximation 95% interval
/// (`mean +- 1.96 * sd / sqrt(trials)`, sample sd) and a trailing moving
/// average of the mean over `SMOOTHING_WINDOW` checkpoints.
///
/// `series[k]` holds trial `k`'s `(episode, value)` pairs; trials must share
/// checkpoint episodes.
pub fn aggregate(series: &[Vec<(usize, f64)>]) -> Result<Vec<AggregateRow>> {
    let Some(first) = series.first() else {
        return Err(Error::Contract("aggregate needs at least one trial".into()));
    };
    let n = series.len() as f64;
    let mut out: Vec<AggregateRow> = Vec::with_capacity(first.len());
    for (k, &(episode, _)) in first.iter().enumerate() {
        let mut vals = Vec::with_capacity(series.len());
        for s in series {
            match s.get(k) {
                Some(&(e, v)) if e == episode => vals.push(v),
                _ => {
                    return Err(Error::Contract(format!(
                        "trials disagree on checkpoint {k} (episode {episode})"
                    )))
                }
            }
        }
        let mean = vals.iter().sum::<f64>() / n;
        let sd = if vals.len() > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let half = Z_95 * sd / n.sqrt();
        let lo = k.saturating_sub(SMOOTHING_WINDOW - 1);
        let window: Vec<f64> = out[lo..].iter().map(|r| r.mean).chain([mean]).collect();
        let smoothed_mean = window.iter().sum::<f64>() / window.len() as f64;
        out.push(AggregateRow {
            episode,
            mean,
            ci_low: mean - half,
            ci_high: mean + half,
            smoothed_mean,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub wall_time_secs: f64,
    pub checkpoints: usize,
}

/// Structured record of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub code_version: String,
    pub algorithm: String,
    pub env: String,
    pub gamma: f64,
    pub base_seed: u64,
    pub trials: Vec<TrialRecord>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Trials executed concurrently.
    pub jobs: usize,
    pub overwrite: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { jobs: 1, overwrite: false }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub out_dir: PathBuf,
    pub trials: Vec<Vec<MetricsRow>>,
    pub aggregate: Vec<AggregateRow>,
}

fn prepare_out_dir(out: &Path, overwrite: bool) -> Result<()> {
    if out.exists() {
        let occupied = std::fs::read_dir(out)?.next().is_some();
        if occupied {
            if !overwrite {
                return Err(Error::OutputExists(out.to_path_buf()));
            }
            if !out.join(MANIFEST_FILE).exists() {
                return Err(Error::Config(format!(
                    "refusing to overwrite {}: not a run directory",
                    out.display()
                )));
            }
            std::fs::remove_dir_all(out)?;
        }
    }
    std::fs::create_dir_all(out)?;
    Ok(())
}

/// Runs `cfg.trials` trials with seeds `cfg.seed + k`, writing one metrics
/// CSV per trial, an aggregate CSV and a manifest under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, opts: RunOptions) -> Result<ExperimentSummary> {
    cfg.validate()?;
    prepare_out_dir(out, opts.overwrite)?;
    let n = cfg.trials;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<(Vec<MetricsRow>, f64)>>>> = Mutex::new((0..n).map(|_| None).collect());
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::SeqCst);
        if k >= n {
            break;
        }
        let sink = TrialSink {
            metrics_csv: out.join(trial_csv_name(k)),
            checkpoint_dir: out.join("checkpoints").join(format!("trial_{k:03}")),
        };
        let started = Instant::now();
        let r = run_trial_with(cfg, k, cfg.seed + k as u64, Some(&sink), true)
            .map(|o| (o.rows, started.elapsed().as_secs_f64()));
        results.lock().expect("results lock")[k] = Some(r);
    };
    std::thread::scope(|s| {
        for _ in 0..opts.jobs.clamp(1, n) {
            s.spawn(worker);
        }
    });
    let mut trials = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n);
    for (k, r) in results.into_inner().expect("results lock").into_iter().enumerate() {
        let (rows, secs) = r.expect("every trial ran")?;
        records.push(TrialRecord {
            trial: k,
            seed: cfg.seed + k as u64,
            wall_time_secs: secs,
            checkpoints: rows.len(),
        });
        trials.push(rows);
    }
    let series: Vec<Vec<(usize, f64)>> = trials
        .iter()
        .map(|rows| rows.iter().map(|r| (r.episode, r.eval_mean_discounted_return)).collect())
        .collect();
    let agg = aggregate(&series)?;
    let mut w = csv::Writer::from_path(out.join(AGGREGATE_FILE))?;
    for row in &agg {
        w.serialize(row)?;
    }
    w.flush()?;
    let manifest = Manifest {
        code_version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
        algorithm: cfg.algorithm.as_str().to_string(),
        env: cfg.env.as_str().to_string(),
        gamma: cfg.gamma,
        base_seed: cfg.seed,
        trials: records,
        config: cfg.clone(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(out.join(MANIFEST_FILE), text)?;
    Ok(ExperimentSummary {
        out_dir: out.to_path_buf(),
        trials,
        aggregate: agg,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRow {
    pub algorithm: String,
    pub episode: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Merges the aggregate CSVs of several run directories into long format.
/// Directories missing a manifest or aggregate are skipped with a warning.
pub fn export_runs(dirs: &[PathBuf]) -> (Vec<ExportRow>, Vec<String>) {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for dir in dirs {
        let manifest = match Manifest::load(dir) {
            Ok(m) => m,
            Err(e) => {
                warnings.push(format!("skipping {}: no readable manifest ({e})", dir.display()));
                continue;
            }
        };
        let read = || -> Result<Vec<AggregateRow>> {
            let mut r = csv::Reader::from_path(dir.join(AGGREGATE_FILE))?;
            Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
        };
        match read() {
            Ok(agg) => rows.extend(agg.into_iter().map(|a| ExportRow {
                algorithm: manifest.algorithm.clone(),
                episode: a.episode,
                mean: a.mean,
                ci_low: a.ci_low,
                ci_high: a.ci_high,
            })),
            Err(e) => warnings.push(format!("skipping {}: unreadable aggregate ({e})", dir.display())),
        }
    }
    (rows, warnings)
}

/// Reads a trial metrics CSV back.
pub fn read_trial_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Groups rows by episode for quick lookups.
pub fn final_returns(trials: &[Vec<MetricsRow>]) -> BTreeMap<usize, f64> {
    trials
        .iter()
        .filter_map(|rows| rows.last().map(|r| (r.trial, r.eval_mean_discounted_return)))
        .collect()
}
