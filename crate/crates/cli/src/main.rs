use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgGroup, Parser, Subcommand};
use rola_core::oracle::{describe_instance, INSTANCES};
use rola_core::presets::{preset, presets};
use rola_core::trainer::{evaluate_checkpoint, export_runs, run_experiment, ExperimentConfig, RunOptions};
use rola_core::Error;

/// Environment variable naming the default output root for `train`.
const OUT_ROOT_VAR: &str = "ROLA_OUT_ROOT";

#[derive(Parser, Debug)]
#[command(name = "rola", version, about = "Multi-agent actor-critic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train from a config file or a named preset.
    #[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Override a config key, applied after the file or preset.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory. Defaults to `$ROLA_OUT_ROOT/<name>` or `runs/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        overwrite: bool,
    },
    /// Evaluate a checkpoint's actors and print the mean discounted return.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        episodes: usize,
    },
    /// Print exact values for a small named instance.
    Oracle {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(INSTANCES))]
        instance: String,
        #[arg(long, default_value_t = 0.99)]
        gamma: f64,
    },
    /// Merge run directories into one long-format CSV.
    Export {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List shipped presets.
    Presets {
        /// Print one preset as a config file.
        #[arg(long)]
        show: Option<String>,
    },
}

/// Usage errors exit 2, runtime failures exit 1.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Train {
            config,
            preset: name,
            overrides,
            out,
            trials,
            jobs,
            overwrite,
        } => {
            let (base, label) = match (config, name) {
                (Some(path), _) => {
                    let cfg = ExperimentConfig::from_file(&path).map_err(usage)?;
                    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
                    (cfg, stem.unwrap_or_else(|| "run".into()))
                }
                (None, Some(name)) => (preset(&name).map_err(usage)?, name),
                (None, None) => unreachable!("clap requires a source"),
            };
            let mut overrides = overrides;
            if let Some(n) = trials {
                overrides.push(format!("trials={n}"));
            }
            let cfg = base.with_overrides(&overrides).map_err(usage)?;
            cfg.validate().map_err(usage)?;
            let out = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| default_root().join(&label));
            train(&cfg, &out, RunOptions { jobs, overwrite })
        }
        Command::Eval { checkpoint, episodes } => {
            let mean = evaluate_checkpoint(&checkpoint, episodes)
                .with_context(|| format!("evaluating {}", checkpoint.display()))?;
            println!("{mean}");
            Ok(())
        }
        Command::Oracle { instance, gamma } => {
            print!("{}", describe_instance(&instance, gamma).map_err(usage)?);
            Ok(())
        }
        Command::Export { runs, output } => export(&runs, output.as_deref()),
        Command::Presets { show } => {
            match show {
                Some(name) => print!("{}", preset(&name).map_err(usage)?.to_toml().map_err(usage)?),
                None => {
                    for p in presets() {
                        println!("{}", p.name);
                    }
                }
            }
            Ok(())
        }
    }
}

fn default_root() -> PathBuf {
    std::env::var_os(OUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn train(cfg: &ExperimentConfig, out: &Path, opts: RunOptions) -> Result<(), Failure> {
    eprintln!(
        "training {} on {} for {} episodes x {} trials -> {}",
        cfg.algorithm.as_str(),
        cfg.env.as_str(),
        cfg.training_episodes,
        cfg.trials,
        out.display()
    );
    let summary = match run_experiment(cfg, out, opts) {
        Ok(s) => s,
        Err(e @ Error::OutputExists(_)) => return Err(usage(e)),
        Err(e) => return Err(Failure::Runtime(anyhow::Error::new(e).context("training failed"))),
    };
    match summary.aggregate.last() {
        Some(last) => println!(
            "episode {}: mean {:.4} (95% CI {:.4} .. {:.4})",
            last.episode, last.mean, last.ci_low, last.ci_high
        ),
        None => println!("no evaluation checkpoints"),
    }
    Ok(())
}

fn export(runs: &[PathBuf], output: Option<&Path>) -> Result<(), Failure> {
    let (rows, warnings) = export_runs(runs);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let sink: Box<dyn Write> = match output {
        Some(path) => Box::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row).context("writing export")?;
    }
    w.flush().context("writing export")?;
    Ok(())
}
