//! Command-line front end. The binary is a one-line wrapper around
//! [`main`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use super::{compare_runs, distance_matrix, gen_levels, level_pair_distance, train, ExperimentConfig, Override};
use crate::agent::checkpoint;
use crate::env::{parse_level, EnvConfig, GridLevel};
use crate::error::{Error, Result};
use crate::eval::{evaluate_policy, read_level_dir, EvalConfig, TestSuite};
use crate::levelgen::GeneratorConfig;
use crate::ot::DistanceConfig;

#[derive(Debug, Parser)]
#[command(name = "diplr", version, about = "Diversity-aware level replay on a gridworld")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a student under one teacher strategy.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a test suite; prints a per-level CSV.
    Evaluate(EvaluateArgs),
    /// Aggregate the final evaluations of several run directories.
    Compare(CompareArgs),
    /// Distance between two levels under a policy, or a pairwise matrix.
    Distance(DistanceArgs),
    /// Write random levels to a directory.
    GenLevels(GenLevelsArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub total_updates: Option<u64>,
    /// Run directory (overrides run.out_dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Any config field, as section.key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// `standard` or a directory of level files.
    #[arg(long, default_value = "standard")]
    pub suite: String,
    #[arg(long, default_value_t = 10)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample actions instead of acting greedily.
    #[arg(long)]
    pub stochastic: bool,
    /// Experiment config supplying the environment settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Pool runs of the same strategy into one row.
    #[arg(long)]
    pub by_algorithm: bool,
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub target: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Two level files.
    pub levels: Vec<PathBuf>,
    #[arg(long)]
    pub policy: PathBuf,
    /// Directory of level files; prints the pairwise matrix as CSV.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub max_samples: usize,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenLevelsArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 15)]
    pub block_budget: usize,
    #[arg(long, default_value_t = 9)]
    pub width: usize,
    #[arg(long, default_value_t = 9)]
    pub height: usize,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Distance(a) => cmd_distance(a),
        Command::GenLevels(a) => cmd_gen_levels(a),
    }
}

/// Collects CLI overrides in precedence order: `--set` first, then the
/// dedicated flags.
pub fn train_config(args: &TrainArgs) -> Result<ExperimentConfig> {
    let mut overrides: Vec<Override> = args.set.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    if let Some(s) = &args.strategy {
        overrides.push(Override::new("teacher.strategy", toml::Value::String(s.clone())));
    }
    if let Some(r) = args.rho {
        overrides.push(Override::new("teacher.rho", toml::Value::Float(r)));
    }
    if let Some(s) = args.seed {
        overrides.push(Override::new("run.seed", toml::Value::Integer(to_toml_int(s, "run.seed")?)));
    }
    if let Some(n) = args.total_updates {
        overrides.push(Override::new("run.total_updates", toml::Value::Integer(to_toml_int(n, "run.total_updates")?)));
    }
    if let Some(out) = &args.out {
        overrides.push(Override::new("run.out_dir", toml::Value::String(out.display().to_string())));
    }
    match &args.config {
        Some(path) => ExperimentConfig::load(path, &overrides),
        None => ExperimentConfig::from_toml("", &overrides),
    }
}

fn to_toml_int(v: u64, field: &str) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::config(field, "too large"))
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = train_config(&args)?;
    let out = cfg
        .run
        .out_dir
        .clone()
        .ok_or_else(|| Error::config("run.out_dir", "missing required field (or pass --out)"))?;
    let summary = train(&cfg, &out)?;
    println!(
        "trained {} updates ({} env steps); final checkpoint {}",
        summary.updates,
        summary.env_steps,
        summary.final_checkpoint.display()
    );
    Ok(())
}

fn env_from(config: Option<&Path>) -> Result<EnvConfig> {
    match config {
        Some(p) => Ok(ExperimentConfig::load(p, &[])?.env),
        None => Ok(EnvConfig::default()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let env = env_from(args.config.as_deref())?;
    let policy = checkpoint::load(&args.checkpoint)?;
    let suite = TestSuite::resolve(&args.suite)?;
    let cfg = EvalConfig {
        n_episodes: args.episodes,
        stochastic: args.stochastic,
        ..EvalConfig::default()
    };
    let rec = evaluate_policy(&policy, &suite, &cfg, &env, args.seed)?;
    let mut text = String::from("level,seed,solved_rate,mean_return\n");
    for l in &rec.levels {
        text.push_str(&format!("{},{},{},{}\n", l.level, rec.seed, l.solved_rate, l.mean_return));
    }
    emit(args.out.as_deref(), &text)
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let rows = compare_runs(&args.runs, args.by_algorithm, args.lo, args.hi, args.target)?;
    let mut text = String::from("run,algorithm,runs,iqm,optimality_gap\n");
    for r in rows {
        text.push_str(&format!("{},{},{},{},{}\n", r.label, r.algorithm, r.runs, r.iqm, r.optimality_gap));
    }
    emit(args.out.as_deref(), &text)
}

fn read_level(path: &Path) -> Result<GridLevel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_level(&text).map_err(|e| Error::InvalidLevel(format!("{}: {e}", path.display())))
}

fn cmd_distance(args: DistanceArgs) -> Result<()> {
    let env = env_from(args.config.as_deref())?;
    let policy = checkpoint::load(&args.policy)?;
    let dist = DistanceConfig {
        max_samples: args.max_samples,
        ..DistanceConfig::default()
    };
    dist.validate()?;
    if let Some(dir) = &args.matrix {
        let files = read_level_dir(dir)?;
        let levels: Vec<GridLevel> = files.iter().map(|(_, l)| l.clone()).collect();
        let m = distance_matrix(&levels, &policy, &env, args.episodes, &dist, args.seed)?;
        let names: Vec<String> = files
            .iter()
            .map(|(p, _)| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect();
        let mut text = format!("level,{}\n", names.join(","));
        for (name, row) in names.iter().zip(&m) {
            let cells: Vec<String> = row.iter().map(|d| d.to_string()).collect();
            text.push_str(&format!("{name},{}\n", cells.join(",")));
        }
        return emit(None, &text);
    }
    let [a, b] = args.levels.as_slice() else {
        return Err(Error::InvalidArgument(
            "distance needs exactly two level files, or --matrix DIR".into(),
        ));
    };
    let d = level_pair_distance(&read_level(a)?, &read_level(b)?, &policy, &env, args.episodes, &dist, args.seed)?;
    println!("{d}");
    Ok(())
}

fn cmd_gen_levels(args: GenLevelsArgs) -> Result<()> {
    let generator = GeneratorConfig {
        block_budget: args.block_budget,
        width: args.width,
        height: args.height,
        seed: args.seed,
    };
    let paths = gen_levels(&generator, args.count, &args.out)?;
    println!("wrote {} levels to {}", paths.len(), args.out.display());
    Ok(())
}
