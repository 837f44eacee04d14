use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ExperimentConfig, RunManifest, RunStatus, SeedStreams, Stream};
use crate::agent::{checkpoint, collect, occupancy_samples, GaeConfig, PolicyParams, RolloutBudget, RolloutMode};
use crate::curriculum::{LevelBuffer, Trainer};
use crate::env::{serialize_level, EnvConfig, GridLevel, LEVEL_EXTENSION};
use crate::error::{Error, Result};
use crate::eval::{evaluate_policy, AggregateReport, LevelResult, RunRecord, TestSuite};
use crate::levelgen::{random_level, GeneratorConfig};
use crate::ot::{level_distance, DistanceConfig};

pub const LOG_FILE: &str = "log.jsonl";
pub const EVAL_FILE: &str = "eval.csv";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub updates: u64,
    pub env_steps: u64,
    pub final_checkpoint: PathBuf,
    pub final_eval: Option<RunRecord>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Trains per `cfg`, writing the manifest, resolved config, JSONL log,
/// checkpoints, buffer snapshots and evaluation CSV under `out`.
pub fn train(cfg: &ExperimentConfig, out: &Path) -> Result<TrainSummary> {
    cfg.validate()?;
    create_dir(&out.join("checkpoints"))?;
    write_file(&out.join(CONFIG_FILE), &cfg.to_toml()?)?;
    let mut manifest = RunManifest::new(cfg.clone());
    manifest.write(out)?;
    match train_inner(cfg, out, &mut manifest) {
        Ok(summary) => {
            manifest.status = RunStatus::Completed;
            manifest.finished_unix = Some(super::manifest::unix_now());
            manifest.write(out)?;
            Ok(summary)
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
            manifest.finished_unix = Some(super::manifest::unix_now());
            manifest.write(out)?;
            Err(e)
        }
    }
}

fn train_inner(cfg: &ExperimentConfig, out: &Path, manifest: &mut RunManifest) -> Result<TrainSummary> {
    let suite = cfg.eval.suite.as_deref().map(TestSuite::resolve).transpose()?;
    let eval_seed = SeedStreams::new(cfg.run.seed).seed(Stream::Eval);
    let mut trainer = Trainer::new(cfg.setup(), cfg.run.seed)?;
    let log_path = out.join(LOG_FILE);
    let mut log = File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let mut evals: Vec<(u64, RunRecord)> = Vec::new();
    let every = cfg.run.eval_every;

    while trainer.policy_updates() < cfg.run.total_updates {
        for record in trainer.step_update()? {
            let mut line = serde_json::to_string(&record)?;
            line.push('\n');
            log.write_all(line.as_bytes()).map_err(|e| Error::io(&log_path, e))?;
        }
        let u = trainer.policy_updates();
        if every > 0 && u % every == 0 {
            let name = format!("checkpoints/update_{u:06}.ckpt");
            checkpoint::save(trainer.policy(), &out.join(&name))?;
            manifest.checkpoints.push(name);
            manifest.write(out)?;
            if trainer.setup().teacher.strategy.uses_buffer() {
                snapshot_buffer(trainer.buffer(), &out.join(format!("buffer/update_{u:06}")), u)?;
            }
            if let Some(suite) = &suite {
                evals.push((u, evaluate_policy(trainer.policy(), suite, &cfg.eval, &cfg.env, eval_seed)?));
                write_eval_csv(&out.join(EVAL_FILE), &evals)?;
            }
        }
    }
    log.flush().map_err(|e| Error::io(&log_path, e))?;

    let name = "checkpoints/final.ckpt".to_string();
    let final_checkpoint = out.join(&name);
    checkpoint::save(trainer.policy(), &final_checkpoint)?;
    manifest.checkpoints.push(name);
    let mut final_eval = None;
    if let Some(suite) = &suite {
        let u = trainer.policy_updates();
        if evals.last().map(|(k, _)| *k) != Some(u) {
            evals.push((u, evaluate_policy(trainer.policy(), suite, &cfg.eval, &cfg.env, eval_seed)?));
            write_eval_csv(&out.join(EVAL_FILE), &evals)?;
        }
        final_eval = evals.last().map(|(_, r)| r.clone());
    }
    Ok(TrainSummary {
        updates: trainer.policy_updates(),
        env_steps: trainer.env_steps(),
        final_checkpoint,
        final_eval,
    })
}

fn snapshot_buffer(buffer: &LevelBuffer, dir: &Path, now: u64) -> Result<()> {
    create_dir(dir)?;
    let mut scores = String::from("level_id,regret,distance,staleness,episode_count,mean_return\n");
    for e in buffer.entries() {
        let label = e.label();
        write_file(&dir.join(format!("{label}.{LEVEL_EXTENSION}")), &serialize_level(&e.level))?;
        scores.push_str(&format!(
            "{label},{},{},{},{},{}\n",
            e.regret_score,
            e.distance_score,
            now.saturating_sub(e.last_scored_at),
            e.episode_count,
            e.mean_return
        ));
    }
    write_file(&dir.join("scores.csv"), &scores)
}

const EVAL_HEADER: &str = "update,level,seed,solved_rate,mean_return";

pub fn write_eval_csv(path: &Path, evals: &[(u64, RunRecord)]) -> Result<()> {
    let mut text = format!("{EVAL_HEADER}\n");
    for (u, rec) in evals {
        for l in &rec.levels {
            text.push_str(&format!("{u},{},{},{},{}\n", l.level, rec.seed, l.solved_rate, l.mean_return));
        }
    }
    write_file(path, &text)
}

/// Reads an evaluation CSV back, grouped by update.
pub fn read_eval_csv(path: &Path) -> Result<Vec<(u64, RunRecord)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |n: usize, what: &str| Error::InvalidArgument(format!("{}:{}: {what}", path.display(), n + 1));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == EVAL_HEADER => {}
        _ => return Err(bad(0, "missing evaluation header")),
    }
    let mut grouped: BTreeMap<u64, RunRecord> = BTreeMap::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(n, "expected 5 fields"));
        }
        let update: u64 = f[0].parse().map_err(|_| bad(n, "bad update"))?;
        let seed: u64 = f[2].parse().map_err(|_| bad(n, "bad seed"))?;
        let solved_rate: f64 = f[3].parse().map_err(|_| bad(n, "bad solved rate"))?;
        let mean_return: f64 = f[4].parse().map_err(|_| bad(n, "bad mean return"))?;
        grouped
            .entry(update)
            .or_insert_with(|| RunRecord {
                seed,
                levels: Vec::new(),
            })
            .levels
            .push(LevelResult {
                level: f[1].to_string(),
                solved_rate,
                mean_return,
            });
    }
    Ok(grouped.into_iter().collect())
}

/// Writes `count` random levels as `level_0000.lvl`, ... into `out`.
pub fn gen_levels(generator: &GeneratorConfig, count: usize, out: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(generator.seed);
    (0..count)
        .map(|i| {
            let level = random_level(generator, &mut rng)?;
            let path = out.join(format!("level_{i:04}.{LEVEL_EXTENSION}"));
            write_file(&path, &serialize_level(&level))?;
            Ok(path)
        })
        .collect()
}

fn level_samples(
    policy: &PolicyParams,
    level: &GridLevel,
    env_cfg: &EnvConfig,
    episodes: usize,
    seed: u64,
) -> Result<crate::ot::SampleSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch = collect(
        policy,
        level,
        "",
        env_cfg,
        &GaeConfig::default(),
        RolloutBudget::Episodes(episodes),
        RolloutMode::Score,
        &mut rng,
    )?;
    occupancy_samples(&batch)
}

/// Distance between two levels under `policy`, from `episodes` scoring
/// rollouts on each.
pub fn level_pair_distance(
    a: &GridLevel,
    b: &GridLevel,
    policy: &PolicyParams,
    env_cfg: &EnvConfig,
    episodes: usize,
    dist: &DistanceConfig,
    seed: u64,
) -> Result<f64> {
    let sa = level_samples(policy, a, env_cfg, episodes, seed)?;
    let sb = level_samples(policy, b, env_cfg, episodes, seed)?;
    level_distance(&sa, &sb, dist)
}

/// Pairwise distance matrix over `levels`.
pub fn distance_matrix(
    levels: &[GridLevel],
    policy: &PolicyParams,
    env_cfg: &EnvConfig,
    episodes: usize,
    dist: &DistanceConfig,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let samples: Vec<_> = levels
        .iter()
        .map(|l| level_samples(policy, l, env_cfg, episodes, seed))
        .collect::<Result<_>>()?;
    let n = levels.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = level_distance(&samples[i], &samples[j], dist)?;
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    /// Run directory, or the algorithm name when pooling.
    pub label: String,
    pub algorithm: String,
    pub runs: usize,
    pub iqm: f64,
    pub optimality_gap: f64,
}

/// Aggregates the last evaluation of each run directory, one row per run
/// or, with `by_algorithm`, one row per strategy.
pub fn compare_runs(dirs: &[PathBuf], by_algorithm: bool, lo: f64, hi: f64, target: f64) -> Result<Vec<ComparisonRow>> {
    let mut runs: Vec<(String, String, RunRecord)> = Vec::new();
    for dir in dirs {
        let manifest = RunManifest::read(dir)?;
        let evals = read_eval_csv(&dir.join(EVAL_FILE))?;
        let (_, last) = evals
            .into_iter()
            .last()
            .ok_or_else(|| Error::InvalidArgument(format!("{}: no evaluation rows", dir.display())))?;
        runs.push((dir.display().to_string(), manifest.config.teacher.strategy.to_string(), last));
    }
    if !by_algorithm {
        return runs
            .into_iter()
            .map(|(label, algorithm, rec)| {
                let rep = AggregateReport::from_runs(&algorithm, std::slice::from_ref(&rec), lo, hi, target)?;
                Ok(ComparisonRow {
                    label,
                    algorithm,
                    runs: 1,
                    iqm: rep.iqm,
                    optimality_gap: rep.optimality_gap,
                })
            })
            .collect();
    }
    let mut groups: BTreeMap<String, Vec<RunRecord>> = BTreeMap::new();
    for (_, algorithm, rec) in runs {
        groups.entry(algorithm).or_default().push(rec);
    }
    groups
        .into_iter()
        .map(|(algorithm, recs)| {
            let rep = AggregateReport::from_runs(&algorithm, &recs, lo, hi, target)?;
            Ok(ComparisonRow {
                label: algorithm.clone(),
                algorithm,
                runs: recs.len(),
                iqm: rep.iqm,
                optimality_gap: rep.optimality_gap,
            })
        })
        .collect()
}
