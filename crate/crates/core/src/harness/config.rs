use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{GaeConfig, PolicyConfig, PpoConfig};
use crate::curriculum::{TeacherConfig, TrainingSetup};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::levelgen::GeneratorConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Training budget in PPO updates of the student.
    pub total_updates: u64,
    /// Checkpoint, buffer snapshot, evaluation and distance probe period in
    /// PPO updates (0 disables periodic work; a final checkpoint is always
    /// written).
    #[serde(default = "default_eval_every")]
    pub eval_every: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_eval_every() -> u64 {
    100
}

/// A full experiment. `[run]` is required; every other section falls back
/// to defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub student: PolicyConfig,
    #[serde(default)]
    pub ppo: PpoConfig,
    #[serde(default)]
    pub gae: GaeConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub teacher: TeacherConfig,
}

impl ExperimentConfig {
    /// Defaults everywhere except the required run fields.
    pub fn new(seed: u64, total_updates: u64) -> Self {
        ExperimentConfig {
            run: RunConfig {
                seed,
                total_updates,
                eval_every: default_eval_every(),
                out_dir: None,
            },
            env: EnvConfig::default(),
            generator: GeneratorConfig::default(),
            student: PolicyConfig::default(),
            ppo: PpoConfig::default(),
            gae: GaeConfig::default(),
            eval: EvalConfig::default(),
            teacher: TeacherConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.total_updates == 0 {
            return Err(Error::config("run.total_updates", "must be at least 1"));
        }
        if (self.generator.width, self.generator.height) != (self.env.width, self.env.height) {
            return Err(Error::config(
                "generator.width",
                "generator grid size must match env.width and env.height",
            ));
        }
        self.eval.validate()?;
        self.setup().validate()
    }

    pub fn setup(&self) -> TrainingSetup {
        TrainingSetup {
            teacher: self.teacher.clone(),
            env: self.env.clone(),
            generator: self.generator.clone(),
            ppo: self.ppo.clone(),
            gae: self.gae,
            student: self.student.clone(),
            probe_every: self.run.eval_every,
        }
    }

    /// Parses TOML text, applies `section.key=value` overrides, then
    /// validates.
    pub fn from_toml(text: &str, overrides: &[Override]) -> Result<Self> {
        let mut value: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            o.apply(&mut value)?;
        }
        let cfg: ExperimentConfig = toml::Value::Table(value)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[Override]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::from_toml(&text, overrides)
    }

    /// Fully resolved TOML, defaults included.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A `section.key=value` assignment. Values are read as TOML literals, with
/// bare words taken as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: toml::Value,
}

impl Override {
    pub fn new(path: &str, value: toml::Value) -> Self {
        Override {
            path: path.split('.').map(str::to_string).collect(),
            value,
        }
    }

    pub fn apply(&self, root: &mut toml::Table) -> Result<()> {
        let (last, parents) = self
            .path
            .split_last()
            .ok_or_else(|| Error::Config("empty override key".into()))?;
        let mut table = root;
        for key in parents {
            let entry = table
                .entry(key.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| Error::config(&self.path.join("."), "override walks through a non-table value"))?;
        }
        table.insert(last.clone(), self.value.clone());
        Ok(())
    }
}

impl std::str::FromStr for Override {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{s}` is not of the form section.key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(Error::Config(format!("bad override key `{key}`")));
        }
        let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        Ok(Override::new(key, value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[run]\nseed = 3\ntotal_updates = 10\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL, &[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::new(3, 10));
    }

    #[test]
    fn missing_field_is_named() {
        let err = ExperimentConfig::from_toml("[run]\nseed = 3\n", &[]).unwrap_err();
        assert!(err.to_string().contains("total_updates"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = format!("{MINIMAL}[teacher]\nrhoo = 0.1\n");
        let err = ExperimentConfig::from_toml(&text, &[]).unwrap_err();
        assert!(err.to_string().contains("rhoo"), "{err}");
    }

    #[test]
    fn overrides_win() {
        let o: Vec<Override> = ["teacher.strategy=plr", "teacher.rho=0.25", "teacher.distance.max_samples=8"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let cfg = ExperimentConfig::from_toml(MINIMAL, &o).unwrap();
        assert_eq!(cfg.teacher.strategy, crate::curriculum::Strategy::Plr);
        assert_eq!(cfg.teacher.rho, 0.25);
        assert_eq!(cfg.teacher.distance.max_samples, 8);
    }

    #[test]
    fn resolved_toml_round_trips() {
        let mut cfg = ExperimentConfig::new(1, 2);
        cfg.teacher.distance.sinkhorn_relative_epsilon = Some(0.05);
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text, &[]).unwrap(), cfg);
    }

    #[test]
    fn invalid_value_names_field() {
        let err = ExperimentConfig::from_toml(MINIMAL, &["teacher.beta=0".parse().unwrap()]).unwrap_err();
        assert!(err.to_string().contains("teacher.beta"), "{err}");
    }
}
