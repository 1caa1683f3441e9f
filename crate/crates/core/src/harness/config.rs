use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::agents::{Algorithm, DdpgConfig, DdqnConfig};
use crate::behaviors::{BehaviorParams, StrategyId};
use crate::env::EnvConfig;
use crate::sim::{FieldGeometry, PhysicsParams, Simulator};

/// Starting point that explicit keys in a config file override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 60 s episodes, 300 training episodes, 30 evaluation matches.
    #[default]
    Desk,
    /// Five-minute episodes.
    Full,
}

/// Learner settings shared by both algorithms, plus each algorithm's own table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSettings {
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Transitions in the buffer before the first learner step.
    pub warmup: usize,
    pub ddqn: DdqnConfig,
    pub ddpg: DdpgConfig,
}

impl Default for AgentSettings {
    fn default() -> Self {
        Self {
            replay_capacity: 100_000,
            batch_size: 64,
            warmup: 1_000,
            ddqn: DdqnConfig::default(),
            ddpg: DdpgConfig::default(),
        }
    }
}

/// Everything that determines a training run. Every key is optional in the
/// TOML form; missing keys take the preset's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Preset,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub episodes: usize,
    /// Opponent formations; each episode draws one uniformly.
    pub opponents: Vec<StrategyId>,
    /// Episodes between periodic checkpoints; 0 keeps only the final one.
    pub checkpoint_every: usize,
    pub evaluation_matches: usize,
    pub field: FieldGeometry,
    pub physics: PhysicsParams,
    pub behavior: BehaviorParams,
    pub env: EnvConfig,
    pub agent: AgentSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Desk,
            algorithm: Algorithm::Ddqn,
            seed: 0,
            episodes: 300,
            opponents: StrategyId::ALL.to_vec(),
            checkpoint_every: 50,
            evaluation_matches: 30,
            field: FieldGeometry::default(),
            physics: PhysicsParams::default(),
            behavior: BehaviorParams::default(),
            env: EnvConfig::default(),
            agent: AgentSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut config = RunConfig {
            preset,
            ..RunConfig::default()
        };
        if preset == Preset::Full {
            config.env.episode_seconds = 300.0;
        }
        config
    }

    /// Parses a TOML document, filling absent keys from its `preset`.
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        let preset = match user.get("preset") {
            None => Preset::Desk,
            Some(v) => v
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| HarnessError::Config(format!("preset: {e}")))?,
        };
        let mut merged = toml::Table::try_from(RunConfig::preset(preset))
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        merge(&mut merged, user);
        let config: RunConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialise")
    }

    /// Hex SHA-256 of the resolved config's TOML form.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn simulator(&self) -> Simulator {
        Simulator::new(self.field.clone(), self.physics.clone())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.opponents.is_empty() {
            return fail("opponents must name at least one formation".into());
        }
        if self.episodes == 0 {
            return fail("episodes must be at least 1".into());
        }
        if self.evaluation_matches == 0 {
            return fail("evaluation_matches must be at least 1".into());
        }
        let a = &self.agent;
        if a.replay_capacity == 0 || a.batch_size == 0 {
            return fail("agent.replay_capacity and agent.batch_size must be at least 1".into());
        }
        let checks = [
            self.field.validate(),
            self.physics.validate(),
            self.behavior.validate(),
            self.env.validate(),
            a.ddqn.validate(),
            a.ddpg.validate(),
        ];
        for check in checks {
            check.map_err(HarnessError::Config)?;
        }
        if self.env.episode_seconds < self.physics.dt {
            return fail("episode must last at least one physics tick".into());
        }
        Ok(())
    }
}

/// Recursively overlays `user` onto `base`; tables merge, other values replace.
fn merge(base: &mut toml::Table, user: toml::Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
