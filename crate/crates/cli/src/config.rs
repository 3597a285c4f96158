//! Experiment configuration: TOML schema, validation, and policy specs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gridpush_core::controller::{parse_action, DEFAULT_TIMEOUT};
use gridpush_core::env::EnvConfig;
use gridpush_core::types::BlockId;

use crate::llm::LlmEndpointConfig;

/// Environment variable overriding the completion endpoint base URL.
pub const LLM_URL_ENV: &str = "GRIDPUSH_LLM_URL";

/// Default graph snapshot points.
pub const DEFAULT_SNAPSHOT_EPISODES: [u32; 3] = [1, 5, 10];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("CONFIG_INVALID: {0}")]
    Invalid(String),
    #[error("CONFIG_INVALID: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One scripted decision: what to propose/commit in a room, and the plan
/// (canonical action lines) to draft if assigned.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptStepSpec {
    #[serde(default)]
    pub propose: Option<BlockId>,
    #[serde(default)]
    pub rationale: Option<String>,
    #[serde(default)]
    pub commit: Option<BlockId>,
    #[serde(default)]
    pub plan: Option<Vec<String>>,
}

/// What drives one agent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    /// Nearest-block heuristic, no history, no real negotiation.
    Baseline,
    /// Deterministic script, one step per negotiation room.
    Scripted {
        #[serde(default)]
        steps: Vec<ScriptStepSpec>,
    },
    /// External completion endpoint (requires `[llm]`).
    Llm,
}

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub episodes: u32,
    /// One entry per agent, in agent-id order.
    pub agents: Vec<PolicySpec>,
    /// How many plan prototypes to retrieve per task.
    #[serde(default = "default_retrieval_k")]
    pub retrieval_k: usize,
    /// How many instances to retrieve per prototype.
    #[serde(default = "default_retrieval_l")]
    pub retrieval_l: usize,
    /// Seed override; falls back to `env.seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Existing world model to resume from.
    #[serde(default)]
    pub world_model: Option<PathBuf>,
    /// Episodes after which to snapshot the world-model graph.
    #[serde(default = "default_snapshots")]
    pub snapshot_episodes: Vec<u32>,
    #[serde(default)]
    pub llm: Option<LlmEndpointConfig>,
}

fn default_retrieval_k() -> usize {
    3
}

fn default_retrieval_l() -> usize {
    3
}

fn default_snapshots() -> Vec<u32> {
    DEFAULT_SNAPSHOT_EPISODES.to_vec()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let mut config: ExperimentConfig = toml::from_str(text)?;
        config.apply_env_overrides();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Apply process-environment overrides (endpoint URL).
    fn apply_env_overrides(&mut self) {
        if let Ok(url) = std::env::var(LLM_URL_ENV) {
            if let Some(llm) = &mut self.llm {
                llm.base_url = url;
            }
        }
    }

    /// The seed actually used for this experiment.
    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(self.env.seed)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        self.env.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.episodes == 0 {
            return fail("episodes must be at least 1".into());
        }
        if self.agents.len() != self.env.agent_starts.len() {
            return fail(format!(
                "one policy per agent required: {} policies for {} agents",
                self.agents.len(),
                self.env.agent_starts.len()
            ));
        }
        let needs_llm = self.agents.iter().any(|a| matches!(a, PolicySpec::Llm));
        match (&self.llm, needs_llm) {
            (None, true) => return fail("llm policies require an [llm] section".into()),
            (Some(llm), _) => llm.validate().map_err(ConfigError::Invalid)?,
            _ => {}
        }
        for (idx, spec) in self.agents.iter().enumerate() {
            if let PolicySpec::Scripted { steps } = spec {
                for (s, step) in steps.iter().enumerate() {
                    for line in step.plan.iter().flatten() {
                        parse_action(line, DEFAULT_TIMEOUT).map_err(|e| {
                            ConfigError::Invalid(format!(
                                "agent {idx} script step {s}: bad action `{line}`: {e}"
                            ))
                        })?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_toml() -> String {
        r#"
            episodes = 2

            [env]
            width = 10
            height = 6
            goal_band_width = 2
            max_steps = 100
            agent_starts = [{ x = 0, y = 0 }, { x = 0, y = 5 }]

            [[env.blocks]]
            id = 1
            weight = 1
            anchor = { x = 6, y = 1 }

            [[agents]]
            kind = "baseline"

            [[agents]]
            kind = "scripted"
            [[agents.steps]]
            propose = 1
            commit = 1
            plan = ["MoveToBlock(block_1, W)", "Push(block_1, steps=2)"]
        "#
        .to_string()
    }

    #[test]
    fn parses_a_full_config() {
        let config = ExperimentConfig::from_toml_str(&minimal_toml()).unwrap();
        assert_eq!(config.episodes, 2);
        assert_eq!(config.agents.len(), 2);
        assert_eq!(config.retrieval_k, 3, "default K");
        assert_eq!(config.snapshot_episodes, vec![1, 5, 10], "default snapshots");
        match &config.agents[1] {
            PolicySpec::Scripted { steps } => {
                assert_eq!(steps[0].propose, Some(BlockId(1)));
                assert_eq!(steps[0].plan.as_ref().unwrap().len(), 2);
            }
            other => panic!("expected scripted policy, got {other:?}"),
        }
    }

    #[test]
    fn rejects_policy_count_mismatch() {
        let toml = minimal_toml().replace(
            "[[agents]]\n            kind = \"baseline\"\n\n            ",
            "",
        );
        let err = ExperimentConfig::from_toml_str(&toml).unwrap_err();
        assert!(err.to_string().starts_with("CONFIG_INVALID"), "{err}");
    }

    #[test]
    fn rejects_malformed_script_actions() {
        let toml = minimal_toml().replace("Push(block_1, steps=2)", "Shove(block_1)");
        let err = ExperimentConfig::from_toml_str(&toml).unwrap_err();
        assert!(err.to_string().contains("bad action"), "{err}");
    }

    #[test]
    fn rejects_llm_agents_without_endpoint() {
        let toml = minimal_toml().replace("kind = \"baseline\"", "kind = \"llm\"");
        let err = ExperimentConfig::from_toml_str(&toml).unwrap_err();
        assert!(err.to_string().contains("[llm]"), "{err}");
    }

    #[test]
    fn seed_override_wins() {
        let mut config = ExperimentConfig::from_toml_str(&minimal_toml()).unwrap();
        assert_eq!(config.effective_seed(), 0);
        config.seed = Some(99);
        assert_eq!(config.effective_seed(), 99);
    }
}
