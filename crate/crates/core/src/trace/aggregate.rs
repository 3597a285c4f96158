use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::trace::metrics::EpisodeMetrics;
use crate::types::{AgentId, BlockId};

/// Cross-episode experiment tables as comma-delimited text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentTables {
    /// Block × episode delivery matrix (1 delivered, 0 not).
    pub completion_matrix: String,
    /// Per-episode env-steps and seconds series.
    pub episode_series: String,
    /// Ordered commitment sequence per agent per episode.
    pub commitment_patterns: String,
}

/// Aggregate per-episode metrics into the experiment tables.
pub fn aggregate_runs(metrics: &[EpisodeMetrics]) -> ExperimentTables {
    let blocks: BTreeSet<BlockId> =
        metrics.iter().flat_map(|m| m.blocks.keys().copied()).collect();
    let agents: BTreeSet<AgentId> =
        metrics.iter().flat_map(|m| m.commitments.keys().copied()).collect();

    let mut completion = String::from("block");
    for m in metrics {
        let _ = write!(completion, ",episode_{}", m.episode);
    }
    completion.push('\n');
    for block in &blocks {
        let _ = write!(completion, "{block}");
        for m in metrics {
            let delivered = m.blocks.get(block).map(|b| u8::from(b.done)).unwrap_or(0);
            let _ = write!(completion, ",{delivered}");
        }
        completion.push('\n');
    }

    let mut series = String::from("episode,env_steps,seconds\n");
    for m in metrics {
        let _ = writeln!(series, "{},{},{}", m.episode, m.env_steps, m.seconds);
    }

    let mut patterns = String::from("episode,agent,commitments\n");
    for m in metrics {
        for agent in &agents {
            let sequence = m
                .commitments
                .get(agent)
                .map(|tasks| {
                    tasks.iter().map(ToString::to_string).collect::<Vec<_>>().join("|")
                })
                .unwrap_or_default();
            let _ = writeln!(patterns, "{},{agent},{sequence}", m.episode);
        }
    }

    ExperimentTables {
        completion_matrix: completion,
        episode_series: series,
        commitment_patterns: patterns,
    }
}
