use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::controller::{PlanInstance, SymbolicAction};
use crate::types::{BlockId, Tick};
use crate::world_model::stats::{SizeTally, TaskStats, TeamSizeStats};

/// Whether every block was delivered by the time the episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EpisodeOutcome {
    Complete,
    Incomplete,
}

/// One episode of history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeNode {
    /// 1-based episode number; doubles as the node id.
    pub id: u32,
    pub outcome: EpisodeOutcome,
    /// First and last tick covered by the episode.
    pub span: (Tick, Tick),
}

/// One executed plan commitment: an attempt at a task within an episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskNode {
    pub episode: u32,
    pub task: BlockId,
    /// Whether the target block was delivered by the time the plan ended.
    pub outcome: bool,
    pub start: Tick,
    /// None for plans truncated by episode end (no honest duration).
    pub duration: Option<Tick>,
    /// Distinct agents assigned this task while the plan was running.
    pub team_size: u32,
    /// Index into [`WorldModelGraph::prototypes`].
    pub prototype: usize,
    /// Index into [`WorldModelGraph::instances`].
    pub instance: usize,
}

/// An argument-free symbolic action sequence, deduplicated per task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrototypeNode {
    pub task: BlockId,
    /// Ordered action names with all parameters stripped.
    pub key: Vec<String>,
}

/// One fully parameterized plan, with every recorded attempt at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceNode {
    /// Index into [`WorldModelGraph::prototypes`].
    pub prototype: usize,
    pub actions: Vec<SymbolicAction>,
    pub attempts: Vec<AttemptRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub episode: u32,
    pub outcome: bool,
    pub duration: Option<Tick>,
    pub team_size: u32,
}

impl InstanceNode {
    pub fn attempt_count(&self) -> u32 {
        self.attempts.len() as u32
    }

    pub fn success_count(&self) -> u32 {
        self.attempts.iter().filter(|a| a.outcome).count() as u32
    }

    pub fn success_rate(&self) -> Option<f64> {
        (!self.attempts.is_empty())
            .then(|| f64::from(self.success_count()) / f64::from(self.attempt_count()))
    }

    /// Mean duration over attempts with a known duration.
    pub fn mean_duration(&self) -> Option<f64> {
        let known: Vec<Tick> = self.attempts.iter().filter_map(|a| a.duration).collect();
        (!known.is_empty())
            .then(|| known.iter().sum::<Tick>() as f64 / known.len() as f64)
    }

    pub fn mean_team_size(&self) -> Option<f64> {
        (!self.attempts.is_empty()).then(|| {
            self.attempts.iter().map(|a| f64::from(a.team_size)).sum::<f64>()
                / self.attempts.len() as f64
        })
    }
}

/// Reduce a plan to its prototype key: action names in order, parameters
/// dropped.
pub fn canonical_prototype(plan: &PlanInstance) -> Vec<String> {
    plan.actions.iter().map(|a| a.name().to_string()).collect()
}

/// Layered symbolic memory: episodes contain task attempts, task attempts
/// ground plan prototypes, prototypes group parameterized instances.
/// Growth is strictly additive — ingesting an episode never removes or
/// mutates existing history, only appends nodes and attempt records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct WorldModelGraph {
    pub episodes: Vec<EpisodeNode>,
    pub tasks: Vec<TaskNode>,
    pub prototypes: Vec<PrototypeNode>,
    pub instances: Vec<InstanceNode>,
}

impl WorldModelGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total node count across all four layers.
    pub fn node_count(&self) -> usize {
        self.episodes.len() + self.tasks.len() + self.prototypes.len() + self.instances.len()
    }

    /// Edge count (episode→task, task→prototype, prototype→instance).
    pub fn edge_count(&self) -> usize {
        // Every task node has exactly one prototype edge and one episode
        // edge; every instance has one prototype edge.
        2 * self.tasks.len() + self.instances.len()
    }

    /// Task ids with at least one recorded attempt, ascending.
    pub fn known_tasks(&self) -> BTreeSet<BlockId> {
        self.tasks.iter().map(|t| t.task).collect()
    }

    /// Aggregate history for one task across all episodes.
    pub fn task_stats(&self, task: BlockId) -> TaskStats {
        let nodes: Vec<&TaskNode> = self.tasks.iter().filter(|t| t.task == task).collect();
        if nodes.is_empty() {
            return TaskStats::default();
        }
        let attempts = nodes.len() as u32;
        let successes = nodes.iter().filter(|t| t.outcome).count() as u32;
        let starts: Vec<Tick> = nodes.iter().map(|t| t.start).collect();
        let mean_start = starts.iter().sum::<Tick>() as f64 / starts.len() as f64;
        let start_range =
            (*starts.iter().min().expect("nonempty"), *starts.iter().max().expect("nonempty"));
        let known: Vec<Tick> = nodes.iter().filter_map(|t| t.duration).collect();
        let mean_duration =
            (!known.is_empty()).then(|| known.iter().sum::<Tick>() as f64 / known.len() as f64);
        TaskStats {
            attempts,
            successes,
            mean_start: Some(mean_start),
            start_range: Some(start_range),
            mean_duration,
        }
    }

    /// Per-team-size outcome tallies for one task.
    pub fn team_size_stats(&self, task: BlockId) -> TeamSizeStats {
        let mut stats = TeamSizeStats { task, per_size: Default::default() };
        for node in self.tasks.iter().filter(|t| t.task == task) {
            let tally = stats.per_size.entry(node.team_size).or_insert(SizeTally::default());
            tally.attempts += 1;
            tally.successes += u32::from(node.outcome);
        }
        stats
    }
}
