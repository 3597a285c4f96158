use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world_model::graph::{
    EpisodeNode, EpisodeOutcome, InstanceNode, PrototypeNode, TaskNode, WorldModelGraph,
};
use crate::world_model::stats::fmt_percent;

#[derive(Debug, Error)]
pub enum WorldModelError {
    #[error("UNSUPPORTED_FORMAT: `{0}` (expected `json` or `dot`)")]
    UnsupportedFormat(String),
    #[error("world model i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("world model serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    Dot,
}

impl FromStr for GraphFormat {
    type Err = WorldModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(GraphFormat::Json),
            "dot" => Ok(GraphFormat::Dot),
            other => Err(WorldModelError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Full node/edge dump; also the on-disk persistence format.
#[derive(Debug, Serialize, Deserialize)]
struct GraphDump {
    episodes: Vec<EpisodeNode>,
    tasks: Vec<TaskNode>,
    prototypes: Vec<PrototypeNode>,
    instances: Vec<InstanceNode>,
    edges: EdgeDump,
}

/// Edges connect adjacent layers only. Episodes are referenced by id,
/// everything else by list index.
#[derive(Debug, Serialize, Deserialize)]
struct EdgeDump {
    episode_task: Vec<(u32, usize)>,
    task_prototype: Vec<(usize, usize)>,
    prototype_instance: Vec<(usize, usize)>,
}

fn dump_of(graph: &WorldModelGraph) -> GraphDump {
    let edges = EdgeDump {
        episode_task: graph
            .tasks
            .iter()
            .enumerate()
            .map(|(index, t)| (t.episode, index))
            .collect(),
        task_prototype: graph
            .tasks
            .iter()
            .enumerate()
            .map(|(index, t)| (index, t.prototype))
            .collect(),
        prototype_instance: graph
            .instances
            .iter()
            .enumerate()
            .map(|(index, i)| (i.prototype, index))
            .collect(),
    };
    GraphDump {
        episodes: graph.episodes.clone(),
        tasks: graph.tasks.clone(),
        prototypes: graph.prototypes.clone(),
        instances: graph.instances.clone(),
        edges,
    }
}

pub fn export_graph(
    graph: &WorldModelGraph,
    format: GraphFormat,
) -> Result<String, WorldModelError> {
    match format {
        GraphFormat::Json => Ok(serde_json::to_string_pretty(&dump_of(graph))?),
        GraphFormat::Dot => Ok(render_dot(graph)),
    }
}

pub fn import_graph(json: &str) -> Result<WorldModelGraph, WorldModelError> {
    let dump: GraphDump = serde_json::from_str(json)?;
    Ok(WorldModelGraph {
        episodes: dump.episodes,
        tasks: dump.tasks,
        prototypes: dump.prototypes,
        instances: dump.instances,
    })
}

impl WorldModelGraph {
    pub fn save(&self, path: &Path) -> Result<(), WorldModelError> {
        std::fs::write(path, export_graph(self, GraphFormat::Json)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, WorldModelError> {
        import_graph(&std::fs::read_to_string(path)?)
    }
}

fn episode_color(outcome: EpisodeOutcome) -> &'static str {
    match outcome {
        EpisodeOutcome::Complete => "palegreen",
        EpisodeOutcome::Incomplete => "orange",
    }
}

fn outcome_color(success: bool) -> &'static str {
    if success {
        "palegreen"
    } else {
        "lightcoral"
    }
}

/// GraphViz rendering with the outcome color legend: green for success,
/// red for failure, orange for incomplete episodes, blue for prototypes.
fn render_dot(graph: &WorldModelGraph) -> String {
    let mut out = String::from("digraph world_model {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=box, style=filled, fontname=\"monospace\"];\n");
    for episode in &graph.episodes {
        let _ = writeln!(
            out,
            "  ep{} [label=\"Episode {}\", fillcolor=\"{}\"];",
            episode.id,
            episode.id,
            episode_color(episode.outcome)
        );
    }
    for (index, task) in graph.tasks.iter().enumerate() {
        let _ = writeln!(
            out,
            "  t{index} [label=\"{} start={} team={}\", fillcolor=\"{}\"];",
            task.task,
            task.start,
            task.team_size,
            outcome_color(task.outcome)
        );
    }
    for (index, proto) in graph.prototypes.iter().enumerate() {
        let _ = writeln!(
            out,
            "  p{index} [label=\"{}\", fillcolor=\"lightblue\"];",
            proto.key.join(" -> ")
        );
    }
    for (index, instance) in graph.instances.iter().enumerate() {
        // An instance reads as successful when at least half its attempts
        // delivered the block.
        let success = instance.success_rate().map(|r| r >= 0.5).unwrap_or(false);
        let _ = writeln!(
            out,
            "  i{index} [label=\"{} ({}/{})\", fillcolor=\"{}\"];",
            fmt_percent(instance.success_rate()),
            instance.success_count(),
            instance.attempt_count(),
            outcome_color(success)
        );
    }
    for (index, task) in graph.tasks.iter().enumerate() {
        let _ = writeln!(out, "  ep{} -> t{index};", task.episode);
        let _ = writeln!(out, "  t{index} -> p{};", task.prototype);
    }
    for (index, instance) in graph.instances.iter().enumerate() {
        let _ = writeln!(out, "  p{} -> i{index};", instance.prototype);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::SymbolicAction;
    use crate::types::BlockId;
    use crate::world_model::graph::AttemptRecord;

    fn fixture() -> WorldModelGraph {
        WorldModelGraph {
            episodes: vec![
                EpisodeNode { id: 1, outcome: EpisodeOutcome::Incomplete, span: (0, 40) },
                EpisodeNode { id: 2, outcome: EpisodeOutcome::Complete, span: (0, 25) },
            ],
            tasks: vec![TaskNode {
                episode: 1,
                task: BlockId(1),
                outcome: true,
                start: 4,
                duration: Some(12),
                team_size: 2,
                prototype: 0,
                instance: 0,
            }],
            prototypes: vec![PrototypeNode {
                task: BlockId(1),
                key: vec!["MoveToBlock".into(), "Push".into()],
            }],
            instances: vec![InstanceNode {
                prototype: 0,
                actions: vec![SymbolicAction::Push { block: BlockId(1), steps: 2 }],
                attempts: vec![AttemptRecord {
                    episode: 1,
                    outcome: true,
                    duration: Some(12),
                    team_size: 2,
                }],
            }],
        }
    }

    #[test]
    fn empty_graph_exports_valid_documents() {
        let graph = WorldModelGraph::new();
        let json = export_graph(&graph, GraphFormat::Json).unwrap();
        assert_eq!(import_graph(&json).unwrap(), graph);
        let dot = export_graph(&graph, GraphFormat::Dot).unwrap();
        assert!(dot.starts_with("digraph world_model {"));
        assert!(dot.trim_end().ends_with('}'));
    }

    #[test]
    fn json_roundtrip_preserves_the_graph() {
        let graph = fixture();
        let json = export_graph(&graph, GraphFormat::Json).unwrap();
        assert_eq!(import_graph(&json).unwrap(), graph);
        // The dump carries explicit adjacent-layer edges.
        assert!(json.contains("episode_task"));
        assert!(json.contains("prototype_instance"));
    }

    #[test]
    fn dot_uses_outcome_colors() {
        let dot = export_graph(&fixture(), GraphFormat::Dot).unwrap();
        assert!(dot.contains("ep1 [label=\"Episode 1\", fillcolor=\"orange\"]"));
        assert!(dot.contains("ep2 [label=\"Episode 2\", fillcolor=\"palegreen\"]"));
        assert!(dot.contains("t0 [label=\"block_1 start=4 team=2\", fillcolor=\"palegreen\"]"));
        assert!(dot.contains("fillcolor=\"lightblue\""));
        assert!(dot.contains("ep1 -> t0;"));
        assert!(dot.contains("t0 -> p0;"));
        assert!(dot.contains("p0 -> i0;"));
    }

    #[test]
    fn unknown_format_is_rejected() {
        let err = "yaml".parse::<GraphFormat>().unwrap_err();
        assert!(err.to_string().contains("UNSUPPORTED_FORMAT"));
    }

    #[test]
    fn save_and_load_roundtrip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("world.json");
        let graph = fixture();
        graph.save(&path).unwrap();
        assert_eq!(WorldModelGraph::load(&path).unwrap(), graph);
    }
}
