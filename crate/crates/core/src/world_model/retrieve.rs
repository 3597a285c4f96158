use serde::{Deserialize, Serialize};

use crate::controller::SymbolicAction;
use crate::types::BlockId;
use crate::world_model::graph::WorldModelGraph;

/// Aggregates over all attempts of all instances under one prototype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeStats {
    pub attempts: u32,
    pub success_rate: Option<f64>,
    pub mean_team_size: Option<f64>,
    pub mean_duration: Option<f64>,
}

/// Aggregates over one instance's attempts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub attempts: u32,
    pub success_rate: Option<f64>,
    pub mean_duration: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedInstance {
    /// Index into [`WorldModelGraph::instances`].
    pub node: usize,
    pub actions: Vec<SymbolicAction>,
    pub stats: InstanceStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPrototype {
    /// Index into [`WorldModelGraph::prototypes`].
    pub node: usize,
    pub key: Vec<String>,
    pub stats: PrototypeStats,
    /// At most L instances, best first.
    pub instances: Vec<RankedInstance>,
}

/// Plan retrieval answer for one task: at most K prototypes ranked by
/// success rate (unknown rates last), each carrying at most L instances
/// ranked by success rate, then mean duration (unknown durations last).
/// All remaining ties break toward the lower node index, which makes
/// retrieval fully deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub task: BlockId,
    pub prototypes: Vec<RankedPrototype>,
}

/// Order `Option<f64>` descending with `None` last.
fn desc_none_last(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => y.partial_cmp(&x).expect("rates are finite"),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    }
}

/// Order `Option<f64>` ascending with `None` last.
fn asc_none_last(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(&y).expect("durations are finite"),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    }
}

pub fn retrieve_plans(
    graph: &WorldModelGraph,
    task: BlockId,
    k: usize,
    l: usize,
) -> RetrievalResult {
    let mut prototypes: Vec<RankedPrototype> = graph
        .prototypes
        .iter()
        .enumerate()
        .filter(|(_, p)| p.task == task)
        .map(|(index, proto)| {
            let mut instances: Vec<RankedInstance> = graph
                .instances
                .iter()
                .enumerate()
                .filter(|(_, i)| i.prototype == index)
                .map(|(node, inst)| RankedInstance {
                    node,
                    actions: inst.actions.clone(),
                    stats: InstanceStats {
                        attempts: inst.attempt_count(),
                        success_rate: inst.success_rate(),
                        mean_duration: inst.mean_duration(),
                    },
                })
                .collect();
            instances.sort_by(|a, b| {
                desc_none_last(a.stats.success_rate, b.stats.success_rate)
                    .then(asc_none_last(a.stats.mean_duration, b.stats.mean_duration))
                    .then(a.node.cmp(&b.node))
            });
            instances.truncate(l);

            // Prototype stats weight instances by their attempt counts.
            let children: Vec<&crate::world_model::graph::InstanceNode> =
                graph.instances.iter().filter(|i| i.prototype == index).collect();
            let attempts: u32 = children.iter().map(|i| i.attempt_count()).sum();
            let successes: u32 = children.iter().map(|i| i.success_count()).sum();
            let success_rate =
                (attempts > 0).then(|| f64::from(successes) / f64::from(attempts));
            let team_sizes: Vec<f64> = children
                .iter()
                .flat_map(|i| i.attempts.iter().map(|a| f64::from(a.team_size)))
                .collect();
            let mean_team_size = (!team_sizes.is_empty())
                .then(|| team_sizes.iter().sum::<f64>() / team_sizes.len() as f64);
            let durations: Vec<f64> = children
                .iter()
                .flat_map(|i| i.attempts.iter().filter_map(|a| a.duration))
                .map(|d| d as f64)
                .collect();
            let mean_duration = (!durations.is_empty())
                .then(|| durations.iter().sum::<f64>() / durations.len() as f64);
            RankedPrototype {
                node: index,
                key: proto.key.clone(),
                stats: PrototypeStats { attempts, success_rate, mean_team_size, mean_duration },
                instances,
            }
        })
        .collect();

    prototypes.sort_by(|a, b| {
        desc_none_last(a.stats.success_rate, b.stats.success_rate).then(a.node.cmp(&b.node))
    });
    prototypes.truncate(k);
    RetrievalResult { task, prototypes }
}
