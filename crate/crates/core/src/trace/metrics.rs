use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::trace::event::EventKind;
use crate::trace::sink::{EpisodeTrace, TraceError};
use crate::types::{AgentId, BlockId, Tick};

/// Delivery outcome for one block within one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMetrics {
    pub done: bool,
    /// Present iff `done`.
    pub completion_tick: Option<Tick>,
}

/// Quantities derived from one episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: u32,
    pub blocks: BTreeMap<BlockId, BlockMetrics>,
    pub env_steps: Tick,
    /// Simulated wall-clock seconds, including negotiation time.
    pub seconds: f64,
    /// Ordered commitment sequence per agent, across all rooms.
    pub commitments: BTreeMap<AgentId, Vec<BlockId>>,
    /// Team size recorded per task at each room close that assigned it.
    pub team_sizes: BTreeMap<BlockId, Vec<u32>>,
}

impl EpisodeMetrics {
    /// Fraction of known blocks delivered (1.0 when no blocks exist).
    pub fn completion_rate(&self) -> f64 {
        if self.blocks.is_empty() {
            return 1.0;
        }
        let done = self.blocks.values().filter(|b| b.done).count();
        done as f64 / self.blocks.len() as f64
    }
}

/// Derive metrics from a terminal trace. Pure and order-stable:
/// recomputation from a persisted trace equals the live computation.
pub fn compute_metrics(trace: &EpisodeTrace, episode: u32) -> Result<EpisodeMetrics, TraceError> {
    let mut blocks: BTreeMap<BlockId, BlockMetrics> = BTreeMap::new();
    let mut commitments: BTreeMap<AgentId, Vec<BlockId>> = BTreeMap::new();
    let mut team_sizes: BTreeMap<BlockId, Vec<u32>> = BTreeMap::new();
    let mut terminal: Option<Tick> = None;

    for event in &trace.events {
        match &event.kind {
            EventKind::BlockDone { block } => {
                blocks.insert(
                    *block,
                    BlockMetrics { done: true, completion_tick: Some(event.tick) },
                );
            }
            EventKind::Commit { task } => {
                let agent = event.agent.ok_or_else(|| {
                    TraceError::Incomplete("COMMIT without an agent".to_string())
                })?;
                commitments.entry(agent).or_default().push(*task);
            }
            EventKind::RoomClose { assignments, .. } => {
                let mut sizes: BTreeMap<BlockId, u32> = BTreeMap::new();
                for task in assignments.values() {
                    *sizes.entry(*task).or_insert(0) += 1;
                }
                for (task, size) in sizes {
                    team_sizes.entry(task).or_default().push(size);
                }
            }
            EventKind::EpisodeEnd { env_steps, undelivered, .. } => {
                for block in undelivered {
                    blocks
                        .entry(*block)
                        .or_insert(BlockMetrics { done: false, completion_tick: None });
                }
                terminal = Some(*env_steps);
            }
            _ => {}
        }
    }

    let env_steps = terminal
        .ok_or_else(|| TraceError::Incomplete("trace has no EPISODE_END".to_string()))?;
    let seconds = trace.events.iter().map(|e| e.wall_clock).fold(0.0, f64::max);
    Ok(EpisodeMetrics { episode, blocks, env_steps, seconds, commitments, team_sizes })
}
