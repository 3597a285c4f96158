use std::fmt;

use serde::{Deserialize, Serialize};

use super::state::GridState;
use crate::types::{AgentId, BlockId, Pos, Tick};

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TerminalReason {
    AllDone,
    Timeout,
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminalReason::AllDone => f.write_str("ALL_DONE"),
            TerminalReason::Timeout => f.write_str("TIMEOUT"),
        }
    }
}

/// Dense 3-channel view of the grid. Channels serialize as row-major
/// integer arrays: 0 = agent occupancy (0/1), 1 = ACTIVE block occupancy
/// (0/1), 2 = block weight on occupied cells (0 elsewhere).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationTensor {
    pub width: u32,
    pub height: u32,
    pub channels: [Vec<u32>; 3],
}

impl ObservationTensor {
    pub fn at(&self, channel: usize, x: u32, y: u32) -> u32 {
        self.channels[channel][(y * self.width + x) as usize]
    }
}

/// One ACTIVE block as seen by planners.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockObservation {
    pub id: BlockId,
    pub weight: u32,
    pub anchor: Pos,
    /// Horizontal cells from the block's east edge to the goal band
    /// (0 once touching).
    pub distance_to_goal: u32,
}

/// Structured observation shared by every agent (full observability).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicObservation {
    pub tick: Tick,
    pub agents: Vec<(AgentId, Pos)>,
    pub blocks: Vec<BlockObservation>,
    pub done_blocks: Vec<BlockId>,
    pub terminal: bool,
}

impl SymbolicObservation {
    pub fn block(&self, id: BlockId) -> Option<&BlockObservation> {
        self.blocks.iter().find(|b| b.id == id)
    }

    /// Nearest-to-goal ACTIVE block, ties broken by lowest id. This is the
    /// protocol fallback target and the baseline's preferred task.
    pub fn nearest_to_goal(&self) -> Option<&BlockObservation> {
        self.blocks
            .iter()
            .min_by_key(|b| (b.distance_to_goal, b.id))
    }

    /// Plain-text rendering used inside prompt templates.
    pub fn render_text(&self) -> String {
        let mut out = format!("tick={}\nagents:", self.tick);
        for (id, pos) in &self.agents {
            out.push_str(&format!(" {id}@{pos}"));
        }
        out.push_str("\nblocks:");
        if self.blocks.is_empty() {
            out.push_str(" none");
        }
        for b in &self.blocks {
            out.push_str(&format!(
                " {} weight={} anchor={} distance_to_goal={};",
                b.id, b.weight, b.anchor, b.distance_to_goal
            ));
        }
        out.push_str("\ndone:");
        if self.done_blocks.is_empty() {
            out.push_str(" none");
        }
        for id in &self.done_blocks {
            out.push_str(&format!(" {id}"));
        }
        out
    }
}

/// Pure read of an immutable snapshot; never mutates the state.
pub fn observe_tensor(state: &GridState) -> ObservationTensor {
    let (w, h) = (state.config.width, state.config.height);
    let mut channels = [
        vec![0u32; (w * h) as usize],
        vec![0u32; (w * h) as usize],
        vec![0u32; (w * h) as usize],
    ];
    let idx = |p: Pos| (p.y as u32 * w + p.x as u32) as usize;
    for agent in &state.agents {
        channels[0][idx(agent.pos)] = 1;
    }
    for block in state.active_blocks() {
        for cell in block.footprint() {
            channels[1][idx(cell)] = 1;
            channels[2][idx(cell)] = block.weight;
        }
    }
    ObservationTensor { width: w, height: h, channels }
}

/// Pure read of an immutable snapshot; never mutates the state.
pub fn observe_symbolic(state: &GridState) -> SymbolicObservation {
    let agents = state.agents.iter().map(|a| (a.id, a.pos)).collect();
    let blocks = state
        .active_blocks()
        .map(|b| BlockObservation {
            id: b.id,
            weight: b.weight,
            anchor: b.anchor,
            distance_to_goal: state.distance_to_goal(b),
        })
        .collect();
    let done_blocks = state.blocks.iter().filter(|b| !b.is_active()).map(|b| b.id).collect();
    SymbolicObservation {
        tick: state.tick,
        agents,
        blocks,
        done_blocks,
        terminal: super::is_terminal(state).is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::config::{BlockSpec, EnvConfig};
    use crate::env::state::init_env;

    fn state_with_blocks(blocks: Vec<BlockSpec>) -> GridState {
        let cfg = EnvConfig {
            width: 10,
            height: 10,
            goal_band_width: 2,
            blocks,
            agent_starts: vec![Pos::new(0, 0)],
            max_steps: 150,
            seed: 0,
        };
        init_env(&cfg).unwrap()
    }

    #[test]
    fn tensor_empty_grid_is_all_zero_beyond_agent() {
        let state = state_with_blocks(vec![]);
        let t = observe_tensor(&state);
        assert_eq!(t.at(0, 0, 0), 1);
        assert_eq!(t.channels[0].iter().sum::<u32>(), 1);
        assert!(t.channels[1].iter().all(|&v| v == 0));
        assert!(t.channels[2].iter().all(|&v| v == 0));
    }

    #[test]
    fn tensor_marks_footprint_and_weight() {
        let state = state_with_blocks(vec![BlockSpec {
            id: BlockId(2),
            weight: 2,
            anchor: Pos::new(4, 4),
        }]);
        let t = observe_tensor(&state);
        assert_eq!(t.channels[1].iter().sum::<u32>(), 4);
        for (x, y) in [(4, 4), (5, 4), (4, 5), (5, 5)] {
            assert_eq!(t.at(1, x, y), 1);
            assert_eq!(t.at(2, x, y), 2);
        }
    }

    #[test]
    fn symbolic_reports_distance_and_done() {
        let mut state = state_with_blocks(vec![
            BlockSpec { id: BlockId(1), weight: 1, anchor: Pos::new(7, 2) },
            BlockSpec { id: BlockId(2), weight: 2, anchor: Pos::new(2, 6) },
        ]);
        let obs = observe_symbolic(&state);
        assert_eq!(obs.block(BlockId(1)).unwrap().distance_to_goal, 1);
        assert_eq!(obs.block(BlockId(2)).unwrap().distance_to_goal, 5);
        assert_eq!(obs.nearest_to_goal().unwrap().id, BlockId(1));
        assert!(!obs.terminal);

        state.blocks[0].status = crate::env::BlockStatus::Done;
        let obs = observe_symbolic(&state);
        assert_eq!(obs.blocks.len(), 1);
        assert_eq!(obs.done_blocks, vec![BlockId(1)]);
    }

    #[test]
    fn symbolic_empty_block_list_is_terminal() {
        let state = state_with_blocks(vec![]);
        let obs = observe_symbolic(&state);
        assert!(obs.blocks.is_empty());
        assert!(obs.terminal);
    }
}
