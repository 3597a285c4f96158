use serde::{Deserialize, Serialize};

use super::config::{footprint_cells, EnvConfig};
use super::EnvError;
use crate::types::{AgentId, BlockId, Dir, Pos, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockStatus {
    Active,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    pub weight: u32,
    /// North-west corner. For DONE blocks this is the delivery position;
    /// the footprint is no longer on the grid.
    pub anchor: Pos,
    pub status: BlockStatus,
}

impl Block {
    pub fn is_active(&self) -> bool {
        self.status == BlockStatus::Active
    }

    /// Grid cells covered by the block. Empty for DONE blocks.
    pub fn footprint(&self) -> Vec<Pos> {
        if self.is_active() {
            footprint_cells(self.anchor, self.weight).collect()
        } else {
            Vec::new()
        }
    }

    pub fn contains(&self, p: Pos) -> bool {
        let w = self.weight as i32;
        self.is_active()
            && p.x >= self.anchor.x
            && p.y >= self.anchor.y
            && p.x < self.anchor.x + w
            && p.y < self.anchor.y + w
    }

    /// Footprint cells along one face of the block.
    pub fn face_cells(&self, face: Dir) -> Vec<Pos> {
        let w = self.weight as i32;
        let a = self.anchor;
        let cell = |i: i32| match face {
            Dir::N => Pos::new(a.x + i, a.y),
            Dir::S => Pos::new(a.x + i, a.y + w - 1),
            Dir::W => Pos::new(a.x, a.y + i),
            Dir::E => Pos::new(a.x + w - 1, a.y + i),
        };
        (0..w).map(cell).collect()
    }

    /// Cells an agent must occupy to push on `face`: the cells orthogonally
    /// adjacent to the footprint, just outside that face.
    pub fn alignment_cells(&self, face: Dir) -> Vec<Pos> {
        self.face_cells(face).into_iter().map(|c| c.step(face)).collect()
    }

    /// The face whose alignment band contains `p`, if any.
    pub fn aligned_face(&self, p: Pos) -> Option<Dir> {
        Dir::ALL.into_iter().find(|&face| self.alignment_cells(face).contains(&p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentPhase {
    Idle,
    Negotiating,
    Executing,
    Waiting,
    Suspended,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentBody {
    pub id: AgentId,
    pub pos: Pos,
    pub phase: AgentPhase,
}

/// Full environment state. Cloneable snapshot; `env_step` is a pure
/// function from (state, joint action) to the successor state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub config: EnvConfig,
    pub tick: Tick,
    /// Sorted by ascending agent id.
    pub agents: Vec<AgentBody>,
    /// Sorted by ascending block id.
    pub blocks: Vec<Block>,
}

impl GridState {
    pub fn agent(&self, id: AgentId) -> Option<&AgentBody> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn block(&self, id: BlockId) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn active_blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(|b| b.is_active())
    }

    pub fn agent_at(&self, p: Pos) -> Option<AgentId> {
        self.agents.iter().find(|a| a.pos == p).map(|a| a.id)
    }

    pub fn in_active_footprint(&self, p: Pos) -> bool {
        self.active_blocks().any(|b| b.contains(p))
    }

    /// A cell an agent could stand on: in bounds, outside every ACTIVE
    /// footprint, and unoccupied.
    pub fn cell_free(&self, p: Pos) -> bool {
        self.config.in_bounds(p) && !self.in_active_footprint(p) && self.agent_at(p).is_none()
    }

    pub fn goal_band_start(&self) -> i32 {
        self.config.goal_band_start()
    }

    /// Whole footprint inside the goal band?
    pub fn block_in_goal(&self, block: &Block) -> bool {
        block.anchor.x >= self.goal_band_start()
    }

    /// Horizontal cells from the block's east edge to the goal band;
    /// 0 once the east edge touches the band.
    pub fn distance_to_goal(&self, block: &Block) -> u32 {
        let east_edge = block.anchor.x + block.weight as i32 - 1;
        (self.goal_band_start() - east_edge).max(0) as u32
    }

    /// Structural invariants: bounds, pairwise disjointness, tick budget.
    /// Checked after every step in debug builds and by the test suites.
    pub fn validate(&self) -> Result<(), EnvError> {
        let fail = |msg: String| Err(EnvError::ConfigInvalid(msg));
        if self.tick > self.config.max_steps {
            return fail(format!("tick {} exceeds max_steps", self.tick));
        }
        if self.agents.len() != self.config.agent_starts.len() {
            return fail("agent roster does not match config".into());
        }
        if self.blocks.len() != self.config.blocks.len() {
            return fail("block roster does not match config".into());
        }
        let mut occupied: Vec<(Pos, String)> = Vec::new();
        for agent in &self.agents {
            if !self.config.in_bounds(agent.pos) {
                return fail(format!("{} out of bounds at {}", agent.id, agent.pos));
            }
            occupied.push((agent.pos, agent.id.to_string()));
        }
        for block in self.active_blocks() {
            for cell in block.footprint() {
                if !self.config.in_bounds(cell) {
                    return fail(format!("{} out of bounds at {cell}", block.id));
                }
                occupied.push((cell, block.id.to_string()));
            }
        }
        for (i, (cell, who)) in occupied.iter().enumerate() {
            if let Some((_, other)) = occupied.iter().skip(i + 1).find(|(c, _)| c == cell) {
                return fail(format!("{who} and {other} overlap at {cell}"));
            }
        }
        Ok(())
    }
}

/// Build the initial state from a validated config. Agent ids are assigned
/// 0..n in `agent_starts` order; blocks are sorted by id.
pub fn init_env(config: &EnvConfig) -> Result<GridState, EnvError> {
    config.validate()?;
    let agents = config
        .agent_starts
        .iter()
        .enumerate()
        .map(|(i, &pos)| AgentBody { id: AgentId(i as u32), pos, phase: AgentPhase::Idle })
        .collect();
    let mut blocks: Vec<Block> = config
        .blocks
        .iter()
        .map(|spec| Block {
            id: spec.id,
            weight: spec.weight,
            anchor: spec.anchor,
            status: BlockStatus::Active,
        })
        .collect();
    blocks.sort_by_key(|b| b.id);
    let state = GridState { config: config.clone(), tick: 0, agents, blocks };
    state.validate()?;
    Ok(state)
}
