use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::state::{BlockStatus, GridState};
use super::EnvError;
use crate::types::{AgentId, BlockId, Dir, Tick};

/// One agent's action for a single tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimitiveAction {
    Move(Dir),
    /// Push `block` while standing on an alignment cell of `face`. The
    /// block moves opposite to `face` (pushing from the west face moves it
    /// east) once enough same-face pushers are aligned.
    Push {
        block: BlockId,
        face: Dir,
    },
    Noop,
}

/// What one agent's primitive accomplished this tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentOutcome {
    pub action: PrimitiveAction,
    /// Moves: reached the target cell. Pushes: was aligned on the winning
    /// face and the block moved. Noop: always true.
    pub achieved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockOutcome {
    pub moved: Option<Dir>,
    /// Became DONE this tick (delivered into the goal band).
    pub done: bool,
}

/// Environment-verified feedback for one tick; the controller's only source
/// of truth about action effects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    /// Tick index that was executed (the pre-step tick).
    pub tick: Tick,
    pub agents: BTreeMap<AgentId, AgentOutcome>,
    pub blocks: BTreeMap<BlockId, BlockOutcome>,
}

/// Advance the world by one tick.
///
/// Resolution order (all deterministic):
/// 1. Moves, in ascending agent id order. A move succeeds iff the target
///    cell is in bounds, outside every ACTIVE footprint, and unoccupied at
///    resolution time — so a cell vacated this tick is only usable if the
///    vacating agent has a lower id, and on conflicts the lower id wins.
/// 2. Pushes, per block in ascending block id order. For each block the
///    face with the most aligned pushers wins (ties between faces cancel);
///    the block moves one cell iff that count reaches its weight and the
///    destination footprint is in bounds and free of agents and other
///    ACTIVE blocks. Aligned pushers on the winning face advance with it.
/// 3. Delivery: ACTIVE blocks fully inside the goal band become DONE and
///    leave the grid.
///
/// Agents without an entry in `joint` implicitly NOOP.
pub fn env_step(
    state: &GridState,
    joint: &BTreeMap<AgentId, PrimitiveAction>,
) -> Result<(GridState, StepReport), EnvError> {
    if state.tick >= state.config.max_steps {
        return Err(EnvError::EpisodeOver);
    }

    let mut next = state.clone();
    let mut agent_outcomes: BTreeMap<AgentId, AgentOutcome> = BTreeMap::new();
    let mut block_outcomes: BTreeMap<BlockId, BlockOutcome> = BTreeMap::new();
    for block in next.blocks.iter().filter(|b| b.is_active()) {
        block_outcomes.insert(block.id, BlockOutcome { moved: None, done: false });
    }

    let action_of = |id: AgentId| joint.get(&id).copied().unwrap_or(PrimitiveAction::Noop);

    // Phase 1: moves, ascending agent id.
    for i in 0..next.agents.len() {
        let id = next.agents[i].id;
        let action = action_of(id);
        let achieved = match action {
            PrimitiveAction::Move(dir) => {
                let dest = next.agents[i].pos.step(dir);
                let free = next.cell_free(dest);
                if free {
                    next.agents[i].pos = dest;
                }
                free
            }
            PrimitiveAction::Noop => true,
            PrimitiveAction::Push { .. } => false, // settled in phase 2
        };
        agent_outcomes.insert(id, AgentOutcome { action, achieved });
    }

    // Phase 2: pushes, ascending block id.
    let block_ids: Vec<BlockId> = next.blocks.iter().map(|b| b.id).collect();
    for bid in block_ids {
        let block = next.block(bid).unwrap().clone();
        if !block.is_active() {
            continue;
        }

        // Aligned pushers per face.
        let mut per_face: BTreeMap<Dir, Vec<AgentId>> = BTreeMap::new();
        for agent in &next.agents {
            if let PrimitiveAction::Push { block: target, face } = action_of(agent.id) {
                if target == bid && block.alignment_cells(face).contains(&agent.pos) {
                    per_face.entry(face).or_default().push(agent.id);
                }
            }
        }
        let Some(best) = per_face.values().map(Vec::len).max() else { continue };
        let top_faces: Vec<Dir> =
            per_face.iter().filter(|(_, v)| v.len() == best).map(|(&f, _)| f).collect();
        // Opposed pushes with equal strength cancel out.
        if top_faces.len() != 1 || best < block.weight as usize {
            continue;
        }
        let face = top_faces[0];
        let dir = face.opposite();

        let dest_anchor = block.anchor.step(dir);
        let dest_ok = super::config::footprint_cells(dest_anchor, block.weight).all(|cell| {
            next.config.in_bounds(cell)
                && next.agent_at(cell).is_none()
                && !next.blocks.iter().any(|b| b.id != bid && b.contains(cell))
        });
        if !dest_ok {
            continue;
        }

        let movers = per_face.remove(&face).unwrap();
        next.blocks.iter_mut().find(|b| b.id == bid).unwrap().anchor = dest_anchor;
        for id in &movers {
            let agent = next.agents.iter_mut().find(|a| a.id == *id).unwrap();
            agent.pos = agent.pos.step(dir);
            agent_outcomes.get_mut(id).unwrap().achieved = true;
        }
        block_outcomes.get_mut(&bid).unwrap().moved = Some(dir);
    }

    // Phase 3: delivery.
    let band_start = next.goal_band_start();
    for block in next.blocks.iter_mut() {
        if block.is_active() && block.anchor.x >= band_start {
            block.status = BlockStatus::Done;
            block_outcomes.get_mut(&block.id).unwrap().done = true;
        }
    }

    let report = StepReport { tick: next.tick, agents: agent_outcomes, blocks: block_outcomes };
    next.tick += 1;
    debug_assert!(next.validate().is_ok(), "env invariant broken: {:?}", next.validate());
    Ok((next, report))
}

/// Convenience for tests and simple drivers: joint action from pairs.
pub fn joint_action(pairs: &[(AgentId, PrimitiveAction)]) -> BTreeMap<AgentId, PrimitiveAction> {
    pairs.iter().copied().collect()
}
