//! Brute-force reference for the step rules, kept deliberately independent
//! of `env_step`: everything is re-derived from first principles with plain
//! enumeration over cells, so the two implementations can check each other.
//! Compiled only for tests (`oracle` feature).

use std::collections::BTreeMap;

use super::state::GridState;
use super::step::PrimitiveAction;
use crate::types::{AgentId, BlockId, Dir, Pos};

/// Predicted tick outcome: agent positions, block anchors, delivered set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OraclePrediction {
    pub agent_positions: BTreeMap<AgentId, Pos>,
    pub block_anchors: BTreeMap<BlockId, Pos>,
    pub delivered: Vec<BlockId>,
    pub moved: BTreeMap<BlockId, Option<Dir>>,
}

/// Re-derive one tick of the world from scratch.
pub fn predict_step(
    state: &GridState,
    joint: &BTreeMap<AgentId, PrimitiveAction>,
) -> OraclePrediction {
    let cfg = &state.config;
    let mut agents: BTreeMap<AgentId, Pos> =
        state.agents.iter().map(|a| (a.id, a.pos)).collect();
    // (id, weight, anchor) for blocks still on the grid.
    let mut blocks: Vec<(BlockId, i32, Pos)> = state
        .active_blocks()
        .map(|b| (b.id, b.weight as i32, b.anchor))
        .collect();
    blocks.sort_by_key(|&(id, _, _)| id);

    let square = |anchor: Pos, w: i32| -> Vec<Pos> {
        let mut cells = Vec::new();
        for dy in 0..w {
            for dx in 0..w {
                cells.push(Pos::new(anchor.x + dx, anchor.y + dy));
            }
        }
        cells
    };
    let in_bounds =
        |p: Pos| p.x >= 0 && p.y >= 0 && p.x < cfg.width as i32 && p.y < cfg.height as i32;

    // Moves: one agent at a time, ascending id, against the evolving map.
    let ids: Vec<AgentId> = agents.keys().copied().collect();
    for id in &ids {
        let Some(PrimitiveAction::Move(dir)) = joint.get(id).copied() else { continue };
        let target = agents[id].step(dir);
        let occupied_by_agent = agents.iter().any(|(other, &p)| other != id && p == target);
        let occupied_by_block = blocks
            .iter()
            .any(|&(_, w, anchor)| square(anchor, w).contains(&target));
        if in_bounds(target) && !occupied_by_agent && !occupied_by_block {
            agents.insert(*id, target);
        }
    }

    // Pushes: per block ascending id; count aligned pushers per face by
    // full enumeration, then apply the strongest-face rule.
    let mut moved: BTreeMap<BlockId, Option<Dir>> = BTreeMap::new();
    for i in 0..blocks.len() {
        let (bid, w, anchor) = blocks[i];
        moved.insert(bid, None);

        let mut counts: Vec<(Dir, Vec<AgentId>)> = Vec::new();
        for face in Dir::ALL {
            let mut pushers = Vec::new();
            for (&aid, &pos) in &agents {
                let wants = joint.get(&aid).copied()
                    == Some(PrimitiveAction::Push { block: bid, face });
                // Alignment: orthogonally adjacent to a footprint cell on
                // that face, i.e. one step outward from the face row/col.
                let aligned = square(anchor, w)
                    .iter()
                    .any(|&cell| cell.step(face) == pos && !square(anchor, w).contains(&pos));
                if wants && aligned {
                    pushers.push(aid);
                }
            }
            counts.push((face, pushers));
        }
        let best = counts.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        if best == 0 || best < w as usize {
            continue;
        }
        let winners: Vec<&(Dir, Vec<AgentId>)> =
            counts.iter().filter(|(_, v)| v.len() == best).collect();
        if winners.len() != 1 {
            continue; // opposed faces with equal strength cancel
        }
        let (face, pushers) = winners[0];
        let dir = face.opposite();
        let new_anchor = anchor.step(dir);

        let mut free = true;
        for cell in square(new_anchor, w) {
            if !in_bounds(cell) {
                free = false;
            }
            if agents.values().any(|&p| p == cell) {
                free = false;
            }
            for (j, &(_, ow, oa)) in blocks.iter().enumerate() {
                if j != i && square(oa, ow).contains(&cell) {
                    free = false;
                }
            }
        }
        if !free {
            continue;
        }

        blocks[i].2 = new_anchor;
        for aid in pushers {
            let p = agents[aid];
            agents.insert(*aid, p.step(dir));
        }
        moved.insert(bid, Some(dir));
    }

    // Delivery: footprint entirely within the goal band.
    let band_start = cfg.width as i32 - cfg.goal_band_width as i32;
    let mut delivered = Vec::new();
    let mut anchors = BTreeMap::new();
    for &(bid, w, anchor) in &blocks {
        if square(anchor, w).iter().all(|c| c.x >= band_start) {
            delivered.push(bid);
        }
        anchors.insert(bid, anchor);
    }

    OraclePrediction { agent_positions: agents, block_anchors: anchors, delivered, moved }
}

/// Random small scenarios for fuzzing the step rules.
pub mod scenario {
    use rand::Rng;

    use crate::env::config::{BlockSpec, EnvConfig};
    use crate::env::state::{init_env, GridState};
    use crate::env::step::PrimitiveAction;
    use crate::types::{AgentId, BlockId, Dir, Pos};
    use std::collections::BTreeMap;

    /// A valid random state: up to 8x8 grid, at most 3 blocks (weights 1-2)
    /// and 4 agents, placed without overlap and outside the goal band.
    pub fn random_state<R: Rng>(rng: &mut R) -> GridState {
        loop {
            let width = rng.gen_range(5..=8);
            let height = rng.gen_range(4..=8);
            let goal_band_width = rng.gen_range(2..=3.min(width - 3));
            let band_start = (width - goal_band_width) as i32;
            let mut taken: Vec<Pos> = Vec::new();
            let mut blocks = Vec::new();
            let n_blocks = rng.gen_range(0..=3);
            'place: for id in 1..=n_blocks {
                for _ in 0..20 {
                    let weight = rng.gen_range(1..=2u32);
                    let w = weight as i32;
                    if band_start - w < 0 {
                        continue;
                    }
                    let anchor = Pos::new(
                        rng.gen_range(0..(band_start - w + 1).max(1)),
                        rng.gen_range(0..=(height as i32 - w)),
                    );
                    let cells: Vec<Pos> = (0..w)
                        .flat_map(|dy| {
                            (0..w).map(move |dx| Pos::new(anchor.x + dx, anchor.y + dy))
                        })
                        .collect();
                    if cells.iter().any(|c| taken.contains(c) || c.x >= band_start) {
                        continue;
                    }
                    taken.extend(&cells);
                    blocks.push(BlockSpec { id: BlockId(id), weight, anchor });
                    continue 'place;
                }
            }
            let mut agent_starts = Vec::new();
            for _ in 0..rng.gen_range(1..=4) {
                for _ in 0..30 {
                    let p =
                        Pos::new(rng.gen_range(0..width as i32), rng.gen_range(0..height as i32));
                    if !taken.contains(&p) {
                        taken.push(p);
                        agent_starts.push(p);
                        break;
                    }
                }
            }
            if agent_starts.is_empty() {
                continue;
            }
            let cfg = EnvConfig {
                width,
                height,
                goal_band_width,
                blocks,
                agent_starts,
                max_steps: 150,
                seed: rng.gen(),
            };
            if let Ok(state) = init_env(&cfg) {
                return state;
            }
        }
    }

    /// A random joint action biased toward pushes near blocks.
    pub fn random_joint<R: Rng>(
        rng: &mut R,
        state: &GridState,
    ) -> BTreeMap<AgentId, PrimitiveAction> {
        let block_ids: Vec<BlockId> = state.blocks.iter().map(|b| b.id).collect();
        let mut joint = BTreeMap::new();
        for agent in &state.agents {
            let dir = Dir::ALL[rng.gen_range(0..4)];
            let action = match rng.gen_range(0..10) {
                0 => PrimitiveAction::Noop,
                1..=4 => PrimitiveAction::Move(dir),
                _ => {
                    // Prefer pushing an adjacent block on its actual face so
                    // the interesting rule paths get exercised.
                    let adjacent = state
                        .active_blocks()
                        .find_map(|b| b.aligned_face(agent.pos).map(|f| (b.id, f)));
                    match (adjacent, block_ids.is_empty()) {
                        (Some((block, face)), _) if rng.gen_bool(0.8) => {
                            PrimitiveAction::Push { block, face }
                        }
                        (_, false) => PrimitiveAction::Push {
                            block: block_ids[rng.gen_range(0..block_ids.len())],
                            face: dir,
                        },
                        (_, true) => PrimitiveAction::Move(dir),
                    }
                }
            };
            joint.insert(agent.id, action);
        }
        joint
    }
}

/// Compare `env_step`'s result against the oracle; returns a description of
/// the first mismatch, if any.
pub fn check_against(
    before: &GridState,
    joint: &BTreeMap<AgentId, PrimitiveAction>,
    after: &GridState,
    report: &super::step::StepReport,
) -> Option<String> {
    let pred = predict_step(before, joint);
    for agent in &after.agents {
        if pred.agent_positions.get(&agent.id) != Some(&agent.pos) {
            return Some(format!(
                "{} at {} but oracle says {:?}",
                agent.id, agent.pos, pred.agent_positions.get(&agent.id)
            ));
        }
    }
    for block in &after.blocks {
        let was_active = before.block(block.id).map(|b| b.is_active()).unwrap_or(false);
        if !was_active {
            continue;
        }
        if pred.block_anchors.get(&block.id) != Some(&block.anchor) {
            return Some(format!(
                "{} anchored at {} but oracle says {:?}",
                block.id,
                block.anchor,
                pred.block_anchors.get(&block.id)
            ));
        }
        let done_now = !block.is_active();
        if pred.delivered.contains(&block.id) != done_now {
            return Some(format!("{} delivery mismatch", block.id));
        }
        if report.blocks.get(&block.id).map(|o| o.moved) != Some(pred.moved[&block.id]) {
            return Some(format!("{} movement report mismatch", block.id));
        }
    }
    None
}
