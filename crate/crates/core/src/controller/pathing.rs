use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::env::GridState;
use crate::types::{Dir, Pos};

/// Outcome of a shortest-path query over free cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStep {
    /// Already standing on a goal cell.
    AlreadyThere,
    /// First move of a shortest path, plus the remaining distance.
    Step(Dir, u32),
    Unreachable,
}

/// BFS from `from` to the nearest cell in `goals`, treating agents and
/// ACTIVE block footprints as obstacles. Neighbour expansion follows the
/// canonical N,S,E,W order, which fixes all tie-breaks; paths are
/// recomputed every tick, so moving obstacles are handled greedily.
pub fn shortest_step(state: &GridState, from: Pos, goals: &BTreeSet<Pos>) -> PathStep {
    if goals.contains(&from) {
        return PathStep::AlreadyThere;
    }
    let passable = |p: Pos| p == from || state.cell_free(p);
    let mut prev: HashMap<Pos, Pos> = HashMap::new();
    let mut seen: BTreeSet<Pos> = BTreeSet::new();
    let mut queue: VecDeque<(Pos, u32)> = VecDeque::new();
    seen.insert(from);
    queue.push_back((from, 0));
    while let Some((cell, dist)) = queue.pop_front() {
        for dir in Dir::ALL {
            let next = cell.step(dir);
            if seen.contains(&next) || !passable(next) {
                continue;
            }
            seen.insert(next);
            prev.insert(next, cell);
            if goals.contains(&next) {
                // Walk back to the first step out of `from`.
                let mut at = next;
                while prev[&at] != from {
                    at = prev[&at];
                }
                let first = Dir::ALL
                    .into_iter()
                    .find(|d| from.step(*d) == at)
                    .expect("adjacent first step");
                return PathStep::Step(first, dist + 1);
            }
            queue.push_back((next, dist + 1));
        }
    }
    PathStep::Unreachable
}

/// Free alignment cells of `side` of `block`: candidate standing positions
/// for pushing or rendezvous. Cells under other agents are excluded; the
/// querying agent's own cell stays eligible.
pub fn free_alignment_cells(state: &GridState, block: crate::types::BlockId, side: Dir, me: Pos) -> BTreeSet<Pos> {
    let Some(b) = state.block(block).filter(|b| b.is_active()) else {
        return BTreeSet::new();
    };
    b.alignment_cells(side)
        .into_iter()
        .filter(|&c| c == me || state.cell_free(c))
        .collect()
}
