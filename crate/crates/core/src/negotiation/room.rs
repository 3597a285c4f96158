//! The communication-room protocol: proposals, commitments, quorum.
//!
//! When one or more agents are idle the environment pauses and a room
//! opens. Participants speak strictly in ascending id order, first each
//! making one proposal, then each making one commitment; every utterance
//! is appended to a shared buffer so later speakers see earlier ones but
//! never the reverse. A task is finalized only when enough agents stand
//! behind it: committed participants plus agents already executing on the
//! task must reach the block's weight. Rooms cost wall-clock time but no
//! environment steps.

use std::collections::{BTreeMap, BTreeSet};

use crate::agents::{AgentPolicy, CommitCtx, PolicyIncident, ProposeCtx};
use crate::clock::SimClock;
use crate::env::{observe_symbolic, GridState};
use crate::trace::{EventKind, TraceEvent, ViolationStage};
use crate::types::{AgentId, BlockId, Tick};
use crate::world_model::{TeamSizeStats, WorldModelGraph};

use super::buffer::{BufferEntry, EntryKind, NegotiationBuffer, TaskMapping};
use super::guidebook::render_guidebook;

/// After this many consecutive quorum failures for the same agent set,
/// the room force-assigns rather than looping forever.
pub const FORCE_AFTER_FAILED_ROOMS: u32 = 3;

/// One boxed policy per agent, keyed by id.
pub type PolicyMap = BTreeMap<AgentId, Box<dyn AgentPolicy>>;

/// Inputs to quorum validation: block weights plus how many agents are
/// already mid-plan on each task. Counting executors lets a late-arriving
/// idle agent join an in-progress heavy block instead of stranding it.
#[derive(Debug, Clone, Default)]
pub struct QuorumCtx {
    pub weights: BTreeMap<BlockId, u32>,
    pub executing: BTreeMap<BlockId, u32>,
}

impl QuorumCtx {
    /// Weights from the current state plus executor counts from the
    /// caller.
    pub fn new(state: &GridState, executing: BTreeMap<BlockId, u32>) -> Self {
        let weights = state.active_blocks().map(|b| (b.id, b.weight)).collect();
        Self { weights, executing }
    }

    fn satisfied(&self, task: BlockId, committed: u32) -> bool {
        let weight = self.weights.get(&task).copied().unwrap_or(u32::MAX);
        committed + self.executing.get(&task).copied().unwrap_or(0) >= weight
    }
}

/// Detects repeated quorum failure for an unchanged agent set.
#[derive(Debug, Clone, Default)]
pub struct QuorumTracker {
    failing_set: Vec<AgentId>,
    streak: u32,
}

impl QuorumTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one room's unassigned set. Returns true when this room is
    /// the latest of `FORCE_AFTER_FAILED_ROOMS` consecutive failures for
    /// the same set, in which case the caller must force-assign and the
    /// tracker resets.
    pub fn observe(&mut self, unassigned: &[AgentId]) -> bool {
        if unassigned.is_empty() {
            self.failing_set.clear();
            self.streak = 0;
            return false;
        }
        let mut set = unassigned.to_vec();
        set.sort_unstable();
        if set == self.failing_set {
            self.streak += 1;
        } else {
            self.failing_set = set;
            self.streak = 1;
        }
        if self.streak >= FORCE_AFTER_FAILED_ROOMS {
            self.failing_set.clear();
            self.streak = 0;
            true
        } else {
            false
        }
    }
}

/// Everything a finished room produced.
#[derive(Debug)]
pub struct RoomOutcome {
    pub buffer: NegotiationBuffer,
    pub mapping: TaskMapping,
    /// Agents that signalled no-task and idle out the episode.
    pub withdrawn: Vec<AgentId>,
    /// The rendered guidebook shown to every participant.
    pub guidebook: String,
    /// True when assignments were forced after repeated quorum failure.
    pub forced: bool,
    pub events: Vec<TraceEvent>,
}

/// Open a room: snapshot the observation and pull a historical report for
/// every ACTIVE task. `idle` is normalized to ascending order; the caller
/// keeps the environment paused until the room closes.
pub fn open_room(
    idle: &[AgentId],
    tick: Tick,
    world: &WorldModelGraph,
    state: &GridState,
) -> NegotiationBuffer {
    debug_assert!(!idle.is_empty(), "a room needs at least one participant");
    let observation = observe_symbolic(state);
    let task_reports =
        state.active_blocks().map(|b| (b.id, world.task_stats(b.id))).collect();
    NegotiationBuffer::new(tick, observation, task_reports)
}

/// Team-size statistics for each listed task, in ascending task order.
pub fn team_size_stats(world: &WorldModelGraph, tasks: &BTreeSet<BlockId>) -> Vec<TeamSizeStats> {
    tasks.iter().map(|&task| world.team_size_stats(task)).collect()
}

fn drain_incidents(
    policy: &mut Box<dyn AgentPolicy>,
    agent: AgentId,
    tick: Tick,
    at: f64,
    events: &mut Vec<TraceEvent>,
) {
    for PolicyIncident { entry_point, detail } in policy.take_incidents() {
        events.push(TraceEvent::by(tick, at, agent, EventKind::LlmFallback { entry_point, detail }));
    }
}

/// Substitute target when a policy names an unknown or DONE task: the
/// nearest-to-goal ACTIVE block.
fn fallback_task(buffer: &NegotiationBuffer) -> Option<BlockId> {
    buffer.observation.nearest_to_goal().map(|b| b.id)
}

/// Validate a named task, substituting the fallback and logging a
/// protocol violation if it is not ACTIVE. Returns `None` when there is
/// nothing valid to substitute.
fn checked_task(
    task: BlockId,
    agent: AgentId,
    stage: ViolationStage,
    buffer: &NegotiationBuffer,
    at: f64,
    events: &mut Vec<TraceEvent>,
) -> Option<BlockId> {
    if buffer.observation.block(task).is_some() {
        return Some(task);
    }
    let substitute = fallback_task(buffer);
    let detail = match substitute {
        Some(sub) => format!("{agent} named {task}, which is not an ACTIVE block; substituted {sub}"),
        None => format!("{agent} named {task}, and no ACTIVE block remains to substitute"),
    };
    events.push(TraceEvent::by(
        buffer.tick,
        at,
        agent,
        EventKind::ProtocolViolation { stage, detail },
    ));
    substitute
}

/// Run the proposal round over `order`, appending one PROPOSAL entry per
/// participating agent. Returns the agents that withdrew (no-task).
pub fn proposal_round(
    buffer: &mut NegotiationBuffer,
    order: &[AgentId],
    policies: &mut PolicyMap,
    guidebook: &str,
    clock: &mut SimClock,
    events: &mut Vec<TraceEvent>,
) -> Vec<AgentId> {
    let mut withdrawn = Vec::new();
    for &agent in order {
        let Some(policy) = policies.get_mut(&agent) else {
            withdrawn.push(agent);
            continue;
        };
        let decision = {
            let ctx = ProposeCtx { agent, buffer, guidebook };
            policy.propose(&ctx)
        };
        let at = clock.policy_call();
        drain_incidents(policy, agent, buffer.tick, at, events);
        let Some((named, rationale)) = decision else {
            withdrawn.push(agent);
            continue;
        };
        let Some(task) = checked_task(named, agent, ViolationStage::Proposal, buffer, at, events)
        else {
            withdrawn.push(agent);
            continue;
        };
        let rationale = if task == named {
            rationale
        } else {
            format!("protocol fallback for invalid proposal of {named}")
        };
        buffer.push(BufferEntry { agent, kind: EntryKind::Proposal, task, rationale: rationale.clone() });
        events.push(TraceEvent::by(buffer.tick, at, agent, EventKind::Proposal { task, rationale }));
    }
    withdrawn
}

/// Run the commitment round over `order` (agents still participating
/// after proposals), then validate quorum. Commitments may target any
/// ACTIVE task, proposed or not.
pub fn commitment_round(
    buffer: &mut NegotiationBuffer,
    order: &[AgentId],
    policies: &mut PolicyMap,
    team_stats: &[TeamSizeStats],
    guidebook: &str,
    quorum: &QuorumCtx,
    clock: &mut SimClock,
    events: &mut Vec<TraceEvent>,
) -> (TaskMapping, Vec<AgentId>) {
    let mut withdrawn = Vec::new();
    for &agent in order {
        let Some(policy) = policies.get_mut(&agent) else {
            withdrawn.push(agent);
            continue;
        };
        let decision = {
            let ctx = CommitCtx { agent, buffer, team_stats, guidebook };
            policy.commit(&ctx)
        };
        let at = clock.policy_call();
        drain_incidents(policy, agent, buffer.tick, at, events);
        let Some(named) = decision else {
            withdrawn.push(agent);
            continue;
        };
        let Some(task) = checked_task(named, agent, ViolationStage::Commit, buffer, at, events)
        else {
            withdrawn.push(agent);
            continue;
        };
        buffer.push(BufferEntry { agent, kind: EntryKind::Commit, task, rationale: String::new() });
        events.push(TraceEvent::by(buffer.tick, at, agent, EventKind::Commit { task }));
    }

    let mut by_task: BTreeMap<BlockId, Vec<AgentId>> = BTreeMap::new();
    for entry in buffer.entries.iter().filter(|e| e.kind == EntryKind::Commit) {
        by_task.entry(entry.task).or_default().push(entry.agent);
    }
    let mut mapping = TaskMapping::default();
    for (task, agents) in by_task {
        if quorum.satisfied(task, agents.len() as u32) {
            mapping.finalized.push(task);
            for agent in agents {
                mapping.assignments.insert(agent, task);
            }
        } else {
            mapping.unassigned.extend(agents);
        }
    }
    mapping.unassigned.sort_unstable();
    (mapping, withdrawn)
}

/// Lightest ACTIVE block, ties to the lowest id — the forced-assignment
/// target.
fn lightest_active(state: &GridState) -> Option<BlockId> {
    state.active_blocks().min_by_key(|b| (b.weight, b.id)).map(|b| b.id)
}

/// Run a complete room: open, guidebook, proposal round, commitment
/// round, quorum, and — after repeated failure — forced assignment.
/// Emits the full event stream including COMM_OPEN and ROOM_CLOSE.
pub fn run_room(
    idle: &[AgentId],
    state: &GridState,
    world: &WorldModelGraph,
    policies: &mut PolicyMap,
    quorum: &QuorumCtx,
    tracker: &mut QuorumTracker,
    clock: &mut SimClock,
) -> RoomOutcome {
    let mut order = idle.to_vec();
    order.sort_unstable();
    order.dedup();
    let tick = state.tick;

    let mut buffer = open_room(&order, tick, world, state);
    let mut events = vec![TraceEvent::room(
        tick,
        clock.now(),
        EventKind::CommOpen { participants: order.clone() },
    )];

    let active_tasks: BTreeSet<BlockId> = buffer.task_reports.keys().copied().collect();
    let guidebook = render_guidebook(&buffer, &team_size_stats(world, &active_tasks), order.len());

    let mut withdrawn =
        proposal_round(&mut buffer, &order, policies, &guidebook, clock, &mut events);
    let commit_order: Vec<AgentId> =
        order.iter().copied().filter(|a| !withdrawn.contains(a)).collect();

    let proposed: BTreeSet<BlockId> = buffer
        .entries
        .iter()
        .filter(|e| e.kind == EntryKind::Proposal)
        .map(|e| e.task)
        .collect();
    let commit_stats = team_size_stats(world, &proposed);

    let (mut mapping, late_withdrawn) = commitment_round(
        &mut buffer,
        &commit_order,
        policies,
        &commit_stats,
        &guidebook,
        quorum,
        clock,
        &mut events,
    );
    withdrawn.extend(late_withdrawn);
    withdrawn.sort_unstable();

    let mut forced = false;
    if tracker.observe(&mapping.unassigned) {
        if let Some(target) = lightest_active(state) {
            for agent in std::mem::take(&mut mapping.unassigned) {
                mapping.assignments.insert(agent, target);
            }
            if !mapping.finalized.contains(&target) {
                mapping.finalized.push(target);
            }
            forced = true;
        }
    }

    events.push(TraceEvent::room(
        tick,
        clock.now(),
        EventKind::RoomClose {
            entries: buffer.entries.clone(),
            assignments: mapping.assignments.clone(),
            unassigned: mapping.unassigned.clone(),
            forced,
        },
    ));

    RoomOutcome { buffer, mapping, withdrawn, guidebook, forced, events }
}
