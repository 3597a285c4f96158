use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::controller::{ActionOutcome, PlanInstance, SymbolicAction};
use crate::env::TerminalReason;
use crate::negotiation::BufferEntry;
use crate::types::{AgentId, BlockId, Tick};

/// One record in an episode trace.
///
/// `agent` is `None` for room-level events (negotiation, episode end) and
/// omitted from their serialized form; execution events carry the acting
/// agent's id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: Tick,
    /// Simulated wall-clock seconds since the episode started.
    pub wall_clock: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentId>,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl TraceEvent {
    pub fn room(tick: Tick, wall_clock: f64, kind: EventKind) -> Self {
        Self { tick, wall_clock, agent: None, kind }
    }

    pub fn by(tick: Tick, wall_clock: f64, agent: AgentId, kind: EventKind) -> Self {
        Self { tick, wall_clock, agent: Some(agent), kind }
    }
}

/// Which negotiation or execution stage an event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationStage {
    Proposal,
    Commit,
    Plan,
}

/// Event payloads. The serialized form is tagged by a `kind` field in
/// SCREAMING_SNAKE_CASE, e.g. `{"kind":"ACTION_START",...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    /// A negotiation room opened with these participants.
    CommOpen { participants: Vec<AgentId> },
    /// An agent proposed a task during the proposal round.
    Proposal { task: BlockId, rationale: String },
    /// An agent committed to a task during the commitment round.
    Commit { task: BlockId },
    /// The room closed; includes the full buffer and final mapping.
    RoomClose {
        entries: Vec<BufferEntry>,
        assignments: BTreeMap<AgentId, BlockId>,
        unassigned: Vec<AgentId>,
        /// True when the assignment was forced after repeated failures.
        forced: bool,
    },
    /// An agent begins executing a committed plan.
    PlanStart { plan: PlanInstance },
    ActionStart { index: usize, action: SymbolicAction },
    ActionEnd { index: usize, action: SymbolicAction, outcome: ActionOutcome },
    /// Plan finished or aborted; `outcome` is whether the committed block
    /// was delivered by the time the plan ended.
    PlanEnd { outcome: bool },
    BlockDone { block: BlockId },
    EpisodeEnd { reason: TerminalReason, env_steps: Tick, undelivered: Vec<BlockId> },
    /// A policy reply violated the protocol and a fallback was substituted.
    ProtocolViolation { stage: ViolationStage, detail: String },
    /// A language-model call failed and the baseline policy answered
    /// instead.
    LlmFallback { entry_point: String, detail: String },
}

impl EventKind {
    /// Stable machine name matching the serialized `kind` tag.
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::CommOpen { .. } => "COMM_OPEN",
            EventKind::Proposal { .. } => "PROPOSAL",
            EventKind::Commit { .. } => "COMMIT",
            EventKind::RoomClose { .. } => "ROOM_CLOSE",
            EventKind::PlanStart { .. } => "PLAN_START",
            EventKind::ActionStart { .. } => "ACTION_START",
            EventKind::ActionEnd { .. } => "ACTION_END",
            EventKind::PlanEnd { .. } => "PLAN_END",
            EventKind::BlockDone { .. } => "BLOCK_DONE",
            EventKind::EpisodeEnd { .. } => "EPISODE_END",
            EventKind::ProtocolViolation { .. } => "PROTOCOL_VIOLATION",
            EventKind::LlmFallback { .. } => "LLM_FALLBACK",
        }
    }
}
