use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::SymbolicObservation;
use crate::types::{AgentId, BlockId, Tick};
use crate::world_model::TaskStats;

/// What kind of message an agent contributed to the negotiation buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntryKind {
    Proposal,
    Commit,
}

/// One utterance in a negotiation room, visible to every later speaker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferEntry {
    pub agent: AgentId,
    pub kind: EntryKind,
    pub task: BlockId,
    /// Free-text justification; empty for terse policies.
    pub rationale: String,
}

/// Shared context assembled when a negotiation room opens. Entries are
/// append-only: each speaker sees everything said before its own turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationBuffer {
    pub tick: Tick,
    pub observation: SymbolicObservation,
    /// Historical performance per known task, from the world model.
    pub task_reports: BTreeMap<BlockId, TaskStats>,
    pub entries: Vec<BufferEntry>,
}

impl NegotiationBuffer {
    pub fn new(
        tick: Tick,
        observation: SymbolicObservation,
        task_reports: BTreeMap<BlockId, TaskStats>,
    ) -> Self {
        Self { tick, observation, task_reports, entries: Vec::new() }
    }

    pub fn push(&mut self, entry: BufferEntry) {
        self.entries.push(entry);
    }

    /// Latest proposal made by `agent`, if any.
    pub fn proposal_of(&self, agent: AgentId) -> Option<BlockId> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.agent == agent && e.kind == EntryKind::Proposal)
            .map(|e| e.task)
    }

    /// Text rendering used when handing the buffer to a language-model
    /// policy.
    pub fn render_text(&self) -> String {
        if self.entries.is_empty() {
            return "(no messages yet)".to_string();
        }
        self.entries
            .iter()
            .map(|e| {
                let verb = match e.kind {
                    EntryKind::Proposal => "proposes",
                    EntryKind::Commit => "commits to",
                };
                if e.rationale.is_empty() {
                    format!("{} {} {}", e.agent, verb, e.task)
                } else {
                    format!("{} {} {}: {}", e.agent, verb, e.task, e.rationale)
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Outcome of a negotiation room: which agents work on which task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TaskMapping {
    pub assignments: BTreeMap<AgentId, BlockId>,
    /// Tasks that reached quorum this round.
    pub finalized: Vec<BlockId>,
    /// Participants left without a finalized task.
    pub unassigned: Vec<AgentId>,
}

impl TaskMapping {
    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}
