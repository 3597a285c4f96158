//! The behavioural contract every agent implementation satisfies.
//!
//! A policy is consulted at four points: proposing a task in the
//! negotiation room, committing to one, drafting a symbolic plan for the
//! committed task, and refining that draft against retrieved experience.
//! Drafting deliberately receives no historical data — exploration happens
//! at draft time, exploitation at refine time.

use crate::controller::PlanInstance;
use crate::env::SymbolicObservation;
use crate::negotiation::{NegotiationBuffer, TaskMapping};
use crate::types::{AgentId, BlockId, Tick};
use crate::world_model::{RetrievalResult, TeamSizeStats};

/// Context for a proposal-round invocation.
#[derive(Debug)]
pub struct ProposeCtx<'a> {
    pub agent: AgentId,
    /// Shared buffer as visible at this agent's turn (earlier speakers
    /// only).
    pub buffer: &'a NegotiationBuffer,
    /// Rendered historical-performance text for prompt embedding.
    pub guidebook: &'a str,
}

/// Context for a commitment-round invocation.
#[derive(Debug)]
pub struct CommitCtx<'a> {
    pub agent: AgentId,
    pub buffer: &'a NegotiationBuffer,
    /// Team-size statistics for the proposed tasks.
    pub team_stats: &'a [TeamSizeStats],
    pub guidebook: &'a str,
}

/// Context for drafting a plan after a task assignment. Carries no
/// historical data by construction.
#[derive(Debug)]
pub struct DraftCtx<'a> {
    pub agent: AgentId,
    /// The task this agent was assigned.
    pub task: BlockId,
    pub tick: Tick,
    pub observation: &'a SymbolicObservation,
    /// The full room outcome, for awareness of teammates.
    pub mapping: &'a TaskMapping,
    /// Agents working on `task` (this room's assignees plus any already
    /// executing on it). Used to size rendezvous actions.
    pub team_size: u32,
}

/// Context for refining a drafted plan against retrieved experience.
#[derive(Debug)]
pub struct RefineCtx<'a> {
    pub agent: AgentId,
    pub observation: &'a SymbolicObservation,
    /// Ranked prototypes and instances for the committed task.
    pub retrieval: &'a RetrievalResult,
    /// Rendered plan-library text for prompt embedding.
    pub library: &'a str,
}

/// A noteworthy incident raised inside a policy call, surfaced to the
/// trace (e.g. an external completion service failing over to the
/// baseline behaviour).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyIncident {
    /// Which entry point was being served ("propose", "commit", "draft",
    /// "refine").
    pub entry_point: String,
    pub detail: String,
}

/// Four-entry-point agent behaviour. Returning `None` from `propose`,
/// `commit` or `draft` is the no-task signal: the agent withdraws and
/// idles for the rest of the episode.
pub trait AgentPolicy: Send {
    /// Choose a task to propose, with a free-text rationale.
    fn propose(&mut self, ctx: &ProposeCtx<'_>) -> Option<(BlockId, String)>;

    /// Choose a task to commit to (any active task, proposed or not).
    fn commit(&mut self, ctx: &CommitCtx<'_>) -> Option<BlockId>;

    /// Draft a plan for the assigned task from the observation alone.
    fn draft(&mut self, ctx: &DraftCtx<'_>) -> Option<PlanInstance>;

    /// Revise a drafted plan in light of retrieved experience. The
    /// default keeps the draft unchanged.
    fn refine(&mut self, draft: PlanInstance, ctx: &RefineCtx<'_>) -> PlanInstance {
        let _ = ctx;
        draft
    }

    /// Drain incidents accumulated since the last call. The caller turns
    /// these into trace events.
    fn take_incidents(&mut self) -> Vec<PolicyIncident> {
        Vec::new()
    }
}
