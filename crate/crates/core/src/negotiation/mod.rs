//! Two-round negotiation protocol producing agent-task assignments.
//!
//! Idle agents gather in a communication room, review a guidebook of
//! historical task performance, then speak in ascending id order: one
//! proposal each, one commitment each. Tasks that gather enough backers
//! (weight-sized quorum, counting agents already executing) are
//! finalized; everyone else stays idle and retries, with a forced
//! assignment after repeated failure so progress never stalls.

mod buffer;
mod guidebook;
mod room;

pub use buffer::{BufferEntry, EntryKind, NegotiationBuffer, TaskMapping};
pub use guidebook::render_guidebook;
pub use room::{
    commitment_round, open_room, proposal_round, run_room, team_size_stats, PolicyMap, QuorumCtx,
    QuorumTracker, RoomOutcome, FORCE_AFTER_FAILED_ROOMS,
};
