//! Agent behaviours: the policy contract and its implementations.

mod baseline;
mod policy;
mod scripted;

pub use baseline::BaselinePolicy;
pub use policy::{AgentPolicy, CommitCtx, DraftCtx, PolicyIncident, ProposeCtx, RefineCtx};
pub use scripted::{ScriptStep, ScriptedPolicy};
