//! Cooperative block-pushing simulation library.
//!
//! A team of agents on a shared grid must deliver weighted blocks into a
//! goal band; a block of weight `w` only moves when `w` agents push the
//! same face on the same tick. The library provides:
//!
//! - [`env`]: the deterministic grid environment and observations
//! - [`controller`]: symbolic macro-actions, the plan grammar, and the
//!   per-agent executor that decomposes plans into grid primitives
//! - [`negotiation`]: the two-round shared-buffer protocol (proposals,
//!   commitments, quorum validation) and the session guidebook text
//! - [`world_model`]: the episodic graph memory (episodes, tasks, plan
//!   prototypes, plan instances) with stats retrieval and rendering
//! - [`agents`]: pluggable decision policies (baseline heuristic, scripted
//!   replay, JSON-over-HTTP language-model adapter)
//! - [`trace`]: structured event traces, derived metrics, SVG timelines
//!
//! Everything outside the optional LLM adapter is deterministic: equal
//! configs and seeds reproduce byte-identical traces.

pub mod agents;
pub mod clock;
pub mod controller;
pub mod env;
pub mod negotiation;
pub mod trace;
pub mod types;
pub mod world_model;

pub use types::{AgentId, BlockId, Dir, Pos, Tick};
