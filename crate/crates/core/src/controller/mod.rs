//! Symbolic macro-action layer between negotiated plans and grid
//! primitives.
//!
//! Plans are short programs over five symbolic actions (wait, rendezvous,
//! move-to-block, push, yield-face) written in a line-oriented text
//! grammar. The [`Executor`] runs one plan for one agent: each tick it
//! checks the current action's precondition, decomposes it into a single
//! primitive for the environment, and afterwards accounts the step report
//! for progress, stalls and completion.

mod action;
mod executor;
mod pathing;
mod plan;

pub use action::{parse_action, RejectReason, Rejection, SymbolicAction, DEFAULT_TIMEOUT};
pub use executor::{
    check_precondition, ActionOutcome, ExecMode, Executor, FailReason, Precondition, Roster,
};
pub use pathing::{free_alignment_cells, shortest_step, PathStep};
pub use plan::{validate_plan, PlanInstance};
