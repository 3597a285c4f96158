//! Grid world with pushable weighted blocks.
//!
//! Core rules:
//! - Blocks are `w x w` squares of weight `w`. A block advances one cell in
//!   direction `d` iff at least `w` agents push simultaneously on the face
//!   opposite `d`, each standing on an alignment cell of that face.
//! - Agent moves resolve before pushes, in ascending agent id order; pushes
//!   resolve per block in ascending block id order.
//! - A block whose footprint lies entirely inside the goal band (the
//!   easternmost `goal_band_width` columns) becomes DONE and leaves the grid.
//!
//! The environment is deterministic: identical state and joint action yield
//! an identical successor.

mod config;
mod observe;
mod state;
mod step;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

#[cfg(test)]
mod props;

pub use config::{BlockSpec, EnvConfig};
pub use observe::{
    observe_symbolic, observe_tensor, BlockObservation, ObservationTensor,
    SymbolicObservation, TerminalReason,
};
pub use state::{init_env, AgentBody, AgentPhase, Block, BlockStatus, GridState};
pub use step::{env_step, joint_action, AgentOutcome, BlockOutcome, PrimitiveAction, StepReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    ConfigInvalid(String),
    #[error("episode is over (tick = max_steps); no further steps accepted")]
    EpisodeOver,
}

/// Returns `Some(reason)` when the episode is over: ALL_DONE as soon as no
/// ACTIVE block remains, otherwise TIMEOUT once `tick` reaches `max_steps`.
pub fn is_terminal(state: &GridState) -> Option<TerminalReason> {
    if state.active_blocks().next().is_none() {
        Some(TerminalReason::AllDone)
    } else if state.tick >= state.config.max_steps {
        Some(TerminalReason::Timeout)
    } else {
        None
    }
}
