//! Deterministic scripted agent for tests and reproducible scenarios.
//!
//! A script is an ordered list of per-room decisions. Each negotiation
//! room the agent participates in consumes one step: the step's proposal
//! and commitment are replayed verbatim, and if the room assigns the
//! agent a task, the step's plan is drafted. An exhausted script is the
//! no-task signal — the agent withdraws for the rest of the episode.

use std::collections::VecDeque;

use super::policy::{AgentPolicy, CommitCtx, DraftCtx, ProposeCtx};
use crate::controller::{PlanInstance, SymbolicAction};
use crate::types::BlockId;

/// One room's worth of scripted decisions.
#[derive(Debug, Clone, Default)]
pub struct ScriptStep {
    /// Task to propose with its rationale; `None` withdraws immediately.
    pub propose: Option<(BlockId, String)>,
    /// Task to commit to; `None` withdraws at the commitment round.
    pub commit: Option<BlockId>,
    /// Actions to draft if assigned. `None` withdraws at draft time.
    pub plan: Option<Vec<SymbolicAction>>,
}

impl ScriptStep {
    /// Propose, commit and plan for one task in a single step.
    pub fn for_task(task: BlockId, rationale: &str, plan: Vec<SymbolicAction>) -> Self {
        Self {
            propose: Some((task, rationale.to_string())),
            commit: Some(task),
            plan: Some(plan),
        }
    }
}

/// Replays a fixed script, one step per negotiation room.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPolicy {
    pending: VecDeque<ScriptStep>,
    current: Option<ScriptStep>,
}

impl ScriptedPolicy {
    pub fn new(steps: Vec<ScriptStep>) -> Self {
        Self { pending: steps.into(), current: None }
    }
}

impl AgentPolicy for ScriptedPolicy {
    fn propose(&mut self, _ctx: &ProposeCtx<'_>) -> Option<(BlockId, String)> {
        // A new room starts a new step; an empty script means no task.
        self.current = self.pending.pop_front();
        self.current.as_ref()?.propose.clone()
    }

    fn commit(&mut self, _ctx: &CommitCtx<'_>) -> Option<BlockId> {
        self.current.as_ref()?.commit
    }

    fn draft(&mut self, ctx: &DraftCtx<'_>) -> Option<PlanInstance> {
        let actions = self.current.as_ref()?.plan.clone()?;
        Some(PlanInstance {
            actions,
            committed_task: ctx.task,
            author: ctx.agent,
            created_at: ctx.tick,
        })
    }
}
