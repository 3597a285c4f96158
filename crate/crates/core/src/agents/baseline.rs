//! Zero-shot heuristic agent: always works the block closest to the goal.
//!
//! Every entry point targets the ACTIVE block with the smallest
//! distance-to-goal (ties broken by lowest block id). Plans are two
//! actions long — walk to the block's west face and push it all the way
//! in — and are never refined. With several such agents in play they all
//! converge on the same block, which is exactly the inefficiency a
//! negotiating team is meant to avoid.

use super::policy::{AgentPolicy, CommitCtx, DraftCtx, ProposeCtx};
use crate::controller::{PlanInstance, SymbolicAction};
use crate::env::BlockObservation;
use crate::types::Dir;

/// Stateless nearest-block heuristic.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselinePolicy;

impl BaselinePolicy {
    pub fn new() -> Self {
        Self
    }

    fn rationale(block: &BlockObservation) -> String {
        format!("{} is nearest to the goal band (distance {})", block.id, block.distance_to_goal)
    }
}

impl AgentPolicy for BaselinePolicy {
    fn propose(&mut self, ctx: &ProposeCtx<'_>) -> Option<(crate::types::BlockId, String)> {
        let target = ctx.buffer.observation.nearest_to_goal()?;
        Some((target.id, Self::rationale(target)))
    }

    fn commit(&mut self, ctx: &CommitCtx<'_>) -> Option<crate::types::BlockId> {
        Some(ctx.buffer.observation.nearest_to_goal()?.id)
    }

    fn draft(&mut self, ctx: &DraftCtx<'_>) -> Option<PlanInstance> {
        let block = ctx.observation.block(ctx.task)?;
        // Goal band is the east edge, so push from the opposite (west) face.
        let actions = vec![
            SymbolicAction::MoveToBlock { block: ctx.task, side: Dir::W },
            SymbolicAction::Push { block: ctx.task, steps: block.distance_to_goal.max(1) },
        ];
        Some(PlanInstance {
            actions,
            committed_task: ctx.task,
            author: ctx.agent,
            created_at: ctx.tick,
        })
    }
}
