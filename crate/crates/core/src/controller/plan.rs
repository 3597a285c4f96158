use serde::{Deserialize, Serialize};

use super::action::{parse_action, RejectReason, Rejection, SymbolicAction};
use crate::env::GridState;
use crate::types::{AgentId, BlockId, Tick};

/// An ordered macro-action sequence committed to one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanInstance {
    pub actions: Vec<SymbolicAction>,
    pub committed_task: BlockId,
    pub author: AgentId,
    pub created_at: Tick,
}

impl PlanInstance {
    /// Canonical multi-line text form, one action per line.
    pub fn render_lines(&self) -> String {
        self.actions.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("\n")
    }

    /// Parse plan text line by line. Unparseable lines are dropped and
    /// reported; an entirely unusable text yields an empty action list.
    pub fn parse_lines(
        text: &str,
        committed_task: BlockId,
        author: AgentId,
        created_at: Tick,
        default_timeout: u64,
    ) -> (PlanInstance, Vec<Rejection>) {
        let mut actions = Vec::new();
        let mut rejections = Vec::new();
        for (position, line) in
            text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate()
        {
            match parse_action(line, default_timeout) {
                Ok(a) => actions.push(a),
                Err(reason) => rejections.push(Rejection { position, reason }),
            }
        }
        (PlanInstance { actions, committed_task, author, created_at }, rejections)
    }
}

/// Validate a plan against the current environment: empty plans, references
/// to unknown or DONE blocks, zero-valued parameters, and actions targeting
/// a block other than the committed task are all rejected. An empty vector
/// means the plan is accepted.
pub fn validate_plan(plan: &PlanInstance, state: &GridState) -> Vec<Rejection> {
    let mut rejections = Vec::new();
    if plan.actions.is_empty() {
        rejections.push(Rejection { position: 0, reason: RejectReason::EmptyPlan });
        return rejections;
    }
    for (position, action) in plan.actions.iter().enumerate() {
        let bad_param = |what: String| Rejection {
            position,
            reason: RejectReason::BadParam(what),
        };
        match *action {
            SymbolicAction::WaitAgents { count, timeout } => {
                if count == 0 {
                    rejections.push(bad_param("count must be positive".into()));
                }
                if timeout == 0 {
                    rejections.push(bad_param("timeout must be positive".into()));
                }
            }
            SymbolicAction::Rendezvous { count, timeout, .. } => {
                if count == 0 {
                    rejections.push(bad_param("count must be positive".into()));
                }
                if timeout == 0 {
                    rejections.push(bad_param("timeout must be positive".into()));
                }
            }
            SymbolicAction::Push { steps, .. } | SymbolicAction::YieldFace { steps, .. } => {
                if steps == 0 {
                    rejections.push(bad_param("steps must be positive".into()));
                }
            }
            SymbolicAction::MoveToBlock { .. } => {}
        }
        if let Some(block) = action.block() {
            match state.block(block) {
                None => {
                    rejections.push(Rejection {
                        position,
                        reason: RejectReason::UnknownBlock(block),
                    });
                }
                Some(b) if !b.is_active() => {
                    rejections.push(Rejection {
                        position,
                        reason: RejectReason::TargetDone(block),
                    });
                }
                Some(_) if block != plan.committed_task => {
                    rejections.push(Rejection {
                        position,
                        reason: RejectReason::TaskMismatch {
                            expected: plan.committed_task,
                            found: block,
                        },
                    });
                }
                Some(_) => {}
            }
        }
    }
    rejections
}
