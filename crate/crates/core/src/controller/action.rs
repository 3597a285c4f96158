use std::fmt;

use serde::{Deserialize, Serialize};

use crate::types::{BlockId, Dir};

/// The five macro-actions plans are written in. Numeric parameters must be
/// at least 1; `side` is one of N/S/E/W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolicAction {
    /// Wait until `count` agents are idle, or fail after `timeout` ticks.
    WaitAgents { count: u32, timeout: u64 },
    /// Navigate to `side` of the block, then wait until `count` agents
    /// stand on that side's alignment cells; fail after `timeout` ticks.
    Rendezvous { block: BlockId, side: Dir, count: u32, timeout: u64 },
    /// Navigate to the nearest free alignment cell on `side` of the block.
    MoveToBlock { block: BlockId, side: Dir },
    /// Push the block `steps` confirmed cells; fails after `steps`
    /// consecutive ticks without block movement.
    Push { block: BlockId, steps: u32 },
    /// Retreat `steps` cells away from the block's nearest face.
    YieldFace { block: BlockId, steps: u32 },
}

impl SymbolicAction {
    /// Grammar name; also the prototype key element for the world model.
    pub fn name(&self) -> &'static str {
        match self {
            SymbolicAction::WaitAgents { .. } => "WaitAgents",
            SymbolicAction::Rendezvous { .. } => "Rendezvous",
            SymbolicAction::MoveToBlock { .. } => "MoveToBlock",
            SymbolicAction::Push { .. } => "Push",
            SymbolicAction::YieldFace { .. } => "YieldFace",
        }
    }

    /// Target block, if the action has one (`WaitAgents` does not).
    pub fn block(&self) -> Option<BlockId> {
        match *self {
            SymbolicAction::WaitAgents { .. } => None,
            SymbolicAction::Rendezvous { block, .. }
            | SymbolicAction::MoveToBlock { block, .. }
            | SymbolicAction::Push { block, .. }
            | SymbolicAction::YieldFace { block, .. } => Some(block),
        }
    }
}

/// Canonical text form, the wire format for plans and traces:
/// `MoveToBlock(block_1, N)`, `Push(block_1, steps=5)`,
/// `Rendezvous(block_1, N, count=2, timeout=10)`,
/// `WaitAgents(count=2, timeout=10)`, `YieldFace(block_1, steps=3)`.
impl fmt::Display for SymbolicAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicAction::WaitAgents { count, timeout } => {
                write!(f, "WaitAgents(count={count}, timeout={timeout})")
            }
            SymbolicAction::Rendezvous { block, side, count, timeout } => {
                write!(f, "Rendezvous({block}, {side}, count={count}, timeout={timeout})")
            }
            SymbolicAction::MoveToBlock { block, side } => {
                write!(f, "MoveToBlock({block}, {side})")
            }
            SymbolicAction::Push { block, steps } => write!(f, "Push({block}, steps={steps})"),
            SymbolicAction::YieldFace { block, steps } => {
                write!(f, "YieldFace({block}, steps={steps})")
            }
        }
    }
}

/// Why a line of plan text (or a whole plan) was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    /// Action name outside the vocabulary.
    BadAction(String),
    /// Side token that is not N/S/E/W.
    BadSide(String),
    /// Missing, duplicate, non-numeric, or zero-valued parameter.
    BadParam(String),
    /// Block id that does not exist in the environment.
    UnknownBlock(BlockId),
    /// Block exists but is already DONE.
    TargetDone(BlockId),
    /// Action targets a block other than the plan's committed task.
    TaskMismatch { expected: BlockId, found: BlockId },
    EmptyPlan,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::BadAction(s) => write!(f, "BAD_ACTION `{s}`"),
            RejectReason::BadSide(s) => write!(f, "BAD_SIDE `{s}`"),
            RejectReason::BadParam(s) => write!(f, "BAD_PARAM {s}"),
            RejectReason::UnknownBlock(b) => write!(f, "UNKNOWN_BLOCK {b}"),
            RejectReason::TargetDone(b) => write!(f, "TARGET_DONE {b}"),
            RejectReason::TaskMismatch { expected, found } => {
                write!(f, "TASK_MISMATCH expected {expected}, found {found}")
            }
            RejectReason::EmptyPlan => write!(f, "EMPTY_PLAN"),
        }
    }
}

/// A rejected plan position (0-based action index) and the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub position: usize,
    pub reason: RejectReason,
}

/// Timeout (in ticks) filled in when an action omits `timeout=`.
pub const DEFAULT_TIMEOUT: u64 = 10;

/// Parse one action in canonical form. `default_timeout` fills in an
/// omitted `timeout=` argument.
pub fn parse_action(text: &str, default_timeout: u64) -> Result<SymbolicAction, RejectReason> {
    let text = text.trim();
    let (name, rest) = text
        .split_once('(')
        .ok_or_else(|| RejectReason::BadAction(text.to_string()))?;
    let args_text = rest
        .strip_suffix(')')
        .ok_or_else(|| RejectReason::BadParam("missing closing parenthesis".into()))?;
    let name = name.trim();
    let mut positional: Vec<&str> = Vec::new();
    let mut named: Vec<(&str, &str)> = Vec::new();
    for raw in args_text.split(',') {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        match raw.split_once('=') {
            Some((k, v)) => named.push((k.trim(), v.trim())),
            None => positional.push(raw),
        }
    }

    let numeric = |key: &str, default: Option<u64>| -> Result<u64, RejectReason> {
        let hits: Vec<&str> =
            named.iter().filter(|(k, _)| *k == key).map(|(_, v)| *v).collect();
        match hits.as_slice() {
            [] => default.ok_or_else(|| RejectReason::BadParam(format!("missing `{key}`"))),
            [one] => {
                let v: u64 = one
                    .parse()
                    .map_err(|_| RejectReason::BadParam(format!("{key}={one}")))?;
                if v == 0 {
                    return Err(RejectReason::BadParam(format!("{key} must be positive")));
                }
                Ok(v)
            }
            _ => Err(RejectReason::BadParam(format!("duplicate `{key}`"))),
        }
    };
    let block_arg = |i: usize| -> Result<BlockId, RejectReason> {
        let raw = positional
            .get(i)
            .ok_or_else(|| RejectReason::BadParam("missing block id".into()))?;
        raw.parse::<BlockId>().map_err(|_| RejectReason::BadParam(format!("block id `{raw}`")))
    };
    let side_arg = |i: usize| -> Result<Dir, RejectReason> {
        let raw = positional
            .get(i)
            .ok_or_else(|| RejectReason::BadParam("missing side".into()))?;
        let cleaned = raw.trim_matches(|c| c == '"' || c == '\'');
        cleaned.parse::<Dir>().map_err(|_| RejectReason::BadSide(raw.to_string()))
    };
    let expect_args = |pos: usize, allowed: &[&str]| -> Result<(), RejectReason> {
        if positional.len() != pos {
            return Err(RejectReason::BadParam(format!(
                "expected {pos} positional arguments, found {}",
                positional.len()
            )));
        }
        if let Some((k, _)) = named.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(RejectReason::BadParam(format!("unexpected `{k}`")));
        }
        Ok(())
    };

    match name {
        "WaitAgents" => {
            expect_args(0, &["count", "timeout"])?;
            Ok(SymbolicAction::WaitAgents {
                count: numeric("count", None)? as u32,
                timeout: numeric("timeout", Some(default_timeout))?,
            })
        }
        "Rendezvous" => {
            expect_args(2, &["count", "timeout"])?;
            Ok(SymbolicAction::Rendezvous {
                block: block_arg(0)?,
                side: side_arg(1)?,
                count: numeric("count", None)? as u32,
                timeout: numeric("timeout", Some(default_timeout))?,
            })
        }
        "MoveToBlock" => {
            expect_args(2, &[])?;
            Ok(SymbolicAction::MoveToBlock { block: block_arg(0)?, side: side_arg(1)? })
        }
        "Push" => {
            expect_args(1, &["steps"])?;
            Ok(SymbolicAction::Push { block: block_arg(0)?, steps: numeric("steps", None)? as u32 })
        }
        "YieldFace" => {
            expect_args(1, &["steps"])?;
            Ok(SymbolicAction::YieldFace {
                block: block_arg(0)?,
                steps: numeric("steps", None)? as u32,
            })
        }
        other => Err(RejectReason::BadAction(other.to_string())),
    }
}
