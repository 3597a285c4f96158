use serde::{Deserialize, Serialize};

use crate::controller::action::SymbolicAction;
use crate::controller::pathing::{free_alignment_cells, shortest_step, PathStep};
use crate::controller::plan::PlanInstance;
use crate::env::{AgentPhase, GridState, PrimitiveAction, StepReport};
use crate::trace::{EventKind, TraceEvent};
use crate::types::{AgentId, BlockId, Dir, Pos, Tick};

/// Why a symbolic action failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailReason {
    /// Push exhausted its stall budget while not standing on a face.
    NotAligned,
    /// A wait or navigation deadline elapsed.
    Timeout,
    /// The target block was already delivered or does not exist.
    TargetGone,
    /// No route to any free alignment cell.
    NoPath,
    /// A retreat was impossible: every candidate cell is occupied.
    Blocked,
    /// Push exhausted its stall budget while aligned (not enough force).
    Stalled,
}

impl std::fmt::Display for FailReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            FailReason::NotAligned => "NOT_ALIGNED",
            FailReason::Timeout => "TIMEOUT",
            FailReason::TargetGone => "TARGET_GONE",
            FailReason::NoPath => "NO_PATH",
            FailReason::Blocked => "BLOCKED",
            FailReason::Stalled => "STALLED",
        };
        f.write_str(name)
    }
}

/// Terminal result of one symbolic action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ActionOutcome {
    Success,
    Failed { reason: FailReason },
}

/// Result of a precondition check, evaluated before each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precondition {
    Satisfied,
    Wait,
    Fail(FailReason),
}

/// Executor phase for the current action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecMode {
    /// Emitting movement or push primitives.
    Running,
    /// Holding position until a condition is met or the deadline passes.
    Waiting { deadline: Tick },
    /// Counting down confirmed steps of a push or retreat.
    StepCounting { remaining: u32 },
    /// The plan is finished; only NOOPs are emitted.
    DonePlan,
}

/// Cross-agent facts a precondition check may consult beyond the grid
/// state, currently how many agents are idle and available to help.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Roster {
    pub idle: usize,
}

impl Roster {
    pub fn from_state(state: &GridState) -> Self {
        Self { idle: state.agents.iter().filter(|a| a.phase == AgentPhase::Idle).count() }
    }
}

/// Agents currently standing on an alignment cell of `side`.
fn count_at_side(state: &GridState, block: BlockId, side: Dir) -> usize {
    state
        .block(block)
        .filter(|b| b.is_active())
        .map(|b| {
            b.alignment_cells(side).into_iter().filter(|&c| state.agent_at(c).is_some()).count()
        })
        .unwrap_or(0)
}

/// Directions an agent may retreat along to clear a block face: the outward
/// normal of its nearest face first, then that face's perpendiculars in
/// canonical order.
fn retreat_candidates(state: &GridState, block: BlockId, me: Pos) -> Vec<Dir> {
    let Some(b) = state.block(block).filter(|b| b.is_active()) else {
        return Vec::new();
    };
    let w = i32::try_from(b.weight).expect("small weight");
    let (x0, x1) = (b.anchor.x, b.anchor.x + w - 1);
    let (y0, y1) = (b.anchor.y, b.anchor.y + w - 1);
    let primary = Dir::ALL
        .into_iter()
        .find(|d| match d {
            Dir::N => me.y < y0,
            Dir::S => me.y > y1,
            Dir::E => me.x > x1,
            Dir::W => me.x < x0,
        })
        .unwrap_or(Dir::N);
    let mut dirs = vec![primary];
    dirs.extend(primary.perpendicular());
    dirs
}

/// Pure precondition check for `action`, run by `agent` at `state.tick`.
/// `started_at` is when the action began (None: beginning right now).
pub fn check_precondition(
    action: &SymbolicAction,
    agent: AgentId,
    state: &GridState,
    roster: &Roster,
    started_at: Option<Tick>,
) -> Precondition {
    let me = match state.agent(agent) {
        Some(a) => a.pos,
        None => return Precondition::Fail(FailReason::TargetGone),
    };
    let elapsed = state.tick.saturating_sub(started_at.unwrap_or(state.tick));
    match *action {
        SymbolicAction::WaitAgents { count, timeout } => {
            if roster.idle >= count as usize {
                Precondition::Satisfied
            } else if elapsed >= Tick::from(timeout) {
                Precondition::Fail(FailReason::Timeout)
            } else {
                Precondition::Wait
            }
        }
        SymbolicAction::Rendezvous { block, side, count, timeout } => {
            if state.block(block).filter(|b| b.is_active()).is_none() {
                return Precondition::Fail(FailReason::TargetGone);
            }
            if count_at_side(state, block, side) >= count as usize {
                Precondition::Satisfied
            } else if elapsed >= Tick::from(timeout) {
                Precondition::Fail(FailReason::Timeout)
            } else {
                Precondition::Wait
            }
        }
        SymbolicAction::MoveToBlock { block, side } => {
            let Some(b) = state.block(block).filter(|b| b.is_active()) else {
                return Precondition::Fail(FailReason::TargetGone);
            };
            if b.alignment_cells(side).contains(&me) {
                return Precondition::Satisfied;
            }
            // Liveness bound: no navigation needs more ticks than there
            // are cells in the grid.
            let area = Tick::from(state.config.width) * Tick::from(state.config.height);
            if elapsed > area {
                return Precondition::Fail(FailReason::Timeout);
            }
            let goals = free_alignment_cells(state, block, side, me);
            if goals.is_empty() {
                return Precondition::Fail(FailReason::NoPath);
            }
            match shortest_step(state, me, &goals) {
                PathStep::Unreachable => Precondition::Fail(FailReason::NoPath),
                _ => Precondition::Satisfied,
            }
        }
        SymbolicAction::Push { block, .. } => {
            // Alignment is not a precondition: a shoved-off pusher burns
            // stall budget instead of failing outright.
            if state.block(block).filter(|b| b.is_active()).is_none() {
                Precondition::Fail(FailReason::TargetGone)
            } else {
                Precondition::Satisfied
            }
        }
        SymbolicAction::YieldFace { block, .. } => {
            if state.block(block).filter(|b| b.is_active()).is_none() {
                // Nothing left to clear; the action completes immediately.
                return Precondition::Satisfied;
            }
            let candidates = retreat_candidates(state, block, me);
            let any_free = candidates.iter().any(|&d| state.cell_free(me.step(d)));
            if any_free || elapsed > 0 {
                Precondition::Satisfied
            } else {
                Precondition::Fail(FailReason::Blocked)
            }
        }
    }
}

/// Runs one committed plan for one agent, one symbolic action at a time.
///
/// The driving loop calls, per tick: [`Executor::precheck`] (may fail
/// actions and finish the plan), [`Executor::decompose`] for the primitive
/// to submit, and [`Executor::advance`] with the step report to record
/// progress. All emitted [`TraceEvent`]s are returned to the caller.
#[derive(Debug, Clone)]
pub struct Executor {
    pub plan: PlanInstance,
    index: usize,
    mode: ExecMode,
    /// Tick the current action started at (set by its first precheck).
    started_at: Option<Tick>,
    /// Ticks this action has spent without confirmed progress.
    stall: u32,
    /// Consecutive prechecks that found no path; tolerated twice.
    nopath_strikes: u32,
}

/// Ticks a NO_PATH verdict is retried before the action fails, giving
/// transient blockers (passing agents) time to clear.
const NOPATH_GRACE: u32 = 3;

impl Executor {
    pub fn new(plan: PlanInstance) -> Self {
        Self {
            plan,
            index: 0,
            mode: ExecMode::Running,
            started_at: None,
            stall: 0,
            nopath_strikes: 0,
        }
    }

    pub fn current_action(&self) -> Option<&SymbolicAction> {
        if self.mode == ExecMode::DonePlan {
            None
        } else {
            self.plan.actions.get(self.index)
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }

    pub fn is_done(&self) -> bool {
        self.mode == ExecMode::DonePlan
    }

    /// Whether the committed block is delivered, the plan's outcome.
    fn plan_outcome(&self, state: &GridState) -> bool {
        state.block(self.plan.committed_task).map(|b| !b.is_active()).unwrap_or(false)
    }

    fn initial_mode(action: &SymbolicAction, now: Tick) -> ExecMode {
        match *action {
            SymbolicAction::WaitAgents { timeout, .. }
            | SymbolicAction::Rendezvous { timeout, .. } => {
                ExecMode::Waiting { deadline: now + Tick::from(timeout) }
            }
            SymbolicAction::Push { steps, .. } | SymbolicAction::YieldFace { steps, .. } => {
                ExecMode::StepCounting { remaining: steps }
            }
            SymbolicAction::MoveToBlock { .. } => ExecMode::Running,
        }
    }

    /// Begin the current action if it has not started yet, emitting its
    /// ACTION_START event.
    fn ensure_started(&mut self, now: Tick, clock: f64, agent: AgentId, out: &mut Vec<TraceEvent>) {
        if self.started_at.is_some() || self.mode == ExecMode::DonePlan {
            return;
        }
        let Some(action) = self.plan.actions.get(self.index) else {
            return;
        };
        self.started_at = Some(now);
        self.mode = Self::initial_mode(action, now);
        // Rendezvous navigates first; it only waits once in position.
        if matches!(action, SymbolicAction::Rendezvous { .. }) {
            self.mode = ExecMode::Running;
        }
        out.push(TraceEvent::by(
            now,
            clock,
            agent,
            EventKind::ActionStart { index: self.index, action: action.clone() },
        ));
    }

    /// Close the current action with `outcome` and move to the next one.
    /// Emits ACTION_END, plus PLAN_END if that was the last action.
    fn close_action(
        &mut self,
        outcome: ActionOutcome,
        now: Tick,
        clock: f64,
        agent: AgentId,
        state: &GridState,
        out: &mut Vec<TraceEvent>,
    ) {
        let action = self.plan.actions[self.index].clone();
        out.push(TraceEvent::by(
            now,
            clock,
            agent,
            EventKind::ActionEnd { index: self.index, action, outcome },
        ));
        self.index += 1;
        self.started_at = None;
        self.stall = 0;
        self.nopath_strikes = 0;
        self.mode = ExecMode::Running;
        if self.index >= self.plan.actions.len() {
            self.mode = ExecMode::DonePlan;
            out.push(TraceEvent::by(
                now,
                clock,
                agent,
                EventKind::PlanEnd { outcome: self.plan_outcome(state) },
            ));
        }
    }

    /// Evaluate preconditions before a tick. Failed actions are closed and
    /// the check cascades to the next action, so several ACTION_END events
    /// can share a tick; the cascade can finish the whole plan.
    pub fn precheck(
        &mut self,
        agent: AgentId,
        state: &GridState,
        roster: &Roster,
        clock: f64,
    ) -> Vec<TraceEvent> {
        let now = state.tick;
        let mut out = Vec::new();
        loop {
            if self.mode == ExecMode::DonePlan {
                return out;
            }
            self.ensure_started(now, clock, agent, &mut out);
            let Some(action) = self.plan.actions.get(self.index).cloned() else {
                return out;
            };
            // A rendezvous flips from navigating to holding position the
            // moment it reaches the side.
            if let SymbolicAction::Rendezvous { block, side, timeout, .. } = action {
                let arrived = state
                    .block(block)
                    .filter(|b| b.is_active())
                    .zip(state.agent(agent))
                    .map(|(b, a)| b.alignment_cells(side).contains(&a.pos))
                    .unwrap_or(false);
                if arrived && self.mode == ExecMode::Running {
                    let deadline = self.started_at.unwrap_or(now) + Tick::from(timeout);
                    self.mode = ExecMode::Waiting { deadline };
                }
            }
            let verdict = check_precondition(&action, agent, state, roster, self.started_at);
            let verdict = self.with_nopath_grace(&action, verdict);
            match verdict {
                Precondition::Satisfied | Precondition::Wait => return out,
                Precondition::Fail(reason) => {
                    self.close_action(
                        ActionOutcome::Failed { reason },
                        now,
                        clock,
                        agent,
                        state,
                        &mut out,
                    );
                    if self.mode == ExecMode::DonePlan {
                        return out;
                    }
                }
            }
        }
    }

    /// Tolerate a couple of NO_PATH verdicts on navigation: passing agents
    /// routinely block a corridor for a tick or two.
    fn with_nopath_grace(
        &mut self,
        action: &SymbolicAction,
        verdict: Precondition,
    ) -> Precondition {
        if !matches!(action, SymbolicAction::MoveToBlock { .. }) {
            return verdict;
        }
        match verdict {
            Precondition::Fail(FailReason::NoPath) => {
                self.nopath_strikes += 1;
                if self.nopath_strikes >= NOPATH_GRACE {
                    verdict
                } else {
                    Precondition::Wait
                }
            }
            other => {
                self.nopath_strikes = 0;
                other
            }
        }
    }

    /// The primitive to submit this tick. Pure: all mutation happens in
    /// `precheck`/`advance`. A waiting executor never emits movement.
    pub fn decompose(&self, agent: AgentId, state: &GridState) -> PrimitiveAction {
        let Some(action) = self.current_action() else {
            return PrimitiveAction::Noop;
        };
        let Some(me) = state.agent(agent).map(|a| a.pos) else {
            return PrimitiveAction::Noop;
        };
        match *action {
            SymbolicAction::WaitAgents { .. } => PrimitiveAction::Noop,
            SymbolicAction::MoveToBlock { block, side }
            | SymbolicAction::Rendezvous { block, side, .. } => {
                let on_side = state
                    .block(block)
                    .filter(|b| b.is_active())
                    .map(|b| b.alignment_cells(side).contains(&me))
                    .unwrap_or(false);
                if on_side {
                    return PrimitiveAction::Noop;
                }
                let goals = free_alignment_cells(state, block, side, me);
                match shortest_step(state, me, &goals) {
                    PathStep::Step(dir, _) => PrimitiveAction::Move(dir),
                    PathStep::AlreadyThere | PathStep::Unreachable => PrimitiveAction::Noop,
                }
            }
            SymbolicAction::Push { block, .. } => {
                match state.block(block).filter(|b| b.is_active()).and_then(|b| b.aligned_face(me))
                {
                    Some(face) => PrimitiveAction::Push { block, face },
                    None => PrimitiveAction::Noop,
                }
            }
            SymbolicAction::YieldFace { block, .. } => retreat_candidates(state, block, me)
                .into_iter()
                .find(|&d| state.cell_free(me.step(d)))
                .map(PrimitiveAction::Move)
                .unwrap_or(PrimitiveAction::Noop),
        }
    }

    /// Record the result of an executed tick: count confirmed progress,
    /// detect completion, and burn stall budget on fruitless ticks.
    /// `state` is the post-step state; `report` the step's outcomes.
    pub fn advance(
        &mut self,
        agent: AgentId,
        state: &GridState,
        report: &StepReport,
        clock: f64,
    ) -> Vec<TraceEvent> {
        let now = report.tick;
        let mut out = Vec::new();
        let Some(action) = self.current_action().cloned() else {
            return out;
        };
        if self.started_at.is_none() {
            // Not prechecked yet this episode; nothing to account.
            return out;
        }
        match action {
            SymbolicAction::WaitAgents { count, .. } => {
                let idle =
                    state.agents.iter().filter(|a| a.phase == AgentPhase::Idle).count();
                if idle >= count as usize {
                    self.close_action(ActionOutcome::Success, now, clock, agent, state, &mut out);
                }
            }
            SymbolicAction::Rendezvous { block, side, count, .. } => {
                let gathered = state.block(block).filter(|b| b.is_active()).is_some()
                    && count_at_side(state, block, side) >= count as usize;
                if gathered {
                    self.close_action(ActionOutcome::Success, now, clock, agent, state, &mut out);
                }
            }
            SymbolicAction::MoveToBlock { block, side } => {
                let arrived = state
                    .block(block)
                    .filter(|b| b.is_active())
                    .zip(state.agent(agent))
                    .map(|(b, a)| b.alignment_cells(side).contains(&a.pos))
                    .unwrap_or(false);
                if arrived {
                    self.close_action(ActionOutcome::Success, now, clock, agent, state, &mut out);
                }
            }
            SymbolicAction::Push { block, steps } => {
                let done = report.blocks.get(&block).map(|b| b.done).unwrap_or(false);
                let moved = report.blocks.get(&block).and_then(|b| b.moved).is_some();
                if done {
                    self.close_action(ActionOutcome::Success, now, clock, agent, state, &mut out);
                } else if moved {
                    if self.count_down() {
                        self.close_action(
                            ActionOutcome::Success,
                            now,
                            clock,
                            agent,
                            state,
                            &mut out,
                        );
                    }
                } else {
                    self.stall += 1;
                    if self.stall >= steps {
                        let aligned = state
                            .block(block)
                            .filter(|b| b.is_active())
                            .zip(state.agent(agent))
                            .map(|(b, a)| b.aligned_face(a.pos).is_some())
                            .unwrap_or(false);
                        let reason =
                            if aligned { FailReason::Stalled } else { FailReason::NotAligned };
                        self.close_action(
                            ActionOutcome::Failed { reason },
                            now,
                            clock,
                            agent,
                            state,
                            &mut out,
                        );
                    }
                }
            }
            SymbolicAction::YieldFace { block, steps } => {
                if state.block(block).filter(|b| b.is_active()).is_none() {
                    // The face no longer needs clearing.
                    self.close_action(ActionOutcome::Success, now, clock, agent, state, &mut out);
                    return out;
                }
                let retreated = report
                    .agents
                    .get(&agent)
                    .map(|o| matches!(o.action, PrimitiveAction::Move(_)) && o.achieved)
                    .unwrap_or(false);
                if retreated {
                    if self.count_down() {
                        self.close_action(
                            ActionOutcome::Success,
                            now,
                            clock,
                            agent,
                            state,
                            &mut out,
                        );
                    }
                } else {
                    self.stall += 1;
                    if self.stall >= steps {
                        self.close_action(
                            ActionOutcome::Failed { reason: FailReason::Blocked },
                            now,
                            clock,
                            agent,
                            state,
                            &mut out,
                        );
                    }
                }
            }
        }
        out
    }

    /// Decrement the step countdown; true when it reaches zero.
    fn count_down(&mut self) -> bool {
        if let ExecMode::StepCounting { remaining } = &mut self.mode {
            *remaining = remaining.saturating_sub(1);
            *remaining == 0
        } else {
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{env_step, init_env, joint_action, BlockSpec, EnvConfig};

    /// 10x6 grid, goal band at x>=8, one light block and one heavy block.
    fn fixture() -> GridState {
        let config = EnvConfig {
            width: 10,
            height: 6,
            goal_band_width: 2,
            blocks: vec![
                BlockSpec { id: BlockId(1), weight: 1, anchor: Pos::new(6, 1) },
                BlockSpec { id: BlockId(2), weight: 2, anchor: Pos::new(3, 3) },
            ],
            agent_starts: vec![Pos::new(0, 0), Pos::new(0, 5)],
            max_steps: 200,
            seed: 0,
        };
        init_env(&config).unwrap()
    }

    fn plan_of(actions: Vec<SymbolicAction>, task: BlockId) -> PlanInstance {
        PlanInstance { actions, committed_task: task, author: AgentId(0), created_at: 0 }
    }

    #[test]
    fn push_precheck_fails_target_gone_when_block_done() {
        let mut state = fixture();
        let idx = state.blocks.iter().position(|b| b.id == BlockId(1)).unwrap();
        state.blocks[idx].status = crate::env::BlockStatus::Done;
        let action = SymbolicAction::Push { block: BlockId(1), steps: 3 };
        let verdict =
            check_precondition(&action, AgentId(0), &state, &Roster::default(), None);
        assert_eq!(verdict, Precondition::Fail(FailReason::TargetGone));
    }

    #[test]
    fn rendezvous_waits_then_times_out() {
        let mut state = fixture();
        let action = SymbolicAction::Rendezvous {
            block: BlockId(2),
            side: Dir::W,
            count: 2,
            timeout: 5,
        };
        // Nobody at the side yet: wait.
        let roster = Roster::default();
        assert_eq!(
            check_precondition(&action, AgentId(0), &state, &roster, Some(0)),
            Precondition::Wait
        );
        // Deadline passes without quorum at the side: timeout.
        state.tick = 5;
        assert_eq!(
            check_precondition(&action, AgentId(0), &state, &roster, Some(0)),
            Precondition::Fail(FailReason::Timeout)
        );
        // Condition met at the deadline still wins: completion is checked
        // before the deadline.
        state.agents[0].pos = Pos::new(2, 3);
        state.agents[1].pos = Pos::new(2, 4);
        assert_eq!(
            check_precondition(&action, AgentId(0), &state, &roster, Some(0)),
            Precondition::Satisfied
        );
    }

    #[test]
    fn wait_agents_counts_idle_roster() {
        let state = fixture();
        let action = SymbolicAction::WaitAgents { count: 2, timeout: 10 };
        assert_eq!(
            check_precondition(&action, AgentId(0), &state, &Roster { idle: 2 }, Some(0)),
            Precondition::Satisfied
        );
        assert_eq!(
            check_precondition(&action, AgentId(0), &state, &Roster { idle: 1 }, Some(0)),
            Precondition::Wait
        );
    }

    #[test]
    fn move_to_block_decomposes_noop_once_in_position() {
        let mut state = fixture();
        // Alignment cells of block_1's W face: (5, 1).
        state.agents[0].pos = Pos::new(5, 1);
        let plan = plan_of(
            vec![SymbolicAction::MoveToBlock { block: BlockId(1), side: Dir::W }],
            BlockId(1),
        );
        let mut exec = Executor::new(plan);
        let events = exec.precheck(AgentId(0), &state, &Roster::default(), 0.0);
        assert_eq!(events.len(), 1, "only ACTION_START: {events:?}");
        assert_eq!(exec.decompose(AgentId(0), &state), PrimitiveAction::Noop);
    }

    #[test]
    fn aligned_push_decomposes_into_push_primitive() {
        let mut state = fixture();
        state.agents[0].pos = Pos::new(5, 1);
        let plan =
            plan_of(vec![SymbolicAction::Push { block: BlockId(1), steps: 2 }], BlockId(1));
        let mut exec = Executor::new(plan);
        exec.precheck(AgentId(0), &state, &Roster::default(), 0.0);
        assert_eq!(
            exec.decompose(AgentId(0), &state),
            PrimitiveAction::Push { block: BlockId(1), face: Dir::W }
        );
    }

    /// Drive a full solo episode fragment: walk to the light block, push it
    /// twice into the goal band, and observe the plan succeed.
    #[test]
    fn solo_plan_runs_to_successful_completion() {
        let mut state = fixture();
        state.agents[0].pos = Pos::new(4, 1);
        let plan = plan_of(
            vec![
                SymbolicAction::MoveToBlock { block: BlockId(1), side: Dir::W },
                SymbolicAction::Push { block: BlockId(1), steps: 2 },
            ],
            BlockId(1),
        );
        let mut exec = Executor::new(plan);
        let mut all_events = Vec::new();
        for _ in 0..20 {
            if exec.is_done() {
                break;
            }
            let roster = Roster::from_state(&state);
            all_events.extend(exec.precheck(AgentId(0), &state, &roster, 0.0));
            if exec.is_done() {
                break;
            }
            let primitive = exec.decompose(AgentId(0), &state);
            let joint = joint_action(&[(AgentId(0), primitive)]);
            let (next, report) = env_step(&state, &joint).unwrap();
            all_events.extend(exec.advance(AgentId(0), &next, &report, 0.0));
            state = next;
        }
        assert!(exec.is_done(), "plan should finish: {all_events:?}");
        let names: Vec<&str> = all_events.iter().map(|e| e.kind.name()).collect();
        assert_eq!(
            names,
            vec!["ACTION_START", "ACTION_END", "ACTION_START", "ACTION_END", "PLAN_END"]
        );
        let delivered =
            matches!(all_events.last().unwrap().kind, EventKind::PlanEnd { outcome: true });
        assert!(delivered, "committed block was delivered: {all_events:?}");
        // The push started from x=6 with band at x>=8: exactly 2 steps.
        assert!(state.block(BlockId(1)).map(|b| !b.is_active()).unwrap());
    }

    /// A solo agent pushing a weight-2 block confirms no movement each tick
    /// and fails after exhausting the stall budget, aligned, as STALLED.
    #[test]
    fn solo_push_on_heavy_block_stalls_out()
    {
        let mut state = fixture();
        // Alignment cell of block_2's W face: (2, 3) or (2, 4).
        state.agents[0].pos = Pos::new(2, 3);
        let plan =
            plan_of(vec![SymbolicAction::Push { block: BlockId(2), steps: 3 }], BlockId(2));
        let mut exec = Executor::new(plan);
        let mut ticks = 0;
        let mut events = Vec::new();
        while !exec.is_done() && ticks < 10 {
            let roster = Roster::from_state(&state);
            events.extend(exec.precheck(AgentId(0), &state, &roster, 0.0));
            if exec.is_done() {
                break;
            }
            let primitive = exec.decompose(AgentId(0), &state);
            let joint = joint_action(&[(AgentId(0), primitive)]);
            let (next, report) = env_step(&state, &joint).unwrap();
            events.extend(exec.advance(AgentId(0), &next, &report, 0.0));
            state = next;
            ticks += 1;
        }
        // Budget of 3 unconfirmed ticks, then ACTION_END + PLAN_END.
        assert_eq!(ticks, 3);
        let fail = events.iter().find_map(|e| match &e.kind {
            EventKind::ActionEnd { outcome: ActionOutcome::Failed { reason }, .. } => {
                Some(*reason)
            }
            _ => None,
        });
        assert_eq!(fail, Some(FailReason::Stalled));
        assert!(matches!(
            events.last().unwrap().kind,
            EventKind::PlanEnd { outcome: false }
        ));
    }

    /// Failing prechecks cascade: a plan whose every action targets a gone
    /// block collapses in a single precheck call with one ACTION_END per
    /// action, all stamped with the same tick, then PLAN_END.
    #[test]
    fn precheck_cascades_through_doomed_actions() {
        let mut state = fixture();
        let idx = state.blocks.iter().position(|b| b.id == BlockId(1)).unwrap();
        state.blocks[idx].status = crate::env::BlockStatus::Done;
        state.tick = 9;
        let plan = plan_of(
            vec![
                SymbolicAction::MoveToBlock { block: BlockId(1), side: Dir::W },
                SymbolicAction::Push { block: BlockId(1), steps: 2 },
            ],
            BlockId(1),
        );
        let mut exec = Executor::new(plan);
        let events = exec.precheck(AgentId(0), &state, &Roster::default(), 0.0);
        let names: Vec<&str> = events.iter().map(|e| e.kind.name()).collect();
        assert_eq!(
            names,
            vec![
                "ACTION_START",
                "ACTION_END",
                "ACTION_START",
                "ACTION_END",
                "PLAN_END"
            ]
        );
        assert!(events.iter().all(|e| e.tick == 9));
        // The committed block is DONE, so the aborted plan still counts as
        // a successful outcome.
        assert!(matches!(events.last().unwrap().kind, EventKind::PlanEnd { outcome: true }));
        assert!(exec.is_done());
    }

    #[test]
    fn nopath_is_tolerated_twice_then_fails() {
        let config = EnvConfig {
            width: 5,
            height: 4,
            goal_band_width: 2,
            blocks: vec![
                BlockSpec { id: BlockId(1), weight: 2, anchor: Pos::new(1, 1) },
                BlockSpec { id: BlockId(2), weight: 1, anchor: Pos::new(0, 1) },
            ],
            agent_starts: vec![Pos::new(0, 0)],
            max_steps: 100,
            seed: 0,
        };
        let mut state = init_env(&config).unwrap();
        // Target the E side of block_2: its only alignment cell (1, 1) is
        // inside block_1's footprint, so there is never a free goal cell.
        let plan = plan_of(
            vec![SymbolicAction::MoveToBlock { block: BlockId(2), side: Dir::E }],
            BlockId(2),
        );
        let mut exec = Executor::new(plan);
        let roster = Roster::default();
        for attempt in 0..2 {
            let events = exec.precheck(AgentId(0), &state, &roster, 0.0);
            let failed = events.iter().any(|e| matches!(e.kind, EventKind::ActionEnd { .. }));
            assert!(!failed, "attempt {attempt} should be tolerated");
            state.tick += 1;
        }
        let events = exec.precheck(AgentId(0), &state, &roster, 0.0);
        let fail = events.iter().find_map(|e| match &e.kind {
            EventKind::ActionEnd { outcome: ActionOutcome::Failed { reason }, .. } => {
                Some(*reason)
            }
            _ => None,
        });
        assert_eq!(fail, Some(FailReason::NoPath));
    }

    #[test]
    fn yield_face_retreats_and_counts_steps() {
        let mut state = fixture();
        // West of block_2's footprint, on the face.
        state.agents[0].pos = Pos::new(2, 3);
        let plan = plan_of(
            vec![SymbolicAction::YieldFace { block: BlockId(2), steps: 2 }],
            BlockId(2),
        );
        let mut exec = Executor::new(plan);
        let mut events = Vec::new();
        for _ in 0..4 {
            if exec.is_done() {
                break;
            }
            let roster = Roster::from_state(&state);
            events.extend(exec.precheck(AgentId(0), &state, &roster, 0.0));
            if exec.is_done() {
                break;
            }
            let primitive = exec.decompose(AgentId(0), &state);
            // Retreating from the W face moves further west.
            assert_eq!(primitive, PrimitiveAction::Move(Dir::W));
            let joint = joint_action(&[(AgentId(0), primitive)]);
            let (next, report) = env_step(&state, &joint).unwrap();
            events.extend(exec.advance(AgentId(0), &next, &report, 0.0));
            state = next;
        }
        assert!(exec.is_done());
        assert_eq!(state.agents[0].pos, Pos::new(0, 3));
        assert!(matches!(
            events.iter().last().unwrap().kind,
            EventKind::PlanEnd { .. }
        ));
    }

    #[test]
    fn waiting_executor_never_emits_movement() {
        let mut state = fixture();
        // Stand on the W side of block_2 and rendezvous for a partner who
        // never shows up: every decomposed primitive must be a NOOP.
        state.agents[0].pos = Pos::new(2, 3);
        let plan = plan_of(
            vec![SymbolicAction::Rendezvous {
                block: BlockId(2),
                side: Dir::W,
                count: 2,
                timeout: 4,
            }],
            BlockId(2),
        );
        let mut exec = Executor::new(plan);
        for _ in 0..6 {
            if exec.is_done() {
                break;
            }
            let roster = Roster::from_state(&state);
            exec.precheck(AgentId(0), &state, &roster, 0.0);
            if exec.is_done() {
                break;
            }
            assert!(matches!(exec.mode(), ExecMode::Waiting { .. }));
            let primitive = exec.decompose(AgentId(0), &state);
            assert_eq!(primitive, PrimitiveAction::Noop);
            let joint = joint_action(&[(AgentId(0), primitive)]);
            let (next, report) = env_step(&state, &joint).unwrap();
            exec.advance(AgentId(0), &next, &report, 0.0);
            state = next;
        }
        // The lone agent can never satisfy count=2: the action times out.
        assert!(exec.is_done());
    }

    #[test]
    fn index_advances_by_one_per_closed_action() {
        let mut state = fixture();
        state.agents[0].pos = Pos::new(5, 1);
        let plan = plan_of(
            vec![
                SymbolicAction::MoveToBlock { block: BlockId(1), side: Dir::W },
                SymbolicAction::Push { block: BlockId(1), steps: 1 },
            ],
            BlockId(1),
        );
        let mut exec = Executor::new(plan);
        let mut seen = vec![exec.index()];
        for _ in 0..10 {
            if exec.is_done() {
                break;
            }
            let roster = Roster::from_state(&state);
            exec.precheck(AgentId(0), &state, &roster, 0.0);
            if exec.is_done() {
                break;
            }
            let primitive = exec.decompose(AgentId(0), &state);
            let joint = joint_action(&[(AgentId(0), primitive)]);
            let (next, report) = env_step(&state, &joint).unwrap();
            exec.advance(AgentId(0), &next, &report, 0.0);
            state = next;
            if *seen.last().unwrap() != exec.index() {
                seen.push(exec.index());
            }
        }
        assert_eq!(seen, vec![0, 1, 2]);
    }
}
