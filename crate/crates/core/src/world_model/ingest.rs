use std::collections::BTreeMap;

use crate::controller::PlanInstance;
use crate::env::TerminalReason;
use crate::trace::{EpisodeTrace, EventKind, TraceError};
use crate::types::{AgentId, BlockId, Tick};
use crate::world_model::graph::{
    canonical_prototype, AttemptRecord, EpisodeNode, EpisodeOutcome, InstanceNode, PrototypeNode,
    TaskNode, WorldModelGraph,
};

/// Summary of what one episodic merge added to the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphDelta {
    pub episode: u32,
    pub new_tasks: usize,
    pub new_prototypes: usize,
    pub new_instances: usize,
}

/// One executed plan recovered from a trace.
struct PlanRun {
    plan: PlanInstance,
    start: Tick,
    /// PLAN_END tick and outcome; None when truncated by episode end.
    end: Option<(Tick, bool)>,
}

impl WorldModelGraph {
    /// Merge one finished episode into the graph. Purely additive: every
    /// existing node and attempt record is preserved.
    pub fn ingest_episode(&mut self, trace: &EpisodeTrace) -> Result<GraphDelta, TraceError> {
        let mut terminal: Option<(TerminalReason, Tick)> = None;
        let mut rooms: Vec<(Tick, BTreeMap<AgentId, BlockId>)> = Vec::new();
        let mut runs: Vec<PlanRun> = Vec::new();
        let mut open: BTreeMap<AgentId, usize> = BTreeMap::new();

        for event in &trace.events {
            match &event.kind {
                EventKind::RoomClose { assignments, .. } => {
                    rooms.push((event.tick, assignments.clone()));
                }
                EventKind::PlanStart { plan } => {
                    let agent = event.agent.ok_or_else(|| {
                        TraceError::Incomplete("PLAN_START without an agent".to_string())
                    })?;
                    open.insert(agent, runs.len());
                    runs.push(PlanRun { plan: plan.clone(), start: event.tick, end: None });
                }
                EventKind::PlanEnd { outcome } => {
                    let agent = event.agent.ok_or_else(|| {
                        TraceError::Incomplete("PLAN_END without an agent".to_string())
                    })?;
                    if let Some(index) = open.remove(&agent) {
                        runs[index].end = Some((event.tick, *outcome));
                    }
                }
                EventKind::EpisodeEnd { reason, env_steps, .. } => {
                    terminal = Some((*reason, *env_steps));
                }
                _ => {}
            }
        }

        let (reason, env_steps) = terminal
            .ok_or_else(|| TraceError::Incomplete("trace has no EPISODE_END".to_string()))?;
        let episode = self.episodes.len() as u32 + 1;
        let outcome = if reason == TerminalReason::AllDone {
            EpisodeOutcome::Complete
        } else {
            EpisodeOutcome::Incomplete
        };
        self.episodes.push(EpisodeNode { id: episode, outcome, span: (0, env_steps) });

        let mut delta =
            GraphDelta { episode, new_tasks: 0, new_prototypes: 0, new_instances: 0 };
        for run in runs {
            let task = run.plan.committed_task;
            let (duration, outcome) = match run.end {
                Some((end, outcome)) => (Some(end - run.start), outcome),
                // Truncated plans have no honest duration and count as
                // failed attempts.
                None => (None, false),
            };
            let span_end = run.end.map(|(end, _)| end).unwrap_or(env_steps);
            let team_size = team_size_in_span(&rooms, task, run.start, span_end);

            let key = canonical_prototype(&run.plan);
            let prototype = match self
                .prototypes
                .iter()
                .position(|p| p.task == task && p.key == key)
            {
                Some(index) => index,
                None => {
                    self.prototypes.push(PrototypeNode { task, key });
                    delta.new_prototypes += 1;
                    self.prototypes.len() - 1
                }
            };
            let instance = match self
                .instances
                .iter()
                .position(|i| i.prototype == prototype && i.actions == run.plan.actions)
            {
                Some(index) => index,
                None => {
                    self.instances.push(InstanceNode {
                        prototype,
                        actions: run.plan.actions.clone(),
                        attempts: Vec::new(),
                    });
                    delta.new_instances += 1;
                    self.instances.len() - 1
                }
            };
            self.instances[instance].attempts.push(AttemptRecord {
                episode,
                outcome,
                duration,
                team_size,
            });
            self.tasks.push(TaskNode {
                episode,
                task,
                outcome,
                start: run.start,
                duration,
                team_size,
                prototype,
                instance,
            });
            delta.new_tasks += 1;
        }
        Ok(delta)
    }
}

/// Distinct agents whose finalized assignment was `task` in any room that
/// closed during the plan's span.
fn team_size_in_span(
    rooms: &[(Tick, BTreeMap<AgentId, BlockId>)],
    task: BlockId,
    start: Tick,
    end: Tick,
) -> u32 {
    let mut assigned: std::collections::BTreeSet<AgentId> = Default::default();
    for (tick, assignments) in rooms {
        if *tick < start || *tick > end {
            continue;
        }
        for (agent, assigned_task) in assignments {
            if *assigned_task == task {
                assigned.insert(*agent);
            }
        }
    }
    assigned.len() as u32
}
