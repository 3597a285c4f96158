use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::trace::event::{EventKind, TraceEvent};
use crate::types::{AgentId, Tick};

#[derive(Debug, Error)]
pub enum TraceError {
    /// An event arrived out of order (tick regression, unbalanced plan
    /// events, or activity after the episode ended).
    #[error("ORDERING_VIOLATION: {0}")]
    OrderingViolation(String),
    /// The trace is missing required structure (e.g. no EPISODE_END).
    #[error("TRACE_INCOMPLETE: {0}")]
    Incomplete(String),
    #[error("trace i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// A full episode's ordered event stream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeTrace {
    pub events: Vec<TraceEvent>,
}

impl EpisodeTrace {
    pub fn new(events: Vec<TraceEvent>) -> Self {
        Self { events }
    }

    /// Every agent id mentioned by the trace (actors and room
    /// participants), ascending.
    pub fn agents(&self) -> Vec<AgentId> {
        let mut ids: BTreeSet<AgentId> = self.events.iter().filter_map(|e| e.agent).collect();
        for event in &self.events {
            if let EventKind::CommOpen { participants } = &event.kind {
                ids.extend(participants.iter().copied());
            }
        }
        ids.into_iter().collect()
    }

    /// Tick of the last event (0 for an empty trace).
    pub fn end_tick(&self) -> Tick {
        self.events.last().map(|e| e.tick).unwrap_or(0)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), TraceError> {
        for event in &self.events {
            serde_json::to_writer(&mut out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TraceError> {
        let mut events = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line)?);
        }
        Ok(Self { events })
    }

    pub fn save(&self, path: &Path) -> Result<(), TraceError> {
        let file = std::fs::File::create(path)?;
        self.write_jsonl(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self, TraceError> {
        let file = std::fs::File::open(path)?;
        Self::read_jsonl(std::io::BufReader::new(file))
    }
}

/// Append-only sink that validates event ordering as it records, and
/// optionally streams each event to a line-delimited JSON writer so
/// crashed episodes stay analyzable.
pub struct RecordingSink {
    events: Vec<TraceEvent>,
    writer: Option<Box<dyn Write + Send>>,
    last_tick: Tick,
    open_plans: BTreeSet<AgentId>,
    ended: bool,
}

impl std::fmt::Debug for RecordingSink {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RecordingSink")
            .field("events", &self.events.len())
            .field("streaming", &self.writer.is_some())
            .field("ended", &self.ended)
            .finish()
    }
}

impl Default for RecordingSink {
    fn default() -> Self {
        Self::new()
    }
}

impl RecordingSink {
    pub fn new() -> Self {
        Self { events: Vec::new(), writer: None, last_tick: 0, open_plans: BTreeSet::new(), ended: false }
    }

    /// Stream every accepted event to `writer` as it is recorded.
    pub fn with_writer(writer: Box<dyn Write + Send>) -> Self {
        Self { writer: Some(writer), ..Self::new() }
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    /// Validate and append one event.
    pub fn record(&mut self, event: TraceEvent) -> Result<(), TraceError> {
        self.check_order(&event)?;
        if let Some(writer) = &mut self.writer {
            serde_json::to_writer(&mut *writer, &event)?;
            writer.write_all(b"\n")?;
            writer.flush()?;
        }
        self.apply(&event);
        self.events.push(event);
        Ok(())
    }

    pub fn record_all(
        &mut self,
        events: impl IntoIterator<Item = TraceEvent>,
    ) -> Result<(), TraceError> {
        events.into_iter().try_for_each(|e| self.record(e))
    }

    pub fn finish(self) -> EpisodeTrace {
        EpisodeTrace { events: self.events }
    }

    fn check_order(&self, event: &TraceEvent) -> Result<(), TraceError> {
        let fail = |msg: String| Err(TraceError::OrderingViolation(msg));
        if self.ended {
            return fail(format!("{} after EPISODE_END", event.kind.name()));
        }
        if event.tick < self.last_tick {
            return fail(format!(
                "tick regressed from {} to {} at {}",
                self.last_tick,
                event.tick,
                event.kind.name()
            ));
        }
        match &event.kind {
            EventKind::PlanStart { .. } => {
                let agent = self.require_agent(event)?;
                if self.open_plans.contains(&agent) {
                    return fail(format!("PLAN_START while {agent} already has an open plan"));
                }
            }
            EventKind::ActionStart { .. }
            | EventKind::ActionEnd { .. }
            | EventKind::PlanEnd { .. } => {
                let agent = self.require_agent(event)?;
                if !self.open_plans.contains(&agent) {
                    return fail(format!(
                        "{} for {agent} outside an open plan",
                        event.kind.name()
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn require_agent(&self, event: &TraceEvent) -> Result<AgentId, TraceError> {
        event.agent.ok_or_else(|| {
            TraceError::OrderingViolation(format!("{} without an agent", event.kind.name()))
        })
    }

    fn apply(&mut self, event: &TraceEvent) {
        self.last_tick = event.tick;
        match &event.kind {
            EventKind::PlanStart { .. } => {
                self.open_plans.insert(event.agent.expect("validated"));
            }
            EventKind::PlanEnd { .. } => {
                self.open_plans.remove(&event.agent.expect("validated"));
            }
            EventKind::EpisodeEnd { .. } => self.ended = true,
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{ActionOutcome, SymbolicAction};
    use crate::env::TerminalReason;
    use crate::types::BlockId;

    fn push_action() -> SymbolicAction {
        SymbolicAction::Push { block: BlockId(1), steps: 2 }
    }

    fn plan() -> crate::controller::PlanInstance {
        crate::controller::PlanInstance {
            actions: vec![push_action()],
            committed_task: BlockId(1),
            author: AgentId(0),
            created_at: 0,
        }
    }

    #[test]
    fn plan_end_before_plan_start_is_rejected() {
        let mut sink = RecordingSink::new();
        let err = sink
            .record(TraceEvent::by(0, 0.0, AgentId(0), EventKind::PlanEnd { outcome: true }))
            .unwrap_err();
        assert!(
            matches!(err, TraceError::OrderingViolation(_)),
            "expected ordering violation, got {err:?}"
        );
        assert!(err.to_string().contains("ORDERING_VIOLATION"));
    }

    #[test]
    fn tick_regression_is_rejected() {
        let mut sink = RecordingSink::new();
        sink.record(TraceEvent::room(5, 0.0, EventKind::CommOpen { participants: vec![] }))
            .unwrap();
        let err = sink
            .record(TraceEvent::room(4, 0.1, EventKind::CommOpen { participants: vec![] }))
            .unwrap_err();
        assert!(matches!(err, TraceError::OrderingViolation(_)));
    }

    #[test]
    fn nothing_may_follow_episode_end() {
        let mut sink = RecordingSink::new();
        sink.record(TraceEvent::room(
            9,
            1.0,
            EventKind::EpisodeEnd {
                reason: TerminalReason::Timeout,
                env_steps: 9,
                undelivered: vec![BlockId(1)],
            },
        ))
        .unwrap();
        let err = sink
            .record(TraceEvent::room(9, 1.0, EventKind::CommOpen { participants: vec![] }))
            .unwrap_err();
        assert!(matches!(err, TraceError::OrderingViolation(_)));
    }

    #[test]
    fn well_formed_stream_is_accepted_and_roundtrips() {
        let mut sink = RecordingSink::new();
        let events = vec![
            TraceEvent::room(0, 0.0, EventKind::CommOpen { participants: vec![AgentId(0)] }),
            TraceEvent::by(0, 0.1, AgentId(0), EventKind::PlanStart { plan: plan() }),
            TraceEvent::by(
                0,
                0.1,
                AgentId(0),
                EventKind::ActionStart { index: 0, action: push_action() },
            ),
            TraceEvent::by(
                2,
                0.3,
                AgentId(0),
                EventKind::ActionEnd {
                    index: 0,
                    action: push_action(),
                    outcome: ActionOutcome::Success,
                },
            ),
            TraceEvent::by(2, 0.3, AgentId(0), EventKind::PlanEnd { outcome: true }),
            TraceEvent::room(
                2,
                0.4,
                EventKind::EpisodeEnd {
                    reason: TerminalReason::AllDone,
                    env_steps: 2,
                    undelivered: vec![],
                },
            ),
        ];
        sink.record_all(events.clone()).unwrap();
        let trace = sink.finish();
        assert_eq!(trace.events, events);
        assert_eq!(trace.agents(), vec![AgentId(0)]);
        assert_eq!(trace.end_tick(), 2);

        let mut buffer = Vec::new();
        trace.write_jsonl(&mut buffer).unwrap();
        let back = EpisodeTrace::read_jsonl(buffer.as_slice()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn truncated_plan_without_end_is_tolerated() {
        // A plan cut off by episode end never emits PLAN_END; the sink
        // accepts this (the trace is truncated, not malformed).
        let mut sink = RecordingSink::new();
        sink.record(TraceEvent::by(0, 0.0, AgentId(1), EventKind::PlanStart { plan: plan() }))
            .unwrap();
        sink.record(TraceEvent::room(
            3,
            0.5,
            EventKind::EpisodeEnd {
                reason: TerminalReason::Timeout,
                env_steps: 3,
                undelivered: vec![BlockId(1)],
            },
        ))
        .unwrap();
        assert_eq!(sink.finish().events.len(), 2);
    }
}
