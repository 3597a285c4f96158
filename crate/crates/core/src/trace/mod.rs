//! Execution traces: typed events, ordered recording, and analytics.
//!
//! Every run appends [`TraceEvent`]s to a sink that enforces ordering
//! invariants (non-decreasing ticks, one open plan per agent) and writes
//! line-delimited JSON. Post-hoc analytics (metrics, timelines, aggregate
//! tables) and the world model both consume these traces, so the event
//! stream is the single source of truth about what happened.

mod aggregate;
mod event;
mod metrics;
mod sink;
mod timeline;

pub use aggregate::{aggregate_runs, ExperimentTables};
pub use event::{EventKind, TraceEvent, ViolationStage};
pub use metrics::{compute_metrics, BlockMetrics, EpisodeMetrics};
pub use sink::{EpisodeTrace, RecordingSink, TraceError};
pub use timeline::render_timeline;
