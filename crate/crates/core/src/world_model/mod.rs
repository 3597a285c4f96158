//! Dynamic symbolic world model: a growing graph of episodes, tasks and
//! plans.
//!
//! Every executed plan adds nodes and attempt records; nothing is ever
//! deleted, so statistics accumulate across episodes. The graph answers
//! the questions policies ask between episodes: how hard has each task
//! been, what team size works, and which concrete plans succeeded before.

mod export;
mod graph;
mod ingest;
mod render;
mod retrieve;
mod stats;

pub use export::{export_graph, import_graph, GraphFormat, WorldModelError};
pub use graph::{
    canonical_prototype, AttemptRecord, EpisodeNode, EpisodeOutcome, InstanceNode, PrototypeNode,
    TaskNode, WorldModelGraph,
};
pub use ingest::GraphDelta;
pub use render::render_plan_library;
pub use retrieve::{
    retrieve_plans, InstanceStats, PrototypeStats, RankedInstance, RankedPrototype,
    RetrievalResult,
};
pub use stats::{fmt_mean, fmt_percent, SizeTally, TaskStats, TeamSizeStats};
