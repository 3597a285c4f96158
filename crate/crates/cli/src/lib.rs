//! Experiment harness for the gridpush simulator.
//!
//! Ties the library pieces together: loads a TOML experiment description,
//! builds one policy per agent (heuristic, scripted, or backed by an
//! external completion endpoint), drives the tick loop episode by episode
//! while persisting the world model, and writes traces, metrics, timelines
//! and graph exports to an output directory.

pub mod config;
pub mod llm;
pub mod runner;
