//! The experiment orchestrator: one global tick loop per episode.
//!
//! Each tick: if any agent is idle, the environment pauses while a
//! negotiation room runs and newly assigned agents draft and refine their
//! plans (rooms cost wall-clock time, never ticks); then every executing
//! agent prechecks and decomposes its current action, the environment
//! advances exactly one step, and executors digest the step report.
//! Across episodes the world model is re-ingested and persisted, so later
//! episodes negotiate and refine against accumulated experience.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use gridpush_core::agents::{
    AgentPolicy, BaselinePolicy, DraftCtx, PolicyIncident, RefineCtx, ScriptStep, ScriptedPolicy,
};
use gridpush_core::clock::SimClock;
use gridpush_core::controller::{
    parse_action, validate_plan, Executor, PlanInstance, Rejection, Roster, DEFAULT_TIMEOUT,
};
use gridpush_core::env::{
    env_step, init_env, is_terminal, joint_action, observe_symbolic, AgentPhase, EnvError,
    GridState, PrimitiveAction,
};
use gridpush_core::negotiation::{run_room, PolicyMap, QuorumCtx, QuorumTracker, TaskMapping};
use gridpush_core::trace::{
    aggregate_runs, compute_metrics, render_timeline, EpisodeMetrics, EpisodeTrace, EventKind,
    RecordingSink, TraceError, TraceEvent, ViolationStage,
};
use gridpush_core::types::{AgentId, BlockId};
use gridpush_core::world_model::{
    export_graph, render_plan_library, retrieve_plans, GraphFormat, WorldModelError,
    WorldModelGraph,
};

use crate::config::{ConfigError, ExperimentConfig, PolicySpec, ScriptStepSpec};
use crate::llm::{LlmPolicy, PromptTemplates};

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("environment: {0}")]
    Env(#[from] EnvError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    WorldModel(#[from] WorldModelError),
    #[error("completion endpoint: {0}")]
    Llm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Everything one episode produced in memory.
#[derive(Debug)]
pub struct EpisodeOutput {
    pub trace: EpisodeTrace,
    pub metrics: EpisodeMetrics,
}

/// What a finished (or aborted) experiment left on disk.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RunManifest {
    pub episodes_requested: u32,
    pub episodes_completed: u32,
    pub seed: u64,
    pub traces: Vec<String>,
    pub metrics: Vec<String>,
    pub timelines: Vec<String>,
    pub world_model: String,
    pub snapshots: Vec<String>,
    pub tables: Vec<String>,
    /// Set when the run aborted; artifacts listed above remain valid.
    pub error: Option<String>,
}

/// Instantiate one policy per agent from the config, in agent-id order.
/// Called per episode so scripted policies restart their scripts.
pub fn build_policies(config: &ExperimentConfig) -> Result<PolicyMap, RunnerError> {
    let mut map = PolicyMap::new();
    for (index, spec) in config.agents.iter().enumerate() {
        let agent = AgentId(index as u32);
        let policy: Box<dyn AgentPolicy> = match spec {
            PolicySpec::Baseline => Box::new(BaselinePolicy::new()),
            PolicySpec::Scripted { steps } => Box::new(ScriptedPolicy::new(
                steps.iter().map(build_script_step).collect::<Result<_, _>>()?,
            )),
            PolicySpec::Llm => {
                let endpoint = config
                    .llm
                    .clone()
                    .ok_or_else(|| RunnerError::Llm("missing [llm] section".into()))?;
                Box::new(
                    LlmPolicy::new(endpoint, PromptTemplates::default())
                        .map_err(RunnerError::Llm)?,
                )
            }
        };
        map.insert(agent, policy);
    }
    Ok(map)
}

fn build_script_step(spec: &ScriptStepSpec) -> Result<ScriptStep, RunnerError> {
    let plan = spec
        .plan
        .as_ref()
        .map(|lines| {
            lines
                .iter()
                .map(|line| {
                    parse_action(line, DEFAULT_TIMEOUT)
                        .map_err(|e| RunnerError::Config(ConfigError::Invalid(e.to_string())))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    Ok(ScriptStep {
        propose: spec
            .propose
            .map(|task| (task, spec.rationale.clone().unwrap_or_default())),
        commit: spec.commit,
        plan,
    })
}

#[derive(Default)]
struct AgentRuntime {
    executor: Option<Executor>,
    withdrawn: bool,
}

fn set_phase(state: &mut GridState, agent: AgentId, phase: AgentPhase) {
    if let Some(body) = state.agents.iter_mut().find(|a| a.id == agent) {
        body.phase = phase;
    }
}

/// Agents currently mid-plan per task; these count toward quorum.
fn executing_counts(runtimes: &BTreeMap<AgentId, AgentRuntime>) -> BTreeMap<BlockId, u32> {
    let mut counts = BTreeMap::new();
    for runtime in runtimes.values() {
        if let Some(executor) = &runtime.executor {
            *counts.entry(executor.plan.committed_task).or_insert(0) += 1;
        }
    }
    counts
}

fn record_incidents(
    policy: &mut Box<dyn AgentPolicy>,
    agent: AgentId,
    tick: gridpush_core::types::Tick,
    at: f64,
    sink: &mut RecordingSink,
) -> Result<(), TraceError> {
    for PolicyIncident { entry_point, detail } in policy.take_incidents() {
        sink.record(TraceEvent::by(tick, at, agent, EventKind::LlmFallback { entry_point, detail }))?;
    }
    Ok(())
}

fn describe_rejections(rejections: &[Rejection]) -> String {
    rejections
        .iter()
        .map(|r| format!("action {}: {}", r.position, r.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Draft, validate, refine and validate again; invalid output degrades to
/// the baseline shape rather than aborting the episode.
#[allow(clippy::too_many_arguments)]
fn plan_for_assignment(
    agent: AgentId,
    task: BlockId,
    team_size: u32,
    mapping: &TaskMapping,
    config: &ExperimentConfig,
    world: &WorldModelGraph,
    state: &GridState,
    policies: &mut PolicyMap,
    clock: &mut SimClock,
    sink: &mut RecordingSink,
) -> Result<Option<PlanInstance>, RunnerError> {
    let observation = observe_symbolic(state);
    let draft_ctx = DraftCtx {
        agent,
        task,
        tick: state.tick,
        observation: &observation,
        mapping,
        team_size,
    };
    let Some(policy) = policies.get_mut(&agent) else {
        return Ok(None);
    };
    let drafted = policy.draft(&draft_ctx);
    let at = clock.policy_call();
    record_incidents(policy, agent, state.tick, at, sink)?;
    let Some(draft) = drafted else {
        return Ok(None);
    };

    let draft = {
        let rejections = validate_plan(&draft, state);
        if rejections.is_empty() {
            draft
        } else {
            sink.record(TraceEvent::by(
                state.tick,
                clock.now(),
                agent,
                EventKind::ProtocolViolation {
                    stage: ViolationStage::Plan,
                    detail: format!("draft rejected ({})", describe_rejections(&rejections)),
                },
            ))?;
            match BaselinePolicy::new().draft(&draft_ctx) {
                Some(plan) => plan,
                None => return Ok(None),
            }
        }
    };

    let retrieval = retrieve_plans(world, task, config.retrieval_k, config.retrieval_l);
    let library = render_plan_library(&retrieval);
    let refine_ctx =
        RefineCtx { agent, observation: &observation, retrieval: &retrieval, library: &library };
    let policy = policies.get_mut(&agent).expect("checked above");
    let refined = policy.refine(draft.clone(), &refine_ctx);
    let at = clock.policy_call();
    record_incidents(policy, agent, state.tick, at, sink)?;

    let plan = if refined == draft {
        draft
    } else {
        let rejections = validate_plan(&refined, state);
        if rejections.is_empty() {
            refined
        } else {
            sink.record(TraceEvent::by(
                state.tick,
                clock.now(),
                agent,
                EventKind::ProtocolViolation {
                    stage: ViolationStage::Plan,
                    detail: format!(
                        "refinement rejected ({}), keeping draft",
                        describe_rejections(&rejections)
                    ),
                },
            ))?;
            draft
        }
    };
    Ok(Some(plan))
}

/// Run one episode against a frozen view of the world model. The caller
/// ingests the returned trace afterwards; within an episode the model
/// only informs negotiation and refinement.
pub fn run_episode(
    config: &ExperimentConfig,
    world: &WorldModelGraph,
    episode: u32,
    policies: &mut PolicyMap,
    writer: Option<Box<dyn Write + Send>>,
) -> Result<EpisodeOutput, RunnerError> {
    let mut env_config = config.env.clone();
    env_config.seed = config.effective_seed();
    let mut state = init_env(&env_config)?;
    let mut clock = SimClock::new();
    let mut sink = match writer {
        Some(writer) => RecordingSink::with_writer(writer),
        None => RecordingSink::new(),
    };
    let mut tracker = QuorumTracker::new();
    let mut runtimes: BTreeMap<AgentId, AgentRuntime> =
        state.agents.iter().map(|a| (a.id, AgentRuntime::default())).collect();

    loop {
        if let Some(reason) = is_terminal(&state) {
            let undelivered: Vec<BlockId> = state.active_blocks().map(|b| b.id).collect();
            sink.record(TraceEvent::room(
                state.tick,
                clock.now(),
                EventKind::EpisodeEnd { reason, env_steps: state.tick, undelivered },
            ))?;
            break;
        }

        // Negotiation pass: at most one room per tick; unassigned agents
        // retry on the next tick.
        let idle: Vec<AgentId> = runtimes
            .iter()
            .filter(|(_, rt)| rt.executor.is_none() && !rt.withdrawn)
            .map(|(&agent, _)| agent)
            .collect();
        if !idle.is_empty() {
            let executing = executing_counts(&runtimes);
            let quorum = QuorumCtx::new(&state, executing.clone());
            let outcome =
                run_room(&idle, &state, world, policies, &quorum, &mut tracker, &mut clock);
            sink.record_all(outcome.events)?;
            for agent in outcome.withdrawn {
                runtimes.get_mut(&agent).expect("known agent").withdrawn = true;
                set_phase(&mut state, agent, AgentPhase::Suspended);
            }
            let mapping = outcome.mapping;
            for (&agent, &task) in &mapping.assignments {
                let team_size = mapping.assignments.values().filter(|&&t| t == task).count()
                    as u32
                    + executing.get(&task).copied().unwrap_or(0);
                let plan = plan_for_assignment(
                    agent, task, team_size, &mapping, config, world, &state, policies,
                    &mut clock, &mut sink,
                )?;
                match plan {
                    Some(plan) => {
                        sink.record(TraceEvent::by(
                            state.tick,
                            clock.now(),
                            agent,
                            EventKind::PlanStart { plan: plan.clone() },
                        ))?;
                        runtimes.get_mut(&agent).expect("known agent").executor =
                            Some(Executor::new(plan));
                        set_phase(&mut state, agent, AgentPhase::Executing);
                    }
                    None => {
                        runtimes.get_mut(&agent).expect("known agent").withdrawn = true;
                        set_phase(&mut state, agent, AgentPhase::Suspended);
                    }
                }
            }
        }

        // Execution pass: tick advances exactly once, executors or not.
        let roster = Roster::from_state(&state);
        let mut moves: Vec<(AgentId, PrimitiveAction)> = Vec::new();
        for (&agent, runtime) in runtimes.iter_mut() {
            let Some(executor) = runtime.executor.as_mut() else { continue };
            sink.record_all(executor.precheck(agent, &state, &roster, clock.now()))?;
            if executor.is_done() {
                runtime.executor = None;
                set_phase(&mut state, agent, AgentPhase::Idle);
                continue;
            }
            moves.push((agent, executor.decompose(agent, &state)));
        }
        let joint = joint_action(&moves);
        let (next, report) = env_step(&state, &joint)?;
        let at = clock.step();
        state = next;
        for (&agent, runtime) in runtimes.iter_mut() {
            let Some(executor) = runtime.executor.as_mut() else { continue };
            sink.record_all(executor.advance(agent, &state, &report, at))?;
            if executor.is_done() {
                runtime.executor = None;
                set_phase(&mut state, agent, AgentPhase::Idle);
            }
        }
        for (&block, outcome) in &report.blocks {
            if outcome.done {
                sink.record(TraceEvent::room(report.tick, at, EventKind::BlockDone { block }))?;
            }
        }
    }

    let trace = sink.finish();
    let metrics = compute_metrics(&trace, episode)?;
    Ok(EpisodeOutput { trace, metrics })
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Run every episode, persisting the world model and all artifacts under
/// `out_dir`. On error a partial manifest is still written.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<RunManifest, RunnerError> {
    config.validate()?;
    let snapshots_dir = out_dir.join("snapshots");
    let tables_dir = out_dir.join("tables");
    fs::create_dir_all(&snapshots_dir)?;
    fs::create_dir_all(&tables_dir)?;

    let mut world = match &config.world_model {
        Some(path) if path.exists() => WorldModelGraph::load(path)?,
        _ => WorldModelGraph::default(),
    };

    let mut manifest = RunManifest {
        episodes_requested: config.episodes,
        seed: config.effective_seed(),
        world_model: "world_model.json".to_string(),
        ..RunManifest::default()
    };

    let mut episode_metrics = Vec::new();
    let mut failure: Option<RunnerError> = None;

    for episode in 1..=config.episodes {
        let attempt = (|| -> Result<(), RunnerError> {
            let mut policies = build_policies(config)?;
            let trace_path = out_dir.join(format!("trace_ep{episode:04}.jsonl"));
            let writer: Box<dyn Write + Send> =
                Box::new(BufWriter::new(fs::File::create(&trace_path)?));
            let output = run_episode(config, &world, episode, &mut policies, Some(writer))?;

            world.ingest_episode(&output.trace)?;
            world.save(&out_dir.join("world_model.json"))?;

            let metrics_path = out_dir.join(format!("metrics_ep{episode:04}.json"));
            fs::write(&metrics_path, serde_json::to_string_pretty(&output.metrics)?)?;
            let timeline_path = out_dir.join(format!("timeline_ep{episode:04}.svg"));
            fs::write(&timeline_path, render_timeline(&output.trace))?;

            manifest.traces.push(file_name(&trace_path));
            manifest.metrics.push(file_name(&metrics_path));
            manifest.timelines.push(file_name(&timeline_path));

            if config.snapshot_episodes.contains(&episode) {
                for format in [GraphFormat::Json, GraphFormat::Dot] {
                    let ext = match format {
                        GraphFormat::Json => "json",
                        GraphFormat::Dot => "dot",
                    };
                    let path = snapshots_dir.join(format!("world_model_ep{episode:04}.{ext}"));
                    fs::write(&path, export_graph(&world, format)?)?;
                    manifest.snapshots.push(format!("snapshots/{}", file_name(&path)));
                }
            }

            episode_metrics.push(output.metrics);
            manifest.episodes_completed = episode;
            Ok(())
        })();
        if let Err(error) = attempt {
            failure = Some(error);
            break;
        }
    }

    if !episode_metrics.is_empty() {
        let tables = aggregate_runs(&episode_metrics);
        for (name, content) in [
            ("completion_matrix.csv", &tables.completion_matrix),
            ("episode_series.csv", &tables.episode_series),
            ("commitment_patterns.csv", &tables.commitment_patterns),
        ] {
            fs::write(tables_dir.join(name), content)?;
            manifest.tables.push(format!("tables/{name}"));
        }
    }

    if let Some(error) = failure {
        manifest.error = Some(error.to_string());
        fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        return Err(error);
    }
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
