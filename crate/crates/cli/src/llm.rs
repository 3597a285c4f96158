//! Agent policy backed by an external text-completion endpoint.
//!
//! The wire contract is a single JSON POST: `{model, prompt, max_tokens,
//! temperature}` in, `{text}` back. Prompts are rendered from swappable
//! templates with named placeholders; replies are parsed leniently (first
//! block id for proposals and commitments, canonical action lines for
//! plans, garbage dropped). Transport failure after the configured
//! retries falls back to the baseline heuristic and is surfaced as an
//! incident so the trace records the degradation.

use serde::{Deserialize, Serialize};

use gridpush_core::agents::{
    AgentPolicy, BaselinePolicy, CommitCtx, DraftCtx, PolicyIncident, ProposeCtx, RefineCtx,
};
use gridpush_core::controller::{parse_action, PlanInstance, SymbolicAction, DEFAULT_TIMEOUT};
use gridpush_core::types::BlockId;

/// Connection settings for the completion endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmEndpointConfig {
    /// Full URL accepting the completion POST.
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
}

fn default_timeout_secs() -> u64 {
    30
}

fn default_max_tokens() -> u32 {
    512
}

fn default_retries() -> u32 {
    2
}

impl LlmEndpointConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.timeout_secs == 0 {
            return Err("llm timeout_secs must be positive".into());
        }
        if self.base_url.is_empty() {
            return Err("llm base_url must be set".into());
        }
        Ok(())
    }
}

/// Prompt templates with `{{NAME}}` placeholders. The compiled-in
/// defaults live under `prompts/` next to this crate and can be swapped
/// per experiment with [`PromptTemplates::from_dir`].
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    pub propose: String,
    pub commit: String,
    pub draft: String,
    pub refine: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            propose: include_str!("../prompts/propose.txt").to_string(),
            commit: include_str!("../prompts/commit.txt").to_string(),
            draft: include_str!("../prompts/draft.txt").to_string(),
            refine: include_str!("../prompts/refine.txt").to_string(),
        }
    }
}

impl PromptTemplates {
    /// Load `propose.txt`, `commit.txt`, `draft.txt`, `refine.txt` from a
    /// directory.
    pub fn from_dir(dir: &std::path::Path) -> std::io::Result<Self> {
        let read = |name: &str| std::fs::read_to_string(dir.join(name));
        Ok(Self {
            propose: read("propose.txt")?,
            commit: read("commit.txt")?,
            draft: read("draft.txt")?,
            refine: read("refine.txt")?,
        })
    }
}

fn render(template: &str, pairs: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in pairs {
        out = out.replace(&format!("{{{{{key}}}}}"), value);
    }
    out
}

/// First `block_<digits>` token in free text.
fn first_block_id(text: &str) -> Option<BlockId> {
    for (start, _) in text.match_indices("block_") {
        let digits: String = text[start + "block_".len()..]
            .chars()
            .take_while(char::is_ascii_digit)
            .collect();
        if let Ok(id) = digits.parse::<u32>() {
            return Some(BlockId(id));
        }
    }
    None
}

/// Parse canonical action lines, dropping anything unparseable.
fn parse_plan_lines(text: &str) -> Vec<SymbolicAction> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .filter_map(|line| parse_action(line, DEFAULT_TIMEOUT).ok())
        .collect()
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// Language-model embodiment of an agent. Degrades to [`BaselinePolicy`]
/// whenever the endpoint fails or replies unusably.
pub struct LlmPolicy {
    config: LlmEndpointConfig,
    templates: PromptTemplates,
    client: reqwest::blocking::Client,
    fallback: BaselinePolicy,
    incidents: Vec<PolicyIncident>,
}

impl LlmPolicy {
    pub fn new(config: LlmEndpointConfig, templates: PromptTemplates) -> Result<Self, String> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| e.to_string())?;
        Ok(Self {
            config,
            templates,
            client,
            fallback: BaselinePolicy::new(),
            incidents: Vec::new(),
        })
    }

    fn complete(&self, prompt: &str) -> Result<String, String> {
        let request = CompletionRequest {
            model: &self.config.model,
            prompt,
            max_tokens: self.config.max_tokens,
            temperature: self.config.temperature,
        };
        let mut last_error = String::new();
        for _ in 0..=self.config.retries {
            let sent = self
                .client
                .post(&self.config.base_url)
                .json(&request)
                .send()
                .and_then(|resp| resp.error_for_status())
                .and_then(|resp| resp.json::<CompletionResponse>());
            match sent {
                Ok(completion) => return Ok(completion.text),
                Err(error) => last_error = error.to_string(),
            }
        }
        Err(last_error)
    }

    /// Complete `prompt`, recording an incident and returning `None` on
    /// transport failure.
    fn try_complete(&mut self, entry_point: &str, prompt: &str) -> Option<String> {
        match self.complete(prompt) {
            Ok(text) => Some(text),
            Err(detail) => {
                self.incidents.push(PolicyIncident {
                    entry_point: entry_point.to_string(),
                    detail: format!("endpoint failed after retries: {detail}"),
                });
                None
            }
        }
    }
}

impl AgentPolicy for LlmPolicy {
    fn propose(&mut self, ctx: &ProposeCtx<'_>) -> Option<(BlockId, String)> {
        let agent = ctx.agent.to_string();
        let observation = ctx.buffer.observation.render_text();
        let buffer = ctx.buffer.render_text();
        let prompt = render(
            &self.templates.propose,
            &[
                ("AGENT", agent.as_str()),
                ("OBSERVATION", observation.as_str()),
                ("GUIDEBOOK", ctx.guidebook),
                ("BUFFER", buffer.as_str()),
            ],
        );
        match self.try_complete("propose", &prompt) {
            Some(reply) => match first_block_id(&reply) {
                Some(task) => Some((task, reply.trim().to_string())),
                None => self.fallback.propose(ctx),
            },
            None => self.fallback.propose(ctx),
        }
    }

    fn commit(&mut self, ctx: &CommitCtx<'_>) -> Option<BlockId> {
        let agent = ctx.agent.to_string();
        let observation = ctx.buffer.observation.render_text();
        let buffer = ctx.buffer.render_text();
        let prompt = render(
            &self.templates.commit,
            &[
                ("AGENT", agent.as_str()),
                ("OBSERVATION", observation.as_str()),
                ("GUIDEBOOK", ctx.guidebook),
                ("BUFFER", buffer.as_str()),
            ],
        );
        match self.try_complete("commit", &prompt) {
            Some(reply) => first_block_id(&reply).or_else(|| self.fallback.commit(ctx)),
            None => self.fallback.commit(ctx),
        }
    }

    fn draft(&mut self, ctx: &DraftCtx<'_>) -> Option<PlanInstance> {
        let agent = ctx.agent.to_string();
        let task = ctx.task.to_string();
        let team = ctx.team_size.to_string();
        let observation = ctx.observation.render_text();
        let prompt = render(
            &self.templates.draft,
            &[
                ("AGENT", agent.as_str()),
                ("COMMITMENT", task.as_str()),
                ("TEAM_SIZE", team.as_str()),
                ("OBSERVATION", observation.as_str()),
            ],
        );
        if let Some(reply) = self.try_complete("draft", &prompt) {
            let actions = parse_plan_lines(&reply);
            if !actions.is_empty() {
                return Some(PlanInstance {
                    actions,
                    committed_task: ctx.task,
                    author: ctx.agent,
                    created_at: ctx.tick,
                });
            }
        }
        self.fallback.draft(ctx)
    }

    fn refine(&mut self, draft: PlanInstance, ctx: &RefineCtx<'_>) -> PlanInstance {
        let agent = ctx.agent.to_string();
        let task = draft.committed_task.to_string();
        let observation = ctx.observation.render_text();
        let lines = draft.render_lines();
        let prompt = render(
            &self.templates.refine,
            &[
                ("AGENT", agent.as_str()),
                ("COMMITMENT", task.as_str()),
                ("OBSERVATION", observation.as_str()),
                ("DRAFT", lines.as_str()),
                ("PLAN_LIBRARY", ctx.library),
            ],
        );
        if let Some(reply) = self.try_complete("refine", &prompt) {
            let actions = parse_plan_lines(&reply);
            if !actions.is_empty() {
                return PlanInstance { actions, ..draft };
            }
        }
        draft
    }

    fn take_incidents(&mut self) -> Vec<PolicyIncident> {
        std::mem::take(&mut self.incidents)
    }
}

#[cfg(test)]
mod tests {
    use std::io::{Read, Write};
    use std::net::TcpListener;

    use gridpush_core::env::{init_env, observe_symbolic, BlockSpec, EnvConfig};
    use gridpush_core::negotiation::{NegotiationBuffer, TaskMapping};
    use gridpush_core::types::{AgentId, Dir, Pos};

    use super::*;

    /// Serve `replies` to consecutive POSTs on a local socket, then stop.
    fn stub_endpoint(replies: Vec<String>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for reply in replies {
                let Ok((mut stream, _)) = listener.accept() else { return };
                // Drain the request: headers, then the declared body length.
                let mut buf = Vec::new();
                let mut chunk = [0u8; 1024];
                let mut header_end = 0;
                while header_end == 0 {
                    let n = stream.read(&mut chunk).unwrap_or(0);
                    if n == 0 {
                        break;
                    }
                    buf.extend_from_slice(&chunk[..n]);
                    if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                        header_end = pos + 4;
                    }
                }
                let headers = String::from_utf8_lossy(&buf[..header_end]).to_string();
                let content_length: usize = headers
                    .lines()
                    .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(str::trim).map(String::from))
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0);
                while buf.len() < header_end + content_length {
                    let n = stream.read(&mut chunk).unwrap_or(0);
                    if n == 0 {
                        break;
                    }
                    buf.extend_from_slice(&chunk[..n]);
                }
                let body = serde_json::to_string(&serde_json::json!({ "text": reply })).unwrap();
                let response = format!(
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    body.len(),
                    body
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        format!("http://{addr}/complete")
    }

    fn endpoint_config(base_url: String) -> LlmEndpointConfig {
        LlmEndpointConfig {
            base_url,
            model: "test-model".into(),
            timeout_secs: 5,
            max_tokens: 64,
            temperature: 0.0,
            retries: 0,
        }
    }

    fn fixture() -> (NegotiationBuffer, EnvConfig) {
        let config = EnvConfig {
            width: 10,
            height: 6,
            goal_band_width: 2,
            blocks: vec![
                BlockSpec { id: BlockId(1), weight: 1, anchor: Pos::new(6, 1) },
                BlockSpec { id: BlockId(2), weight: 2, anchor: Pos::new(3, 3) },
            ],
            agent_starts: vec![Pos::new(0, 0), Pos::new(0, 5)],
            max_steps: 100,
            seed: 0,
        };
        let buffer = NegotiationBuffer::new(
            0,
            observe_symbolic(&init_env(&config).unwrap()),
            Default::default(),
        );
        (buffer, config)
    }

    #[test]
    fn draft_parses_action_lines_and_drops_garbage() {
        let url = stub_endpoint(vec![
            "MoveToBlock(block_1, N)\nplease hold my beverage\nPush(block_1, steps=5)".into(),
        ]);
        let mut policy = LlmPolicy::new(endpoint_config(url), PromptTemplates::default()).unwrap();
        let (buffer, _) = fixture();
        let mapping = TaskMapping::default();
        let ctx = DraftCtx {
            agent: AgentId(0),
            task: BlockId(1),
            tick: 2,
            observation: &buffer.observation,
            mapping: &mapping,
            team_size: 1,
        };
        let plan = policy.draft(&ctx).unwrap();
        assert_eq!(plan.actions.len(), 2, "garbage line dropped");
        assert_eq!(plan.actions[0], SymbolicAction::MoveToBlock { block: BlockId(1), side: Dir::N });
        assert!(policy.take_incidents().is_empty(), "no transport failure");
    }

    #[test]
    fn three_line_reply_becomes_three_action_plan() {
        let url = stub_endpoint(vec![
            "MoveToBlock(block_1, N)\nRendezvous(block_1, N, count=2, timeout=10)\nPush(block_1, steps=5)"
                .into(),
        ]);
        let mut policy = LlmPolicy::new(endpoint_config(url), PromptTemplates::default()).unwrap();
        let (buffer, _) = fixture();
        let mapping = TaskMapping::default();
        let ctx = DraftCtx {
            agent: AgentId(1),
            task: BlockId(1),
            tick: 0,
            observation: &buffer.observation,
            mapping: &mapping,
            team_size: 2,
        };
        assert_eq!(policy.draft(&ctx).unwrap().actions.len(), 3);
    }

    #[test]
    fn dead_endpoint_falls_back_to_baseline_with_incident() {
        // Bind a port and drop the listener so connections are refused.
        let url = {
            let listener = TcpListener::bind("127.0.0.1:0").unwrap();
            format!("http://{}/complete", listener.local_addr().unwrap())
        };
        let mut policy = LlmPolicy::new(endpoint_config(url), PromptTemplates::default()).unwrap();
        let (buffer, _) = fixture();
        let mapping = TaskMapping::default();
        let ctx = DraftCtx {
            agent: AgentId(0),
            task: BlockId(1),
            tick: 0,
            observation: &buffer.observation,
            mapping: &mapping,
            team_size: 1,
        };
        let plan = policy.draft(&ctx).expect("baseline fallback still drafts");
        assert_eq!(plan.actions.len(), 2, "baseline move+push shape");
        let incidents = policy.take_incidents();
        assert_eq!(incidents.len(), 1);
        assert_eq!(incidents[0].entry_point, "draft");
    }

    #[test]
    fn propose_extracts_task_and_keeps_reply_as_rationale() {
        let url = stub_endpoint(vec!["block_2 — heavy, needs both of us".into()]);
        let mut policy = LlmPolicy::new(endpoint_config(url), PromptTemplates::default()).unwrap();
        let (buffer, _) = fixture();
        let ctx = ProposeCtx { agent: AgentId(0), buffer: &buffer, guidebook: "guide" };
        let (task, rationale) = policy.propose(&ctx).unwrap();
        assert_eq!(task, BlockId(2));
        assert!(rationale.contains("needs both"));
    }

    #[test]
    fn unparseable_commit_reply_falls_back_to_baseline_choice() {
        let url = stub_endpoint(vec!["hmm, tough call".into()]);
        let mut policy = LlmPolicy::new(endpoint_config(url), PromptTemplates::default()).unwrap();
        let (buffer, _) = fixture();
        let ctx = CommitCtx { agent: AgentId(0), buffer: &buffer, team_stats: &[], guidebook: "" };
        // Baseline picks the nearest-to-goal block.
        assert_eq!(policy.commit(&ctx), Some(BlockId(1)));
    }

    #[test]
    fn refine_keeps_draft_when_reply_is_empty() {
        let url = stub_endpoint(vec!["".into()]);
        let mut policy = LlmPolicy::new(endpoint_config(url), PromptTemplates::default()).unwrap();
        let (buffer, _) = fixture();
        let draft = PlanInstance {
            actions: vec![SymbolicAction::Push { block: BlockId(1), steps: 3 }],
            committed_task: BlockId(1),
            author: AgentId(0),
            created_at: 0,
        };
        let retrieval = gridpush_core::world_model::retrieve_plans(
            &gridpush_core::world_model::WorldModelGraph::default(),
            BlockId(1),
            3,
            3,
        );
        let ctx = RefineCtx {
            agent: AgentId(0),
            observation: &buffer.observation,
            retrieval: &retrieval,
            library: "",
        };
        assert_eq!(policy.refine(draft.clone(), &ctx), draft);
    }
}
