use std::fmt::Write as _;

use crate::world_model::retrieve::RetrievalResult;
use crate::world_model::stats::{fmt_mean, fmt_percent};

/// Render a retrieval result as the plan-library text handed to planning
/// policies: a prototype section ranked by success rate, then an instance
/// section ranked by success then duration. Unknown statistics print as
/// the literal `UNKNOWN`.
pub fn render_plan_library(result: &RetrievalResult) -> String {
    let mut out = String::new();
    out.push_str("--- PROTOTYPES ---\n");
    out.push_str("Historical Plan Prototypes (ranked by success rate):\n");
    for (rank, proto) in result.prototypes.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}. Success rate={} | avg team={} | avg duration={}",
            rank + 1,
            fmt_percent(proto.stats.success_rate),
            fmt_mean(proto.stats.mean_team_size),
            fmt_mean(proto.stats.mean_duration),
        );
        let _ = writeln!(out, "   Prototype:[{}]", proto.key.join(" -> "));
    }
    out.push_str("--- INSTANCES ---\n");
    out.push_str("Detailed Plan Instances (ranked by success then duration):\n");
    let mut rank = 0;
    for proto in &result.prototypes {
        for instance in &proto.instances {
            rank += 1;
            let _ = writeln!(
                out,
                "{rank}. Success rate={} | attempts={} | duration={}",
                fmt_percent(instance.stats.success_rate),
                instance.stats.attempts,
                fmt_mean(instance.stats.mean_duration),
            );
            let chain = instance
                .actions
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" -> ");
            let _ = writeln!(out, "   Plan:[{chain}]");
        }
    }
    out
}
