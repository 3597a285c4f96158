//! Plain-text "guidebook" summarising historical task performance.
//!
//! This is the first-phase prompt block handed to every policy during
//! negotiation: session facts, per-task outcome statistics, and the
//! empirically best team size per task. Fields without data print the
//! literal `UNKNOWN`, and attempt counts are always shown so a reader can
//! judge how much evidence backs each line.

use crate::world_model::{fmt_mean, fmt_percent, TeamSizeStats};

use super::buffer::NegotiationBuffer;

/// Render the phase-one guidebook text for a negotiation room.
///
/// `team_stats` carries one entry per task of interest (typically every
/// ACTIVE task); tasks present in the buffer's reports but absent from
/// `team_stats` render an UNKNOWN recommendation line.
pub fn render_guidebook(
    buffer: &NegotiationBuffer,
    team_stats: &[TeamSizeStats],
    agent_count: usize,
) -> String {
    let mut out = String::new();
    out.push_str("CURRENT SESSION INFO:\n");
    out.push_str(&format!(
        "  Current timestep:[{}], Number of agents:[{}]\n",
        buffer.tick, agent_count
    ));
    out.push('\n');

    out.push_str("HISTORICAL TASK PERFORMANCE\n");
    for (task, stats) in &buffer.task_reports {
        let range = match stats.start_range {
            Some((lo, hi)) => format!("[{lo}-{hi}]"),
            None => "UNKNOWN".to_string(),
        };
        out.push_str(&format!(
            "  {}: avg_start={}, range={}, success_rate={} (/{})\n",
            task,
            fmt_mean(stats.mean_start),
            range,
            fmt_percent(stats.success_rate()),
            stats.attempts
        ));
    }
    out.push('\n');

    out.push_str("OPTIMAL TEAM SIZE RECOMMENDATIONS\n");
    for task in buffer.task_reports.keys() {
        let stats = team_stats.iter().find(|s| s.task == *task);
        let (size, rate) = match stats {
            Some(s) => (
                s.best_size().map_or("UNKNOWN".to_string(), |n| n.to_string()),
                fmt_percent(s.best_rate()),
            ),
            None => ("UNKNOWN".to_string(), "UNKNOWN".to_string()),
        };
        out.push_str(&format!(
            "  {task}: optimal team size = {size} (success_rate_best:{rate})\n"
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::env::{init_env, observe_symbolic, BlockSpec, EnvConfig};
    use crate::types::{BlockId, Pos};
    use crate::world_model::{SizeTally, TaskStats};

    fn buffer_with(reports: BTreeMap<BlockId, TaskStats>, tick: u64) -> NegotiationBuffer {
        let config = EnvConfig {
            width: 8,
            height: 4,
            goal_band_width: 2,
            blocks: vec![
                BlockSpec { id: BlockId(1), weight: 1, anchor: Pos::new(2, 1) },
                BlockSpec { id: BlockId(2), weight: 2, anchor: Pos::new(4, 2) },
            ],
            agent_starts: vec![Pos::new(0, 0), Pos::new(0, 3)],
            max_steps: 60,
            seed: 0,
        };
        NegotiationBuffer::new(tick, observe_symbolic(&init_env(&config).unwrap()), reports)
    }

    #[test]
    fn fresh_history_prints_unknown_everywhere() {
        let mut reports = BTreeMap::new();
        reports.insert(BlockId(1), TaskStats::default());
        reports.insert(BlockId(2), TaskStats::default());
        let buffer = buffer_with(reports, 0);
        let text = render_guidebook(&buffer, &[], 2);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "CURRENT SESSION INFO:");
        assert_eq!(lines[1], "  Current timestep:[0], Number of agents:[2]");
        assert_eq!(lines[2], "");
        assert_eq!(lines[3], "HISTORICAL TASK PERFORMANCE");
        assert_eq!(
            lines[4],
            "  block_1: avg_start=UNKNOWN, range=UNKNOWN, success_rate=UNKNOWN (/0)"
        );
        assert_eq!(
            lines[5],
            "  block_2: avg_start=UNKNOWN, range=UNKNOWN, success_rate=UNKNOWN (/0)"
        );
        assert_eq!(lines[6], "");
        assert_eq!(lines[7], "OPTIMAL TEAM SIZE RECOMMENDATIONS");
        assert_eq!(lines[8], "  block_1: optimal team size = UNKNOWN (success_rate_best:UNKNOWN)");
        assert_eq!(lines[9], "  block_2: optimal team size = UNKNOWN (success_rate_best:UNKNOWN)");
    }

    #[test]
    fn seasoned_history_renders_exact_statistics() {
        let mut reports = BTreeMap::new();
        // Four attempts starting at ticks {8, 10, 10, 20}: mean 12, two
        // successes.
        reports.insert(
            BlockId(1),
            TaskStats {
                attempts: 4,
                successes: 2,
                mean_start: Some(12.0),
                start_range: Some((8, 20)),
                mean_duration: Some(15.0),
            },
        );
        reports.insert(BlockId(2), TaskStats::default());
        let buffer = buffer_with(reports, 34);

        let mut stats = TeamSizeStats { task: BlockId(1), per_size: BTreeMap::new() };
        stats.per_size.insert(1, SizeTally { attempts: 2, successes: 0 });
        stats.per_size.insert(2, SizeTally { attempts: 2, successes: 2 });

        let text = render_guidebook(&buffer, &[stats], 3);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "  Current timestep:[34], Number of agents:[3]");
        assert_eq!(lines[4], "  block_1: avg_start=12, range=[8-20], success_rate=50% (/4)");
        assert_eq!(lines[8], "  block_1: optimal team size = 2 (success_rate_best:100%)");
        assert_eq!(lines[9], "  block_2: optimal team size = UNKNOWN (success_rate_best:UNKNOWN)");
    }

    #[test]
    fn section_headers_are_stable() {
        let buffer = buffer_with(BTreeMap::new(), 5);
        let text = render_guidebook(&buffer, &[], 1);
        for header in
            ["CURRENT SESSION INFO:", "HISTORICAL TASK PERFORMANCE", "OPTIMAL TEAM SIZE RECOMMENDATIONS"]
        {
            assert!(text.contains(header), "missing header {header:?}");
        }
    }
}
