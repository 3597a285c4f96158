use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::types::{BlockId, Tick};

/// Render a percentage rounded to the nearest integer, or UNKNOWN.
pub fn fmt_percent(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{}%", (r * 100.0).round() as i64),
        None => "UNKNOWN".to_string(),
    }
}

/// Render a mean with at most one decimal place (integers stay integers),
/// or UNKNOWN.
pub fn fmt_mean(value: Option<f64>) -> String {
    match value {
        Some(v) => {
            let rounded = (v * 10.0).round() / 10.0;
            if rounded.fract() == 0.0 {
                format!("{}", rounded as i64)
            } else {
                format!("{rounded:.1}")
            }
        }
        None => "UNKNOWN".to_string(),
    }
}

/// Historical report for one task, aggregated over all task nodes with its
/// id. A task with no attempts has every statistic UNKNOWN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TaskStats {
    pub attempts: u32,
    pub successes: u32,
    pub mean_start: Option<f64>,
    pub start_range: Option<(Tick, Tick)>,
    /// Mean over attempts with known durations only.
    pub mean_duration: Option<f64>,
}

impl TaskStats {
    pub fn success_rate(&self) -> Option<f64> {
        (self.attempts > 0).then(|| f64::from(self.successes) / f64::from(self.attempts))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SizeTally {
    pub attempts: u32,
    pub successes: u32,
}

impl SizeTally {
    pub fn rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            f64::from(self.successes) / f64::from(self.attempts)
        }
    }
}

/// Per-team-size success tallies for one task, aggregated from plan
/// instance attempts across episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSizeStats {
    pub task: BlockId,
    pub per_size: BTreeMap<u32, SizeTally>,
}

impl TeamSizeStats {
    /// Recommended size: highest success rate, ties to the smallest size.
    /// UNKNOWN (None) when no sizes were recorded.
    pub fn best_size(&self) -> Option<u32> {
        self.per_size
            .iter()
            .map(|(&size, tally)| (size, tally.rate()))
            // BTreeMap iterates sizes ascending, so strict `>` keeps the
            // smallest size on rate ties.
            .fold(None, |best: Option<(u32, f64)>, (size, rate)| match best {
                Some((_, best_rate)) if rate <= best_rate => best,
                _ => Some((size, rate)),
            })
            .map(|(size, _)| size)
    }

    pub fn best_rate(&self) -> Option<f64> {
        self.best_size().map(|s| self.per_size[&s].rate())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stats_are_unknown() {
        let stats = TaskStats::default();
        assert_eq!(stats.success_rate(), None);
        assert_eq!(fmt_percent(stats.success_rate()), "UNKNOWN");
    }

    #[test]
    fn best_size_prefers_rate_then_smaller() {
        // size 1: 0/2, size 2: 3/3 -> recommend 2 with rate 1.0.
        let stats = TeamSizeStats {
            task: BlockId(1),
            per_size: [
                (1, SizeTally { attempts: 2, successes: 0 }),
                (2, SizeTally { attempts: 3, successes: 3 }),
            ]
            .into_iter()
            .collect(),
        };
        assert_eq!(stats.best_size(), Some(2));
        assert_eq!(stats.best_rate(), Some(1.0));

        // Tie at 100%: the smaller size wins.
        let tie = TeamSizeStats {
            task: BlockId(1),
            per_size: [
                (1, SizeTally { attempts: 2, successes: 2 }),
                (3, SizeTally { attempts: 1, successes: 1 }),
            ]
            .into_iter()
            .collect(),
        };
        assert_eq!(tie.best_size(), Some(1));

        let empty = TeamSizeStats { task: BlockId(1), per_size: BTreeMap::new() };
        assert_eq!(empty.best_size(), None);
    }

    #[test]
    fn percent_rounds_to_nearest_integer() {
        assert_eq!(fmt_percent(Some(2.0 / 3.0)), "67%");
        assert_eq!(fmt_percent(Some(0.5)), "50%");
        assert_eq!(fmt_mean(Some(12.0)), "12");
        assert_eq!(fmt_mean(Some(7.25)), "7.3");
        assert_eq!(fmt_mean(None), "UNKNOWN");
    }
}
