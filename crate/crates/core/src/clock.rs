//! Deterministic wall-clock accounting.
//!
//! Environment steps and negotiation both take wall-clock time, but only
//! environment steps consume simulation ticks. To keep traces reproducible
//! byte-for-byte, the simulator never reads the host clock; it charges a
//! fixed cost per environment step and per policy invocation. This keeps
//! the two cost axes (env-steps vs. seconds) distinguishable in analytics
//! while staying fully deterministic.

/// Seconds charged for advancing the environment by one tick.
pub const STEP_SECONDS: f64 = 0.05;

/// Seconds charged for one policy invocation (proposal, commitment, draft
/// or refinement), regardless of the policy implementation.
pub const POLICY_CALL_SECONDS: f64 = 0.2;

/// Monotone deterministic clock. All trace events are stamped from here.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimClock {
    seconds: f64,
}

impl SimClock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Current wall-clock reading in seconds.
    pub fn now(&self) -> f64 {
        self.seconds
    }

    /// Charge one environment step and return the new reading.
    pub fn step(&mut self) -> f64 {
        self.advance(STEP_SECONDS)
    }

    /// Charge one policy invocation and return the new reading.
    pub fn policy_call(&mut self) -> f64 {
        self.advance(POLICY_CALL_SECONDS)
    }

    /// Advance by an arbitrary non-negative amount and return the new
    /// reading.
    pub fn advance(&mut self, seconds: f64) -> f64 {
        debug_assert!(seconds >= 0.0, "clock can only move forward");
        self.seconds += seconds;
        self.seconds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_is_monotone_and_deterministic() {
        let mut a = SimClock::new();
        let mut b = SimClock::new();
        for _ in 0..5 {
            a.step();
            b.step();
        }
        a.policy_call();
        b.policy_call();
        assert_eq!(a.now(), b.now());
        assert_eq!(a.now(), 5.0 * STEP_SECONDS + POLICY_CALL_SECONDS);
    }

    #[test]
    fn readings_never_decrease() {
        let mut clock = SimClock::new();
        let mut last = clock.now();
        for i in 0..20 {
            let next = if i % 2 == 0 { clock.step() } else { clock.policy_call() };
            assert!(next >= last);
            last = next;
        }
    }
}
