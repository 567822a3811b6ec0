//! Deterministic cost accounting.
//!
//! One cost unit is one per-datum log-likelihood term evaluation or one
//! per-datum summary-statistic touch. Counters are the machine-independent
//! stand-in for wall-clock budgets: identical configs produce identical
//! counter trajectories on any host.

/// Per-chain counters; never shared across concurrent chains.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CostMeter {
    pub lik_evals: u64,
    pub stat_touches: u64,
}

impl CostMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_lik(&mut self, n: u64) {
        self.lik_evals += n;
    }

    pub fn add_stat(&mut self, n: u64) {
        self.stat_touches += n;
    }

    /// Combined cost units.
    pub fn total(&self) -> u64 {
        self.lik_evals + self.stat_touches
    }
}
