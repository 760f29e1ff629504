//! Deterministic P-worker execution.
//!
//! Workers only interact through [`Collective`]. Every counted collective is
//! a reduce-sum whose result is replicated on all workers; partial sums travel
//! as [`ExactSum`] values and are rounded once after the merge, so the result
//! is bitwise independent of `P` and of the partition boundaries.
//!
//! `rounds` counts synchronization points, including at `P = 1`. The `log P`
//! factor of a tree allreduce lives in the cost model, not in the counter.

mod cost;
mod group;
mod run;

pub use cost::{predict_costs, CostAlgorithm, CostInputs, CostPrediction};
pub use group::{Communicator, WorkerGroup};
pub use run::{default_partition, run_distributed, RunConfig, RunOutput, SolverSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ExactSum;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommStats {
    /// Synchronization rounds (latency proxy).
    pub rounds: u64,
    /// Reduced words (bandwidth proxy): one per array element per round.
    pub words: u64,
    /// Local multiply-adds spent on reduction contributions.
    pub local_flops: u64,
}

impl CommStats {
    pub(crate) fn record_round(&mut self, words: usize) {
        self.rounds += 1;
        self.words += words as u64;
    }
}

/// What a solver needs from its execution context.
pub trait Collective {
    fn rank(&self) -> usize;

    fn workers(&self) -> usize;

    /// Sums one contribution per worker; every worker receives the same
    /// correctly rounded totals. Counts one round and `contribution.len()` words.
    fn allreduce(&mut self, contribution: Vec<ExactSum>) -> Result<Vec<f64>>;

    /// Concatenates worker slices in rank order on rank 0 (others get `None`).
    /// Monitoring only: not counted in [`CommStats`].
    fn gather(&mut self, local: &[f64]) -> Result<Option<Vec<f64>>>;

    fn stats(&self) -> CommStats;

    fn add_flops(&mut self, flops: u64);
}

/// Single-worker context: reductions are local but still counted.
#[derive(Debug, Default)]
pub struct SerialComm {
    stats: CommStats,
}

impl SerialComm {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Collective for SerialComm {
    fn rank(&self) -> usize {
        0
    }

    fn workers(&self) -> usize {
        1
    }

    fn allreduce(&mut self, contribution: Vec<ExactSum>) -> Result<Vec<f64>> {
        self.stats.record_round(contribution.len());
        Ok(contribution.iter().map(ExactSum::value).collect())
    }

    fn gather(&mut self, local: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(Some(local.to_vec()))
    }

    fn stats(&self) -> CommStats {
        self.stats
    }

    fn add_flops(&mut self, flops: u64) {
        self.stats.local_flops += flops;
    }
}

/// Reduces exact per-worker contributions in rank order.
pub fn allreduce_exact(contributions: &[Vec<ExactSum>]) -> Result<Vec<f64>> {
    let Some(first) = contributions.first() else {
        return Err(Error::Protocol("allreduce with no workers".into()));
    };
    let len = first.len();
    if let Some((rank, c)) = contributions.iter().enumerate().find(|(_, c)| c.len() != len) {
        return Err(Error::Protocol(format!("rank {rank} contributed {} words, rank 0 contributed {len}", c.len())));
    }
    let mut acc = first.clone();
    for c in &contributions[1..] {
        for (a, b) in acc.iter_mut().zip(c) {
            a.merge(b);
        }
    }
    Ok(acc.iter().map(ExactSum::value).collect())
}

/// Reduce-sum of plain per-worker arrays; returns the replicated sum and
/// the traffic of the single round it represents.
pub fn allreduce_sum(contributions: &[Vec<f64>]) -> Result<(Vec<f64>, CommStats)> {
    let exact: Vec<Vec<ExactSum>> = contributions
        .iter()
        .map(|c| {
            c.iter()
                .map(|&x| {
                    let mut s = ExactSum::new();
                    s.add(x);
                    s
                })
                .collect()
        })
        .collect();
    let sum = allreduce_exact(&exact)?;
    let mut stats = CommStats::default();
    stats.record_round(sum.len());
    Ok((sum, stats))
}
