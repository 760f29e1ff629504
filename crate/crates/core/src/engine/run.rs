//! Partitioned solver runs on a [`WorkerGroup`].

use std::time::{Duration, Instant};

use super::{CommStats, WorkerGroup};
use crate::dataset::{partition, Axis, Partition};
use crate::engine::Collective;
use crate::error::{Error, Result};
use crate::lasso::{drive_lasso, lasso_objective, LassoProblem, LassoRunSpec, LassoShard};
use crate::record::RunRecord;
use crate::svm::{drive_svm, duality_gap_of, SvmProblem, SvmRunSpec, SvmShard};

/// A problem together with the method to run on it.
#[derive(Clone, Debug)]
pub enum SolverSpec {
    Lasso { problem: LassoProblem, run: LassoRunSpec },
    Svm { problem: SvmProblem, run: SvmRunSpec },
}

impl SolverSpec {
    /// Lasso splits rows, SVM splits columns.
    pub fn axis(&self) -> Axis {
        match self {
            SolverSpec::Lasso { .. } => Axis::Rows,
            SolverSpec::Svm { .. } => Axis::Cols,
        }
    }

    fn axis_len(&self) -> usize {
        match self {
            SolverSpec::Lasso { problem, .. } => problem.data.num_rows(),
            SolverSpec::Svm { problem, .. } => problem.data.num_cols(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub workers: usize,
    /// Explicit split; defaults to [`Partition::even`] along the solver's axis.
    pub partition: Option<Partition>,
    pub log_every: usize,
}

impl RunConfig {
    pub fn new(workers: usize) -> Self {
        Self { workers, partition: None, log_every: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// Final primal iterate (`x_H`).
    pub solution: Vec<f64>,
    /// Final dual iterate for SVM runs.
    pub dual: Option<Vec<f64>>,
    /// Metric log collected on rank 0.
    pub records: Vec<RunRecord>,
    /// Rank 0 counters; all ranks agree on rounds and words.
    pub stats: CommStats,
    pub worker_stats: Vec<CommStats>,
}

fn check_partition(p: &Partition, spec: &SolverSpec, workers: usize) -> Result<()> {
    if p.axis != spec.axis() {
        return Err(Error::Config(format!("{:?} partition given, solver needs {:?}", p.axis, spec.axis())));
    }
    if p.workers() != workers {
        return Err(Error::Config(format!("partition has {} parts for {workers} workers", p.workers())));
    }
    let mut next = 0;
    for r in &p.ranges {
        if r.start != next || r.end < r.start {
            return Err(Error::Config("partition ranges must be contiguous and ordered".into()));
        }
        next = r.end;
    }
    if next != spec.axis_len() {
        return Err(Error::Config(format!("partition covers {next} of {} indices", spec.axis_len())));
    }
    Ok(())
}

/// Records the metric on rank 0, keeping monitoring time out of the clock.
struct Monitor {
    start: Instant,
    paused: Duration,
    records: Vec<RunRecord>,
}

impl Monitor {
    fn new() -> Self {
        Self { start: Instant::now(), paused: Duration::ZERO, records: Vec::new() }
    }

    fn record(&mut self, h: usize, stats: CommStats, metric: impl FnOnce() -> Result<f64>) -> Result<()> {
        let at = self.start.elapsed().saturating_sub(self.paused);
        let t = Instant::now();
        let value = metric()?;
        self.paused += t.elapsed();
        self.records.push(RunRecord::new(h, value, stats, at.as_secs_f64()));
        Ok(())
    }
}

/// Runs the solver on `config.workers` lockstep workers.
pub fn run_distributed(spec: &SolverSpec, config: &RunConfig) -> Result<RunOutput> {
    let group = WorkerGroup::new(config.workers)?;
    let part = match &config.partition {
        Some(p) => {
            check_partition(p, spec, config.workers)?;
            p.clone()
        }
        None => Partition::even(spec.axis_len(), spec.axis(), config.workers)?,
    };
    let log_every = config.log_every.max(1);

    type Out = (Vec<f64>, Option<Vec<f64>>, Vec<RunRecord>);
    let results: Vec<(Out, CommStats)> = match spec {
        SolverSpec::Lasso { problem, run } => {
            let params = problem.params();
            group.run(|rank, comm| {
                let shard = LassoShard::from_rows(&problem.data, part.ranges[rank].clone())?;
                let mut monitor = Monitor::new();
                let fin = drive_lasso(&shard, &params, run, log_every, comm, &mut |h, x, stats| {
                    if rank == 0 {
                        monitor.record(h, stats, || lasso_objective(problem, x))?;
                    }
                    Ok(())
                })?;
                Ok((fin.solution(), None, monitor.records))
            })?
        }
        SolverSpec::Svm { problem, run } => {
            let params = problem.params();
            group.run(|rank, comm| {
                let shard = SvmShard::from_cols(&problem.data, part.ranges[rank].clone())?;
                let mut monitor = Monitor::new();
                let fin = drive_svm(&shard, &params, run, log_every, comm, &mut |h, st, c| {
                    let stats = c.stats();
                    if let Some(x) = c.gather(&st.x)? {
                        monitor.record(h, stats, || duality_gap_of(problem, &st.alpha, &x))?;
                    }
                    Ok(())
                })?;
                let x = comm.gather(&fin.x)?.unwrap_or_default();
                Ok((x, Some(fin.alpha), monitor.records))
            })?
        }
    };

    let worker_stats: Vec<CommStats> = results.iter().map(|(_, s)| *s).collect();
    if worker_stats.iter().any(|s| s.rounds != worker_stats[0].rounds || s.words != worker_stats[0].words) {
        return Err(Error::Protocol("workers disagree on communication counts".into()));
    }
    let ((solution, dual, records), stats) = results.into_iter().next().expect("at least one worker");
    Ok(RunOutput { solution, dual, records, stats, worker_stats })
}

/// Even split of the solver's axis; convenience for callers building custom partitions.
pub fn default_partition(spec: &SolverSpec, workers: usize) -> Result<Partition> {
    let data = match spec {
        SolverSpec::Lasso { problem, .. } => &problem.data,
        SolverSpec::Svm { problem, .. } => &problem.data,
    };
    partition(data, spec.axis(), workers)
}
