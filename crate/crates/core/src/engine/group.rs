//! Thread-backed worker group.
//!
//! Each worker runs on its own scoped thread and talks to the others only
//! through [`Communicator`]. A collective is a full barrier: every rank
//! deposits its payload, the last one to arrive combines the payloads in rank
//! order and publishes the result, then all ranks continue. A failing or
//! panicking worker aborts the group so peers return an error instead of
//! blocking forever.

use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;

use super::{allreduce_exact, Collective, CommStats};
use crate::error::{Error, Result};
use crate::matrix::ExactSum;

enum Payload {
    Sum(Vec<ExactSum>),
    Gather(Vec<f64>),
}

struct Exchange {
    slots: Vec<Option<Payload>>,
    arrived: usize,
    generation: u64,
    result: Option<std::result::Result<Arc<Vec<f64>>, String>>,
    failed: Option<usize>,
}

struct Shared {
    workers: usize,
    state: Mutex<Exchange>,
    turn: Condvar,
}

impl Shared {
    fn lock(&self) -> MutexGuard<'_, Exchange> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn abort(&self, rank: usize) {
        let mut ex = self.lock();
        ex.failed.get_or_insert(rank);
        self.turn.notify_all();
    }

    fn exchange(&self, rank: usize, payload: Payload) -> Result<Arc<Vec<f64>>> {
        let mut ex = self.lock();
        if let Some(r) = ex.failed {
            return Err(aborted(r));
        }
        ex.slots[rank] = Some(payload);
        ex.arrived += 1;
        if ex.arrived == self.workers {
            let slots: Vec<Payload> = ex.slots.iter_mut().map(|s| s.take().expect("every rank deposited")).collect();
            ex.result = Some(combine(slots).map(Arc::new).map_err(|e| e.to_string()));
            ex.arrived = 0;
            ex.generation += 1;
            self.turn.notify_all();
        } else {
            let gen = ex.generation;
            while ex.generation == gen {
                if let Some(r) = ex.failed {
                    return Err(aborted(r));
                }
                ex = self.turn.wait(ex).unwrap_or_else(|p| p.into_inner());
            }
        }
        match ex.result.as_ref().expect("published with generation") {
            Ok(v) => Ok(Arc::clone(v)),
            Err(msg) => Err(Error::Protocol(msg.clone())),
        }
    }
}

fn aborted(rank: usize) -> Error {
    Error::Protocol(format!("worker {rank} failed; collective aborted"))
}

fn combine(slots: Vec<Payload>) -> Result<Vec<f64>> {
    let mut sums = Vec::with_capacity(slots.len());
    let mut pieces = Vec::with_capacity(slots.len());
    for p in slots {
        match p {
            Payload::Sum(v) => sums.push(v),
            Payload::Gather(v) => pieces.push(v),
        }
    }
    match (sums.is_empty(), pieces.is_empty()) {
        (false, true) => allreduce_exact(&sums),
        (true, false) => Ok(pieces.concat()),
        _ => Err(Error::Protocol("workers disagree on the collective being run".into())),
    }
}

/// One worker's endpoint into its group.
pub struct Communicator {
    rank: usize,
    shared: Arc<Shared>,
    stats: CommStats,
}

impl Collective for Communicator {
    fn rank(&self) -> usize {
        self.rank
    }

    fn workers(&self) -> usize {
        self.shared.workers
    }

    fn allreduce(&mut self, contribution: Vec<ExactSum>) -> Result<Vec<f64>> {
        let words = contribution.len();
        let out = self.shared.exchange(self.rank, Payload::Sum(contribution))?;
        self.stats.record_round(words);
        Ok(out.as_ref().clone())
    }

    fn gather(&mut self, local: &[f64]) -> Result<Option<Vec<f64>>> {
        let out = self.shared.exchange(self.rank, Payload::Gather(local.to_vec()))?;
        Ok((self.rank == 0).then(|| out.as_ref().clone()))
    }

    fn stats(&self) -> CommStats {
        self.stats
    }

    fn add_flops(&mut self, flops: u64) {
        self.stats.local_flops += flops;
    }
}

struct AbortOnDrop<'a> {
    shared: &'a Shared,
    rank: usize,
    armed: bool,
}

impl Drop for AbortOnDrop<'_> {
    fn drop(&mut self) {
        if self.armed {
            self.shared.abort(self.rank);
        }
    }
}

/// `P` workers executing the same closure in lockstep.
#[derive(Clone, Copy, Debug)]
pub struct WorkerGroup {
    workers: usize,
}

impl WorkerGroup {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Config("worker count must be ≥ 1".into()));
        }
        Ok(Self { workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `body(rank, comm)` on every rank and returns the per-rank results
    /// in rank order. The first failing rank's error is returned.
    pub fn run<T, F>(&self, body: F) -> Result<Vec<(T, CommStats)>>
    where
        T: Send,
        F: Fn(usize, &mut Communicator) -> Result<T> + Sync,
    {
        let shared = Arc::new(Shared {
            workers: self.workers,
            state: Mutex::new(Exchange {
                slots: (0..self.workers).map(|_| None).collect(),
                arrived: 0,
                generation: 0,
                result: None,
                failed: None,
            }),
            turn: Condvar::new(),
        });
        let results: Vec<thread::Result<Result<(T, CommStats)>>> = thread::scope(|scope| {
            let handles: Vec<_> = (0..self.workers)
                .map(|rank| {
                    let shared = Arc::clone(&shared);
                    let body = &body;
                    scope.spawn(move || {
                        let mut guard = AbortOnDrop { shared: &shared, rank, armed: true };
                        let mut comm = Communicator { rank, shared: Arc::clone(&shared), stats: CommStats::default() };
                        let out = body(rank, &mut comm);
                        if out.is_ok() {
                            guard.armed = false;
                        }
                        drop(guard);
                        out.map(|v| (v, comm.stats))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join()).collect()
        });

        let failed = shared.lock().failed;
        let mut out = Vec::with_capacity(self.workers);
        let mut errors: Vec<Option<Error>> = (0..self.workers).map(|_| None).collect();
        for (rank, r) in results.into_iter().enumerate() {
            match r {
                Ok(Ok(v)) => out.push(v),
                Ok(Err(e)) => errors[rank] = Some(e),
                Err(_) => errors[rank] = Some(Error::Protocol(format!("worker {rank} panicked"))),
            }
        }
        if let Some(first) = failed {
            return Err(errors[first].take().unwrap_or_else(|| aborted(first)));
        }
        if let Some(e) = errors.into_iter().flatten().next() {
            return Err(e);
        }
        Ok(out)
    }
}
