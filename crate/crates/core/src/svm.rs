//! Linear SVM by dual coordinate descent, classic and s-step.
//!
//! The dual is `min ½αᵀQ̄α − eᵀα` subject to `0 ≤ αᵢ ≤ ν`, with
//! `Q̄ = Q + γI` and `Q_ij = bᵢbⱼAᵢAⱼᵀ`. Hinge loss (L1) uses `γ = 0`,
//! `ν = λ`; squared hinge (L2) uses `γ = 1/(2λ)` and no upper bound.
//!
//! Data are column-partitioned: a worker owns a block of features, the
//! matching slice of the primal accumulator `x = Σ bᵢαᵢAᵢᵀ`, and a replica
//! of `α`. Row inner products are reduced across workers.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::engine::{Collective, CommStats, SerialComm};
use crate::error::{Error, Result};
use crate::lasso::SaConfig;
use crate::matrix::{extract_rows, gram_partial, packed_len, spmv, CsrMatrix, ExactSum, GramMatrix, IndexSelection};
use crate::record::RunRecord;
use crate::sampling::CoordinateSampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SvmLoss {
    /// Hinge loss `max(1 − bᵢAᵢx, 0)`.
    L1,
    /// Squared hinge loss.
    L2,
}

#[derive(Clone, Debug)]
pub struct SvmProblem {
    pub data: LabeledDataset,
    pub lambda: f64,
    pub loss: SvmLoss,
}

impl SvmProblem {
    pub fn new(data: LabeledDataset, lambda: f64, loss: SvmLoss) -> Result<Self> {
        data.require_binary_labels()?;
        SvmParams::new(data.num_rows(), lambda, loss)?;
        Ok(Self { data, lambda, loss })
    }

    pub fn params(&self) -> SvmParams {
        SvmParams::new(self.data.num_rows(), self.lambda, self.loss).expect("validated")
    }

    pub fn gamma(&self) -> f64 {
        self.params().gamma
    }

    pub fn nu(&self) -> Option<f64> {
        self.params().nu
    }

    pub fn shard(&self) -> SvmShard {
        SvmShard { matrix: self.data.matrix.clone(), labels: self.data.labels.clone(), cols: 0..self.data.num_cols() }
    }
}

/// Replicated scalars of the dual problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    pub num_rows: usize,
    pub lambda: f64,
    pub gamma: f64,
    /// Upper clamp on `α`; `None` means unbounded.
    pub nu: Option<f64>,
}

impl SvmParams {
    pub fn new(num_rows: usize, lambda: f64, loss: SvmLoss) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Config(format!("SVM lambda must be finite and > 0, got {lambda}")));
        }
        if num_rows == 0 {
            return Err(Error::Config("SVM needs at least one data point".into()));
        }
        let (gamma, nu) = match loss {
            SvmLoss::L1 => (0.0, Some(lambda)),
            SvmLoss::L2 => (0.5 / lambda, None),
        };
        Ok(Self { num_rows, lambda, gamma, nu })
    }

    #[inline]
    fn clamp(&self, v: f64) -> f64 {
        let lower = v.max(0.0);
        match self.nu {
            Some(nu) => lower.min(nu),
            None => lower,
        }
    }

    /// New value of a coordinate at `β = αᵢ` with gradient `g` and curvature
    /// `η`; stays at `β` when the projected gradient vanishes.
    #[inline]
    fn step(&self, beta: f64, g: f64, eta: f64) -> f64 {
        let projected = (self.clamp(beta - g) - beta).abs();
        if projected != 0.0 {
            self.clamp(beta - g / eta)
        } else {
            beta
        }
    }
}

/// Feature block owned by one worker: all rows, columns `cols` (re-indexed from 0).
#[derive(Clone, Debug)]
pub struct SvmShard {
    pub matrix: CsrMatrix,
    pub labels: Vec<f64>,
    pub cols: Range<usize>,
}

impl SvmShard {
    pub fn from_cols(data: &LabeledDataset, cols: Range<usize>) -> Result<Self> {
        Ok(Self { matrix: data.matrix.col_block(cols.clone())?, labels: data.labels.clone(), cols })
    }
}

/// Dual iterate and the shard's slice of `x = Σ bᵢαᵢAᵢᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmState {
    pub alpha: Vec<f64>,
    pub x: Vec<f64>,
    pub iteration: usize,
}

impl SvmState {
    pub fn zero(shard: &SvmShard) -> Self {
        Self { alpha: vec![0.0; shard.labels.len()], x: vec![0.0; shard.matrix.num_cols()], iteration: 0 }
    }

    /// Starts from a feasible `α₀`, forming `x₀` from it.
    pub fn with_alpha(shard: &SvmShard, params: &SvmParams, alpha: Vec<f64>) -> Result<Self> {
        check_feasible(params, &alpha)?;
        let x = primal_from_dual(&shard.matrix, &shard.labels, &alpha)?;
        Ok(Self { alpha, x, iteration: 0 })
    }
}

/// `Σ bᵢαᵢAᵢᵀ`, accumulated row by row.
pub fn primal_from_dual(a: &CsrMatrix, labels: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    if labels.len() != a.num_rows() || alpha.len() != a.num_rows() {
        return Err(Error::dim("alpha and labels must have one entry per row"));
    }
    let mut x = vec![0.0; a.num_cols()];
    for (i, (&b, &al)) in labels.iter().zip(alpha).enumerate() {
        if al == 0.0 {
            continue;
        }
        add_scaled_row(&mut x, a, i, al * b);
    }
    Ok(x)
}

#[inline]
fn add_scaled_row(x: &mut [f64], a: &CsrMatrix, i: usize, scale: f64) {
    let (cols, vals) = a.row(i);
    for (c, v) in cols.iter().zip(vals) {
        x[*c] += scale * v;
    }
}

fn check_feasible(params: &SvmParams, alpha: &[f64]) -> Result<()> {
    if alpha.len() != params.num_rows {
        return Err(Error::dim(format!("alpha has {} entries for {} rows", alpha.len(), params.num_rows)));
    }
    for (i, &a) in alpha.iter().enumerate() {
        let above = params.nu.is_some_and(|nu| a > nu);
        if !a.is_finite() || a < 0.0 || above {
            return Err(Error::Contract(format!("alpha[{i}] = {a} is outside [0, ν]")));
        }
    }
    Ok(())
}

/// One dual coordinate step on row `i` of a shard.
pub fn svm_iteration(
    shard: &SvmShard,
    params: &SvmParams,
    state: &mut SvmState,
    i: usize,
    comm: &mut impl Collective,
) -> Result<()> {
    if i >= params.num_rows {
        return Err(Error::Selection { index: i, bound: params.num_rows });
    }
    let (cols, vals) = shard.matrix.row(i);
    let mut norm = ExactSum::new();
    let mut dot = ExactSum::new();
    for (c, v) in cols.iter().zip(vals) {
        norm.add_product(*v, *v);
        dot.add_product(*v, state.x[*c]);
    }
    comm.add_flops(2 * cols.len() as u64);
    let reduced = comm.allreduce(vec![norm, dot])?;
    let eta = reduced[0] + params.gamma;
    let b = shard.labels[i];
    if eta > 0.0 {
        let beta = state.alpha[i];
        let g = b * reduced[1] - 1.0 + params.gamma * beta;
        let next = params.step(beta, g, eta);
        let theta = next - beta;
        if theta != 0.0 {
            state.alpha[i] = next;
            add_scaled_row(&mut state.x, &shard.matrix, i, theta * b);
        }
    }
    state.iteration += 1;
    Ok(())
}

/// One dual coordinate step on the full problem (single worker).
pub fn svm_cd_step(problem: &SvmProblem, state: &mut SvmState, i: usize) -> Result<CommStats> {
    let mut comm = SerialComm::new();
    svm_iteration(&problem.shard(), &problem.params(), state, i, &mut comm)?;
    Ok(comm.stats())
}

/// `s` dual coordinate steps on `rows` with a single reduction of
/// `G = YᵀY` (packed) and `Yᵀx`. A row drawn again inside the epoch starts
/// from the value its earlier step produced.
pub fn sa_svm_epoch<C: Collective>(
    shard: &SvmShard,
    params: &SvmParams,
    state: &mut SvmState,
    rows: &[usize],
    comm: &mut C,
    mut observe: impl FnMut(&SvmState, &mut C) -> Result<()>,
) -> Result<()> {
    let s = rows.len();
    let y = extract_rows(&shard.matrix, &IndexSelection::new(rows.to_vec(), state.iteration))?;
    let mut contribution = gram_partial(&y.transpose());
    let mut flops = 0u64;
    for j in 0..s {
        let (cols, vals) = y.row(j);
        let mut acc = ExactSum::new();
        for (c, v) in cols.iter().zip(vals) {
            acc.add_product(*v, state.x[*c]);
        }
        flops += cols.len() as u64;
        contribution.push(acc);
    }
    comm.add_flops(flops * (s as u64 + 3) / 2);
    let reduced = comm.allreduce(contribution)?;
    let t = packed_len(s);
    let mut g = GramMatrix::from_packed_upper(s, &reduced[..t])?;
    g.add_to_diagonal(params.gamma);
    let projections = &reduced[t..];

    // latest value of each coordinate inside the epoch, and the step taken
    let mut values = vec![0.0; s];
    let mut thetas = vec![0.0; s];
    for j in 0..s {
        let i = rows[j];
        let beta = (0..j).rev().find(|&t| rows[t] == i).map_or(state.alpha[i], |t| values[t]);
        values[j] = beta;
        let eta = g.get(j, j);
        if eta <= 0.0 {
            continue;
        }
        let b = shard.labels[i];
        let mut grad = b * projections[j] - 1.0 + params.gamma * beta;
        for t in 0..j {
            if thetas[t] != 0.0 {
                grad += thetas[t] * b * shard.labels[rows[t]] * g.get(j, t);
            }
        }
        values[j] = params.step(beta, grad, eta);
        thetas[j] = values[j] - beta;
    }

    for (j, &theta) in thetas.iter().enumerate() {
        if theta != 0.0 {
            let i = rows[j];
            state.alpha[i] = values[j];
            add_scaled_row(&mut state.x, &shard.matrix, i, theta * shard.labels[i]);
        }
        state.iteration += 1;
        observe(state, comm)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SvmRunSpec {
    pub iters: usize,
    pub unroll: Option<usize>,
    pub seed: u64,
}

/// Runs `spec.iters` dual steps on a shard; `observe(h, state, comm)` sees
/// `h = 0`, multiples of `log_every`, and the last iteration. It runs on every
/// worker at the same points, so it may use uncounted collectives.
pub fn drive_svm<C: Collective>(
    shard: &SvmShard,
    params: &SvmParams,
    spec: &SvmRunSpec,
    log_every: usize,
    comm: &mut C,
    observe: &mut dyn FnMut(usize, &SvmState, &mut C) -> Result<()>,
) -> Result<SvmState> {
    if spec.iters == 0 {
        return Err(Error::Config("need at least one iteration".into()));
    }
    if spec.unroll == Some(0) {
        return Err(Error::Config("unroll depth s must be ≥ 1".into()));
    }
    let log_every = log_every.max(1);
    let iters = spec.iters;
    let wants = |h: usize| h % log_every == 0 || h == iters;
    let mut sampler = CoordinateSampler::new(spec.seed);
    let m = params.num_rows;
    let mut state = SvmState::zero(shard);
    observe(0, &state, comm)?;
    match spec.unroll {
        None => {
            for h in 1..=iters {
                let i = sampler.next_index(m);
                svm_iteration(shard, params, &mut state, i, comm)?;
                if wants(h) {
                    observe(h, &state, comm)?;
                }
            }
        }
        Some(s) => {
            let mut done = 0;
            while done < iters {
                let len = s.min(iters - done);
                let rows: Vec<usize> = (0..len).map(|_| sampler.next_index(m)).collect();
                sa_svm_epoch(shard, params, &mut state, &rows, comm, |st, c| {
                    if wants(st.iteration) {
                        observe(st.iteration, st, c)?;
                    }
                    Ok(())
                })?;
                done += len;
            }
        }
    }
    Ok(state)
}

/// `P(x) = ½‖x‖² + λ Σ loss(bᵢAᵢx)`.
pub fn primal_objective(problem: &SvmProblem, x: &[f64]) -> Result<f64> {
    let ax = spmv(&problem.data.matrix, x)?;
    let loss: f64 = ax
        .iter()
        .zip(&problem.data.labels)
        .map(|(a, b)| {
            let hinge = (1.0 - b * a).max(0.0);
            match problem.loss {
                SvmLoss::L1 => hinge,
                SvmLoss::L2 => hinge * hinge,
            }
        })
        .sum();
    let sq: f64 = x.iter().map(|v| v * v).sum();
    Ok(0.5 * sq + problem.lambda * loss)
}

/// `D(α) = eᵀα − ½‖x‖² − ½γ‖α‖²`, using `αᵀQα = ‖x‖²`.
pub fn dual_objective(problem: &SvmProblem, alpha: &[f64], x: &[f64]) -> Result<f64> {
    let params = problem.params();
    check_feasible(&params, alpha)?;
    if x.len() != problem.data.num_cols() {
        return Err(Error::dim("x must have one entry per feature"));
    }
    let sum: f64 = alpha.iter().sum();
    let sq_x: f64 = x.iter().map(|v| v * v).sum();
    let sq_a: f64 = alpha.iter().map(|v| v * v).sum();
    Ok(sum - 0.5 * sq_x - 0.5 * params.gamma * sq_a)
}

/// `P(x) − D(α)` for a full (unsharded) state.
pub fn duality_gap(problem: &SvmProblem, state: &SvmState) -> Result<f64> {
    duality_gap_of(problem, &state.alpha, &state.x)
}

pub fn duality_gap_of(problem: &SvmProblem, alpha: &[f64], x: &[f64]) -> Result<f64> {
    let dual = dual_objective(problem, alpha, x)?;
    Ok(primal_objective(problem, x)? - dual)
}

#[derive(Clone, Debug)]
pub struct SvmRun {
    pub solution: Vec<f64>,
    pub alpha: Vec<f64>,
    pub records: Vec<RunRecord>,
    pub stats: CommStats,
}

/// Single-worker run logging the duality gap every `log_every` iterations.
pub fn run_svm(problem: &SvmProblem, spec: &SvmRunSpec, log_every: usize) -> Result<SvmRun> {
    let shard = problem.shard();
    let params = problem.params();
    let mut comm = SerialComm::new();
    let mut records = Vec::new();
    let start = std::time::Instant::now();
    let state = drive_svm(&shard, &params, spec, log_every, &mut comm, &mut |h, st, c| {
        let gap = duality_gap(problem, st)?;
        records.push(RunRecord::new(h, gap, c.stats(), start.elapsed().as_secs_f64()));
        Ok(())
    })?;
    Ok(SvmRun { solution: state.x, alpha: state.alpha, records, stats: comm.stats() })
}

/// Every iterate `(α_h, x_h)` for `h = 0 … H` of a single-worker run.
pub fn svm_trajectory(problem: &SvmProblem, spec: &SvmRunSpec) -> Result<Vec<SvmState>> {
    let mut out = Vec::with_capacity(spec.iters + 1);
    drive_svm(&problem.shard(), &problem.params(), spec, 1, &mut SerialComm::new(), &mut |_, st, _| {
        out.push(st.clone());
        Ok(())
    })?;
    Ok(out)
}

pub fn run_svm_cd(problem: &SvmProblem, iters: usize, seed: u64) -> Result<SvmRun> {
    run_svm(problem, &SvmRunSpec { iters, unroll: None, seed }, 1)
}

pub fn sa_svm_run(problem: &SvmProblem, iters: usize, sa: SaConfig) -> Result<SvmRun> {
    run_svm(problem, &SvmRunSpec { iters, unroll: Some(sa.s), seed: sa.seed }, 1)
}
