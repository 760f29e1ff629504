//! Lasso, `½‖Ax − b‖² + λ‖x‖₁`, by randomized block coordinate descent.
//!
//! Four methods share one set of kernels: accelerated BCD (Nesterov-style
//! momentum through `y`, `z` and a decreasing `θ`), plain proximal BCD, and
//! their s-step variants that fold `s` iterations into one reduction round.
//! The data are row-partitioned: a worker owns a [`LassoShard`] (rows of `A`
//! and `b`) plus the matching rows of every `m`-vector, while `n`-vectors
//! and scalars are replicated.
//!
//! Every iteration reduces one packed Gram triangle of the selected columns
//! together with their projections onto the maintained residual vectors.
//! The s-step form reduces the `sμ × sμ` Gram of all `s` blocks up front and
//! recovers each inner iteration's inputs from its blocks.

use std::ops::Range;

use crate::dataset::LabeledDataset;
use crate::engine::{Collective, CommStats, SerialComm};
use crate::error::{Error, Result};
use crate::matrix::{
    extract_columns, gram_partial, largest_eigenvalue, packed_len, spmv, CsrMatrix, ExactSum, GramMatrix,
    IndexSelection,
};
use crate::record::RunRecord;
use crate::sampling::CoordinateSampler;

/// `sign(β) · max(|β| − α, 0)`.
#[inline]
pub fn soft_threshold(beta: f64, alpha: f64) -> f64 {
    debug_assert!(alpha >= 0.0);
    if beta > alpha {
        beta - alpha
    } else if beta < -alpha {
        beta + alpha
    } else {
        0.0
    }
}

/// Elementwise [`soft_threshold`].
pub fn soft_threshold_vec(beta: &[f64], alpha: f64) -> Vec<f64> {
    beta.iter().map(|&b| soft_threshold(b, alpha)).collect()
}

/// `θ ← (√(θ⁴ + 4θ²) − θ²) / 2`.
#[inline]
pub fn next_theta(theta: f64) -> f64 {
    let sq = theta * theta;
    ((sq * sq + 4.0 * sq).sqrt() - sq) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LassoAlgorithm {
    /// Proximal BCD (CD when μ = 1).
    Bcd,
    /// Accelerated BCD (accCD when μ = 1).
    AccBcd,
}

#[derive(Clone, Debug)]
pub struct LassoProblem {
    pub data: LabeledDataset,
    pub lambda: f64,
    pub block_size: usize,
}

impl LassoProblem {
    pub fn new(data: LabeledDataset, lambda: f64, block_size: usize) -> Result<Self> {
        LassoParams::new(data.num_cols(), lambda, block_size)?;
        Ok(Self { data, lambda, block_size })
    }

    pub fn num_features(&self) -> usize {
        self.data.num_cols()
    }

    /// `q = ⌈n/μ⌉`.
    pub fn q(&self) -> usize {
        self.params().q
    }

    pub fn params(&self) -> LassoParams {
        LassoParams::new(self.num_features(), self.lambda, self.block_size).expect("validated")
    }

    pub fn shard(&self) -> LassoShard {
        LassoShard {
            matrix: self.data.matrix.clone(),
            targets: self.data.labels.clone(),
            rows: 0..self.data.num_rows(),
        }
    }
}

/// Scalars every worker holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LassoParams {
    pub num_features: usize,
    pub lambda: f64,
    pub block_size: usize,
    pub q: usize,
}

impl LassoParams {
    pub fn new(num_features: usize, lambda: f64, block_size: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be finite and ≥ 0, got {lambda}")));
        }
        if block_size == 0 || block_size > num_features {
            return Err(Error::Config(format!("block size {block_size} must lie in 1..={num_features}")));
        }
        Ok(Self { num_features, lambda, block_size, q: num_features.div_ceil(block_size) })
    }
}

/// Rows of `A` and `b` owned by one worker. Column indices stay global.
#[derive(Clone, Debug)]
pub struct LassoShard {
    pub matrix: CsrMatrix,
    pub targets: Vec<f64>,
    pub rows: Range<usize>,
}

impl LassoShard {
    pub fn from_rows(data: &LabeledDataset, rows: Range<usize>) -> Result<Self> {
        Ok(Self { matrix: data.matrix.row_block(rows.clone())?, targets: data.labels[rows.clone()].to_vec(), rows })
    }
}

/// Iterate bundle of accelerated BCD. `y_tilde` and `z_tilde` hold the
/// shard's rows of `A y` and `A z − b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AccBcdState {
    pub theta: f64,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub z_tilde: Vec<f64>,
    pub iteration: usize,
}

impl AccBcdState {
    /// `y₀ = z₀ = 0`, `θ₀ = μ/n`.
    pub fn zero(shard: &LassoShard, params: &LassoParams) -> Self {
        let n = params.num_features;
        Self {
            theta: params.block_size as f64 / n as f64,
            y: vec![0.0; n],
            z: vec![0.0; n],
            y_tilde: vec![0.0; shard.targets.len()],
            z_tilde: shard.targets.iter().map(|b| -b).collect(),
            iteration: 0,
        }
    }

    pub fn with_start(shard: &LassoShard, params: &LassoParams, y0: Vec<f64>, z0: Vec<f64>) -> Result<Self> {
        let y_tilde = spmv(&shard.matrix, &y0)?;
        let z_tilde = spmv(&shard.matrix, &z0)?.iter().zip(&shard.targets).map(|(az, b)| az - b).collect();
        Ok(Self {
            theta: params.block_size as f64 / params.num_features as f64,
            y: y0,
            z: z0,
            y_tilde,
            z_tilde,
            iteration: 0,
        })
    }

    /// `x = θ²y + z`.
    pub fn solution(&self) -> Vec<f64> {
        let sq = self.theta * self.theta;
        self.y.iter().zip(&self.z).map(|(y, z)| sq * y + z).collect()
    }
}

/// Iterate of plain BCD; `residual` holds the shard's rows of `A x − b`.
#[derive(Clone, Debug, PartialEq)]
pub struct BcdState {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub iteration: usize,
}

impl BcdState {
    pub fn zero(shard: &LassoShard, params: &LassoParams) -> Self {
        Self { x: vec![0.0; params.num_features], residual: shard.targets.iter().map(|b| -b).collect(), iteration: 0 }
    }
}

/// `½‖Ax − b‖² + λ‖x‖₁`.
pub fn lasso_objective(problem: &LassoProblem, x: &[f64]) -> Result<f64> {
    let ax = spmv(&problem.data.matrix, x)?;
    let sq: f64 = ax.iter().zip(&problem.data.labels).map(|(a, b)| (a - b) * (a - b)).sum();
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    Ok(0.5 * sq + problem.lambda * l1)
}

/// Layout of a reduced buffer: packed Gram triangle followed by projections.
struct Reduced {
    gram: GramMatrix,
    projections: Vec<Vec<f64>>,
}

fn reduce_block(y: &CsrMatrix, vectors: &[&[f64]], comm: &mut impl Collective) -> Result<Reduced> {
    let k = y.num_cols();
    let mut contribution = gram_partial(y);
    let mut flops = 0u64;
    for v in vectors {
        let mut proj = vec![ExactSum::new(); k];
        for (r, vr) in v.iter().enumerate() {
            let (cols, vals) = y.row(r);
            for (c, a) in cols.iter().zip(vals) {
                proj[*c].add_product(*a, *vr);
            }
            flops += cols.len() as u64;
        }
        contribution.extend(proj);
    }
    for r in 0..y.num_rows() {
        let nz = y.row(r).0.len() as u64;
        flops += nz * (nz + 1) / 2;
    }
    comm.add_flops(flops);

    let reduced = comm.allreduce(contribution)?;
    let t = packed_len(k);
    Ok(Reduced {
        gram: GramMatrix::from_packed_upper(k, &reduced[..t])?,
        projections: reduced[t..].chunks(k).map(<[f64]>::to_vec).collect(),
    })
}

/// Entries of row `r` of `y` whose column lies in `cols`.
#[inline]
fn row_segment(y: &CsrMatrix, r: usize, cols: Range<usize>) -> (&[usize], &[f64]) {
    let (ci, vals) = y.row(r);
    let a = ci.partition_point(|&c| c < cols.start);
    let b = ci.partition_point(|&c| c < cols.end);
    (&ci[a..b], &vals[a..b])
}

/// Row-wise `𝔸 Δ` for the block of `y` in `cols`; `None` when the row has no entries there.
#[inline]
fn block_product(y: &CsrMatrix, r: usize, cols: Range<usize>, delta: &[f64]) -> Option<f64> {
    let start = cols.start;
    let (ci, vals) = row_segment(y, r, cols);
    if ci.is_empty() {
        return None;
    }
    Some(ci.iter().zip(vals).fold(0.0, |acc, (c, a)| acc + a * delta[c - start]))
}

/// Applies `z += 𝕀Δz`, `z̃ += 𝔸Δz`, `y −= c 𝕀Δz`, `ỹ −= c 𝔸Δz`.
fn apply_acc_update(
    state: &mut AccBcdState,
    y: &CsrMatrix,
    cols: Range<usize>,
    indices: &[usize],
    dz: &[f64],
    coef: f64,
) {
    for (&i, &d) in indices.iter().zip(dz) {
        state.z[i] += d;
        state.y[i] -= coef * d;
    }
    for r in 0..y.num_rows() {
        if let Some(w) = block_product(y, r, cols.clone(), dz) {
            state.z_tilde[r] += w;
            state.y_tilde[r] -= coef * w;
        }
    }
}

fn apply_bcd_update(state: &mut BcdState, y: &CsrMatrix, cols: Range<usize>, indices: &[usize], dx: &[f64]) {
    for (&i, &d) in indices.iter().zip(dx) {
        state.x[i] += d;
    }
    for r in 0..y.num_rows() {
        if let Some(w) = block_product(y, r, cols.clone(), dx) {
            state.residual[r] += w;
        }
    }
}

/// `(1 − qθ)/θ²`, the weight of `Δz` in the `y` recurrence.
#[inline]
fn momentum_coef(q: f64, theta: f64) -> f64 {
    (1.0 - q * theta) / (theta * theta)
}

fn check_selection(sel: &IndexSelection, params: &LassoParams) -> Result<()> {
    sel.validate(params.num_features)?;
    if sel.len() != params.block_size {
        return Err(Error::Contract(format!(
            "selected {} coordinates, block size is {}",
            sel.len(),
            params.block_size
        )));
    }
    Ok(())
}

/// One accelerated BCD iteration on a shard.
///
/// A zero block Gram (all selected columns empty) leaves the vectors alone
/// and only advances `θ`.
pub fn accbcd_iteration(
    shard: &LassoShard,
    params: &LassoParams,
    state: &mut AccBcdState,
    sel: &IndexSelection,
    comm: &mut impl Collective,
) -> Result<()> {
    check_selection(sel, params)?;
    let y = extract_columns(&shard.matrix, sel)?;
    let red = reduce_block(&y, &[&state.y_tilde, &state.z_tilde], comm)?;
    let v = largest_eigenvalue(&red.gram)?;
    let theta = state.theta;
    if v > 0.0 {
        let q = params.q as f64;
        let eta = 1.0 / (q * theta * v);
        let sq = theta * theta;
        let (py, pz) = (&red.projections[0], &red.projections[1]);
        let dz: Vec<f64> = sel
            .indices
            .iter()
            .enumerate()
            .map(|(l, &i)| {
                let r = sq * py[l] + pz[l];
                let current = state.z[i];
                let g = current - eta * r;
                soft_threshold(g, params.lambda * eta) - current
            })
            .collect();
        apply_acc_update(state, &y, 0..sel.len(), &sel.indices, &dz, momentum_coef(q, theta));
    }
    state.theta = next_theta(theta);
    state.iteration += 1;
    Ok(())
}

/// One accelerated BCD step on the full problem (single worker).
pub fn accbcd_step(problem: &LassoProblem, state: &mut AccBcdState, sel: &IndexSelection) -> Result<CommStats> {
    let mut comm = SerialComm::new();
    accbcd_iteration(&problem.shard(), &problem.params(), state, sel, &mut comm)?;
    Ok(comm.stats())
}

/// `s` accelerated iterations with a single reduction.
///
/// `observe` runs after each inner iteration's vector update, so callers see
/// the same iterate sequence as the classic method.
pub fn sa_accbcd_epoch(
    shard: &LassoShard,
    params: &LassoParams,
    state: &mut AccBcdState,
    blocks: &[IndexSelection],
    comm: &mut impl Collective,
    mut observe: impl FnMut(&AccBcdState, &mut dyn FnMut() -> CommStats) -> Result<()>,
) -> Result<()> {
    let mu = params.block_size;
    for sel in blocks {
        check_selection(sel, params)?;
    }
    let s = blocks.len();
    let all: Vec<usize> = blocks.iter().flat_map(|b| b.indices.iter().copied()).collect();
    let y = extract_columns(&shard.matrix, &IndexSelection::new(all, state.iteration))?;
    let red = reduce_block(&y, &[&state.y_tilde, &state.z_tilde], comm)?;
    let (py, pz) = (&red.projections[0], &red.projections[1]);
    let g = &red.gram;
    let q = params.q as f64;

    let mut thetas = Vec::with_capacity(s + 1);
    thetas.push(state.theta);
    for j in 0..s {
        thetas.push(next_theta(thetas[j]));
    }
    let coefs: Vec<f64> = thetas[..s].iter().map(|&t| momentum_coef(q, t)).collect();

    let mut deltas: Vec<Option<Vec<f64>>> = Vec::with_capacity(s);
    for j in 0..s {
        let v = largest_eigenvalue(&g.diagonal_block(j * mu, mu))?;
        if v <= 0.0 {
            deltas.push(None);
            continue;
        }
        let theta = thetas[j];
        let sq = theta * theta;
        let eta = 1.0 / (q * theta * v);
        let mut dz = vec![0.0; mu];
        for (l, &i) in blocks[j].indices.iter().enumerate() {
            let pos = j * mu + l;
            let mut r = sq * py[pos] + pz[pos];
            for (t, dt) in deltas.iter().enumerate() {
                let Some(dt) = dt else { continue };
                let row = &g.row(pos)[t * mu..(t + 1) * mu];
                let cross = row.iter().zip(dt).fold(0.0, |acc, (a, b)| acc + a * b);
                r -= (sq * coefs[t] - 1.0) * cross;
            }
            let mut current = state.z[i];
            for (t, dt) in deltas.iter().enumerate() {
                let Some(dt) = dt else { continue };
                if let Some(lp) = blocks[t].indices.iter().position(|&u| u == i) {
                    current += dt[lp];
                }
            }
            let gval = current - eta * r;
            dz[l] = soft_threshold(gval, params.lambda * eta) - current;
        }
        deltas.push(Some(dz));
    }

    for (j, dz) in deltas.iter().enumerate() {
        if let Some(dz) = dz {
            apply_acc_update(state, &y, j * mu..(j + 1) * mu, &blocks[j].indices, dz, coefs[j]);
        }
        state.theta = thetas[j + 1];
        state.iteration += 1;
        let mut stats = || comm.stats();
        observe(state, &mut stats)?;
    }
    Ok(())
}

/// One proximal BCD iteration on a shard: `η = 1/λ_max(𝔸ᵀ𝔸)`.
pub fn bcd_iteration(
    shard: &LassoShard,
    params: &LassoParams,
    state: &mut BcdState,
    sel: &IndexSelection,
    comm: &mut impl Collective,
) -> Result<()> {
    check_selection(sel, params)?;
    let y = extract_columns(&shard.matrix, sel)?;
    let red = reduce_block(&y, &[&state.residual], comm)?;
    let v = largest_eigenvalue(&red.gram)?;
    if v > 0.0 {
        let eta = 1.0 / v;
        let p = &red.projections[0];
        let dx: Vec<f64> = sel
            .indices
            .iter()
            .enumerate()
            .map(|(l, &i)| {
                let current = state.x[i];
                let g = current - eta * p[l];
                soft_threshold(g, params.lambda * eta) - current
            })
            .collect();
        apply_bcd_update(state, &y, 0..sel.len(), &sel.indices, &dx);
    }
    state.iteration += 1;
    Ok(())
}

pub fn bcd_step(problem: &LassoProblem, state: &mut BcdState, sel: &IndexSelection) -> Result<CommStats> {
    let mut comm = SerialComm::new();
    bcd_iteration(&problem.shard(), &problem.params(), state, sel, &mut comm)?;
    Ok(comm.stats())
}

/// `s` proximal BCD iterations with a single reduction.
pub fn sa_bcd_epoch(
    shard: &LassoShard,
    params: &LassoParams,
    state: &mut BcdState,
    blocks: &[IndexSelection],
    comm: &mut impl Collective,
    mut observe: impl FnMut(&BcdState, &mut dyn FnMut() -> CommStats) -> Result<()>,
) -> Result<()> {
    let mu = params.block_size;
    for sel in blocks {
        check_selection(sel, params)?;
    }
    let all: Vec<usize> = blocks.iter().flat_map(|b| b.indices.iter().copied()).collect();
    let y = extract_columns(&shard.matrix, &IndexSelection::new(all, state.iteration))?;
    let red = reduce_block(&y, &[&state.residual], comm)?;
    let p = &red.projections[0];
    let g = &red.gram;

    let mut deltas: Vec<Option<Vec<f64>>> = Vec::with_capacity(blocks.len());
    for (j, block) in blocks.iter().enumerate() {
        let v = largest_eigenvalue(&g.diagonal_block(j * mu, mu))?;
        if v <= 0.0 {
            deltas.push(None);
            continue;
        }
        let eta = 1.0 / v;
        let mut dx = vec![0.0; mu];
        for (l, &i) in block.indices.iter().enumerate() {
            let pos = j * mu + l;
            let mut grad = p[pos];
            for (t, dt) in deltas.iter().enumerate() {
                let Some(dt) = dt else { continue };
                let row = &g.row(pos)[t * mu..(t + 1) * mu];
                grad += row.iter().zip(dt).fold(0.0, |acc, (a, b)| acc + a * b);
            }
            let mut current = state.x[i];
            for (t, dt) in deltas.iter().enumerate() {
                let Some(dt) = dt else { continue };
                if let Some(lp) = blocks[t].indices.iter().position(|&u| u == i) {
                    current += dt[lp];
                }
            }
            let gval = current - eta * grad;
            dx[l] = soft_threshold(gval, params.lambda * eta) - current;
        }
        deltas.push(Some(dx));
    }

    for (j, dx) in deltas.iter().enumerate() {
        if let Some(dx) = dx {
            apply_bcd_update(state, &y, j * mu..(j + 1) * mu, &blocks[j].indices, dx);
        }
        state.iteration += 1;
        let mut stats = || comm.stats();
        observe(state, &mut stats)?;
    }
    Ok(())
}

/// Which method to run and how.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LassoRunSpec {
    pub algorithm: LassoAlgorithm,
    pub iters: usize,
    /// `None` for the classic method, `Some(s)` for the s-step form.
    pub unroll: Option<usize>,
    pub seed: u64,
}

/// Final replicated state of a run on one shard.
#[derive(Clone, Debug)]
pub enum LassoFinal {
    Acc(AccBcdState),
    Plain(BcdState),
}

impl LassoFinal {
    pub fn solution(&self) -> Vec<f64> {
        match self {
            LassoFinal::Acc(s) => s.solution(),
            LassoFinal::Plain(s) => s.x.clone(),
        }
    }
}

/// Runs `spec.iters` iterations on a shard. `observe(h, x_h, stats)` sees
/// `h = 0` and then every iteration whose index is a multiple of
/// `log_every`, plus the last one.
pub fn drive_lasso(
    shard: &LassoShard,
    params: &LassoParams,
    spec: &LassoRunSpec,
    log_every: usize,
    comm: &mut impl Collective,
    observe: &mut dyn FnMut(usize, &[f64], CommStats) -> Result<()>,
) -> Result<LassoFinal> {
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
    let n = params.num_features;
    let mu = params.block_size;

    match spec.algorithm {
        LassoAlgorithm::AccBcd => {
            let mut state = AccBcdState::zero(shard, params);
            observe(0, &state.solution(), comm.stats())?;
            match spec.unroll {
                None => {
                    for h in 1..=iters {
                        let sel = sampler.next_block(n, mu);
                        accbcd_iteration(shard, params, &mut state, &sel, comm)?;
                        if wants(h) {
                            observe(h, &state.solution(), comm.stats())?;
                        }
                    }
                }
                Some(s) => {
                    let mut done = 0;
                    while done < iters {
                        let len = s.min(iters - done);
                        let blocks: Vec<_> = (0..len).map(|_| sampler.next_block(n, mu)).collect();
                        sa_accbcd_epoch(shard, params, &mut state, &blocks, comm, |st, stats| {
                            let h = st.iteration;
                            if wants(h) {
                                observe(h, &st.solution(), stats())?;
                            }
                            Ok(())
                        })?;
                        done += len;
                    }
                }
            }
            Ok(LassoFinal::Acc(state))
        }
        LassoAlgorithm::Bcd => {
            let mut state = BcdState::zero(shard, params);
            observe(0, &state.x, comm.stats())?;
            match spec.unroll {
                None => {
                    for h in 1..=iters {
                        let sel = sampler.next_block(n, mu);
                        bcd_iteration(shard, params, &mut state, &sel, comm)?;
                        if wants(h) {
                            observe(h, &state.x, comm.stats())?;
                        }
                    }
                }
                Some(s) => {
                    let mut done = 0;
                    while done < iters {
                        let len = s.min(iters - done);
                        let blocks: Vec<_> = (0..len).map(|_| sampler.next_block(n, mu)).collect();
                        sa_bcd_epoch(shard, params, &mut state, &blocks, comm, |st, stats| {
                            let h = st.iteration;
                            if wants(h) {
                                observe(h, &st.x, stats())?;
                            }
                            Ok(())
                        })?;
                        done += len;
                    }
                }
            }
            Ok(LassoFinal::Plain(state))
        }
    }
}

/// Result of a single-worker run.
#[derive(Clone, Debug)]
pub struct LassoRun {
    pub solution: Vec<f64>,
    pub records: Vec<RunRecord>,
    pub stats: CommStats,
    pub final_state: LassoFinal,
}

/// Single-worker run logging the objective every `log_every` iterations.
pub fn run_lasso(problem: &LassoProblem, spec: &LassoRunSpec, log_every: usize) -> Result<LassoRun> {
    let shard = problem.shard();
    let params = problem.params();
    let mut comm = SerialComm::new();
    let mut records = Vec::new();
    let start = std::time::Instant::now();
    let final_state = drive_lasso(&shard, &params, spec, log_every, &mut comm, &mut |h, x, stats| {
        records.push(RunRecord::new(h, lasso_objective(problem, x)?, stats, start.elapsed().as_secs_f64()));
        Ok(())
    })?;
    Ok(LassoRun { solution: final_state.solution(), records, stats: comm.stats(), final_state })
}

/// Like [`run_lasso`] but returns every iterate `x_0 … x_H`.
pub fn lasso_trajectory(problem: &LassoProblem, spec: &LassoRunSpec) -> Result<Vec<Vec<f64>>> {
    let mut xs = Vec::with_capacity(spec.iters + 1);
    drive_lasso(&problem.shard(), &problem.params(), spec, 1, &mut SerialComm::new(), &mut |_, x, _| {
        xs.push(x.to_vec());
        Ok(())
    })?;
    Ok(xs)
}

/// Accelerated BCD for `iters` iterations.
pub fn run_accbcd(problem: &LassoProblem, iters: usize, seed: u64) -> Result<LassoRun> {
    let spec = LassoRunSpec { algorithm: LassoAlgorithm::AccBcd, iters, unroll: None, seed };
    run_lasso(problem, &spec, 1)
}

/// s-step accelerated BCD.
pub fn sa_accbcd_run(problem: &LassoProblem, iters: usize, sa: SaConfig) -> Result<LassoRun> {
    let spec = LassoRunSpec { algorithm: LassoAlgorithm::AccBcd, iters, unroll: Some(sa.s), seed: sa.seed };
    run_lasso(problem, &spec, 1)
}

/// Proximal BCD, or accelerated BCD when `accelerate` is set.
pub fn run_bcd(problem: &LassoProblem, iters: usize, seed: u64, accelerate: bool) -> Result<LassoRun> {
    let algorithm = if accelerate { LassoAlgorithm::AccBcd } else { LassoAlgorithm::Bcd };
    run_lasso(problem, &LassoRunSpec { algorithm, iters, unroll: None, seed }, 1)
}

pub fn sa_bcd_run(problem: &LassoProblem, iters: usize, sa: SaConfig) -> Result<LassoRun> {
    let spec = LassoRunSpec { algorithm: LassoAlgorithm::Bcd, iters, unroll: Some(sa.s), seed: sa.seed };
    run_lasso(problem, &spec, 1)
}

/// Unroll depth and shared seed of an s-step run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SaConfig {
    pub s: usize,
    pub seed: u64,
}
