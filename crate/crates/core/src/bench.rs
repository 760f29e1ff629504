//! Experiment runner behind the `sacd` binary: builds a problem from a
//! dataset, runs one solver (optionally paired with its classic
//! counterpart), and writes the CSV log, a JSON summary and a state dump.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{read_libsvm_file, synthetic, LabeledDataset};
use crate::engine::{run_distributed, RunConfig, RunOutput, SolverSpec};
use crate::error::{Error, Result};
use crate::lasso::{lasso_objective, LassoAlgorithm, LassoProblem, LassoRunSpec};
use crate::record::{write_records, RunRecord};
use crate::svm::{duality_gap_of, primal_objective, SvmLoss, SvmProblem, SvmRunSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Lasso,
    SvmL1,
    SvmL2,
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lasso" => Ok(Self::Lasso),
            "svm-l1" => Ok(Self::SvmL1),
            "svm-l2" => Ok(Self::SvmL2),
            _ => Err(Error::Config(format!("unknown problem '{s}' (lasso, svm-l1, svm-l2)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Cd,
    Bcd,
    #[serde(rename = "acccd")]
    AccCd,
    #[serde(rename = "accbcd")]
    AccBcd,
    SaCd,
    SaBcd,
    #[serde(rename = "sa-acccd")]
    SaAccCd,
    #[serde(rename = "sa-accbcd")]
    SaAccBcd,
    Svm,
    SaSvm,
}

const SOLVERS: [(&str, SolverKind); 10] = [
    ("cd", SolverKind::Cd),
    ("bcd", SolverKind::Bcd),
    ("acccd", SolverKind::AccCd),
    ("accbcd", SolverKind::AccBcd),
    ("sa-cd", SolverKind::SaCd),
    ("sa-bcd", SolverKind::SaBcd),
    ("sa-acccd", SolverKind::SaAccCd),
    ("sa-accbcd", SolverKind::SaAccBcd),
    ("svm", SolverKind::Svm),
    ("sa-svm", SolverKind::SaSvm),
];

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SOLVERS.iter().find(|(n, _)| *n == s).map(|(_, k)| *k).ok_or_else(|| {
            let names: Vec<&str> = SOLVERS.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("unknown solver '{s}' ({})", names.join(", ")))
        })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = SOLVERS.iter().find(|(_, k)| k == self).map(|(n, _)| *n).unwrap_or("?");
        f.write_str(name)
    }
}

impl SolverKind {
    pub fn is_svm(self) -> bool {
        matches!(self, Self::Svm | Self::SaSvm)
    }

    pub fn is_sa(self) -> bool {
        matches!(self, Self::SaCd | Self::SaBcd | Self::SaAccCd | Self::SaAccBcd | Self::SaSvm)
    }

    /// Single-coordinate variants run with block size 1.
    pub fn single_coordinate(self) -> bool {
        matches!(self, Self::Cd | Self::AccCd | Self::SaCd | Self::SaAccCd | Self::Svm | Self::SaSvm)
    }

    /// The classic method an s-step solver is compared against.
    pub fn classic(self) -> Self {
        match self {
            Self::SaCd => Self::Cd,
            Self::SaBcd => Self::Bcd,
            Self::SaAccCd => Self::AccCd,
            Self::SaAccBcd => Self::AccBcd,
            Self::SaSvm => Self::Svm,
            other => other,
        }
    }

    fn lasso_algorithm(self) -> LassoAlgorithm {
        match self {
            Self::Cd | Self::Bcd | Self::SaCd | Self::SaBcd => LassoAlgorithm::Bcd,
            _ => LassoAlgorithm::AccBcd,
        }
    }
}

/// `λ` given directly or as `100 σ_min(A)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LambdaSpec {
    Value(f64),
    HundredSigmaMin,
}

impl FromStr for LambdaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("100sigmamin") {
            return Ok(Self::HundredSigmaMin);
        }
        s.parse::<f64>()
            .map(Self::Value)
            .map_err(|_| Error::Config(format!("lambda must be a number or '100sigmamin', got '{s}'")))
    }
}

/// Largest `min(m, n)` for which `σ_min` is computed by dense SVD.
pub const SIGMA_MIN_LIMIT: usize = 2000;

/// Smallest singular value of `A` via a dense SVD.
pub fn sigma_min(data: &LabeledDataset) -> Result<f64> {
    let (m, n) = (data.num_rows(), data.num_cols());
    if m.min(n) > SIGMA_MIN_LIMIT {
        return Err(Error::Config(format!("σ_min needs a dense SVD of a {m}×{n} matrix; pass --lambda explicitly")));
    }
    let mut dense = nalgebra::DMatrix::<f64>::zeros(m, n);
    for r in 0..m {
        let (cols, vals) = data.matrix.row(r);
        for (c, v) in cols.iter().zip(vals) {
            dense[(r, *c)] = *v;
        }
    }
    let values = dense.singular_values();
    values.iter().copied().reduce(f64::min).ok_or_else(|| Error::Config("σ_min of an empty matrix".into()))
}

/// Where the data come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DataSource {
    File(PathBuf),
    /// `synthetic:<regression|separable|labels>:<m>x<n>:<density>:<seed>`.
    Synthetic {
        kind: String,
        rows: usize,
        cols: usize,
        density: f64,
        seed: u64,
    },
}

impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some(rest) = s.strip_prefix("synthetic:") else {
            return Ok(Self::File(PathBuf::from(s)));
        };
        let bad = || Error::Config(format!("expected synthetic:<kind>:<m>x<n>:<density>:<seed>, got '{s}'"));
        let parts: Vec<&str> = rest.split(':').collect();
        let [kind, shape, density, seed] = parts[..] else { return Err(bad()) };
        let (m, n) = shape.split_once('x').ok_or_else(bad)?;
        let src = Self::Synthetic {
            kind: kind.to_string(),
            rows: m.parse().map_err(|_| bad())?,
            cols: n.parse().map_err(|_| bad())?,
            density: density.parse().map_err(|_| bad())?,
            seed: seed.parse().map_err(|_| bad())?,
        };
        if !matches!(kind, "regression" | "separable" | "labels") {
            return Err(bad());
        }
        Ok(src)
    }
}

impl DataSource {
    pub fn load(&self) -> Result<LabeledDataset> {
        match self {
            Self::File(p) => read_libsvm_file(p, None),
            Self::Synthetic { kind, rows, cols, density, seed } => {
                if *rows == 0 || *cols == 0 {
                    return Err(Error::Config("synthetic data need m, n ≥ 1".into()));
                }
                Ok(match kind.as_str() {
                    "regression" => synthetic::regression(*rows, *cols, *density, *seed),
                    "separable" => synthetic::separable(*rows, *cols, *density, *seed),
                    _ => synthetic::random_labels(*rows, *cols, *density, *seed),
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    pub data: DataSource,
    pub iters: usize,
    pub unroll: Option<usize>,
    pub block_size: Option<usize>,
    pub lambda: Option<LambdaSpec>,
    pub workers: usize,
    pub seed: u64,
    pub log_every: usize,
    /// CSV path; the summary and state dump go next to it.
    pub out: Option<PathBuf>,
    /// Also run the classic counterpart of an s-step solver.
    pub paired: bool,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemKind, solver: SolverKind, data: DataSource) -> Self {
        Self {
            problem,
            solver,
            data,
            iters: 100,
            unroll: None,
            block_size: None,
            lambda: None,
            workers: 1,
            seed: 0,
            log_every: 1,
            out: None,
            paired: false,
        }
    }

    /// Checks solver/problem/parameter combinations that need no data.
    pub fn validate(&self) -> Result<()> {
        let svm_problem = self.problem != ProblemKind::Lasso;
        if svm_problem != self.solver.is_svm() {
            return Err(Error::Config(format!("solver {} cannot run problem {:?}", self.solver, self.problem)));
        }
        match (self.solver.is_sa(), self.unroll) {
            (true, None) => return Err(Error::Config(format!("{} needs --unroll", self.solver))),
            (true, Some(0)) => return Err(Error::Config("--unroll must be ≥ 1".into())),
            (false, Some(_)) => return Err(Error::Config(format!("{} does not take --unroll", self.solver))),
            _ => {}
        }
        if let Some(mu) = self.block_size {
            if mu == 0 {
                return Err(Error::Config("--block-size must be ≥ 1".into()));
            }
            if self.solver.single_coordinate() && mu != 1 {
                return Err(Error::Config(format!("{} uses block size 1", self.solver)));
            }
        }
        if self.iters == 0 {
            return Err(Error::Config("--iters must be ≥ 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("--workers must be ≥ 1".into()));
        }
        if self.paired && !self.solver.is_sa() {
            return Err(Error::Config("pairing needs an s-step solver".into()));
        }
        Ok(())
    }
}

/// Final numbers of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub solver: SolverKind,
    pub final_metric: f64,
    /// Lasso objective or SVM primal objective at `x_H`.
    pub final_objective: f64,
    pub rounds: u64,
    pub words: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub problem: ProblemKind,
    pub dataset: String,
    pub num_rows: usize,
    pub num_cols: usize,
    pub iters: usize,
    pub unroll: Option<usize>,
    pub block_size: usize,
    pub lambda: f64,
    pub workers: usize,
    pub seed: u64,
    pub run: RunSummary,
    pub classic: Option<RunSummary>,
    /// `|f_classic − f_sa| / |f_classic|` for paired runs.
    pub relative_objective_error: Option<f64>,
}

/// Final iterates written next to the CSV for offline checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub problem: ProblemKind,
    pub lambda: f64,
    pub solution: Vec<f64>,
    pub dual: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub summary: ExperimentSummary,
    pub records: Vec<RunRecord>,
    pub classic_records: Option<Vec<RunRecord>>,
    pub state: StateDump,
}

enum Built {
    Lasso(LassoProblem),
    Svm(SvmProblem),
}

impl Built {
    fn spec(&self, solver: SolverKind, iters: usize, unroll: Option<usize>, seed: u64) -> SolverSpec {
        match self {
            Built::Lasso(p) => SolverSpec::Lasso {
                problem: p.clone(),
                run: LassoRunSpec { algorithm: solver.lasso_algorithm(), iters, unroll, seed },
            },
            Built::Svm(p) => SolverSpec::Svm { problem: p.clone(), run: SvmRunSpec { iters, unroll, seed } },
        }
    }

    fn objective(&self, x: &[f64]) -> Result<f64> {
        match self {
            Built::Lasso(p) => lasso_objective(p, x),
            Built::Svm(p) => primal_objective(p, x),
        }
    }
}

fn summarize(solver: SolverKind, built: &Built, out: &RunOutput) -> Result<RunSummary> {
    let last = out.records.last().ok_or_else(|| Error::Numerical("run produced no records".into()))?;
    Ok(RunSummary {
        solver,
        final_metric: last.metric,
        final_objective: built.objective(&out.solution)?,
        rounds: out.stats.rounds,
        words: out.stats.words,
        seconds: last.seconds,
    })
}

/// `|a − b| / |a|`, or `|a − b|` when `a = 0`.
pub fn relative_error(reference: f64, value: f64) -> f64 {
    let diff = (reference - value).abs();
    if reference == 0.0 {
        diff
    } else {
        diff / reference.abs()
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let data = config.data.load()?;
    let lambda = match config.lambda {
        Some(LambdaSpec::Value(v)) => v,
        Some(LambdaSpec::HundredSigmaMin) => 100.0 * sigma_min(&data)?,
        None if config.problem == ProblemKind::Lasso => 100.0 * sigma_min(&data)?,
        None => 1.0,
    };
    let block_size = config.block_size.unwrap_or(1);
    let (num_rows, num_cols, dataset) = (data.num_rows(), data.num_cols(), data.name.clone());
    let built = match config.problem {
        ProblemKind::Lasso => Built::Lasso(LassoProblem::new(data, lambda, block_size)?),
        ProblemKind::SvmL1 => Built::Svm(SvmProblem::new(data, lambda, SvmLoss::L1)?),
        ProblemKind::SvmL2 => Built::Svm(SvmProblem::new(data, lambda, SvmLoss::L2)?),
    };
    let run_config = RunConfig { workers: config.workers, partition: None, log_every: config.log_every };

    let spec = built.spec(config.solver, config.iters, config.unroll, config.seed);
    let out = run_distributed(&spec, &run_config)?;
    check_finite(&out)?;
    let run = summarize(config.solver, &built, &out)?;

    let (classic, classic_records) = if config.paired {
        let kind = config.solver.classic();
        let spec = built.spec(kind, config.iters, None, config.seed);
        let base = run_distributed(&spec, &run_config)?;
        check_finite(&base)?;
        (Some(summarize(kind, &built, &base)?), Some(base.records))
    } else {
        (None, None)
    };
    let relative_objective_error = classic.as_ref().map(|c| relative_error(c.final_objective, run.final_objective));

    let summary = ExperimentSummary {
        problem: config.problem,
        dataset,
        num_rows,
        num_cols,
        iters: config.iters,
        unroll: config.unroll,
        block_size,
        lambda,
        workers: config.workers,
        seed: config.seed,
        run,
        classic,
        relative_objective_error,
    };
    let state = StateDump { problem: config.problem, lambda, solution: out.solution, dual: out.dual };
    let output = ExperimentOutput { summary, records: out.records, classic_records, state };
    if let Some(path) = &config.out {
        write_outputs(path, &output)?;
    }
    Ok(output)
}

fn check_finite(out: &RunOutput) -> Result<()> {
    if out.solution.iter().all(|v| v.is_finite()) && out.records.iter().all(|r| r.metric.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("non-finite iterate or metric".into()))
    }
}

/// `<stem>.summary.json` and `<stem>.state.json` next to `csv`.
pub fn sibling_paths(csv: &Path) -> (PathBuf, PathBuf) {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    let dir = csv.parent().unwrap_or_else(|| Path::new(""));
    (dir.join(format!("{stem}.summary.json")), dir.join(format!("{stem}.state.json")))
}

fn write_outputs(csv: &Path, output: &ExperimentOutput) -> Result<()> {
    write_records(&output.records, BufWriter::new(File::create(csv)?))?;
    let (summary_path, state_path) = sibling_paths(csv);
    write_json(&summary_path, &output.summary)?;
    write_json(&state_path, &output.state)?;
    if let Some(recs) = &output.classic_records {
        let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let classic = csv.with_file_name(format!("{stem}.classic.csv"));
        write_records(recs, BufWriter::new(File::create(classic)?))?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<StateDump> {
    let f = File::open(path)?;
    serde_json::from_reader(std::io::BufReader::new(f))
        .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
}

/// Duality gap of a dumped SVM state, recomputed from the data.
pub fn recompute_gap(data: LabeledDataset, state: &StateDump) -> Result<f64> {
    let loss = match state.problem {
        ProblemKind::SvmL1 => SvmLoss::L1,
        ProblemKind::SvmL2 => SvmLoss::L2,
        ProblemKind::Lasso => return Err(Error::Config("state dump is not an SVM run".into())),
    };
    let problem = SvmProblem::new(data, state.lambda, loss)?;
    let alpha = state.dual.as_ref().ok_or_else(|| Error::Config("state dump has no dual iterate".into()))?;
    duality_gap_of(&problem, alpha, &state.solution)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub points: usize,
    pub max_relative: f64,
    pub final_relative: f64,
    /// Iteration with the largest relative difference.
    pub worst_iter: usize,
}

/// Relative metric differences between two logs on the same iteration grid.
pub fn compare_runs(a: &[RunRecord], b: &[RunRecord]) -> Result<Divergence> {
    if a.is_empty() || a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.iter != y.iter) {
        return Err(Error::Config("runs are not on the same iteration grid".into()));
    }
    let mut max_relative = 0.0f64;
    let mut worst_iter = a[0].iter;
    for (x, y) in a.iter().zip(b) {
        let d = relative_error(x.metric, y.metric);
        if d > max_relative || d.is_nan() {
            max_relative = d;
            worst_iter = x.iter;
        }
    }
    let (la, lb) = (a[a.len() - 1], b[b.len() - 1]);
    Ok(Divergence { points: a.len(), max_relative, final_relative: relative_error(la.metric, lb.metric), worst_iter })
}
