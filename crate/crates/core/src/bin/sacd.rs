use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sacd::bench::{
    compare_runs, read_state, recompute_gap, run_experiment, DataSource, ExperimentConfig, LambdaSpec, ProblemKind,
    SolverKind,
};
use sacd::dataset::{dataset_stats, read_libsvm_file};
use sacd::engine::{predict_costs, CostAlgorithm, CostInputs};
use sacd::record::read_records;
use sacd::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser)]
#[command(name = "sacd", version, about = "s-step coordinate descent for Lasso and linear SVM")]
struct Cli {
    /// Directory searched for relative dataset paths that do not exist as given.
    #[arg(long, env = "SACD_DATA_DIR", global = true)]
    data_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write the per-iteration log.
    Run(RunArgs),
    /// Compare the metric columns of two run logs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Largest accepted relative metric difference.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Print shape and density of a LIBSVM file.
    Stats {
        #[arg(long)]
        data: String,
        /// Declared feature count (pads the column dimension).
        #[arg(long)]
        features: Option<usize>,
    },
    /// Recompute the SVM duality gap from a state dump.
    Gap {
        #[arg(long)]
        data: String,
        #[arg(long)]
        state: PathBuf,
    },
    /// Evaluate the cost model for the classic and s-step methods.
    PredictCosts {
        #[arg(long = "iters")]
        iters: usize,
        #[arg(long = "unroll")]
        unroll: usize,
        #[arg(long = "block-size", default_value_t = 1)]
        block_size: usize,
        #[arg(long = "workers", default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        density: f64,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// lasso, svm-l1 or svm-l2.
    #[arg(long)]
    problem: ProblemKind,
    /// cd, bcd, acccd, accbcd, sa-cd, sa-bcd, sa-acccd, sa-accbcd, svm, sa-svm.
    #[arg(long)]
    solver: SolverKind,
    /// LIBSVM file or synthetic:<regression|separable|labels>:<m>x<n>:<density>:<seed>.
    #[arg(long)]
    data: String,
    #[arg(long = "iters", default_value_t = 100)]
    iters: usize,
    #[arg(long = "unroll")]
    unroll: Option<usize>,
    #[arg(long = "block-size")]
    block_size: Option<usize>,
    /// A number or 100sigmamin (Lasso default); SVM defaults to 1.
    #[arg(long)]
    lambda: Option<LambdaSpec>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    log_every: usize,
    /// CSV log path; `.summary.json` and `.state.json` are written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the classic counterpart and report the relative objective error.
    #[arg(long)]
    paired: bool,
    /// Exit with status 2 when the paired relative objective error exceeds this.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn resolve(data: &str, dir: Option<&Path>) -> String {
    if data.starts_with("synthetic:") || Path::new(data).exists() {
        return data.to_string();
    }
    match dir {
        Some(d) if Path::new(data).is_relative() => d.join(data).to_string_lossy().into_owned(),
        _ => data.to_string(),
    }
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Numerical(_) => ExitCode::from(EXIT_NUMERICAL),
        _ => ExitCode::from(EXIT_USAGE),
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let dir = cli.data_dir.as_deref();
    match cli.command {
        Command::Run(args) => {
            let data: DataSource = match resolve(&args.data, dir).parse() {
                Ok(d) => d,
                Err(e) => return exit_for(&e),
            };
            let config = ExperimentConfig {
                problem: args.problem,
                solver: args.solver,
                data,
                iters: args.iters,
                unroll: args.unroll,
                block_size: args.block_size,
                lambda: args.lambda,
                workers: args.workers,
                seed: args.seed,
                log_every: args.log_every,
                out: args.out,
                paired: args.paired || args.tolerance.is_some(),
            };
            match run_experiment(&config) {
                Ok(out) => {
                    print_json(&out.summary);
                    match (args.tolerance, out.summary.relative_objective_error) {
                        (Some(tol), Some(err)) if !(err <= tol) => {
                            eprintln!("relative objective error {err:e} exceeds {tol:e}");
                            ExitCode::from(EXIT_NUMERICAL)
                        }
                        _ => ExitCode::SUCCESS,
                    }
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::Compare { a, b, tolerance } => {
            let load = |p: &Path| std::fs::File::open(p).map_err(Error::from).and_then(read_records);
            let (ra, rb) = match (load(&a), load(&b)) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => return exit_for(&e),
            };
            match compare_runs(&ra, &rb) {
                Ok(d) => {
                    print_json(&d);
                    if d.max_relative <= tolerance {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("max relative difference {:e} exceeds {tolerance:e}", d.max_relative);
                        ExitCode::from(EXIT_NUMERICAL)
                    }
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::Stats { data, features } => match read_libsvm_file(Path::new(&resolve(&data, dir)), features) {
            Ok(d) => {
                print_json(&dataset_stats(&d));
                ExitCode::SUCCESS
            }
            Err(e) => exit_for(&e),
        },
        Command::Gap { data, state } => {
            let result = resolve(&data, dir)
                .parse::<DataSource>()
                .and_then(|src| src.load())
                .and_then(|d| read_state(&state).and_then(|s| recompute_gap(d, &s)));
            match result {
                Ok(gap) => {
                    println!("{gap:e}");
                    ExitCode::SUCCESS
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::PredictCosts { iters, unroll, block_size, workers, rows, cols, density } => {
            let inputs = CostInputs { iters, unroll, block_size, workers, num_rows: rows, num_cols: cols, density };
            let both = predict_costs(CostAlgorithm::AccBcd, &inputs)
                .and_then(|a| predict_costs(CostAlgorithm::SaAccBcd, &inputs).map(|b| (a, b)));
            match both {
                Ok((classic, sa)) => {
                    print_json(&serde_json::json!({ "accbcd": classic, "sa-accbcd": sa }));
                    ExitCode::SUCCESS
                }
                Err(e) => exit_for(&e),
            }
        }
    }
}
