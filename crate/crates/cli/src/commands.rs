use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use onebit::datasets::{self, Column, Fixture, TraceWindow};
use onebit::evaluation::{compression_ratio_1bit, run_experiment, ExperimentConfig, SignalSource};
use onebit::solvers::{BbihtConfig, BihtConfig, BihtSchedule, FpcConfig, ScanMode, SolverSpec};
use onebit::transform::{build_ensemble, dct_synthesis_matrix};
use onebit::{encode, reconstruct, wire};

#[derive(Debug, Parser)]
#[command(
    name = "onebit",
    version,
    about = "1-bit compressive data gathering for sensor traces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode one window of a trace into a packed .1bm file.
    Encode(EncodeArgs),
    /// Reconstruct readings from a .1bm file.
    Reconstruct(ReconstructArgs),
    /// DCT coefficients and cumulative energy of one window.
    Sparsity(SparsityArgs),
    /// Multi-trial SNR sweep over measurement counts.
    Experiment(ExperimentArgs),
    /// Write a synthetic fixture trace as CSV.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Delimited trace file.
    #[arg(long, conflicts_with = "fixture")]
    pub input: Option<PathBuf>,
    /// Built-in synthetic trace instead of a file: dc, sea-like, lab-like.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Column index (0-based) or header name.
    #[arg(long, default_value = "1")]
    pub column: String,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Offset of the first reading in the window.
    #[arg(long, default_value_t = 0)]
    pub start: usize,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// biht, bbiht or fpc.
    #[arg(long, default_value = "bbiht")]
    pub solver: String,
    /// Sparsity level (biht only).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub d: f64,
    #[arg(long = "stop-var", default_value_t = 0.01)]
    pub stop_var: f64,
    #[arg(long = "scan-mode", value_enum, default_value_t = ScanModeArg::Literal)]
    pub scan_mode: ScanModeArg,
    #[arg(long = "max-iters", default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long = "step-tau", default_value_t = 1.0)]
    pub step_tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda0: f64,
    #[arg(long = "lambda-growth", default_value_t = 2.0)]
    pub lambda_growth: f64,
    #[arg(long, default_value_t = 10)]
    pub stages: usize,
    #[arg(long = "inner-iters", default_value_t = 200)]
    pub inner_iters: usize,
    #[arg(long = "grad-step", default_value_t = 1.0)]
    pub grad_step: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScanModeArg {
    Literal,
    #[value(name = "first_exceed", alias = "first-exceed")]
    FirstExceed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Packed .1bm file.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// index,value CSV; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SparsityArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    /// Comma list (25,50,100) or range start:stop:step (25:500:25).
    #[arg(long = "m-grid", default_value = "25:500:25")]
    pub m_grid: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated solver names.
    #[arg(long = "solvers", default_value = "bbiht")]
    pub solvers: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Record wall-clock solver time (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// dc, sea-like or lab-like.
    #[arg(long)]
    pub name: String,
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A failed command: either a usage problem caught here or a library error.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(onebit::Error),
}

impl From<onebit::Error> for Failure {
    fn from(e: onebit::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    pub fn category(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Lib(onebit::Error::InvalidArgument(_)) => "config",
            Failure::Lib(e) => e.category(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(msg) => msg.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use onebit::Error as E;
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(e) => match e {
                E::InvalidArgument(_) | E::Config(_) => 2,
                E::Ingestion(_) | E::Io(_) | E::Degenerate(_) => 3,
                E::Format(_) => 4,
                E::EnsembleMismatch(_) => 5,
            },
        }
    }
}

type CmdResult = Result<(), Failure>;

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Sparsity(args) => cmd_sparsity(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Fixture(args) => cmd_fixture(args),
    }
}

fn require_input(path: &Path) -> CmdResult {
    if !path.exists() {
        return Err(Failure::Usage(format!(
            "input {} does not exist",
            path.display()
        )));
    }
    Ok(())
}

fn delimiter_byte(c: char) -> Result<u8, Failure> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| Failure::Usage(format!("delimiter {c:?} must be a single ASCII character")))
}

fn load_window(trace: &TraceArgs, n: usize) -> Result<TraceWindow, Failure> {
    let (series, source_id) = match (&trace.input, &trace.fixture) {
        (Some(path), None) => {
            require_input(path)?;
            let column: Column = trace.column.parse().expect("infallible");
            let loaded = datasets::load_csv_trace(path, &column, delimiter_byte(trace.delimiter)?)?;
            if loaded.skipped_rows > 0 {
                log::warn!(
                    "skipped {} malformed rows in {}",
                    loaded.skipped_rows,
                    path.display()
                );
            }
            (loaded.values, path.display().to_string())
        }
        (None, Some(id)) => {
            let fixture = Fixture::from_id(id)?;
            let len = trace
                .start
                .checked_add(n)
                .ok_or_else(|| Failure::Usage("window end overflows".into()))?;
            (fixture.series(len)?, format!("fixture:{}", fixture.id()))
        }
        (None, None) => {
            return Err(Failure::Usage(
                "one of --input or --fixture is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --input with --fixture"),
    };
    Ok(datasets::window(&series, n, trace.start, source_id)?)
}

fn schedule(args: &SolverArgs) -> BihtSchedule {
    BihtSchedule {
        max_iters: args.max_iters,
        step_tau: args.step_tau,
    }
}

fn solver_spec(name: &str, args: &SolverArgs) -> Result<SolverSpec, Failure> {
    // validate the name (and k for biht) first so unknown names list the options
    let spec = SolverSpec::from_name(name, args.k)?;
    Ok(match spec {
        SolverSpec::Biht(cfg) => SolverSpec::Biht(BihtConfig {
            k: cfg.k,
            schedule: schedule(args),
        }),
        SolverSpec::Bbiht(_) => SolverSpec::Bbiht(BbihtConfig {
            d: args.d,
            stop_var: args.stop_var,
            scan_mode: match args.scan_mode {
                ScanModeArg::Literal => ScanMode::Literal,
                ScanModeArg::FirstExceed => ScanMode::FirstExceed,
            },
            schedule: schedule(args),
        }),
        SolverSpec::Fpc(_) => SolverSpec::Fpc(FpcConfig {
            lambda0: args.lambda0,
            lambda_growth: args.lambda_growth,
            stages: args.stages,
            inner_iters: args.inner_iters,
            grad_step: args.grad_step,
            tol: args.tol,
        }),
    })
}

fn emit(output: Option<&Path>, text: &str) -> CmdResult {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Lib(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_encode(args: EncodeArgs) -> CmdResult {
    let w = load_window(&args.trace, args.n)?;
    let ensemble = build_ensemble(args.n, args.m, args.seed)?;
    let sm = encode(w.values.view(), &ensemble)?.with_source_id(w.source_id.clone());
    wire::write_file(&args.output, &sm)?;
    println!(
        "m={} n={} payload_bytes={} ratio_1bit={:.3}",
        sm.m(),
        sm.n(),
        wire::payload_len(sm.m()),
        compression_ratio_1bit(sm.m(), sm.n())?
    );
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> CmdResult {
    require_input(&args.input)?;
    let solver = solver_spec(&args.solver.solver, &args.solver)?;
    let sm = wire::read_file(&args.input)?;
    let ensemble = build_ensemble(sm.n(), sm.m(), sm.seed())?;
    let rec = reconstruct(&sm, &ensemble, &solver)?;
    let mut csv = String::from("index,value\n");
    for (i, v) in rec.xhat.iter().enumerate() {
        csv.push_str(&format!("{i},{v:.9}\n"));
    }
    match &args.output {
        Some(path) => {
            fs::write(path, csv).map_err(|e| Failure::Lib(e.into()))?;
            println!(
                "solver={} k_used={} hamming_fraction={:.6}",
                solver.name(),
                rec.estimate.k_used,
                rec.estimate.hamming_fraction()
            );
        }
        None => {
            print!("{csv}");
            eprintln!(
                "solver={} k_used={} hamming_fraction={:.6}",
                solver.name(),
                rec.estimate.k_used,
                rec.estimate.hamming_fraction()
            );
        }
    }
    Ok(())
}

fn cmd_sparsity(args: SparsityArgs) -> CmdResult {
    let w = load_window(&args.trace, args.n)?;
    let psi = dct_synthesis_matrix(args.n)?;
    let report = datasets::sparsity_report(&w, &psi)?;
    emit(args.output.as_deref(), &report.to_csv())
}

fn parse_grid(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("cannot parse m grid {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid: Vec<usize> = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (usize, usize, usize) = (
                start.trim().parse().map_err(|_| bad())?,
                stop.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if step == 0 {
                return Err(bad());
            }
            (start..=stop).step_by(step).collect()
        }
        [list] => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(Failure::Lib(onebit::Error::Config(
            "m grid is empty".into(),
        )));
    }
    Ok(grid)
}

fn cmd_experiment(args: ExperimentArgs) -> CmdResult {
    let m_grid = parse_grid(&args.m_grid)?;
    let solvers = args
        .solvers
        .split(',')
        .map(|name| solver_spec(name.trim(), &args.solver))
        .collect::<Result<Vec<_>, _>>()?;
    let source = match (&args.trace.input, &args.trace.fixture) {
        (None, Some(id)) if args.trace.start == 0 => SignalSource::Fixture(Fixture::from_id(id)?),
        _ => SignalSource::Window(load_window(&args.trace, args.n)?),
    };
    let cfg = ExperimentConfig {
        n: args.n,
        m_grid,
        trials: args.trials,
        master_seed: args.seed,
        source,
        solvers,
        record_timing: args.timing,
    };
    let report = run_experiment(&cfg)?;
    let text = match args.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    emit(args.output.as_deref(), &text)
}

fn cmd_fixture(args: FixtureArgs) -> CmdResult {
    let fixture = Fixture::from_id(&args.name)?;
    emit(args.output.as_deref(), &fixture.to_csv(args.n)?)
}
