//! `skiorder` — generate trajectory data, run the singular-knee analysis, and
//! batch ensembles from the command line.
//!
//! Exit codes: 0 success (including knee-undefined analyses), 1 runtime or
//! I/O failure, 2 usage error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skiorder::ensemble::{run_ensemble, EnsembleSpec, ModelSpec};
use skiorder::io;
use skiorder::lambda_ca::{self, CAConfig};
use skiorder::metrics;
use skiorder::seeds::derive_seed;
use skiorder::svknee::SingularCurve;
use skiorder::swarmsim::{simulate, Model, SimConfig};
use skiorder::trajmat::{preprocess, DEFAULT_VARIANCE_FLOOR};

#[derive(Parser)]
#[command(
    name = "skiorder",
    version,
    about = "Singular-knee order/disorder analysis of multi-agent trajectory data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a motion model and write the trajectory CSV.
    Simulate(SimulateArgs),
    /// Run the 1D cellular automaton and write the state grid.
    Ca(CaArgs),
    /// Analyze a trajectory CSV and emit the metrics JSON.
    Analyze(AnalyzeArgs),
    /// Batch-run simulations and write per-trial and summary tables.
    Ensemble(EnsembleArgs),
    /// Print the random-matrix noise bounds for a matrix shape.
    Bounds(BoundsArgs),
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: skiorder::Error| e.to_string())
}

#[derive(Args)]
struct SimulateArgs {
    /// Motion model (pure_noise, position_walk, velocity_walk,
    /// kinematic_noise, acceleration_noise, cucker_smale, vicsek, spiral_in).
    #[arg(long, value_parser = parse_model)]
    model: Option<Model>,
    /// Number of agents.
    #[arg(long)]
    agents: Option<usize>,
    /// Number of recorded timesteps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Kinematic/acceleration noise gain.
    #[arg(long)]
    mu: Option<f64>,
    /// Cucker-Smale interaction strength K.
    #[arg(long)]
    k: Option<f64>,
    /// Cucker-Smale decay exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Vicsek interaction radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Vicsek speed.
    #[arg(long)]
    speed: Option<f64>,
    /// Vicsek periodic box side.
    #[arg(long)]
    box_size: Option<f64>,
    /// Spiral base frequency.
    #[arg(long)]
    freq_f: Option<f64>,
    /// Apply 5%-of-range measurement noise.
    #[arg(long)]
    noise: bool,
    /// JSON config file mirroring the flag names; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output trajectory CSV; a `<output>.config.json` sidecar records the
    /// fully resolved configuration.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CaArgs {
    /// Fraction of non-quiescent rules that map to a live state.
    #[arg(long)]
    lambda: Option<f64>,
    /// World width in cells.
    #[arg(long)]
    cells: Option<usize>,
    /// Number of recorded generations (initial world included).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    neighbors: Option<usize>,
    /// Generate an anisotropic rule table.
    #[arg(long)]
    anisotropic: bool,
    /// Probability that a cell starts dead.
    #[arg(long)]
    dead_probability: Option<f64>,
    /// Master seed: rule and world seeds are derived from it unless given
    /// explicitly.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rule_seed: Option<u64>,
    #[arg(long)]
    world_seed: Option<u64>,
    /// JSON config file mirroring the flag names; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output grid CSV (cells x steps, integer states).
    #[arg(short, long)]
    output: PathBuf,
    /// Also export the grid as an ASCII PGM image (time runs downward).
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input trajectory CSV (plain numeric; optional `label,t0,...` header).
    input: PathBuf,
    /// Metrics JSON output path (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the raw and normalized singular-value curve.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Rows with population std at or below this floor are dropped.
    #[arg(long, default_value_t = DEFAULT_VARIANCE_FLOOR)]
    variance_floor: f64,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Eleven paper-default models, 25 trials each, 50 agents, 500 steps.
    #[arg(long)]
    paper_defaults: bool,
    /// Comma-separated model list; `+noise` suffixes add measurement noise
    /// (e.g. `vicsek,vicsek+noise,cucker_smale`).
    #[arg(long)]
    models: Option<String>,
    /// Trials per model.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    /// JSON config file holding a full ensemble spec; flags override.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Per-trial CSV output; the summary lands next to it as
    /// `<stem>.summary.csv` and the resolved settings as
    /// `<output>.config.json`.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<skiorder::Error> for CliError {
    fn from(e: skiorder::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Runtime(format!("cannot open config {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn write_sidecar<T: serde::Serialize>(output: &Path, config: &T) -> Result<(), CliError> {
    let path = PathBuf::from(format!("{}.config.json", output.display()));
    let mut w = create(&path)?;
    writeln!(w, "{}", io::to_json_string(config)?)?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut cfg: SimConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => {
            if args.model.is_none() {
                return Err(CliError::Usage(
                    "either --model or --config must be provided".into(),
                ));
            }
            SimConfig::default()
        }
    };
    if let Some(m) = args.model {
        cfg.model = m;
    }
    if let Some(v) = args.agents {
        cfg.n_agents = v;
    }
    if let Some(v) = args.steps {
        cfg.n_steps = v;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.mu {
        cfg.mu = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.beta {
        cfg.beta = v;
    }
    if let Some(v) = args.radius {
        cfg.radius = v;
    }
    if let Some(v) = args.speed {
        cfg.speed = v;
    }
    if let Some(v) = args.box_size {
        cfg.box_size = v;
    }
    if let Some(v) = args.freq_f {
        cfg.freq_f = v;
    }
    if args.noise {
        cfg.measurement_noise = true;
    }
    let matrix = simulate(&cfg)?;
    io::write_trajectory_csv(&matrix, create(&args.output)?, false)?;
    write_sidecar(&args.output, &cfg)?;
    Ok(())
}

fn cmd_ca(args: CaArgs) -> Result<(), CliError> {
    let mut cfg: CAConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => CAConfig::default(),
    };
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.cells {
        cfg.n_cells = v;
    }
    if let Some(v) = args.steps {
        cfg.n_steps = v;
    }
    if let Some(v) = args.states {
        cfg.states = v;
    }
    if let Some(v) = args.neighbors {
        cfg.neighbors = v;
    }
    if args.anisotropic {
        cfg.isotropic = false;
    }
    if let Some(v) = args.dead_probability {
        cfg.dead_probability = v;
    }
    if let Some(seed) = args.seed {
        cfg.rule_seed = derive_seed(seed, &[0]);
        cfg.world_seed = derive_seed(seed, &[1]);
    }
    if let Some(v) = args.rule_seed {
        cfg.rule_seed = v;
    }
    if let Some(v) = args.world_seed {
        cfg.world_seed = v;
    }
    let trace = lambda_ca::run(&cfg)?;
    io::write_grid_csv(&trace, create(&args.output)?)?;
    if let Some(pgm) = &args.pgm {
        io::write_grid_pgm(&trace, create(pgm)?)?;
    }
    write_sidecar(&args.output, &cfg)?;
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let matrix = io::read_trajectory_csv_path(&args.input)?;
    let pre = preprocess(&matrix, args.variance_floor)?;
    let curve = SingularCurve::from_matrix(&pre.values)?;
    if let Some(path) = &args.curve {
        io::write_curve_csv(&curve, create(path)?)?;
    }
    let report = metrics::report_from_curve(&curve)?;
    let json = io::metrics_json(&report);
    match &args.output {
        Some(path) => writeln!(create(path)?, "{json}")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn summary_path(output: &Path) -> PathBuf {
    output.with_extension("summary.csv")
}

fn cmd_ensemble(args: EnsembleArgs) -> Result<(), CliError> {
    let mut spec: EnsembleSpec = match &args.config {
        Some(path) => load_json(path)?,
        None => EnsembleSpec::paper_default(0),
    };
    if args.paper_defaults {
        spec = EnsembleSpec::paper_default(spec.base_seed);
    }
    if let Some(models) = &args.models {
        spec.models = models
            .split(',')
            .map(|s| ModelSpec::parse(s.trim()).map_err(|e| CliError::Usage(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
    }
    if let Some(v) = args.trials {
        spec.trials_per_model = v;
    }
    if let Some(v) = args.base_seed {
        spec.base_seed = v;
    }
    if let Some(v) = args.agents {
        spec.sim_defaults.n_agents = v;
    }
    if let Some(v) = args.steps {
        spec.sim_defaults.n_steps = v;
    }
    if let Some(v) = args.mu {
        spec.sim_defaults.mu = v;
    }
    if spec.models.is_empty() || spec.trials_per_model == 0 {
        return Err(CliError::Usage(
            "ensemble needs at least one model and one trial".into(),
        ));
    }

    let records = match std::env::var("SKIORDER_THREADS") {
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                CliError::Runtime(format!("SKIORDER_THREADS='{raw}' is not a thread count"))
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            pool.install(|| run_ensemble(&spec))
        }
        Err(_) => run_ensemble(&spec),
    };
    for r in &records {
        if let Err(msg) = &r.outcome {
            eprintln!("trial {} of {} failed: {msg}", r.trial, r.model.label());
        }
    }
    io::write_ensemble_csv(&records, create(&args.output)?)?;
    io::write_summary_csv(&records, create(&summary_path(&args.output))?)?;
    write_sidecar(&args.output, &spec)?;
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let b = metrics::noise_bounds(args.rows, args.cols)?;
    println!(
        "{{\"kappa\":{},\"bound_lower\":{},\"bound_upper\":{}}}",
        io::fmt_f64(b.kappa),
        io::fmt_f64(b.lower),
        io::fmt_f64(b.upper)
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Ca(args) => cmd_ca(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Ensemble(args) => cmd_ensemble(args),
        Command::Bounds(args) => cmd_bounds(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
