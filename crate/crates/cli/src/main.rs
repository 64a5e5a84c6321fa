use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pushcast::bounds::{azuma_bound, chernoff_bound, talagrand_bound};
use pushcast::harness::{derive_seed, emit_report, run_experiment, Density, Purpose, ReportFormat, RunConfig};
use pushcast::oracle::{exact_time_distribution, DEFAULT_TAIL_CUTOFF};
use pushcast::phases::PhaseParams;
use pushcast::typicality::audit;
use pushcast::{Error, Graph, Vertex};

const EXIT_INVALID: u8 = 1;
const EXIT_STALLED: u8 = 2;

#[derive(Parser)]
#[command(name = "pushcast", version, about = "Push broadcast on random graphs: simulation, exact laws, audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded broadcast trials and write a report.
    Simulate(SimulateArgs),
    /// Exact broadcast-time distribution of a small graph, as JSON.
    Oracle(OracleArgs),
    /// Audit one sampled G(n, p) for degree and cut concentration, as JSON.
    Typicality(TypicalityArgs),
    /// Evaluate a tail bound.
    #[command(subcommand)]
    Bounds(BoundsCommand),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct DensityArgs {
    /// Edge probability.
    #[arg(long)]
    p: Option<f64>,
    /// Density factor: p = alpha ln n / n.
    #[arg(long)]
    alpha: Option<f64>,
    /// Use the complete graph.
    #[arg(long)]
    complete: bool,
}

impl DensityArgs {
    fn density(&self) -> Density {
        match (self.p, self.alpha) {
            (Some(p), _) => Density::P(p),
            (_, Some(a)) => Density::Alpha(a),
            _ => Density::Complete,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    density: DensityArgs,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    start: Vertex,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Reuse one sampled graph for every trial.
    #[arg(long)]
    fixed_graph: bool,
    /// Include full per-trial traces in the report.
    #[arg(long)]
    record_traces: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    #[arg(long, value_enum)]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Topology {
    Complete,
    Star,
    Path,
}

#[derive(Args)]
struct OracleArgs {
    /// Edge list: first line `n m`, then one `u v` pair per line.
    #[arg(long, conflicts_with_all = ["topology", "n"], required_unless_present = "topology")]
    graph_file: Option<PathBuf>,
    /// Built-in topology on `--n` vertices; a star is centered at 0.
    #[arg(long, value_enum, requires = "n")]
    topology: Option<Topology>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    start: Vertex,
    #[arg(long, default_value_t = DEFAULT_TAIL_CUTOFF)]
    tail_cutoff: f64,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct EdgeDensityArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct TypicalityArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    density: EdgeDensityArgs,
    #[arg(long)]
    seed: u64,
    /// Sampled sets per size class.
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Two-sided Chernoff bound for a binomial with the given mean.
    Chernoff {
        #[arg(long)]
        mean: f64,
        #[arg(long)]
        x: f64,
    },
    /// Azuma–Hoeffding bound from the sum of squared differences.
    Azuma {
        #[arg(long)]
        sum_c_sq: f64,
        #[arg(long)]
        x: f64,
    },
    /// Talagrand bound around a median.
    Talagrand {
        #[arg(long)]
        median: f64,
        #[arg(long)]
        x: f64,
    },
}

enum Failure {
    Invalid(String),
    Stalled(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotBroadcastable { .. } => Failure::Stalled(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

/// Writes one line to stdout; a closed pipe (as with `| head`) is not an error.
fn emit(line: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Invalid(e.to_string())),
        _ => Ok(()),
    }
}

fn to_json(value: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Invalid(e.to_string()))
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut config = RunConfig::new(args.n, args.density.density(), args.trials, args.seed);
    config.start = args.start;
    config.epsilon = args.epsilon;
    config.fixed_graph = args.fixed_graph;
    config.record_traces = args.record_traces;
    config.parallelism = args.parallelism;
    let report = run_experiment(&config)?;
    let format = match args.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
    };
    emit_report(&report, format, &args.out)?;
    let line = match &report.aggregates {
        Some(a) => format!(
            "trials={} stalled={} mean_T={:.4} std_T={:.4} predicted_T={}",
            report.trials.len(),
            report.stalled_trials,
            a.t.mean,
            a.t.std,
            report.phases.predicted_t.map_or("n/a".into(), |p| format!("{p:.4}")),
        ),
        None => format!("trials={} stalled={}", report.trials.len(), report.stalled_trials),
    };
    emit(&line)?;
    if report.all_stalled {
        return Err(Failure::Stalled(format!("all {} trials stalled", report.trials.len())));
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<(), Failure> {
    let graph = match (&args.graph_file, args.topology, args.n) {
        (Some(path), _, _) => {
            let file = File::open(path)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            Graph::read_edge_list(BufReader::new(file))?
        }
        (None, Some(_), Some(0)) => return Err(Failure::Invalid("n must be at least 1".into())),
        (None, Some(Topology::Complete), Some(n)) => Graph::complete(n),
        (None, Some(Topology::Star), Some(n)) => Graph::star(n - 1),
        (None, Some(Topology::Path), Some(n)) => Graph::path(n),
        _ => return Err(Failure::Invalid("give --graph-file or --topology with --n".into())),
    };
    let dist = exact_time_distribution(&graph, args.start, args.tail_cutoff)?;
    emit(&to_json(&dist)?)
}

fn typicality(args: TypicalityArgs) -> Result<(), Failure> {
    let nf = args.n as f64;
    let p = match (args.density.p, args.density.alpha) {
        (Some(p), _) => p,
        (_, Some(a)) => (a * nf.ln() / nf).min(1.0),
        _ => unreachable!("clap enforces one density flag"),
    };
    let base = match args.density.alpha {
        Some(a) => PhaseParams::from_alpha(a)?,
        None => PhaseParams::effective(args.n, p)?,
    };
    let params = match args.epsilon {
        Some(eps) => PhaseParams::new(base.alpha, eps)?,
        None => base,
    };
    let graph = Graph::gnp(args.n, p, derive_seed(args.seed, 0, Purpose::Graph))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, 0, Purpose::Audit));
    let report = audit(&graph, p, params, args.samples, &mut rng)?;
    emit(&to_json(&report)?)
}

fn bounds(cmd: BoundsCommand) -> Result<(), Failure> {
    let value = match cmd {
        BoundsCommand::Chernoff { mean, x } => chernoff_bound(mean, x)?,
        BoundsCommand::Azuma { sum_c_sq, x } => azuma_bound(sum_c_sq, x)?,
        BoundsCommand::Talagrand { median, x } => talagrand_bound(median, x)?,
    };
    emit(&value.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Oracle(a) => oracle(a),
        Command::Typicality(a) => typicality(a),
        Command::Bounds(c) => bounds(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Stalled(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_STALLED)
        }
    }
}
