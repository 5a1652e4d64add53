mod experiment;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tnsketch::apps::{relations_to_network, triangles_to_network, EdgeList, JoinQuery};
use tnsketch::estimators::{estimate, EstimateReport, EstimatorConfig, Method, SketchSize, DEFAULT_SEED};
use tnsketch::network::read_network;
use tnsketch::oracle::{contract_exact, join_size_nested_loop, triangle_count_exact, OracleBudget, DEFAULT_BUDGET};
use tnsketch::{Error, TensorNetwork};

#[derive(Parser)]
#[command(name = "tnsketch", version, about = "Sketch-based tensor network contraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contract a tensor network given as JSON.
    Contract {
        network: PathBuf,
        #[command(flatten)]
        est: EstimateArgs,
    },
    /// Estimate the size of an equi-join over CSV relations.
    Joinsize {
        /// JSON join spec listing relations and join predicates.
        spec: PathBuf,
        #[command(flatten)]
        est: EstimateArgs,
    },
    /// Estimate the directed triangle count tr(A^3) of a graph.
    Triangles {
        /// Edge list: node count on the first line, then `u v` per line.
        edges: PathBuf,
        #[command(flatten)]
        est: EstimateArgs,
    },
    /// Emit Monte-Carlo variance rows as JSON lines.
    Experiment(experiment::ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    General,
    Acyclic,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::General => Method::General,
            MethodArg::Acyclic => Method::Acyclic,
            MethodArg::Auto => Method::Auto,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Sketch size, rounded up to a power of two [default: 256].
    #[arg(long)]
    m: Option<usize>,
    /// Repetitions for the median [default: 5].
    #[arg(long)]
    reps: Option<usize>,
    /// Target relative error; derives m and reps together with --delta.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Target failure probability.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, env = "TNC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Root tensor for the acyclic estimator (1-based).
    #[arg(long)]
    root: Option<usize>,
    /// Add exact reference values to the report when they fit the budget.
    #[arg(long)]
    with_oracle: bool,
    /// Work limit for exact enumeration.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads for repetitions; 1 runs serially.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl EstimateArgs {
    fn config(&self) -> Result<EstimatorConfig, Error> {
        let size = match (self.m, self.reps, self.epsilon, self.delta) {
            (None, None, Some(epsilon), Some(delta)) => SketchSize::Target { epsilon, delta },
            (m, reps, None, None) => SketchSize::Fixed { m: m.unwrap_or(256), reps: reps.unwrap_or(5) },
            (_, _, None, Some(_)) | (_, _, Some(_), None) => {
                return Err(Error::Config("--epsilon and --delta go together".into()))
            }
            _ => return Err(Error::Config("give either --m/--reps or --epsilon/--delta, not both".into())),
        };
        let root = match self.root {
            Some(0) => return Err(Error::Config("--root is 1-based".into())),
            r => r.map(|r| r - 1),
        };
        set_threads(self.parallel)?;
        Ok(EstimatorConfig {
            method: self.method.into(),
            size,
            seed: self.seed,
            root,
            budget: OracleBudget(self.budget),
            parallel: self.parallel > 1,
        })
    }
}

fn set_threads(n: usize) -> Result<(), Error> {
    if n == 0 {
        return Err(Error::Config("--parallel needs at least one thread".into()));
    }
    // A second call fails when the pool already exists; the first size wins.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::Csv(e) if e.is_io_error() => 3,
        Error::BudgetExceeded { .. } => 4,
        _ => 2,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
        Error::Json(_) => "json",
        Error::BudgetExceeded { .. } => "budget",
        Error::Validation(_) => "validation",
        Error::Cyclic { .. } => "cyclic",
        Error::PartialNetwork(_) => "partial",
        Error::Config(_) => "config",
        Error::Parse(_) => "parse",
        _ => "invalid",
    }
}

fn diagnostic(err: &Error) -> serde_json::Value {
    let mut v = json!({ "error": error_kind(err), "message": err.to_string(), "exit_code": exit_code(err) });
    match err {
        Error::Validation(diags) => v["diagnostics"] = json!(diags.iter().map(ToString::to_string).collect::<Vec<_>>()),
        Error::Cyclic { cycle } => v["cycle"] = json!(cycle),
        Error::BudgetExceeded { budget } => v["budget"] = json!(budget),
        _ => {}
    }
    v
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_report(report: &EstimateReport, output: Option<&Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_output(output, &text)
}

/// Adds an exact value under `name`, or a note when it does not fit the budget.
fn add_oracle(report: &mut EstimateReport, name: &str, value: Result<f64, Error>) -> Result<(), Error> {
    match value {
        Ok(v) => {
            report.oracles.insert(name.into(), v);
            Ok(())
        }
        Err(Error::BudgetExceeded { budget }) => {
            report.notes.push(format!("{name} skipped: exceeds budget {budget}"));
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn exact_scalar(net: &TensorNetwork, budget: u64) -> Result<f64, Error> {
    Ok(contract_exact(net, OracleBudget(budget))?.scalar_value())
}

fn cmd_contract(path: &Path, args: &EstimateArgs) -> Result<(), Error> {
    let config = args.config()?;
    let net = read_network(path)?;
    let mut report = estimate(&net, &config)?;
    if args.with_oracle {
        if net.is_full() {
            add_oracle(&mut report, "contract_exact", exact_scalar(&net, args.budget))?;
        } else {
            report.notes.push("oracle for partial networks: rerun with --method exact".into());
        }
    }
    emit_report(&report, args.output.as_deref())
}

fn cmd_joinsize(path: &Path, args: &EstimateArgs) -> Result<(), Error> {
    let config = args.config()?;
    let query = JoinQuery::read_spec(path)?;
    let (net, _) = relations_to_network(&query)?;
    let mut report = estimate(&net, &config)?;
    if args.with_oracle {
        let tuples: u64 = query.relations().iter().map(|r| r.rows.len() as u64).product();
        let nested = if tuples <= args.budget {
            Ok(join_size_nested_loop(&query) as f64)
        } else {
            Err(Error::BudgetExceeded { budget: args.budget })
        };
        add_oracle(&mut report, "nested_loop", nested)?;
        add_oracle(&mut report, "contract_exact", exact_scalar(&net, args.budget))?;
        if let (Some(a), Some(b)) = (report.oracles.get("nested_loop"), report.oracles.get("contract_exact")) {
            let verdict = if a == b { "agree" } else { "DISAGREE" };
            report.notes.push(format!("oracles {verdict}"));
        }
    }
    emit_report(&report, args.output.as_deref())
}

fn cmd_triangles(path: &Path, args: &EstimateArgs) -> Result<(), Error> {
    let config = args.config()?;
    let graph = EdgeList::read(path)?;
    let net = triangles_to_network(&graph);
    let mut report = estimate(&net, &config)?;
    if args.with_oracle {
        add_oracle(&mut report, "trace_a3", triangle_count_exact(&graph.adjacency()))?;
    }
    emit_report(&report, args.output.as_deref())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Contract { network, est } => cmd_contract(&network, &est),
        Command::Joinsize { spec, est } => cmd_joinsize(&spec, &est),
        Command::Triangles { edges, est } => cmd_triangles(&edges, &est),
        Command::Experiment(args) => experiment::run(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", diagnostic(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
