//! `csma <subcommand> [flags]`
//!
//! Every subcommand also accepts `--config <file.json>`: a JSON object whose
//! keys are long flag names. Values from the file are applied first and
//! explicit flags override them.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 computational limit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use pcsma::chain::{build_chain_with, ChainOptions, DEFAULT_MAX_STATES};
use pcsma::experiments::{
    cmd_optimize, cmd_region, cmd_star_sweep, cmd_table1, cmd_throughput, Aggregate, Method,
    RegionSettings, SimSettings, StarSettings, Table1Settings,
};
use pcsma::optimizer::{GradientMode, OptimizerConfig, StepRule, Utility};
use pcsma::report::{gnuplot_script, ExperimentReport};
use pcsma::simulator::{bit_streams, trace, SimConfig};
use pcsma::{ConflictGraph, Error, NetworkConfig, Result, Topology};

#[derive(Parser)]
#[command(name = "csma", version, about = "Saturation throughput of p-persistent CSMA on conflict graphs")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-node throughput by one or more methods.
    Throughput(ThroughputArgs),
    /// Erdős–Rényi sweep over edge probabilities.
    Table1(Table1Args),
    /// Star topology swept over packet duration.
    StarSweep(StarArgs),
    /// Throughput-region boundary by weight sweeps.
    Region(RegionArgs),
    /// Weighted utility maximization.
    Optimize(OptimizeArgs),
    /// Slot-by-slot simulation log as JSON lines.
    Trace(TraceArgs),
    /// Dump the enumerated Markov chain as JSON.
    Chain(ChainArgs),
    /// Write a canonical or random conflict graph.
    Graph(GraphArgs),
}

#[derive(Args)]
struct Output {
    /// Write the report as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the report (with metadata) as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct NetworkArgs {
    /// Graph file (JSON or edge list).
    #[arg(long)]
    graph: PathBuf,
    /// Access probabilities, one per node or a single shared value.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    /// Packet duration in slots.
    #[arg(long = "T", default_value_t = 2)]
    t: usize,
}

#[derive(Args)]
struct ThroughputArgs {
    #[command(flatten)]
    net: NetworkArgs,
    /// exact, product2, renewal, renewal-ext, sim
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_value = "exact")]
    method: Vec<String>,
    /// Idle slot duration (renewal formulas only; the exact engine needs 1).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Edge probabilities.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    q: Vec<f64>,
    /// Uniform access probability.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long = "T", default_value_t = 2)]
    t: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    /// node0 or mean
    #[arg(long, default_value = "node0")]
    aggregate: String,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct StarArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_value = "0.3")]
    p: Vec<f64>,
    #[arg(long = "T", action = ArgAction::Set, value_delimiter = ',', default_value = "1,2,4,8,16")]
    t: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
    #[command(flatten)]
    output: Output,
    /// Also write a gnuplot script for the CSV given with --out.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum UtilityArg {
    Log,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Fixed,
    Backtracking,
}

#[derive(Clone, Copy, ValueEnum)]
enum GradArg {
    Fd,
    Analytic,
}

#[derive(Args)]
struct OptimizerArgs {
    #[arg(long, value_enum, default_value = "log")]
    utility: UtilityArg,
    /// Lower guard inside the logarithm.
    #[arg(long, default_value_t = 1e-12)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    eta0: f64,
    #[arg(long, value_enum, default_value = "backtracking")]
    step_rule: StepArg,
    #[arg(long, value_enum, default_value = "fd")]
    grad: GradArg,
    #[arg(long, default_value_t = 1e-5)]
    fd_h: f64,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    lo: f64,
    #[arg(long, default_value_t = 1.0 - 1e-4)]
    hi: f64,
}

impl OptimizerArgs {
    fn config(&self, alpha: Vec<f64>) -> OptimizerConfig {
        OptimizerConfig {
            alpha,
            utility: match self.utility {
                UtilityArg::Log => Utility::Log {
                    epsilon: self.epsilon,
                },
                UtilityArg::Linear => Utility::Linear,
            },
            eta0: self.eta0,
            step_rule: match self.step_rule {
                StepArg::Fixed => StepRule::Fixed,
                StepArg::Backtracking => StepRule::Backtracking,
            },
            gradient: match self.grad {
                GradArg::Fd => GradientMode::FiniteDifference,
                GradArg::Analytic => GradientMode::AnalyticPath3,
            },
            fd_h: self.fd_h,
            max_iters: self.max_iters,
            tol: self.tol,
            lo: self.lo,
            hi: self.hi,
            pinned: Vec::new(),
        }
    }
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long = "T", action = ArgAction::Set, value_delimiter = ',', default_value = "2,4")]
    t: Vec<usize>,
    /// Nodes held at p = 0.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',')]
    pin: Vec<usize>,
    /// The two nodes whose weights are traded off.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', num_args = 1.., default_value = "1,2")]
    pair: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Start point, one value per node or one shared value.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_value = "0.5")]
    p0: Vec<f64>,
    #[command(flatten)]
    opt: OptimizerArgs,
    #[command(flatten)]
    output: Output,
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long = "T", default_value_t = 2)]
    t: usize,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_value = "0.5")]
    p0: Vec<f64>,
    #[command(flatten)]
    opt: OptimizerArgs,
    /// Write the per-iteration trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long, default_value_t = 20)]
    slots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Print per-node bit streams instead of JSON lines.
    #[arg(long)]
    bits: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    /// star, complete, path, cycle or er
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    /// Edge probability for `er`.
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the edge-list format instead of JSON.
    #[arg(long)]
    edge_list: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_network(net: &NetworkArgs) -> Result<NetworkConfig> {
    let graph = ConflictGraph::parse(&fs::read_to_string(&net.graph)?)?;
    let p = expand(&net.p, graph.n())?;
    NetworkConfig::new(graph, p, net.t)
}

fn expand(p: &[f64], n: usize) -> Result<Vec<f64>> {
    if p.len() == 1 {
        Ok(vec![p[0]; n])
    } else if p.len() == n {
        Ok(p.to_vec())
    } else {
        Err(Error::InvalidConfig(format!("{} values given for {n} nodes", p.len())))
    }
}

fn emit(report: &ExperimentReport, output: &Output) -> Result<()> {
    print!("{}", report.to_table());
    if let Some(path) = &output.out {
        fs::write(path, report.to_csv()?)?;
    }
    if let Some(path) = &output.json {
        fs::write(path, serde_json::to_string_pretty(&report.to_json())?)?;
    }
    Ok(())
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_gnuplot(
    path: Option<&PathBuf>,
    output: &Output,
    report: &ExperimentReport,
    x: &str,
    ys: &[&str],
    title: &str,
) -> Result<()> {
    if let Some(path) = path {
        let csv = output
            .out
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("--gnuplot needs --out for the data file".into()))?;
        fs::write(path, gnuplot_script(&csv.to_string_lossy(), report, x, ys, title))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Throughput(a) => {
            let graph = ConflictGraph::parse(&fs::read_to_string(&a.net.graph)?)?;
            let p = expand(&a.net.p, graph.n())?;
            let cfg = NetworkConfig::with_sigma(graph, p, a.net.t, a.sigma)?;
            let methods = a
                .method
                .iter()
                .map(|m| m.parse())
                .collect::<Result<Vec<Method>>>()?;
            let sim = SimSettings {
                slots: a.slots,
                seed: a.seed,
            };
            emit(&cmd_throughput(&cfg, &methods, sim, a.max_states)?, &a.output)
        }
        Command::Table1(a) => {
            let settings = Table1Settings {
                n: a.n,
                edge_probs: a.q,
                p: a.p,
                packet_slots: a.t,
                seed: a.seed,
                slots: a.slots,
                aggregate: a.aggregate.parse::<Aggregate>()?,
                max_states: a.max_states,
            };
            emit(&cmd_table1(&settings)?, &a.output)
        }
        Command::StarSweep(a) => {
            let settings = StarSettings {
                n: a.n,
                p: a.p,
                packet_slots: a.t,
                max_states: a.max_states,
            };
            let report = cmd_star_sweep(&settings)?;
            emit(&report, &a.output)?;
            write_gnuplot(
                a.gnuplot.as_ref(),
                &a.output,
                &report,
                "T",
                &["hub_exact", "hub_renewal_extended", "peripheral_exact", "peripheral_renewal_extended"],
                "Star topology: exact vs renewal",
            )
        }
        Command::Region(a) => {
            let graph = ConflictGraph::parse(&fs::read_to_string(&a.graph)?)?;
            let n = graph.n();
            if a.pair.len() != 2 {
                return Err(Error::InvalidConfig("--pair takes exactly two node ids".into()));
            }
            let mut p0 = expand(&a.p0, n)?;
            a.pin.iter().filter(|&&i| i < n).for_each(|&i| p0[i] = 0.0);
            let settings = RegionSettings {
                graph,
                packet_slots: a.t,
                pinned: a.pin,
                pair: (a.pair[0], a.pair[1]),
                steps: a.steps,
                optimizer: a.opt.config(vec![0.0; n]),
                p0,
            };
            let report = cmd_region(&settings)?;
            emit(&report, &a.output)?;
            let (x, y) = (format!("S_{}", a.pair[0]), format!("S_{}", a.pair[1]));
            write_gnuplot(a.gnuplot.as_ref(), &a.output, &report, &x, &[&y], "Throughput region boundary")
        }
        Command::Optimize(a) => {
            let graph = ConflictGraph::parse(&fs::read_to_string(&a.graph)?)?;
            let n = graph.n();
            let template = NetworkConfig::new(graph, vec![0.5; n], a.t)?;
            let opt = a.opt.config(a.alpha);
            let p0 = expand(&a.p0, n)?;
            let (report, trace) = cmd_optimize(&template, &opt, &p0)?;
            emit(&report, &a.output)?;
            let last = trace.final_iterate();
            println!(
                "J = {} after {} iterations ({})",
                pcsma::report::format_sig9(last.j),
                last.k,
                trace.reason.as_deref().unwrap_or("converged")
            );
            if let Some(path) = &a.trace {
                fs::write(path, trace.to_csv())?;
                if let Some(gp) = &a.gnuplot {
                    let trace_report = ExperimentReport::from_csv(&trace.to_csv())?;
                    let script = gnuplot_script(&path.to_string_lossy(), &trace_report, "iter", &["J"], "Utility convergence");
                    fs::write(gp, script)?;
                }
            } else if a.gnuplot.is_some() {
                return Err(Error::InvalidConfig("--gnuplot needs --trace for the data file".into()));
            }
            Ok(())
        }
        Command::Trace(a) => {
            let cfg = load_network(&a.net)?;
            let sim = SimConfig::with_warmup(cfg, a.slots.max(1), a.seed, 0)?;
            let records = trace(&sim, a.slots)?;
            let text = if a.bits {
                bit_streams(&records)
                    .iter()
                    .enumerate()
                    .map(|(i, b)| format!("{i}: {b}\n"))
                    .collect::<String>()
            } else {
                records.iter().map(|r| r.to_json_line() + "\n").collect()
            };
            write_or_print(a.out.as_deref(), &text)
        }
        Command::Chain(a) => {
            let cfg = load_network(&a.net)?;
            let chain = build_chain_with(&cfg, ChainOptions { max_states: a.max_states })?;
            let text = serde_json::to_string(&chain.to_debug_json())? + "\n";
            write_or_print(a.out.as_deref(), &text)
        }
        Command::Graph(a) => {
            let g = if a.kind == "er" {
                ConflictGraph::erdos_renyi(a.n, a.q, a.seed)?
            } else {
                ConflictGraph::named(a.kind.parse::<Topology>()?, a.n)?
            };
            let text = if a.edge_list {
                g.to_edge_list()
            } else {
                g.to_json() + "\n"
            };
            write_or_print(a.out.as_deref(), &text)
        }
    }
}

/// Splices `--config <file>` values in front of the explicit flags.
fn expand_config(args: Vec<String>) -> std::result::Result<Vec<String>, String> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    if pos < 2 {
        return Err("--config must follow the subcommand".into());
    }
    let path = args.get(pos + 1).ok_or("--config needs a file path")?;
    let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    let obj = value.as_object().ok_or(format!("{path}: expected a JSON object"))?;
    let mut from_file = Vec::new();
    for (key, v) in obj {
        let flag = format!("--{key}");
        match v {
            serde_json::Value::Bool(true) => from_file.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(scalar).collect();
                from_file.extend([flag, joined.join(",")]);
            }
            other => from_file.extend([flag, scalar(other)]),
        }
    }
    let mut out = args[..2].to_vec();
    out.extend(from_file);
    out.extend(args[2..pos].iter().cloned());
    out.extend(args[pos + 2..].iter().cloned());
    Ok(out)
}

fn scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_computational_limit() { 2 } else { 1 })
        }
    }
}
