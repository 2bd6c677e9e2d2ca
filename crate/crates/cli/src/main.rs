use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use colorgame::campaign::{ExperimentSpec, GraphSource, KRule};
use colorgame::config::ConfigFile;
use colorgame::edgelist::write_edge_list;
use colorgame::stats::round_sig4;
use colorgame::sweep::{scaling_sweep, sweep_csv, SweepSpec};
use colorgame::verify::{verify, VerifyLevel, VerifyOptions};
use colorgame::{run_campaign, Error};
use colorgame_core::{
    frugal_bounds, greedy_bound, greedy_constant, max_expectation_bound, mu, Fault, GraphKind,
    Retention, Strategy,
};
use serde_json::json;

/// Simulate and verify the distributed network coloring game.
#[derive(Parser, Debug)]
#[command(name = "colorgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo campaign on one graph.
    Run(RunArgs),
    /// Mean convergence time across graph sizes.
    Sweep(SweepArgs),
    /// Exact and statistical checks; exits 1 on any failure.
    Verify(VerifyArgs),
    /// Print the analytic bounds for a graph size as JSON.
    Bounds(BoundsArgs),
    /// Write a generated graph as an edge list.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge-list file; overrides --family.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// complete, cycle, path, star or erdos_renyi.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability for erdos_renyi.
    #[arg(long)]
    p: Option<f64>,
    /// Seed for erdos_renyi; defaults to --seed.
    #[arg(long)]
    graph_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Palette size; shorthand for --k-rule <number>.
    #[arg(long)]
    k: Option<usize>,
    /// delta+1, delta+2 or a number. Default: the strategy's minimum.
    #[arg(long)]
    k_rule: Option<String>,
    /// greedy or frugal.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Allow a palette below the strategy's bound.
    #[arg(long)]
    allow_illegal_k: bool,
    /// counts or full.
    #[arg(long)]
    retention: Option<String>,
    /// Output directory for trials.csv, summary.json and rounds.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// key = value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated graph sizes.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    ns: Vec<usize>,
    #[arg(long, default_value = "erdos_renyi")]
    family: String,
    /// Expected degree for erdos_renyi (p = c / n).
    #[arg(long, default_value_t = 8.0)]
    avg_degree: f64,
    #[arg(long, default_value = "frugal")]
    strategy: String,
    #[arg(long)]
    k_rule: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = colorgame_core::DEFAULT_MAX_ROUNDS)]
    max_rounds: u64,
    #[arg(long)]
    jobs: Option<usize>,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// fast or full.
    #[arg(long, default_value = "fast")]
    level: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Break the engine's own-color rule to confirm the checks notice.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
    /// Failure probability for the Greedy bound.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes to stdout, treating a closed pipe as a normal end of output.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: writing output: {e}");
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, Error> {
    s.parse()
        .map_err(|_| usage(format!("--{what}: invalid value `{s}`")))
}

fn parse_retention(s: &str) -> Result<Retention, Error> {
    match s {
        "full" => Ok(Retention::Full),
        "counts" => Ok(Retention::Counts),
        _ => Err(usage(format!(
            "--retention: unknown value `{s}` (counts or full)"
        ))),
    }
}

fn graph_source(args: &GraphArgs, cfg: &ConfigFile) -> Result<GraphSource, Error> {
    if let Some(path) = args.graph.clone().or(cfg.get::<PathBuf>("graph")?) {
        return Ok(GraphSource::File(path));
    }
    let family = args
        .family
        .clone()
        .or(cfg.raw("family").map(String::from))
        .ok_or_else(|| usage("either --graph or --family is required"))?;
    let kind: GraphKind = parse("family", &family)?;
    let n = args
        .n
        .or(cfg.get("n")?)
        .ok_or_else(|| usage("--n is required with --family"))?;
    Ok(GraphSource::Generated {
        kind,
        n,
        p: args.p.or(cfg.get("p")?),
        seed: args.graph_seed.or(cfg.get("graph_seed")?),
    })
}

fn cmd_run(args: RunArgs) -> Result<bool, Error> {
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let strategy: Strategy = match args
        .strategy
        .clone()
        .or(cfg.raw("strategy").map(String::from))
    {
        Some(s) => parse("strategy", &s)?,
        None => Strategy::Frugal,
    };
    let mut spec = ExperimentSpec::new(graph_source(&args.graph, &cfg)?, strategy);
    if let Some(k) = args.k {
        spec.k_rule = KRule::Explicit(k);
    } else if let Some(rule) = &args.k_rule {
        spec.k_rule = parse("k-rule", rule)?;
    } else if let Some(k) = cfg.get::<usize>("k")? {
        spec.k_rule = KRule::Explicit(k);
    } else if let Some(rule) = cfg.raw("k_rule") {
        spec.k_rule = parse("k-rule", rule)?;
    }
    spec.trials = args.trials.or(cfg.get("trials")?).unwrap_or(spec.trials);
    spec.base_seed = args.seed.or(cfg.get("seed")?).unwrap_or(0);
    spec.max_rounds = args
        .max_rounds
        .or(cfg.get("max_rounds")?)
        .unwrap_or(spec.max_rounds);
    spec.allow_illegal_k = args.allow_illegal_k || cfg.get("allow_illegal_k")?.unwrap_or(false);
    if let Some(r) = args
        .retention
        .clone()
        .or(cfg.raw("retention").map(String::from))
    {
        spec.retention = parse_retention(&r)?;
    }
    spec.out = args.out.clone().or(cfg.get("out")?);
    let jobs = args.jobs.or(cfg.get("jobs")?);

    let campaign = run_campaign(&spec, jobs)?;
    if let Some(dir) = &spec.out {
        campaign.write_to(dir)?;
    }
    let s = &campaign.summary;
    eprintln!(
        "n={} delta={} k={} {}: {}/{} converged, mean tau {}, timeouts {}, {:.2}s",
        s.n,
        s.delta,
        s.k,
        s.strategy,
        s.converged,
        s.trials,
        s.mean_tau.map_or("-".into(), |m| round_sig4(m).to_string()),
        s.timeouts,
        s.wall_time_s
    );
    emit(&(campaign.summary_json() + "\n"));
    Ok(true)
}

fn cmd_sweep(args: SweepArgs) -> Result<bool, Error> {
    let strategy: Strategy = parse("strategy", &args.strategy)?;
    let mut spec = SweepSpec::new(args.ns);
    spec.family = parse("family", &args.family)?;
    spec.avg_degree = args.avg_degree;
    spec.strategy = strategy;
    spec.k_rule = match &args.k_rule {
        Some(r) => parse("k-rule", r)?,
        None => KRule::minimal(strategy),
    };
    spec.trials = args.trials;
    spec.base_seed = args.seed;
    spec.max_rounds = args.max_rounds;
    let rows = scaling_sweep(&spec, args.jobs)?;
    let csv = sweep_csv(&rows)?;
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => std::io::stdout().write_all(&csv).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        })?,
    }
    Ok(true)
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, Error> {
    let level: VerifyLevel = parse("level", &args.level)?;
    let opts = VerifyOptions {
        level,
        seed: args.seed,
        fault: args.inject_fault.then_some(Fault::InvertOwnColorRule),
        jobs: args.jobs,
    };
    let report = verify(&opts)?;
    for c in &report.checks {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => emit(&(text + "\n")),
    }
    Ok(report.passed)
}

fn cmd_bounds(args: BoundsArgs) -> Result<bool, Error> {
    let b = frugal_bounds(args.n)?;
    let m = max_expectation_bound(args.n, b.mu)?;
    let out = json!({
        "n": b.n,
        "mu": b.mu,
        "e_t_bound": b.e_t_bound,
        "var_t_bound": b.var_t_bound,
        "max_expectation": { "a_n": m.a_n, "bound": m.bound },
        "greedy_constant": greedy_constant(),
        "delta": args.delta,
        "greedy_bound": greedy_bound(args.n, args.delta)?,
    });
    eprintln!("mu = {:.6}", mu());
    emit(&(serde_json::to_string_pretty(&out).expect("bounds serialize") + "\n"));
    Ok(true)
}

fn cmd_gen(args: GenArgs) -> Result<bool, Error> {
    let src = graph_source(&args.graph, &ConfigFile::default())?;
    let (g, _) = src.resolve(args.seed)?;
    let text = write_edge_list(&g);
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => emit(&text),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
