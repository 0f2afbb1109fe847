//! `treesched`: generate, schedule, benchmark, and inspect tree-shaped task
//! graphs under a shared-memory model.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for bad input (missing or
//! malformed files, invalid generator parameters, oracle limits), 3 for
//! internal errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use treesched::oracle::OracleConfig;
use treesched::{
    bench_corpus, bounds, check_schedule, confirm_feasible, gen_3partition, gen_comb, gen_eta_mu,
    gen_fork, gen_inapprox, gen_inner_first_adversary, gen_random, pareto_oracle, parse_tree,
    serialize_tree, Heuristic, TaskTree,
};

#[derive(Parser)]
#[command(
    name = "treesched",
    version,
    about = "Memory-aware schedulers for tree-shaped task graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tree file from a structured family or at random
    Gen(GenArgs),
    /// Schedule one tree with one heuristic and print the metrics
    Run(RunArgs),
    /// Benchmark every tree in a directory into a CSV report
    Bench(BenchArgs),
    /// Exhaustive makespan/memory trade-off for small unit-weight trees
    Oracle(OracleArgs),
    /// Memory profile of one scheduled tree as time,memory CSV
    Trace(TraceArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: Family,
    /// Write to this file instead of standard output
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Family {
    /// One root over p*k unit leaves
    Fork {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
    },
    /// Subtree family whose splits all overshoot the sequential peak
    Inapprox {
        #[arg(long)]
        subtrees: usize,
        #[arg(long)]
        delta: usize,
    },
    /// Joins whose eager inner-first processing hoards leaf outputs
    InnerAdversary {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
    },
    /// Spine hanging one chain per level; sequential peak stays at 3
    Comb {
        #[arg(long)]
        chains: usize,
        #[arg(long)]
        depth: usize,
    },
    /// Gather forest encoding a numeric instance; bounds go in a comment
    #[command(name = "3partition")]
    ThreePartition {
        /// Comma-separated element values
        #[arg(long, value_delimiter = ',', required = true)]
        elements: Vec<u64>,
        /// Target triple sum
        #[arg(long)]
        b: u64,
    },
    /// Random attachment shape with uniform weights
    Random {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_children: usize,
        /// Weight range as lo:hi
        #[arg(long, default_value = "0.5:5", value_parser = parse_range)]
        weights: (f64, f64),
    },
    /// Random shape with assembly-style weights (fronts grow with the subtree)
    EtaMu {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_children: usize,
        /// Front factor range as lo:hi; a node's front is factor * sqrt(subtree size)
        #[arg(long, default_value = "1:3", value_parser = parse_range)]
        eta: (f64, f64),
        /// Band fraction range as lo:hi; a node's band is fraction * front
        #[arg(long, default_value = "0.2:0.6", value_parser = parse_range)]
        band: (f64, f64),
    },
}

#[derive(Args)]
struct RunArgs {
    /// Tree file
    tree: PathBuf,
    /// Scheduling heuristic
    #[arg(long, value_parser = parse_heuristic)]
    heuristic: Heuristic,
    /// Processor count
    #[arg(short, long, value_parser = positive)]
    p: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of tree files
    dir: PathBuf,
    /// CSV output file (standard output when omitted)
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, value_parser = positive)]
    jobs: Option<usize>,
    /// Processor counts to schedule for
    #[arg(long, value_delimiter = ',', value_parser = positive, default_value = "2,4,8,16,32")]
    procs: Vec<usize>,
    /// Heuristics to run
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_heuristic,
        default_value = "par-subtrees,par-subtrees-optim,par-inner-first,par-deepest-first"
    )]
    heuristics: Vec<Heuristic>,
}

#[derive(Args)]
struct OracleArgs {
    /// Tree file (unit weights only)
    tree: PathBuf,
    /// Processor count
    #[arg(short, long, value_parser = positive)]
    p: usize,
    /// Exhaustive-search node limit
    #[arg(long, default_value_t = 14)]
    limit: usize,
    /// Only consider schedules finishing by this time
    #[arg(long)]
    max_makespan: Option<f64>,
    /// Only consider schedules whose peak memory stays within this
    #[arg(long)]
    max_memory: Option<f64>,
}

#[derive(Args)]
struct TraceArgs {
    /// Tree file
    tree: PathBuf,
    /// Scheduling heuristic
    #[arg(long, value_parser = parse_heuristic)]
    heuristic: Heuristic,
    /// Processor count
    #[arg(short, long, value_parser = positive)]
    p: usize,
    /// Write to this file instead of standard output
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn parse_heuristic(s: &str) -> Result<Heuristic, String> {
    Heuristic::parse(s).ok_or_else(|| {
        format!(
            "unknown heuristic '{s}' (expected par-subtrees, par-subtrees-optim, \
             par-inner-first, par-deepest-first, or seq-postorder)"
        )
    })
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("'{s}' is not a lo:hi range"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad number '{lo}'"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad number '{hi}'"))?;
    Ok((lo, hi))
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("'{s}' is not a positive integer")),
    }
}

/// A failure carrying its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type AppResult<T> = Result<T, Failure>;

fn input<E: Into<anyhow::Error>>(error: E) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn internal<E: Into<anyhow::Error>>(error: E) -> Failure {
    Failure {
        code: 3,
        error: error.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here too; keep their exit code 0.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Trace(args) => cmd_trace(args),
    }
}

fn load_tree(path: &Path) -> AppResult<TaskTree> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)?;
    parse_tree(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(input)
}

fn write_output(path: Option<&Path>, content: &str) -> AppResult<()> {
    match path {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(input),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Integral values print bare; everything else uses the shortest f64 form.
fn plain(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 9e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn cmd_gen(args: GenArgs) -> AppResult<()> {
    let text = match args.family {
        Family::Fork { p, k } => serialize_tree(&gen_fork(p, k).map_err(input)?),
        Family::Inapprox { subtrees, delta } => {
            serialize_tree(&gen_inapprox(subtrees, delta).map_err(input)?)
        }
        Family::InnerAdversary { p, k } => {
            serialize_tree(&gen_inner_first_adversary(p, k).map_err(input)?)
        }
        Family::Comb { chains, depth } => serialize_tree(&gen_comb(chains, depth).map_err(input)?),
        Family::ThreePartition { elements, b } => {
            let (tree, bounds) = gen_3partition(&elements, b).map_err(input)?;
            format!(
                "# p={} b_mem={} b_cmax={}\n{}",
                bounds.p,
                bounds.mem_bound,
                bounds.cmax_bound,
                serialize_tree(&tree)
            )
        }
        Family::Random {
            nodes,
            seed,
            max_children,
            weights,
        } => serialize_tree(&gen_random(nodes, seed, max_children, weights).map_err(input)?),
        Family::EtaMu {
            nodes,
            seed,
            max_children,
            eta,
            band,
        } => serialize_tree(&gen_eta_mu(nodes, seed, max_children, eta, band).map_err(input)?),
    };
    write_output(args.out.as_deref(), &text)
}

fn cmd_run(args: RunArgs) -> AppResult<()> {
    let tree = load_tree(&args.tree)?;
    let sched = args.heuristic.schedule(&tree, args.p);
    let report = check_schedule(&tree, &sched);
    if !report.feasible {
        return Err(internal(anyhow!(
            "{} built an infeasible schedule: {}",
            args.heuristic.label(),
            report.violation.unwrap_or_default()
        )));
    }
    let b = bounds(&tree, args.p);
    println!("tree: {}", args.tree.display());
    println!("heuristic: {}", args.heuristic.label());
    println!("p: {}", args.p);
    println!("makespan: {}", plain(report.makespan));
    println!("peak_memory: {}", plain(report.peak_memory));
    println!("lb_makespan: {}", plain(b.lb_makespan));
    println!("lb_memory: {}", plain(b.lb_memory));
    println!("norm_makespan: {}", plain(report.makespan / b.lb_makespan));
    println!("norm_memory: {}", plain(report.peak_memory / b.lb_memory));
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> AppResult<()> {
    let report = bench_corpus(&args.dir, &args.heuristics, &args.procs, args.jobs)
        .with_context(|| format!("benchmarking {}", args.dir.display()))
        .map_err(input)?;
    write_output(args.out.as_deref(), &report.to_csv())?;
    if !report.skipped.is_empty() {
        match &args.out {
            Some(out) => {
                let sidecar = out.with_extension("skipped");
                let mut log = String::new();
                for (file, reason) in &report.skipped {
                    let _ = writeln!(log, "{file},{reason}");
                }
                fs::write(&sidecar, log)
                    .with_context(|| format!("writing {}", sidecar.display()))
                    .map_err(input)?;
                eprintln!(
                    "skipped {} file(s); reasons in {}",
                    report.skipped.len(),
                    sidecar.display()
                );
            }
            None => {
                for (file, reason) in &report.skipped {
                    eprintln!("skipped {file}: {reason}");
                }
            }
        }
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> AppResult<()> {
    let tree = load_tree(&args.tree)?;
    let config = OracleConfig {
        node_limit: args.limit,
        max_makespan: args.max_makespan,
        max_memory: args.max_memory,
    };
    if config.max_makespan.is_some() || config.max_memory.is_some() {
        let ok = confirm_feasible(&tree, args.p, &config).map_err(input)?;
        println!("feasible: {ok}");
        return Ok(());
    }
    let front = pareto_oracle(&tree, args.p, &config).map_err(input)?;
    let mut out = String::from("makespan,memory\n");
    for &(c, m) in &front.points {
        let _ = writeln!(out, "{},{}", plain(c), plain(m));
    }
    for h in Heuristic::PARALLEL {
        let sched = h.schedule(&tree, args.p);
        let report = check_schedule(&tree, &sched);
        if !report.feasible {
            return Err(internal(anyhow!(
                "{} built an infeasible schedule: {}",
                h.label(),
                report.violation.unwrap_or_default()
            )));
        }
        let status = if front
            .points
            .contains(&(report.makespan, report.peak_memory))
        {
            "on-front"
        } else {
            "dominated"
        };
        let _ = writeln!(
            out,
            "# {}: makespan={} memory={} {}",
            h.label(),
            plain(report.makespan),
            plain(report.peak_memory),
            status
        );
    }
    print!("{out}");
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> AppResult<()> {
    let tree = load_tree(&args.tree)?;
    let sched = args.heuristic.schedule(&tree, args.p);
    let report = check_schedule(&tree, &sched);
    if !report.feasible {
        return Err(internal(anyhow!(
            "{} built an infeasible schedule: {}",
            args.heuristic.label(),
            report.violation.unwrap_or_default()
        )));
    }
    let mut out = String::from("time,memory\n");
    for (time, level) in report.trace {
        let _ = writeln!(out, "{},{}", plain(time), plain(level));
    }
    write_output(args.out.as_deref(), &out)
}
