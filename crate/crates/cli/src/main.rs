//! `tohtn`: plan, validate and benchmark totally-ordered HTN problems.

mod bench;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status for the planning and validation commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Solved = 0,
    Unsolvable = 1,
    Timeout = 2,
    InputError = 3,
    Internal = 4,
}

#[derive(Parser, Debug)]
#[command(name = "tohtn", version, about = "SAT-guided totally-ordered HTN planner")]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every instance of a manifest under several configurations and
    /// write a score table.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
pub struct PlannerArgs {
    /// Expansion strategy.
    #[arg(long, default_value = "greedy", value_parser = ["greedy", "bfs"])]
    pub mode: String,
    /// At-most-one encoding.
    #[arg(long, default_value = "pairwise", value_parser = ["pairwise", "binary", "bimander-half", "bimander-sqrt"])]
    pub amo: String,
    /// Skip mutex inference and its clauses.
    #[arg(long)]
    pub no_mutex: bool,
    /// Exclude unreachable pending tasks through their mandatory preconditions.
    #[arg(long, value_enum, default_value = "on", require_equals = true)]
    pub mandpre_prune: Switch,
    /// Wall-clock budget in seconds, including parsing and grounding.
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
    /// Stop after this many solution queries.
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Abort grounding beyond this many instantiations of one schema.
    #[arg(long, default_value_t = 500_000)]
    pub max_instances: usize,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// HDDL domain, or a single ground problem file.
    #[arg(required = true)]
    pub domain: Option<PathBuf>,
    /// HDDL problem.
    pub problem: Option<PathBuf>,
    #[command(flatten)]
    pub planner: PlannerArgs,
    /// Also write the plan here.
    #[arg(long, value_name = "PATH")]
    pub plan: Option<PathBuf>,
    /// Write run statistics as JSON.
    #[arg(long, value_name = "PATH")]
    pub stats: Option<PathBuf>,
    /// Write the final search structure in DOT.
    #[arg(long, value_name = "PATH")]
    pub emit_dot: Option<PathBuf>,
    /// Write the final formula in DIMACS.
    #[arg(long, value_name = "PATH")]
    pub dump_cnf: Option<PathBuf>,
    /// Print task profiles and mutex groups to PATH, or to stderr when PATH is
    /// omitted or `-`.
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
    pub dump_profiles: Option<PathBuf>,
    /// Check a plan file against the problem instead of planning.
    #[arg(long, value_name = "PLANFILE")]
    pub validate_only: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::InputError as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let status = match cli.command {
        Some(Command::Bench(args)) => bench::main(&args),
        None => run::main(&cli.run),
    };
    ExitCode::from(status as u8)
}
