//! `mfglab`: solve, compile, verify and simulate finite mean-field games.
//!
//! Exit status is 0 on success, 1 when a check or solver verdict fails and
//! 2 on usage errors (bad arguments, unreadable or malformed input).

mod commands;
mod experiment;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::experiment::ExperimentCmd;
use crate::io::CliError;

#[derive(Parser, Debug)]
#[command(name = "mfglab", version, about = "Finite mean-field games: solvers, reductions and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a game file or shipped game and print the solution.
    Solve(SolveArgs),
    /// Compile a circuit or bimatrix game into a mean-field game.
    Reduce(ReduceArgs),
    /// Check a solution, circuit assignment or bimatrix strategy pair.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Monte Carlo simulation of the N-player game.
    Simulate(SimulateArgs),
    /// Run an experiment and write CSV tables plus manifest.json.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Print one of the lower-bound games or its named policies.
    Counterexample(CounterexampleArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// Fictitious play (finite horizon).
    Fp,
    /// Damped best response (stationary).
    DampedBr,
    /// Damped population fixed point under the uniform policy (stationary).
    FixedPoint,
}

#[derive(clap::Args, Debug)]
pub struct SolveArgs {
    /// Game file, or the name of a shipped game.
    pub game: String,
    /// Defaults to fp for finite-horizon games, fixed-point for
    /// single-action stationary games and damped-br otherwise.
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = mfglab::solvers::DEFAULT_DAMPING)]
    pub damping: f64,
    /// Solution output file (default: standard output).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Also write the solver report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// Circuit to single-action stationary game.
    GcircuitStatdist,
    /// Circuit to two-step finite-horizon game.
    GcircuitFh2,
    /// Bimatrix game to two-step finite-horizon game.
    NashFh2,
}

#[derive(clap::Args, Debug)]
pub struct ReduceArgs {
    #[arg(value_enum)]
    pub reduction: Reduction,
    /// Circuit file (default: the built-in reference circuit) or, for
    /// nash-fh2, a bimatrix file or `matching-pennies` / `prisoners-dilemma`.
    pub input: Option<String>,
    /// Comparator parameter of the stationary compilation.
    #[arg(long, default_value_t = mfglab::reductions::DEFAULT_COMPARATOR_EPS)]
    pub eps: f64,
    /// Instead of printing the game, read a solution of the compiled game
    /// and print the extracted assignment or strategy pair.
    #[arg(long)]
    pub extract: Option<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Exploitability (and stability residual for stationary games) of a solution.
    Solution {
        game: String,
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Gate-by-gate check of a circuit assignment.
    Assignment {
        circuit: PathBuf,
        assignment: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Regrets of a bimatrix strategy pair.
    Nash {
        /// Bimatrix file or `matching-pennies` / `prisoners-dilemma`.
        game: String,
        /// Row strategy, comma separated.
        #[arg(long)]
        row: String,
        /// Column strategy, comma separated.
        #[arg(long)]
        col: String,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
}

#[derive(clap::Args, Debug)]
pub struct SimulateArgs {
    pub game: String,
    /// Policy played by every agent.
    pub solution: PathBuf,
    /// Policy of agent 0, when it deviates.
    #[arg(long)]
    pub deviator: Option<PathBuf>,
    #[arg(long = "N", visible_alias = "agents", default_value_t = 100)]
    pub agents: usize,
    #[arg(long, default_value_t = 1000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Truncation bias target for stationary games.
    #[arg(long, default_value_t = 1e-5)]
    pub bias: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerGame {
    Fh,
    Stat,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedPolicy {
    /// Equilibrium policy (and distribution for the stationary game).
    Ne,
    /// Deviation used in the lower-bound experiments.
    Br,
    /// Finite horizon only: aA at the left side state, aB at the right one.
    SideSplit,
}

#[derive(clap::Args, Debug)]
pub struct CounterexampleArgs {
    #[arg(value_enum)]
    pub game: LowerGame,
    #[arg(long = "H", visible_alias = "horizon", default_value_t = 8)]
    pub horizon: usize,
    /// Number of agents; sets the stationary game's anti-crowding weight to min(0.05, e^-N).
    #[arg(long = "N", visible_alias = "agents")]
    pub agents: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    pub gamma: f64,
    /// Print a named policy instead of the game.
    #[arg(long, value_enum)]
    pub policy: Option<NamedPolicy>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Reduce(a) => commands::reduce(&a),
        Command::Verify(v) => commands::verify(&v),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Experiment(e) => experiment::run(&e),
        Command::Counterexample(a) => commands::counterexample(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Verdict(_) => ExitCode::from(1),
                CliError::Usage(_) => ExitCode::from(2),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn short_flags_match_the_documented_examples() {
        let cli = Cli::try_parse_from(["mfglab", "experiment", "divergence", "--N", "10000", "--H", "12"]).unwrap();
        match cli.command {
            Command::Experiment(ExperimentCmd::Divergence(a)) => assert_eq!((a.agents, a.horizon), (10_000, 12)),
            other => panic!("parsed as {other:?}"),
        }
        assert!(Cli::try_parse_from(["mfglab", "experiment", "anticoncentration", "--Nmax", "50"]).is_ok());
    }
}
