//! Loading inputs, writing outputs and the command error type.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use mfglab::corpus::{shipped_game, shipped_games};
use mfglab::format::{parse_game, parse_solution, Game, Solution};
use mfglab::gcircuit::{reference_circuit, GCircuit};
use mfglab::reductions::{matching_pennies, parse_bimatrix, prisoners_dilemma, Matrix};

/// Why a command did not succeed.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input. Exit code 2.
    Usage(String),
    /// The command ran but its check failed. Exit code 1.
    Verdict(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Verdict(m) => write!(f, "FAIL: {m}"),
        }
    }
}

impl From<mfglab::Error> for CliError {
    fn from(e: mfglab::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: mfglab::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// A game file path or the name of a shipped game.
pub fn load_game(source: &str) -> CliResult<Game> {
    let path = Path::new(source);
    if path.is_file() {
        return with_path(path, parse_game(&read_text(path)?));
    }
    if let Some(g) = shipped_game(source)? {
        return Ok(g);
    }
    let names: Vec<&str> = shipped_games()?.into_iter().map(|(n, _)| n).collect();
    Err(CliError::Usage(format!("`{source}` is neither a file nor a shipped game ({})", names.join(", "))))
}

pub fn load_solution(path: &Path, game: &Game) -> CliResult<Solution> {
    let (states, na) = match game {
        Game::Fh(g) => (g.states(), g.n_actions()),
        Game::Stat(g) => (g.states(), g.n_actions()),
    };
    with_path(path, parse_solution(&read_text(path)?, states, na))
}

/// A circuit file, or the built-in reference circuit when no path is given.
pub fn load_circuit(path: Option<&Path>) -> CliResult<GCircuit> {
    match path {
        Some(p) => with_path(p, GCircuit::parse(&read_text(p)?)),
        None => Ok(reference_circuit()),
    }
}

/// A bimatrix file or one of the built-in games.
pub fn load_bimatrix(source: &str) -> CliResult<(Matrix, Matrix)> {
    match source {
        "matching-pennies" => Ok(matching_pennies()),
        "prisoners-dilemma" => Ok(prisoners_dilemma()),
        _ => {
            let path = Path::new(source);
            if !path.is_file() {
                return Err(CliError::Usage(format!(
                    "`{source}` is neither a file nor a built-in game (matching-pennies, prisoners-dilemma)"
                )));
            }
            with_path(path, parse_bimatrix(&read_text(path)?))
        }
    }
}

/// Writes to `out` or to standard output.
pub fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}
