//! `mfglab experiment <name>`: CSV tables plus a manifest.
//!
//! Every experiment writes its rows to `<out>/<name>.csv` and a
//! `manifest.json` holding the full argument set, the build's
//! `git describe` and a short summary. CSV bodies depend only on the
//! arguments.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use mfglab::counterexamples::FhLowerParams;
use mfglab::experiments::{
    anticoncentration_sweep, default_p_grid, fh2_roundtrip, fh_divergence, fh_gap_sweep, log_log_slope, ls_slope,
    nash_roundtrip, ring_divergence_vs_bound, stat_gap_sweep, statdist_roundtrip, upper_trend,
};
use mfglab::format::parse_reals;
use mfglab::solvers::DEFAULT_DAMPING;

use crate::io::{load_bimatrix, load_circuit, to_json, CliError, CliResult};

#[derive(Subcommand, Debug, Serialize)]
pub enum ExperimentCmd {
    /// Per-step population divergence in the finite-horizon lower-bound game.
    Divergence(DivergenceArgs),
    /// Deviation gain against the horizon in the finite-horizon lower-bound game.
    FhGap(FhGapArgs),
    /// Deviation gain against N in the stationary lower-bound game.
    StatGap(StatGapArgs),
    /// Exact binomial tail P[X >= N/2 + sqrt(N)/2] over N and p.
    Anticoncentration(AnticoncentrationArgs),
    /// Exact small-N deviation gaps in the congestion ring.
    UpperTrend(UpperTrendArgs),
    /// Congestion-ring divergence next to its analytic upper bound.
    Bound(BoundArgs),
    /// Circuit to stationary game, damped fixed point, assignment check.
    StatdistRoundtrip(StatdistArgs),
    /// Circuit to two-step game, fictitious play, assignment check.
    Fh2Roundtrip(Fh2Args),
    /// Bimatrix game to two-step game, fictitious play, regret check.
    NashRoundtrip(NashArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct Output {
    /// Output directory (created if missing).
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct DivergenceArgs {
    #[arg(long = "N", visible_alias = "agents", default_value_t = 10_000)]
    pub agents: usize,
    #[arg(long = "H", visible_alias = "horizon", default_value_t = 12)]
    pub horizon: usize,
    #[arg(long, default_value_t = 200)]
    pub episodes: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct FhGapArgs {
    #[arg(long = "N", visible_alias = "agents", default_value_t = 32)]
    pub agents: usize,
    /// Comma-separated horizons.
    #[arg(long = "H", visible_alias = "horizons", default_value = "8,16,24,32")]
    pub horizons: String,
    #[arg(long, default_value_t = 2000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct StatGapArgs {
    /// Comma-separated agent counts.
    #[arg(long = "N", visible_alias = "agents", default_value = "16,64,256")]
    pub agents: String,
    #[arg(long, default_value_t = 0.8)]
    pub gamma: f64,
    #[arg(long, default_value_t = 5000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    /// Largest allowed truncation bias.
    #[arg(long, default_value_t = 1e-5)]
    pub bias: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct AnticoncentrationArgs {
    #[arg(long = "Nmax", visible_alias = "n-max", default_value_t = 200)]
    pub n_max: usize,
    /// Comma-separated success probabilities (default 0.50, 0.55, ..., 1.00).
    #[arg(long)]
    pub p: Option<String>,
    /// Smallest acceptable probability.
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct UpperTrendArgs {
    #[arg(long = "N", visible_alias = "agents", default_value = "2,4,8")]
    pub agents: String,
    #[arg(long = "H", visible_alias = "horizon", default_value_t = 4)]
    pub horizon: usize,
    #[arg(long, default_value_t = 100_000)]
    pub fp_iters: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub fp_tol: f64,
    /// Also enumerate deterministic Markov deviations.
    #[arg(long)]
    pub markov: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundArgs {
    #[arg(long = "N", visible_alias = "agents", default_value = "10,100,1000")]
    pub agents: String,
    #[arg(long = "H", visible_alias = "horizon", default_value_t = 8)]
    pub horizon: usize,
    #[arg(long, default_value_t = 500)]
    pub episodes: usize,
    #[arg(long, default_value_t = 5)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub fp_iters: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct StatdistArgs {
    /// Circuit file (default: the built-in reference circuit).
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DAMPING)]
    pub damping: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Tolerance of the assignment check.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct Fh2Args {
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 4e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct NashArgs {
    /// Bimatrix file or `matching-pennies` / `prisoners-dilemma`.
    #[arg(long, default_value = "matching-pennies")]
    pub game: String,
    #[arg(long, default_value_t = 100_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Regret tolerance of the verdict.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[command(flatten)]
    pub output: Output,
}

fn list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    let v: Vec<T> = text
        .split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} entry `{}`", t.trim()))))
        .collect::<CliResult<_>>()?;
    if v.is_empty() {
        return Err(CliError::Usage(format!("{what} list is empty")));
    }
    Ok(v)
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> CliResult<String> {
    let file = format!("{name}.csv");
    let io_err =
        |e: &dyn std::fmt::Display| CliError::Usage(format!("cannot write {}: {e}", dir.join(&file).display()));
    let mut w = csv::Writer::from_path(dir.join(&file)).map_err(|e| io_err(&e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(&e))?;
    }
    w.flush().map_err(|e| io_err(&e))?;
    Ok(file)
}

/// Writes the manifest and prints the summary; fails the verdict when
/// `passed` is false.
fn finish(cmd: &ExperimentCmd, dir: &Path, files: Vec<String>, summary: Value, passed: bool) -> CliResult<()> {
    let manifest = json!({
        "experiment": name(cmd),
        "spec": cmd,
        "git_describe": env!("MFGLAB_GIT_DESCRIBE"),
        "version": env!("CARGO_PKG_VERSION"),
        "files": files,
        "summary": summary,
        "passed": passed,
    });
    let path = dir.join("manifest.json");
    fs::write(&path, to_json(&manifest))
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    println!("{}", to_json(&summary).trim_end());
    println!("{} ({})", if passed { "PASS" } else { "FAIL" }, dir.display());
    if passed {
        Ok(())
    } else {
        Err(CliError::Verdict(format!("{} did not meet its check", name(cmd))))
    }
}

fn name(cmd: &ExperimentCmd) -> &'static str {
    match cmd {
        ExperimentCmd::Divergence(_) => "divergence",
        ExperimentCmd::FhGap(_) => "fh-gap",
        ExperimentCmd::StatGap(_) => "stat-gap",
        ExperimentCmd::Anticoncentration(_) => "anticoncentration",
        ExperimentCmd::UpperTrend(_) => "upper-trend",
        ExperimentCmd::Bound(_) => "bound",
        ExperimentCmd::StatdistRoundtrip(_) => "statdist-roundtrip",
        ExperimentCmd::Fh2Roundtrip(_) => "fh2-roundtrip",
        ExperimentCmd::NashRoundtrip(_) => "nash-roundtrip",
    }
}

fn output(cmd: &ExperimentCmd) -> &Path {
    match cmd {
        ExperimentCmd::Divergence(a) => &a.output.out,
        ExperimentCmd::FhGap(a) => &a.output.out,
        ExperimentCmd::StatGap(a) => &a.output.out,
        ExperimentCmd::Anticoncentration(a) => &a.output.out,
        ExperimentCmd::UpperTrend(a) => &a.output.out,
        ExperimentCmd::Bound(a) => &a.output.out,
        ExperimentCmd::StatdistRoundtrip(a) => &a.output.out,
        ExperimentCmd::Fh2Roundtrip(a) => &a.output.out,
        ExperimentCmd::NashRoundtrip(a) => &a.output.out,
    }
}

/// Slope summary that tolerates fits the data cannot support.
fn slope_value(r: mfglab::Result<f64>) -> Value {
    r.map_or(Value::Null, |s| json!(s))
}

pub fn run(cmd: &ExperimentCmd) -> CliResult<()> {
    let dir = output(cmd);
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let stem = name(cmd).replace('-', "_");
    match cmd {
        ExperimentCmd::Divergence(a) => {
            let p = FhLowerParams { eps: a.eps, alpha: a.alpha, beta: a.beta, horizon: a.horizon };
            let rows = fh_divergence(&p, a.agents, a.episodes, a.seed)?;
            let file = write_csv(dir, &stem, &rows)?;
            let ratios: Vec<f64> =
                (0..).take_while(|m| 2 * m + 2 < rows.len()).map(|m| rows[2 * m + 2].mean / rows[2 * m].mean).collect();
            let summary =
                json!({ "step0_exact": rows[0].exact, "step0_mean": rows[0].mean, "two_step_ratios": ratios });
            finish(cmd, dir, vec![file], summary, true)
        }
        ExperimentCmd::FhGap(a) => {
            let hs: Vec<usize> = list(&a.horizons, "horizon")?;
            let rows = fh_gap_sweep(&hs, a.agents, a.episodes, a.seed)?;
            let file = write_csv(dir, &stem, &rows)?;
            let x: Vec<f64> = rows.iter().map(|r| r.horizon as f64).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.gap).collect();
            finish(cmd, dir, vec![file], json!({ "gap_slope_in_h": slope_value(ls_slope(&x, &y)) }), true)
        }
        ExperimentCmd::StatGap(a) => {
            let ns: Vec<usize> = list(&a.agents, "agent count")?;
            let rows = stat_gap_sweep(&ns, a.gamma, a.episodes, a.seed, a.bias)?;
            let file = write_csv(dir, &stem, &rows)?;
            let x: Vec<f64> = rows.iter().map(|r| r.n_agents as f64).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.gap).collect();
            let summary = json!({
                "log_log_slope": slope_value(log_log_slope(&x, &y)),
                "reference_slope": -(1.0 / a.gamma).log2(),
            });
            finish(cmd, dir, vec![file], summary, true)
        }
        ExperimentCmd::Anticoncentration(a) => {
            let ps = match &a.p {
                Some(t) => parse_reals(t)?,
                None => default_p_grid(),
            };
            let rows = anticoncentration_sweep(a.n_max, &ps)?;
            let file = write_csv(dir, &stem, &rows)?;
            let min = rows.iter().map(|r| r.probability).fold(f64::INFINITY, f64::min);
            finish(
                cmd,
                dir,
                vec![file],
                json!({ "min_probability": min, "threshold": a.threshold }),
                min >= a.threshold,
            )
        }
        ExperimentCmd::UpperTrend(a) => {
            let ns: Vec<usize> = list(&a.agents, "agent count")?;
            let (rows, rep) = upper_trend(&ns, a.horizon, a.fp_iters, a.fp_tol, a.markov)?;
            let file = write_csv(dir, &stem, &rows)?;
            let x: Vec<f64> = rows.iter().map(|r| r.n_agents as f64).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.gap_count_observing).collect();
            let summary = json!({
                "fictitious_play_iterations": rep.iterations,
                "mf_exploitability": rep.exploitability,
                "converged": rep.converged,
                "log_log_slope": slope_value(log_log_slope(&x, &y)),
            });
            finish(cmd, dir, vec![file], summary, rep.converged)
        }
        ExperimentCmd::Bound(a) => {
            let ns: Vec<usize> = list(&a.agents, "agent count")?;
            let rows = ring_divergence_vs_bound(&ns, a.horizon, a.episodes, a.seed, a.fp_iters)?;
            let file = write_csv(dir, &stem, &rows)?;
            let within = rows.iter().all(|r| r.mean <= r.bound);
            finish(cmd, dir, vec![file], json!({ "all_within_bound": within }), within)
        }
        ExperimentCmd::StatdistRoundtrip(a) => {
            let c = load_circuit(a.circuit.as_deref())?;
            let row = statdist_roundtrip(&c, a.damping, a.tol, a.max_iters, a.eps)?;
            let file = write_csv(dir, &stem, std::slice::from_ref(&row))?;
            let ok = row.converged && row.satisfied;
            finish(cmd, dir, vec![file], json!({ "converged": row.converged, "satisfied": row.satisfied }), ok)
        }
        ExperimentCmd::Fh2Roundtrip(a) => {
            let c = load_circuit(a.circuit.as_deref())?;
            let row = fh2_roundtrip(&c, a.iters, a.tol, a.eps)?;
            let file = write_csv(dir, &stem, std::slice::from_ref(&row))?;
            let ok = row.converged && row.satisfied;
            finish(cmd, dir, vec![file], json!({ "converged": row.converged, "satisfied": row.satisfied }), ok)
        }
        ExperimentCmd::NashRoundtrip(a) => {
            let (ma, mb) = load_bimatrix(&a.game)?;
            let row = nash_roundtrip(&a.game, &ma, &mb, a.iters, a.tol, a.eps)?;
            let file = write_csv(dir, &stem, std::slice::from_ref(&row))?;
            let summary = json!({
                "row_regret": row.row_regret,
                "col_regret": row.col_regret,
                "linf_to_oracle": row.linf_to_oracle,
            });
            finish(cmd, dir, vec![file], summary, row.passed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_parse_and_reject_bad_entries() {
        assert_eq!(list::<usize>("2, 4,8", "n").unwrap(), vec![2, 4, 8]);
        assert!(list::<usize>("2,,4", "n").is_err());
        assert!(list::<usize>("", "n").is_err());
    }

    #[test]
    fn csv_rows_follow_field_order() {
        let dir = tempfile::tempdir().unwrap();
        let rows = anticoncentration_sweep(2, &[0.5]).unwrap();
        let file = write_csv(dir.path(), "t", &rows).unwrap();
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(text.lines().next(), Some("n,p,probability"));
        assert_eq!(text.lines().count(), 3);
    }
}
