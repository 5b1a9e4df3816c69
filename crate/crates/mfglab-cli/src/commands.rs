//! Every subcommand except `experiment`.

use serde_json::json;

use mfglab::counterexamples::{
    build_fh_lower, build_stat_lower, fh_br_policy, fh_ne_policy, fh_side_split_policy, stat_br_policy, stat_ne,
    FhLowerParams, StatLowerParams, STATE_NAMES,
};
use mfglab::format::{
    format_reals, parse_reals, write_fh, write_game, write_policy_seq, write_stat, write_stat_solution, Game,
};
use mfglab::gcircuit::{check_assignment, parse_assignment, write_assignment};
use mfglab::mfg::{exploitability_fh, exploitability_stat, lambda_flow, stat_stability_residual, truncation_horizon};
use mfglab::reductions::{
    extract_fh2_assignment, extract_nash_strategies, extract_statdist_assignment, gcircuit_to_fh2,
    gcircuit_to_statdist_with, nash2_to_fh2, verify_bimatrix_nash,
};
use mfglab::sim::{estimate_divergence, estimate_j_fh, simulate_stat, SimConfig};
use mfglab::solvers::{damped_br_stat, damped_fixed_point, fictitious_play_fh, SolveReport};
use mfglab::{Distribution, Policy};

use crate::io::{emit, load_bimatrix, load_circuit, load_game, load_solution, read_text, to_json, CliError, CliResult};
use crate::{
    CounterexampleArgs, LowerGame, NamedPolicy, ReduceArgs, Reduction, SimulateArgs, SolveArgs, SolverKind, VerifyCmd,
};

fn finish_solve(args: &SolveArgs, solution: &str, rep: &SolveReport) -> CliResult<()> {
    emit(args.out.as_ref(), solution)?;
    if let Some(p) = &args.report {
        emit(Some(p), &to_json(rep))?;
    }
    eprintln!(
        "{}: {} iterations, residual {}, exploitability {}, converged {}",
        rep.solver,
        rep.iterations,
        rep.residual.map_or("-".into(), |r| format!("{r:.3e}")),
        rep.exploitability.map_or("-".into(), |e| format!("{e:.3e}")),
        rep.converged
    );
    if rep.converged {
        Ok(())
    } else {
        Err(CliError::Verdict(format!("{} did not reach tolerance {}", rep.solver, args.tol)))
    }
}

pub fn solve(args: &SolveArgs) -> CliResult<()> {
    match load_game(&args.game)? {
        Game::Fh(g) => {
            let solver = args.solver.unwrap_or(SolverKind::Fp);
            if solver != SolverKind::Fp {
                return Err(CliError::Usage("finite-horizon games are solved with `--solver fp`".into()));
            }
            let (pis, rep) = fictitious_play_fh(&g, args.iters, args.tol)?;
            finish_solve(args, &write_policy_seq(g.states(), &pis), &rep)
        }
        Game::Stat(g) => {
            let default = if g.n_actions() == 1 { SolverKind::FixedPoint } else { SolverKind::DampedBr };
            let ((mu, pi), rep) = match args.solver.unwrap_or(default) {
                SolverKind::Fp => {
                    return Err(CliError::Usage("stationary games take `--solver damped-br` or `fixed-point`".into()))
                }
                SolverKind::DampedBr => damped_br_stat(&g, args.damping, args.tol, args.iters)?,
                SolverKind::FixedPoint => {
                    let pi = Policy::uniform(g.n_states(), g.n_actions());
                    let (mu, rep) = damped_fixed_point(&g.kernel, &pi, args.damping, args.tol, args.iters)?;
                    ((mu, pi), rep)
                }
            };
            finish_solve(args, &write_stat_solution(g.states(), &mu, &pi), &rep)
        }
    }
}

pub fn reduce(args: &ReduceArgs) -> CliResult<()> {
    let circuit_path = || args.input.as_deref().map(std::path::Path::new);
    match args.reduction {
        Reduction::GcircuitStatdist => {
            let inst = gcircuit_to_statdist_with(&load_circuit(circuit_path())?, args.eps)?;
            let game = Game::Stat(inst.game.clone());
            match &args.extract {
                None => emit(args.out.as_ref(), &write_game(&game)),
                Some(p) => {
                    let sol = load_solution(p, &game)?;
                    let mu = sol.mu.ok_or_else(|| CliError::Usage("solution has no `mu:` line".into()))?;
                    emit(args.out.as_ref(), &write_assignment(&extract_statdist_assignment(&inst, &mu)?))
                }
            }
        }
        Reduction::GcircuitFh2 => {
            let inst = gcircuit_to_fh2(&load_circuit(circuit_path())?)?;
            let game = Game::Fh(inst.game.clone());
            match &args.extract {
                None => emit(args.out.as_ref(), &write_game(&game)),
                Some(p) => {
                    let sol = load_solution(p, &game)?;
                    emit(args.out.as_ref(), &write_assignment(&extract_fh2_assignment(&inst, &sol.policies)?))
                }
            }
        }
        Reduction::NashFh2 => {
            let source = args.input.as_deref().unwrap_or("matching-pennies");
            let (a, b) = load_bimatrix(source)?;
            let inst = nash2_to_fh2(&a, &b)?;
            let game = Game::Fh(inst.game.clone());
            match &args.extract {
                None => emit(args.out.as_ref(), &write_game(&game)),
                Some(p) => {
                    let sol = load_solution(p, &game)?;
                    let (s1, s2) = extract_nash_strategies(&inst, &sol.policies)?;
                    emit(args.out.as_ref(), &format!("row: {}\ncol: {}\n", format_reals(&s1), format_reals(&s2)))
                }
            }
        }
    }
}

fn verdict(passed: bool, report: serde_json::Value, what: &str) -> CliResult<()> {
    print!("{}", to_json(&report));
    if passed {
        Ok(())
    } else {
        Err(CliError::Verdict(what.to_string()))
    }
}

pub fn verify(cmd: &VerifyCmd) -> CliResult<()> {
    match cmd {
        VerifyCmd::Solution { game, solution, tol } => {
            let game = load_game(game)?;
            let sol = load_solution(solution, &game)?;
            match &game {
                Game::Fh(g) => {
                    let e = exploitability_fh(g, &sol.policies)?;
                    verdict(e <= *tol, json!({ "exploitability": e, "tol": tol }), "exploitability above tolerance")
                }
                Game::Stat(g) => {
                    let mu = sol.mu.ok_or_else(|| CliError::Usage("stationary solutions need a `mu:` line".into()))?;
                    let pi = match sol.policies.as_slice() {
                        [pi] => pi,
                        _ => return Err(CliError::Usage("stationary solutions hold one policy".into())),
                    };
                    let r = stat_stability_residual(&g.kernel, &mu, pi)?;
                    let e = exploitability_stat(g, &mu, pi, *tol / 10.0)?;
                    verdict(
                        r <= *tol && e <= *tol,
                        json!({ "residual": r, "exploitability": e, "tol": tol }),
                        "residual or exploitability above tolerance",
                    )
                }
            }
        }
        VerifyCmd::Assignment { circuit, assignment, eps } => {
            let c = load_circuit(Some(circuit))?;
            let p = parse_assignment(&read_text(assignment)?)?;
            let gates = check_assignment(&c, &p, *eps)?;
            let ok = gates.iter().all(|g| g.satisfied);
            verdict(ok, json!({ "eps": eps, "satisfied": ok, "gates": gates }), "assignment violates a gate")
        }
        VerifyCmd::Nash { game, row, col, eps } => {
            let (a, b) = load_bimatrix(game)?;
            let v = verify_bimatrix_nash(&a, &b, &parse_reals(row)?, &parse_reals(col)?, *eps)?;
            verdict(v.passed, serde_json::to_value(&v).expect("serializable"), "regret above tolerance")
        }
    }
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let game = load_game(&args.game)?;
    let shared = load_solution(&args.solution, &game)?;
    let deviator = args.deviator.as_ref().map(|p| load_solution(p, &game)).transpose()?;
    let cfg = SimConfig::new(args.agents, args.episodes, args.seed);
    let report = match &game {
        Game::Fh(g) => {
            let first = deviator.as_ref().map_or(&shared.policies, |d| &d.policies);
            let j = estimate_j_fh(g, first, &shared.policies, &cfg)?;
            let flow = lambda_flow(g, &shared.policies)?;
            let div = estimate_divergence(g, &shared.policies, &flow, &cfg)?;
            json!({ "agents": args.agents, "episodes": args.episodes, "seed": args.seed, "j_agent0": j, "divergence": div })
        }
        Game::Stat(g) => {
            let init =
                shared.mu.clone().or_else(|| g.mu0.clone()).unwrap_or_else(|| Distribution::uniform(g.n_states()));
            let pick = |s: &mfglab::format::Solution| -> CliResult<Policy> {
                match s.policies.as_slice() {
                    [pi] => Ok(pi.clone()),
                    _ => Err(CliError::Usage("stationary solutions hold one policy".into())),
                }
            };
            let pi = pick(&shared)?;
            let dev = deviator.as_ref().map(pick).transpose()?;
            let steps = truncation_horizon(g.gamma, args.bias);
            let est = simulate_stat(g, &init, &pi, dev.as_ref(), &cfg.with_steps(steps))?;
            json!({ "agents": args.agents, "episodes": args.episodes, "seed": args.seed, "steps": steps, "j_agent0": est })
        }
    };
    print!("{}", to_json(&report));
    Ok(())
}

pub fn counterexample(args: &CounterexampleArgs) -> CliResult<()> {
    let states: Vec<String> = STATE_NAMES.iter().map(|s| s.to_string()).collect();
    let text = match args.game {
        LowerGame::Fh => {
            let g = build_fh_lower(&FhLowerParams::with_horizon(args.horizon))?;
            match args.policy {
                None => write_fh(&g),
                Some(NamedPolicy::Ne) => write_policy_seq(&states, &fh_ne_policy(args.horizon)),
                Some(NamedPolicy::Br) => write_policy_seq(&states, &fh_br_policy(args.horizon)),
                Some(NamedPolicy::SideSplit) => write_policy_seq(&states, &fh_side_split_policy(args.horizon)),
            }
        }
        LowerGame::Stat => {
            let params = match args.agents {
                Some(n) => StatLowerParams::for_agents(n, args.gamma),
                None => StatLowerParams { gamma: args.gamma, ..Default::default() },
            };
            let g = build_stat_lower(&params)?;
            let (mu, pi) = stat_ne();
            match args.policy {
                None => write_stat(&g),
                Some(NamedPolicy::Ne) => write_stat_solution(&states, &mu, &pi),
                Some(NamedPolicy::Br) => write_stat_solution(&states, &mu, &stat_br_policy()),
                Some(NamedPolicy::SideSplit) => {
                    return Err(CliError::Usage("side-split is a finite-horizon policy".into()))
                }
            }
        }
    };
    emit(args.out.as_ref(), &text)
}
