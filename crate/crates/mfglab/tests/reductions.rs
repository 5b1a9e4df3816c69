//! Round trips through the compiled games: solve, extract, check.

use mfglab::gcircuit::{reference_circuit, satisfies, GCircuit};
use mfglab::mfg::{exploitability_fh, stat_stability_residual};
use mfglab::reductions::{
    extract_fh2_assignment, extract_nash_strategies, extract_statdist_assignment, gcircuit_to_fh2,
    gcircuit_to_statdist, matching_pennies, nash2_to_fh2, prisoners_dilemma, verify_bimatrix_nash, Matrix,
};
use mfglab::solvers::{damped_fixed_point, fictitious_play_fh, support_enumeration_2nash};
use mfglab::{Distribution, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn test_circuits() -> Vec<(&'static str, GCircuit)> {
    let parse = |t: &str| GCircuit::parse(t).unwrap();
    vec![
        ("reference", reference_circuit()),
        ("halving-chain", parse("ASSIGN one = 1\nAFF h = 0.5*one\nAFF q = 0.5*h\nAFF s = 1*h + 1*q\nCMP c = q < h\n")),
        ("contraction-cycle", parse("ASSIGN one = 1\nAFF x = 0.5*y + 0.25*one\nAFF y = 0.5*x + 0.5*one\n")),
        ("false-compare", parse("ASSIGN one = 1\nAFF t = 0.3*one\nAFF u = 0.6*one\nCMP c = u < t\n")),
    ]
}

#[test]
fn statdist_near_stable_points_extract_to_satisfying_assignments() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, c) in test_circuits() {
        let inst = gcircuit_to_statdist(&c).unwrap();
        let n = inst.game.n_states();
        let pi = Policy::uniform(n, 1);
        let (mu, rep) = damped_fixed_point(&inst.game.kernel, &pi, 0.3, 1e-13, 100_000).unwrap();
        assert!(rep.converged, "{name}");
        let budget = inst.eps / n as f64;
        let mut checked = 0;
        for _ in 0..300 {
            let scale = budget * rng.random::<f64>();
            let noisy: Vec<f64> = mu.iter().map(|m| (m + scale * (rng.random::<f64>() - 0.5)).max(0.0)).collect();
            let total: f64 = noisy.iter().sum();
            let nu = Distribution::new(noisy.iter().map(|x| x / total).collect()).unwrap();
            if stat_stability_residual(&inst.game.kernel, &nu, &pi).unwrap() > budget {
                continue;
            }
            checked += 1;
            let p = extract_statdist_assignment(&inst, &nu).unwrap();
            assert!(satisfies(&c, &p, 8.0 * inst.eps).unwrap(), "{name}: {p:?}");
        }
        assert!(checked >= 100, "{name}: only {checked} perturbations within budget");
    }
}

#[test]
fn statdist_solver_from_uniform_meets_budget() {
    for (name, c) in test_circuits() {
        let inst = gcircuit_to_statdist(&c).unwrap();
        let n = inst.game.n_states();
        let pi = Policy::uniform(n, 1);
        let (mu, rep) = damped_fixed_point(&inst.game.kernel, &pi, 0.3, inst.eps / n as f64, 100_000).unwrap();
        assert!(rep.converged, "{name}");
        let again = stat_stability_residual(&inst.game.kernel, &mu, &pi).unwrap();
        assert!((again - rep.residual.unwrap()).abs() <= 1e-9);
        let p = extract_statdist_assignment(&inst, &mu).unwrap();
        assert!(satisfies(&c, &p, 8.0 * inst.eps).unwrap(), "{name}: {p:?}");
    }
}

#[test]
fn fh2_low_exploitability_extracts_to_satisfying_assignment() {
    let eps = 0.2;
    for (name, c) in test_circuits() {
        let inst = gcircuit_to_fh2(&c).unwrap();
        let tol = eps * eps / inst.game.n_states() as f64;
        let (pis, rep) = fictitious_play_fh(&inst.game, 20_000, tol).unwrap();
        assert!(rep.converged, "{name}: {rep:?}");
        let e = exploitability_fh(&inst.game, &pis).unwrap();
        assert!((e - rep.exploitability.unwrap()).abs() <= 1e-9);
        let p = extract_fh2_assignment(&inst, &pis).unwrap();
        assert!(satisfies(&c, &p, eps).unwrap(), "{name}: {p:?}");
    }
}

fn bimatrix_suite() -> Vec<(&'static str, Matrix, Matrix)> {
    let (mpa, mpb) = matching_pennies();
    let (pda, pdb) = prisoners_dilemma();
    vec![
        ("matching-pennies", mpa, mpb),
        ("prisoners-dilemma", pda, pdb),
        ("coordination", vec![vec![1.0, 0.0], vec![0.0, 0.5]], vec![vec![1.0, 0.0], vec![0.0, 0.5]]),
        ("skewed-pennies", vec![vec![0.9, 0.1], vec![0.2, 0.6]], vec![vec![0.3, 0.8], vec![0.7, 0.4]]),
        (
            "two-by-three",
            vec![vec![0.8, 0.2, 0.5], vec![0.1, 0.7, 0.4]],
            vec![vec![0.2, 0.9, 0.3], vec![0.8, 0.1, 0.6]],
        ),
        (
            "dominated-column",
            vec![vec![0.6, 0.3, 0.0], vec![0.2, 0.9, 0.1]],
            vec![vec![0.5, 0.4, 0.0], vec![0.3, 0.6, 0.1]],
        ),
    ]
}

#[test]
fn nash_extraction_regret_is_bounded_by_sixteen_times_exploitability() {
    for (name, a, b) in bimatrix_suite() {
        let inst = nash2_to_fh2(&a, &b).unwrap();
        for iters in [5, 50, 500] {
            let (pis, _) = fictitious_play_fh(&inst.game, iters, 0.0).unwrap();
            let e = exploitability_fh(&inst.game, &pis).unwrap();
            let (s1, s2) = extract_nash_strategies(&inst, &pis).unwrap();
            let v = verify_bimatrix_nash(&a, &b, &s1, &s2, 16.0 * e + 1e-12).unwrap();
            assert!(v.passed, "{name} after {iters}: e={e} {v:?}");
        }
    }
}

#[test]
fn support_enumeration_returns_exact_equilibria() {
    for (name, a, b) in bimatrix_suite() {
        let sol = support_enumeration_2nash(&a, &b).unwrap();
        let v = verify_bimatrix_nash(&a, &b, &sol.row, &sol.col, 1e-9).unwrap();
        assert!(v.passed, "{name}: {v:?}");
    }
}

#[test]
fn compiled_games_survive_the_file_format() {
    use mfglab::format::{parse_game, write_game, Game};
    let (a, b) = matching_pennies();
    let games = [
        Game::Stat(gcircuit_to_statdist(&reference_circuit()).unwrap().game),
        Game::Fh(gcircuit_to_fh2(&reference_circuit()).unwrap().game),
        Game::Fh(nash2_to_fh2(&a, &b).unwrap().game),
    ];
    for g in games {
        let text = write_game(&g);
        assert_eq!(write_game(&parse_game(&text).unwrap()), text);
    }
}
