//! Small named games used by the tests, the command line and the demo.

use crate::counterexamples::{build_fh_lower, build_stat_lower, FhLowerParams, StatLowerParams};
use crate::error::Result;
use crate::expr::Expr;
use crate::format::Game;
use crate::game::{names, Distribution, FhMfg, Kernel, Rewards, StatMfg};
use crate::gcircuit::reference_circuit;
use crate::reductions::{gcircuit_to_fh2, gcircuit_to_statdist, matching_pennies, nash2_to_fh2};

/// Three sites on a ring. `stay` keeps the agent in place with
/// probability 0.9, `move` advances it with probability 0.9; the rest is
/// split evenly. Every site carries a linear crowding penalty and moving
/// costs 0.05: `R(s, a, mu) = 0.4 + 0.2 (1 - mu(s)) - 0.05 [a = move]`.
/// The kernel does not depend on the population.
pub fn congestion_ring_kernel() -> Kernel {
    let mut k = Kernel::new(names(&["site0", "site1", "site2"]), names(&["stay", "move"]));
    for s in 0..3 {
        let (next, other) = ((s + 1) % 3, (s + 2) % 3);
        k.set(s, 0, s, Expr::c(0.9));
        k.set(s, 0, next, Expr::c(0.05));
        k.set(s, 0, other, Expr::c(0.05));
        k.set(s, 1, s, Expr::c(0.05));
        k.set(s, 1, next, Expr::c(0.9));
        k.set(s, 1, other, Expr::c(0.05));
    }
    k
}

pub fn congestion_ring_rewards() -> Rewards {
    let mut r = Rewards::new(names(&["site0", "site1", "site2"]), names(&["stay", "move"]));
    for s in 0..3 {
        let stay = Expr::c(0.6) - Expr::c(0.2) * Expr::mu(s);
        r.set(s, 0, stay.clone());
        r.set(s, 1, stay - Expr::c(0.05));
    }
    r
}

/// Finite-horizon ring started from `(0.2, 0.3, 0.5)`.
pub fn congestion_ring(horizon: usize) -> Result<FhMfg> {
    let mu0 = Distribution::new(vec![0.2, 0.3, 0.5])?;
    FhMfg::new(congestion_ring_kernel(), congestion_ring_rewards(), horizon, mu0)
}

/// Discounted ring.
pub fn congestion_ring_stat(gamma: f64) -> Result<StatMfg> {
    StatMfg::new(congestion_ring_kernel(), congestion_ring_rewards(), gamma, None)
}

/// Two states, two actions. Switching succeeds with a probability that
/// falls as the target fills up, and occupying `b` pays more when it is
/// sparsely populated.
pub fn crowd_switch(horizon: usize) -> Result<FhMfg> {
    let st = names(&["a", "b"]);
    let ac = names(&["keep", "switch"]);
    let mut k = Kernel::new(st.clone(), ac.clone());
    k.set(0, 0, 0, Expr::c(1.0));
    k.set(1, 0, 1, Expr::c(1.0));
    let p_ab = Expr::c(0.9) - Expr::c(0.5) * Expr::mu(1);
    let p_ba = Expr::c(0.9) - Expr::c(0.5) * Expr::mu(0);
    k.set(0, 1, 1, p_ab.clone());
    k.set(0, 1, 0, Expr::c(1.0) - p_ab);
    k.set(1, 1, 0, p_ba.clone());
    k.set(1, 1, 1, Expr::c(1.0) - p_ba);
    let mut r = Rewards::new(st, ac);
    r.set_all_actions(0, Expr::c(0.5));
    r.set_all_actions(1, Expr::c(1.0) - Expr::mu(1));
    FhMfg::new(k, r, horizon, Distribution::new(vec![0.7, 0.3])?)
}

/// Three-state line where agents walk toward a bar at the right end whose
/// reward is capped by crowding: `R(bar) = min(1, 1.5 - 2 mu(bar))`.
pub fn beach_bar(horizon: usize) -> Result<FhMfg> {
    let st = names(&["left", "mid", "bar"]);
    let ac = names(&["stay", "right"]);
    let mut k = Kernel::new(st.clone(), ac.clone());
    for s in 0..3 {
        k.set(s, 0, s, Expr::c(1.0));
        let next = (s + 1).min(2);
        k.set(s, 1, next, Expr::c(1.0));
    }
    let mut r = Rewards::new(st, ac);
    r.set_all_actions(0, Expr::c(0.2));
    r.set_all_actions(1, Expr::c(0.3));
    let bar = Expr::clamp(1.0, Expr::c(1.5) - Expr::c(2.0) * Expr::mu(2));
    r.set_all_actions(2, bar);
    FhMfg::new(k, r, horizon, Distribution::new(vec![0.5, 0.5, 0.0])?)
}

/// Every named game shipped with the library.
pub fn shipped_games() -> Result<Vec<(&'static str, Game)>> {
    let (a, b) = matching_pennies();
    Ok(vec![
        ("congestion-ring", Game::Fh(congestion_ring(4)?)),
        ("congestion-ring-stat", Game::Stat(congestion_ring_stat(0.9)?)),
        ("crowd-switch", Game::Fh(crowd_switch(3)?)),
        ("beach-bar", Game::Fh(beach_bar(3)?)),
        ("fh-lower", Game::Fh(build_fh_lower(&FhLowerParams::default())?)),
        ("stat-lower", Game::Stat(build_stat_lower(&StatLowerParams::default())?)),
        ("reference-statdist", Game::Stat(gcircuit_to_statdist(&reference_circuit())?.game)),
        ("reference-fh2", Game::Fh(gcircuit_to_fh2(&reference_circuit())?.game)),
        ("matching-pennies-fh2", Game::Fh(nash2_to_fh2(&a, &b)?.game)),
    ])
}

/// Looks up a shipped game by name.
pub fn shipped_game(name: &str) -> Result<Option<Game>> {
    Ok(shipped_games()?.into_iter().find(|(n, _)| *n == name).map(|(_, g)| g))
}
