//! The two six-state lower-bound games and their named policies.
//!
//! States are, in order, `sLeft, sRight, sLA, sLB, sRA, sRB`; actions are
//! `aA, aB`. From a side state the action picks one of that side's two
//! memory states, and from a memory state every agent moves back to a side
//! state with probabilities driven by a steep piecewise-linear switch of the
//! population. Rewards on memory states favor being on the majority side.
//!
//! Both games are defined on the whole simplex. In the finite-horizon game
//! the side masses read by the switch and by the majority term include the
//! opposite side state (`mu(sRight)` counts towards the left group), which
//! changes nothing at odd steps where side states are empty. In the
//! stationary game the switch reads the symmetric share
//! `(1 + Q_L - Q_R) / 2`, which equals `Q_L` whenever the memory states
//! hold at least 4/9 of the mass.

use crate::error::{Error, Result};
use crate::expr::{u_clamp, Expr};
use crate::game::{names, Distribution, FhMfg, Kernel, Policy, PolicySeq, Rewards, StatMfg};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const LA: usize = 2;
pub const LB: usize = 3;
pub const RA: usize = 4;
pub const RB: usize = 5;
pub const ACT_A: usize = 0;
pub const ACT_B: usize = 1;

pub const STATE_NAMES: [&str; 6] = ["sLeft", "sRight", "sLA", "sLB", "sRA", "sRB"];
pub const ACTION_NAMES: [&str; 2] = ["aA", "aB"];

/// Parameters of the finite-horizon game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhLowerParams {
    /// Half-width of the switch's linear band.
    pub eps: f64,
    /// Weight of the anti-crowding term.
    pub alpha: f64,
    /// Bonus for playing `aB` on a memory state.
    pub beta: f64,
    pub horizon: usize,
}

impl Default for FhLowerParams {
    fn default() -> Self {
        FhLowerParams { eps: 1.0 / 16.0, alpha: 0.05, beta: 0.05, horizon: 2 }
    }
}

impl FhLowerParams {
    pub fn with_horizon(horizon: usize) -> Self {
        FhLowerParams { horizon, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.eps, self.alpha, self.beta)?;
        if self.horizon == 0 {
            return Err(Error::Domain("horizon must be positive".into()));
        }
        Ok(())
    }
}

/// Parameters of the stationary game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatLowerParams {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for StatLowerParams {
    fn default() -> Self {
        StatLowerParams { eps: 1.0 / 6.0, alpha: 0.05, beta: 0.05, gamma: 0.8 }
    }
}

impl StatLowerParams {
    /// Default parameters with the anti-crowding weight `min(0.05, e^-N)`.
    pub fn for_agents(n: usize, gamma: f64) -> Self {
        let alpha = 0.05f64.min((-(n as f64)).exp()).max(f64::MIN_POSITIVE);
        StatLowerParams { alpha, gamma, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.eps, self.alpha, self.beta)?;
        if !(self.gamma > std::f64::consts::FRAC_1_SQRT_2 && self.gamma < 1.0) {
            return Err(Error::Domain(format!("discount {} outside (1/sqrt 2, 1)", self.gamma)));
        }
        Ok(())
    }
}

fn check_common(eps: f64, alpha: f64, beta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("switch half-width {eps} outside (0, 1/2)")));
    }
    if !(alpha > 0.0 && beta > 0.0 && alpha + beta < 1.0 && alpha < 0.25) {
        return Err(Error::Domain(format!(
            "need alpha, beta > 0, alpha + beta < 1 and alpha < 1/4 (alpha {alpha}, beta {beta})"
        )));
    }
    Ok(())
}

/// Majority term: `(x / max(x, y), y / max(x, y))`.
pub fn g_map(x: f64, y: f64) -> (f64, f64) {
    let m = x.max(y);
    (x / m, y / m)
}

/// Anti-crowding term: `(u_1(4 y), u_1(4 x))`.
pub fn h_map(x: f64, y: f64) -> (f64, f64) {
    (u_clamp(1.0, 4.0 * y), u_clamp(1.0, 4.0 * x))
}

fn ratio(x: &Expr, y: &Expr) -> Expr {
    x.clone() / Expr::max(x.clone(), y.clone())
}

fn crowd(other: usize) -> Expr {
    Expr::clamp(1.0, Expr::c(4.0) * Expr::mu(other))
}

/// Memory-state rewards shared by both games. `left` and `right` are the
/// majority arguments for the left and right groups.
fn memory_rewards(rewards: &mut Rewards, left: &Expr, right: &Expr, alpha: f64, beta: f64) {
    let base = 1.0 - alpha - beta;
    let rows = [
        (LA, ratio(left, right), LB),
        (LB, ratio(right, left), LA),
        (RA, ratio(right, left), RB),
        (RB, ratio(left, right), RA),
    ];
    for (s, majority, other) in rows {
        let common = Expr::c(base) * majority + Expr::c(alpha) * crowd(other);
        rewards.set(s, ACT_A, common.clone());
        rewards.set(s, ACT_B, common + Expr::c(beta));
    }
}

fn side_transitions(kernel: &mut Kernel) {
    kernel.set(LEFT, ACT_A, LA, Expr::c(1.0));
    kernel.set(LEFT, ACT_B, LB, Expr::c(1.0));
    kernel.set(RIGHT, ACT_A, RA, Expr::c(1.0));
    kernel.set(RIGHT, ACT_B, RB, Expr::c(1.0));
}

fn tables() -> (Kernel, Rewards) {
    let st = names(&STATE_NAMES);
    let ac = names(&ACTION_NAMES);
    (Kernel::new(st.clone(), ac.clone()), Rewards::new(st, ac))
}

/// The finite-horizon lower-bound game.
pub fn build_fh_lower(p: &FhLowerParams) -> Result<FhMfg> {
    p.validate()?;
    let (mut kernel, mut rewards) = tables();
    side_transitions(&mut kernel);
    let left = Expr::mu_sum(&[LA, LB, RIGHT]);
    let right = Expr::mu_sum(&[RA, RB, LEFT]);
    for s in [LA, LB, RA, RB] {
        kernel.set_all_actions(s, LEFT, Expr::omega(p.eps, left.clone()));
        kernel.set_all_actions(s, RIGHT, Expr::omega(p.eps, right.clone()));
    }
    memory_rewards(&mut rewards, &left, &right, p.alpha, p.beta);
    let mut mu0 = vec![0.0; 6];
    mu0[LEFT] = 0.5;
    mu0[RIGHT] = 0.5;
    FhMfg::new(kernel, rewards, p.horizon, Distribution::new(mu0)?)
}

/// Equilibrium of the finite-horizon game: uniform at even steps, `aB` at
/// odd steps.
pub fn fh_ne_policy(horizon: usize) -> PolicySeq {
    (0..horizon)
        .map(|h| if h % 2 == 0 { Policy::uniform(6, 2) } else { Policy::deterministic(&[ACT_B; 6], 2) })
        .collect()
}

/// Time-homogeneous deviation exploiting finite-population drift: `aA` on
/// both side states (so the agent lands on its own side's majority-rewarded
/// memory state) and `aB` on memory states.
pub fn fh_br_policy(horizon: usize) -> PolicySeq {
    vec![Policy::deterministic(&[ACT_A, ACT_A, ACT_B, ACT_B, ACT_B, ACT_B], 2); horizon]
}

/// Deviation playing `aA` at `sLeft` and `aB` at `sRight`. It lands on a
/// memory state whose majority term favors the left group from either side,
/// so it earns no systematic drift advantage.
pub fn fh_side_split_policy(horizon: usize) -> PolicySeq {
    vec![Policy::deterministic(&[ACT_A, ACT_B, ACT_B, ACT_B, ACT_B, ACT_B], 2); horizon]
}

/// The stationary lower-bound game.
pub fn build_stat_lower(p: &StatLowerParams) -> Result<StatMfg> {
    p.validate()?;
    let (mut kernel, mut rewards) = tables();
    side_transitions(&mut kernel);
    let den = Expr::max(Expr::mu_sum(&[LA, LB, RA, RB]), Expr::c(4.0 / 9.0));
    let q_l = Expr::mu_sum(&[LA, LB]) / den.clone();
    let q_r = Expr::mu_sum(&[RA, RB]) / den;
    let left = (Expr::c(1.0) + q_l.clone() - q_r.clone()) / Expr::c(2.0);
    let right = (Expr::c(1.0) + q_r - q_l) / Expr::c(2.0);
    for s in [LA, LB, RA, RB] {
        kernel.set_all_actions(s, RIGHT, Expr::omega(p.eps, left.clone()));
        kernel.set_all_actions(s, LEFT, Expr::omega(p.eps, right.clone()));
    }
    memory_rewards(&mut rewards, &left, &right, p.alpha, p.beta);
    StatMfg::new(kernel, rewards, p.gamma, Some(stat_ne().0))
}

/// Stationary equilibrium: mass 1/4 on each side state, 1/8 on each memory
/// state; uniform play on side states and `aB` on memory states.
pub fn stat_ne() -> (Distribution, Policy) {
    let mu = Distribution::new(vec![0.25, 0.25, 0.125, 0.125, 0.125, 0.125]).expect("valid");
    let pi = Policy::new(vec![
        vec![0.5, 0.5],
        vec![0.5, 0.5],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
    ])
    .expect("valid");
    (mu, pi)
}

/// Stationary deviation: `aA` on both side states, `aB` on memory states.
pub fn stat_br_policy() -> Policy {
    Policy::deterministic(&[ACT_A, ACT_A, ACT_B, ACT_B, ACT_B, ACT_B], 2)
}
