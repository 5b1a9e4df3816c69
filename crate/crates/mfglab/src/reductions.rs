//! Compilers from generalized circuits and bimatrix games into mean-field
//! games, with the matching solution extractors.
//!
//! * [`gcircuit_to_statdist`] builds a single-action stationary game whose
//!   stable distributions encode approximately satisfying assignments.
//! * [`gcircuit_to_fh2`] builds a two-step game whose equilibria encode them
//!   through the step-0 policy at per-node base states.
//! * [`nash2_to_fh2`] builds a two-step game with rewards affine in the
//!   population, whose equilibria encode approximate bimatrix equilibria.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{u_clamp, Expr};
use crate::format::{format_reals, parse_reals};
use crate::game::{Distribution, FhMfg, Kernel, Policy, Rewards, StatMfg};
use crate::gcircuit::{Assignment, GCircuit, Gate};

/// Default comparator parameter; the comparator band has width `8 eps`.
pub const DEFAULT_COMPARATOR_EPS: f64 = 0.01;
/// Floor of the denominators in the stationary gadgets.
pub const STATDIST_B: f64 = 0.25;
/// Largest supported number of gate outputs; beyond this `theta` loses
/// resolution against the unit mass.
pub const STATDIST_MAX_OUTPUTS: u64 = 1 << 48;
/// Placeholder discount of the compiled stationary game. The game has one
/// action and zero rewards, so the value plays no role.
pub const STATDIST_GAMMA: f64 = 0.5;

/// Single-action stationary game compiled from a circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct StatDistInstance {
    pub game: StatMfg,
    pub circuit: GCircuit,
    /// State of each node; `None` for nodes that are not gate outputs.
    pub node_state: Vec<Option<usize>>,
    pub base: usize,
    /// Mass scale: a node with value 1 holds `theta` mass.
    pub theta: f64,
    pub b: f64,
    /// Comparator parameter.
    pub eps: f64,
}

/// [`gcircuit_to_statdist_with`] at the default comparator parameter.
pub fn gcircuit_to_statdist(c: &GCircuit) -> Result<StatDistInstance> {
    gcircuit_to_statdist_with(c, DEFAULT_COMPARATOR_EPS)
}

/// One state `s_v` per gate output plus a base state. Each `s_v` returns
/// to the base with probability 1 and is fed from the base with a
/// gadget-specific rate, so at a stable distribution `mu(s_v)` equals the
/// gadget value times `theta`.
pub fn gcircuit_to_statdist_with(c: &GCircuit, eps: f64) -> Result<StatDistInstance> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("comparator parameter {eps} must be positive")));
    }
    let outputs = c.outputs();
    let n_out = outputs.len();
    if n_out as u64 >= STATDIST_MAX_OUTPUTS {
        return Err(Error::SizeGuard(format!("{n_out} gate outputs exceed the supported 2^48")));
    }
    let theta = if n_out == 0 { 0.0 } else { 1.0 / (8.0 * n_out as f64) };
    let b = STATDIST_B;

    let base = 0;
    let mut states = vec!["base".to_string()];
    let mut node_state = vec![None; c.nodes().len()];
    for &v in &outputs {
        node_state[v] = Some(states.len());
        states.push(format!("s_{}", c.nodes()[v]));
    }
    let actions = vec!["a".to_string()];
    let mut kernel = Kernel::new(states.clone(), actions.clone());

    // Reads of a node's population; nodes without a state read as 0.
    let read = |v: usize| node_state[v].map_or(Expr::c(0.0), Expr::mu);
    let denom = || Expr::max(Expr::c(b), Expr::mu(base));

    let mut inflow = Vec::with_capacity(n_out);
    for g in c.gates() {
        let s = node_state[g.out()].expect("gate output has a state");
        let num = match *g {
            Gate::Assign { value, .. } => Expr::c(if value { theta } else { 0.0 }),
            Gate::Affine { a, b: w, in1, in2, .. } => {
                let term = |coef: f64, v: Option<usize>| v.map(|v| Expr::c(coef) * Expr::clamp(theta, read(v)));
                let sum = match (term(a, in1), term(w, in2)) {
                    (Some(x), Some(y)) => x + y,
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => Expr::c(0.0),
                };
                Expr::clamp(theta, sum)
            }
            Gate::Compare { in1, in2, .. } => {
                let scaled = |v: usize| Expr::clamp(theta, read(v)) / Expr::c(theta);
                Expr::c(theta) * Expr::brittle(8.0 * eps, scaled(in2), scaled(in1))
            }
        };
        let rate = if num.is_constant() && num.eval(&[]).ok() == Some(0.0) { Expr::c(0.0) } else { num / denom() };
        kernel.set(base, 0, s, rate.clone());
        kernel.set(s, 0, base, Expr::c(1.0));
        inflow.push(rate);
    }
    let stay = inflow.into_iter().fold(Expr::c(1.0), |acc, r| acc - r);
    kernel.set(base, 0, base, stay);

    let rewards = Rewards::new(states, actions);
    let game = StatMfg::new(kernel, rewards, STATDIST_GAMMA, None)?;
    Ok(StatDistInstance { game, circuit: c.clone(), node_state, base, theta, b, eps })
}

/// Reads `p(v) = u_1(mu(s_v) / theta)`; nodes without a state read 0.
pub fn extract_statdist_assignment(inst: &StatDistInstance, mu: &Distribution) -> Result<Assignment> {
    inst.game.check_distribution(mu)?;
    Ok(inst
        .circuit
        .nodes()
        .iter()
        .zip(&inst.node_state)
        .map(|(name, s)| {
            let p = s.map_or(0.0, |s| u_clamp(1.0, mu[s] / inst.theta));
            (name.clone(), p)
        })
        .collect())
}

/// Two-step game compiled from a circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Fh2Instance {
    pub game: FhMfg,
    pub circuit: GCircuit,
    /// `(base, one, zero)` state indices per node.
    pub node_states: Vec<(usize, usize, usize)>,
}

pub const ACT_ONE: usize = 0;
pub const ACT_ZERO: usize = 1;

/// Three states per node: agents start uniformly on the base states and
/// choose between the `1` and `0` states, which are absorbing. Rewards at
/// the `1` and `0` states depend on the step-1 population so that a best
/// response moves the base-state policy toward the gate value.
pub fn gcircuit_to_fh2(c: &GCircuit) -> Result<Fh2Instance> {
    let n = c.nodes().len();
    if n == 0 {
        return Err(Error::Shape("circuit has no nodes".into()));
    }
    let vf = n as f64;
    let mut states = Vec::with_capacity(3 * n);
    let mut node_states = Vec::with_capacity(n);
    for name in c.nodes() {
        let i = states.len();
        states.push(format!("{name}_base"));
        states.push(format!("{name}_1"));
        states.push(format!("{name}_0"));
        node_states.push((i, i + 1, i + 2));
    }
    let actions = vec!["a1".to_string(), "a0".to_string()];
    let mut kernel = Kernel::new(states.clone(), actions.clone());
    for &(base, one, zero) in &node_states {
        kernel.set(base, ACT_ONE, one, Expr::c(1.0));
        kernel.set(base, ACT_ZERO, zero, Expr::c(1.0));
        kernel.set_all_actions(one, one, Expr::c(1.0));
        kernel.set_all_actions(zero, zero, Expr::c(1.0));
    }

    let scaled = |v: usize| Expr::c(vf) * Expr::mu(node_states[v].1);
    let mut rewards = Rewards::new(states, actions);
    for g in c.gates() {
        let (_, one, zero) = node_states[g.out()];
        let (r1, r0) = match *g {
            Gate::Assign { value, .. } => {
                let z = f64::from(u8::from(value));
                (Expr::c(z), Expr::c(1.0 - z))
            }
            Gate::Affine { a, b, in1, in2, .. } => {
                let term = |coef: f64, v: Option<usize>| v.map(|v| Expr::c(coef) * scaled(v));
                let sum = match (term(a, in1), term(b, in2)) {
                    (Some(x), Some(y)) => x + y,
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => Expr::c(0.0),
                };
                let target = Expr::clamp(1.0, sum);
                let own = scaled(g.out());
                (Expr::clamp(1.0, target.clone() - own.clone()), Expr::clamp(1.0, own - target))
            }
            Gate::Compare { in1, in2, .. } => {
                (Expr::clamp(1.0, scaled(in2) - scaled(in1)), Expr::clamp(1.0, scaled(in1) - scaled(in2)))
            }
        };
        rewards.set_all_actions(one, r1);
        rewards.set_all_actions(zero, r0);
    }

    let mut mu0 = vec![0.0; 3 * n];
    for &(base, _, _) in &node_states {
        mu0[base] = 1.0 / vf;
    }
    let game = FhMfg::new(kernel, rewards, 2, Distribution::new(mu0)?)?;
    Ok(Fh2Instance { game, circuit: c.clone(), node_states })
}

/// Reads `p(v) = pi_0(a1 | s_{v,base})`, the only decision taken at the
/// base states.
pub fn extract_fh2_assignment(inst: &Fh2Instance, pis: &[Policy]) -> Result<Assignment> {
    inst.game.check_policy_seq(pis)?;
    Ok(inst
        .circuit
        .nodes()
        .iter()
        .zip(&inst.node_states)
        .map(|(name, &(base, _, _))| (name.clone(), pis[0].prob(base, ACT_ONE)))
        .collect())
}

/// Row-major payoff matrix.
pub type Matrix = Vec<Vec<f64>>;

/// Two-step game compiled from a bimatrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct NashFhInstance {
    pub game: FhMfg,
    pub k1: usize,
    pub k2: usize,
    /// Base state of each player.
    pub base: [usize; 2],
    /// First strategy state of each player; strategies are contiguous.
    pub first_strategy: [usize; 2],
}

/// Checks shape and `[0, 1]` range; returns `(K1, K2)`.
pub fn check_bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<(usize, usize)> {
    let k1 = a.len();
    let k2 = a.first().map_or(0, Vec::len);
    if k1 == 0 || k2 == 0 {
        return Err(Error::Shape("payoff matrices must be non-empty".into()));
    }
    if b.len() != k1 || a.iter().chain(b).any(|r| r.len() != k2) {
        return Err(Error::Shape(format!("payoff matrices must both be {k1}x{k2}")));
    }
    if a.iter().chain(b).flatten().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::Domain("payoffs must lie in [0, 1]".into()));
    }
    Ok((k1, k2))
}

/// States `base1, base2, s1_1..s1_K1, s2_1..s2_K2` and actions `a1..aK`
/// with `K = max(K1, K2)`. Action `i` at a player's base moves to that player's strategy
/// state `i`; actions beyond the player's strategy count keep the agent at
/// its zero-reward base. Strategy states are absorbing, and their rewards
/// are `1/2 + 1/2` times the expected payoff against the other player's
/// step-1 population.
pub fn nash2_to_fh2(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<NashFhInstance> {
    let (k1, k2) = check_bimatrix(a, b)?;
    let na = k1.max(k2);
    let base = [0, 1];
    let first = [2, 2 + k1];
    let mut states = vec!["base1".to_string(), "base2".to_string()];
    states.extend((1..=k1).map(|i| format!("s1_{i}")));
    states.extend((1..=k2).map(|i| format!("s2_{i}")));
    let actions: Vec<String> = (1..=na).map(|i| format!("a{i}")).collect();

    let mut kernel = Kernel::new(states.clone(), actions.clone());
    for (p, k) in [(0, k1), (1, k2)] {
        for act in 0..na {
            let next = if act < k { first[p] + act } else { base[p] };
            kernel.set(base[p], act, next, Expr::c(1.0));
        }
        for i in 0..k {
            kernel.set_all_actions(first[p] + i, first[p] + i, Expr::c(1.0));
        }
    }

    let mut rewards = Rewards::new(states, actions);
    for i in 0..k1 {
        let sum = (0..k2)
            .filter(|&j| a[i][j] != 0.0)
            .map(|j| Expr::c(a[i][j]) * Expr::mu(first[1] + j))
            .reduce(|x, y| x + y)
            .unwrap_or(Expr::c(0.0));
        rewards.set_all_actions(first[0] + i, Expr::c(0.5) + Expr::c(0.5) * sum);
    }
    for j in 0..k2 {
        let sum = (0..k1)
            .filter(|&i| b[i][j] != 0.0)
            .map(|i| Expr::c(b[i][j]) * Expr::mu(first[0] + i))
            .reduce(|x, y| x + y)
            .unwrap_or(Expr::c(0.0));
        rewards.set_all_actions(first[1] + j, Expr::c(0.5) + Expr::c(0.5) * sum);
    }

    let mut mu0 = vec![0.0; 2 + k1 + k2];
    mu0[base[0]] = 0.5;
    mu0[base[1]] = 0.5;
    let game = FhMfg::new(kernel, rewards, 2, Distribution::new(mu0)?)?;
    Ok(NashFhInstance { game, k1, k2, base, first_strategy: first })
}

/// Reads each player's mixed strategy from the step-0 policy at its base
/// state, restricted to its own strategies and renormalized.
pub fn extract_nash_strategies(inst: &NashFhInstance, pis: &[Policy]) -> Result<(Vec<f64>, Vec<f64>)> {
    inst.game.check_policy_seq(pis)?;
    let read = |p: usize, k: usize| -> Result<Vec<f64>> {
        let row = &pis[0].row(inst.base[p])[..k];
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroSupportOnValidStrategies { player: p + 1 });
        }
        Ok(row.iter().map(|x| x / mass).collect())
    };
    Ok((read(0, inst.k1)?, read(1, inst.k2)?))
}

/// Regrets of a mixed profile in a bimatrix game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashVerdict {
    pub row_regret: f64,
    pub col_regret: f64,
    pub eps: f64,
    pub passed: bool,
}

/// Best pure deviation payoff minus the profile payoff, for both players.
pub fn verify_bimatrix_nash(a: &[Vec<f64>], b: &[Vec<f64>], s1: &[f64], s2: &[f64], eps: f64) -> Result<NashVerdict> {
    let (k1, k2) = check_bimatrix(a, b)?;
    if s1.len() != k1 || s2.len() != k2 {
        return Err(Error::Shape("strategy lengths differ from the matrix shape".into()));
    }
    Distribution::new(s1.to_vec())?;
    Distribution::new(s2.to_vec())?;
    let row_pay: Vec<f64> = (0..k1).map(|i| (0..k2).map(|j| a[i][j] * s2[j]).sum()).collect();
    let col_pay: Vec<f64> = (0..k2).map(|j| (0..k1).map(|i| b[i][j] * s1[i]).sum()).collect();
    let v1: f64 = s1.iter().zip(&row_pay).map(|(x, y)| x * y).sum();
    let v2: f64 = s2.iter().zip(&col_pay).map(|(x, y)| x * y).sum();
    let best = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let row_regret = (best(&row_pay) - v1).max(0.0);
    let col_regret = (best(&col_pay) - v2).max(0.0);
    Ok(NashVerdict { row_regret, col_regret, eps, passed: row_regret <= eps && col_regret <= eps })
}

/// Matching pennies with payoffs in `[0, 1]`.
pub fn matching_pennies() -> (Matrix, Matrix) {
    let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let b = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    (a, b)
}

/// Prisoner's dilemma scaled into `[0, 1]`; defecting (strategy 2)
/// strictly dominates for both players.
pub fn prisoners_dilemma() -> (Matrix, Matrix) {
    let a = vec![vec![2.0 / 3.0, 0.0], vec![1.0, 1.0 / 3.0]];
    let b = vec![vec![2.0 / 3.0, 1.0], vec![0.0, 1.0 / 3.0]];
    (a, b)
}

/// Parses a bimatrix file: an `A:` and a `B:` line, rows separated by `;`
/// and entries by `,`. `#` starts a comment.
pub fn parse_bimatrix(text: &str) -> Result<(Matrix, Matrix)> {
    let (mut a, mut b) = (None, None);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::File { line: i + 1, msg };
        let (key, rest) = line.split_once(':').ok_or_else(|| err("expected `A:` or `B:`".into()))?;
        let m = rest.split(';').map(parse_reals).collect::<Result<Matrix>>().map_err(|e| err(e.to_string()))?;
        let slot = match key.trim() {
            "A" => &mut a,
            "B" => &mut b,
            other => return Err(err(format!("unknown matrix `{other}`"))),
        };
        if slot.replace(m).is_some() {
            return Err(err(format!("matrix `{}` given twice", key.trim())));
        }
    }
    let a = a.ok_or_else(|| Error::File { line: 0, msg: "missing `A:` line".into() })?;
    let b = b.ok_or_else(|| Error::File { line: 0, msg: "missing `B:` line".into() })?;
    check_bimatrix(&a, &b)?;
    Ok((a, b))
}

/// Renders a bimatrix game in the format read by [`parse_bimatrix`].
pub fn write_bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> String {
    let rows = |m: &[Vec<f64>]| m.iter().map(|r| format_reals(r)).collect::<Vec<_>>().join("; ");
    format!("A: {}\nB: {}\n", rows(a), rows(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bimatrix_text_round_trips() {
        let (a, b) = prisoners_dilemma();
        let text = write_bimatrix(&a, &b);
        assert_eq!(parse_bimatrix(&text).unwrap(), (a, b));
        assert!(parse_bimatrix("A: 1, 0\n").is_err());
        assert!(parse_bimatrix("A: 1, 0\nB: 0\n").is_err());
        assert!(parse_bimatrix("A: 2\nB: 0\n").is_err());
    }
    use crate::gcircuit::reference_circuit;
    use crate::mfg::{lambda_flow, stat_stability_residual};

    #[test]
    fn assign_rate_is_theta_over_denominator() {
        let c = GCircuit::parse("ASSIGN v = 1").unwrap();
        let inst = gcircuit_to_statdist(&c).unwrap();
        let s = inst.node_state[0].unwrap();
        let e = inst.game.kernel.get(inst.base, 0, s).unwrap();
        assert_eq!(inst.theta, 0.125);
        assert!((e.eval(&[0.9, 0.1]).unwrap() - 0.125 / 0.9).abs() < 1e-15);
        assert!((e.eval(&[0.1, 0.9]).unwrap() - 0.125 / 0.25).abs() < 1e-15);
        assert_eq!(inst.game.kernel.get(s, 0, inst.base).unwrap().eval(&[0.5, 0.5]).unwrap(), 1.0);
        assert!(inst.game.kernel.get(s, 0, s).is_none());
    }

    #[test]
    fn empty_circuit_is_a_single_absorbing_state() {
        let c = GCircuit::new(vec![], vec![]).unwrap();
        let inst = gcircuit_to_statdist(&c).unwrap();
        assert_eq!(inst.game.n_states(), 1);
        let km = inst.game.kernel.eval(&[1.0]).unwrap();
        assert_eq!(km.row(0, 0), &[1.0]);
    }

    #[test]
    fn reference_fixed_point_is_exact() {
        let inst = gcircuit_to_statdist(&reference_circuit()).unwrap();
        let t = inst.theta;
        assert_eq!(t, 1.0 / 24.0);
        let mu = Distribution::new(vec![1.0 - 2.5 * t, t, t / 2.0, t]).unwrap();
        let pi = Policy::uniform(4, 1);
        assert!(stat_stability_residual(&inst.game.kernel, &mu, &pi).unwrap() <= 1e-12);
        let p = extract_statdist_assignment(&inst, &mu).unwrap();
        assert_eq!(p["a"], 1.0);
        assert_eq!(p["b"], 0.5);
        assert_eq!(p["c"], 1.0);
    }

    #[test]
    fn extraction_reads_linearly() {
        let c = GCircuit::parse("ASSIGN v = 1").unwrap();
        let inst = gcircuit_to_statdist(&c).unwrap();
        let t = inst.theta;
        for (m, want) in [(t, 1.0), (0.0, 0.0), (t / 2.0, 0.5), (3.0 * t, 1.0)] {
            let mu = Distribution::new(vec![1.0 - m, m]).unwrap();
            assert_eq!(extract_statdist_assignment(&inst, &mu).unwrap()["v"], want);
        }
    }

    #[test]
    fn non_output_inputs_read_zero() {
        let c = GCircuit::parse("nodes: x, y\nAFF y = 1*x").unwrap();
        let inst = gcircuit_to_statdist(&c).unwrap();
        assert_eq!(inst.game.n_states(), 2);
        assert_eq!(inst.node_state, vec![None, Some(1)]);
        let p = extract_statdist_assignment(&inst, &Distribution::uniform(2)).unwrap();
        assert_eq!(p["x"], 0.0);
    }

    #[test]
    fn fh2_assign_rewards_and_non_outputs() {
        let c = GCircuit::parse("nodes: v, w\nASSIGN v = 1").unwrap();
        let inst = gcircuit_to_fh2(&c).unwrap();
        let mu = vec![1.0 / 6.0; 6];
        let r = inst.game.rewards.eval(&mu).unwrap();
        let (vb, v1, v0) = inst.node_states[0];
        let (wb, w1, w0) = inst.node_states[1];
        assert_eq!((r.get(v1, 0), r.get(v0, 1)), (1.0, 0.0));
        for s in [vb, wb, w1, w0] {
            assert_eq!((r.get(s, 0), r.get(s, 1)), (0.0, 0.0));
        }
        assert_eq!(inst.game.mu0[vb], 0.5);
    }

    #[test]
    fn fh2_extraction_reads_step_zero() {
        let inst = gcircuit_to_fh2(&reference_circuit()).unwrap();
        let pis = vec![Policy::uniform(9, 2); 2];
        let p = extract_fh2_assignment(&inst, &pis).unwrap();
        assert!(p.values().all(|&x| x == 0.5));
        let det = Policy::deterministic(&[ACT_ONE; 9], 2);
        let p = extract_fh2_assignment(&inst, &[det.clone(), Policy::uniform(9, 2)]).unwrap();
        assert!(p.values().all(|&x| x == 1.0));
    }

    #[test]
    fn fh2_exact_assignment_gives_zero_gate_rewards() {
        // Policy a1 with probability p(v) at each base reproduces V mu(s_{v,1}) = p(v).
        let inst = gcircuit_to_fh2(&reference_circuit()).unwrap();
        let p = [1.0, 0.5, 1.0];
        let rows: Vec<Vec<f64>> =
            (0..9).map(|s| if s % 3 == 0 { vec![p[s / 3], 1.0 - p[s / 3]] } else { vec![0.5, 0.5] }).collect();
        let pi = Policy::new(rows).unwrap();
        let flow = lambda_flow(&inst.game, &[pi.clone(), pi]).unwrap();
        let r = inst.game.rewards.eval(&flow[1]).unwrap();
        let (_, b1, b0) = inst.node_states[1];
        assert_eq!((r.get(b1, 0), r.get(b0, 0)), (0.0, 0.0));
    }

    #[test]
    fn nash_rewards_are_affine() {
        let (a, b) = matching_pennies();
        let inst = nash2_to_fh2(&a, &b).unwrap();
        assert_eq!(inst.game.n_states(), 6);
        let mu = [0.25, 0.25, 0.0, 0.0, 0.25, 0.25];
        let r = inst.game.rewards.eval(&mu).unwrap();
        assert_eq!(r.get(inst.first_strategy[0], 0), 0.625);
        assert_eq!(r.get(inst.base[0], 0), 0.0);
    }

    #[test]
    fn nash_overflow_stays_at_base() {
        let a = vec![vec![0.1, 0.2, 0.3], vec![0.4, 0.5, 0.6]];
        let inst = nash2_to_fh2(&a, &a).unwrap();
        assert_eq!(inst.game.n_actions(), 3);
        let km = inst.game.kernel.eval(&inst.game.mu0).unwrap();
        assert_eq!(km.row(inst.base[0], 2)[inst.base[0]], 1.0);
        assert_eq!(km.row(inst.base[1], 2)[inst.first_strategy[1] + 2], 1.0);
    }

    #[test]
    fn nash_extraction_renormalizes() {
        let a = vec![vec![0.1, 0.2, 0.3], vec![0.4, 0.5, 0.6]];
        let inst = nash2_to_fh2(&a, &a).unwrap();
        let mut rows = vec![vec![1.0 / 3.0; 3]; inst.game.n_states()];
        rows[inst.base[0]] = vec![0.4, 0.4, 0.2];
        let pi = Policy::new(rows.clone()).unwrap();
        let (s1, s2) = extract_nash_strategies(&inst, &[pi.clone(), pi]).unwrap();
        assert_eq!(s1, vec![0.5, 0.5]);
        assert_eq!(s2.len(), 3);
        rows[inst.base[0]] = vec![0.0, 0.0, 1.0];
        let pi = Policy::new(rows).unwrap();
        assert_eq!(
            extract_nash_strategies(&inst, &[pi.clone(), pi]),
            Err(Error::ZeroSupportOnValidStrategies { player: 1 })
        );
    }

    #[test]
    fn bimatrix_verdicts() {
        let (a, b) = matching_pennies();
        let v = verify_bimatrix_nash(&a, &b, &[0.5, 0.5], &[0.5, 0.5], 1e-12).unwrap();
        assert_eq!((v.row_regret, v.col_regret, v.passed), (0.0, 0.0, true));
        let v = verify_bimatrix_nash(&a, &b, &[1.0, 0.0], &[1.0, 0.0], 0.5).unwrap();
        assert_eq!((v.row_regret, v.col_regret, v.passed), (0.0, 1.0, false));
        let (a, b) = prisoners_dilemma();
        let v = verify_bimatrix_nash(&a, &b, &[0.0, 1.0], &[0.0, 1.0], 1e-12).unwrap();
        assert!(v.passed);
    }

    #[test]
    fn bimatrix_validation() {
        assert!(nash2_to_fh2(&[vec![1.5]], &[vec![0.0]]).is_err());
        assert!(nash2_to_fh2(&[vec![0.5, 0.5]], &[vec![0.0]]).is_err());
        assert!(nash2_to_fh2(&[], &[]).is_err());
    }
}
