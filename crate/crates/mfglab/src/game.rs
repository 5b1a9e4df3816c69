//! Finite games: distributions, policies, kernel and reward tables.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Entries below this are treated as rounding noise and clamped to zero.
pub const NEG_TOL: f64 = 1e-12;
/// Allowed deviation of a probability vector's sum from one.
pub const SUM_TOL: f64 = 1e-9;

/// Probability vector over states, in declared state order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(mut v: Vec<f64>) -> Result<Self> {
        normalize_row(&mut v).map_err(Error::InvalidDistribution)?;
        Ok(Distribution(v))
    }

    pub fn uniform(n: usize) -> Self {
        Distribution(vec![1.0 / n as f64; n])
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Distribution(v)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn l1(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn linf(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl Deref for Distribution {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Length-H sequence of population distributions.
pub type Flow = Vec<Distribution>;

/// Clamps tiny negatives and checks the sum. Returns a message on failure.
fn normalize_row(v: &mut [f64]) -> std::result::Result<(), String> {
    let mut sum = 0.0;
    for x in v.iter_mut() {
        if !x.is_finite() {
            return Err(format!("non-finite entry {x}"));
        }
        if *x < 0.0 {
            if *x < -NEG_TOL {
                return Err(format!("negative entry {x}"));
            }
            *x = 0.0;
        }
        sum += *x;
    }
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(format!("entries sum to {sum}"));
    }
    Ok(())
}

/// Stationary policy: one probability row over actions per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    n_actions: usize,
    rows: Vec<f64>,
}

impl Policy {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_actions = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * n_actions);
        for (s, mut row) in rows.into_iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::InvalidPolicy(format!("row {s} has {} actions", row.len())));
            }
            normalize_row(&mut row).map_err(|m| Error::InvalidPolicy(format!("row {s}: {m}")))?;
            flat.extend(row);
        }
        Ok(Policy { n_actions, rows: flat })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Policy { n_actions, rows: vec![1.0 / n_actions as f64; n_states * n_actions] }
    }

    /// Deterministic policy playing `actions[s]` at state `s`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Self {
        let mut rows = vec![0.0; actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            rows[s * n_actions + a] = 1.0;
        }
        Policy { n_actions, rows }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len().checked_div(self.n_actions).unwrap_or(0)
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.rows[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.rows[s * self.n_actions + a]
    }

    /// `(1 - w) * self + w * other`, row by row.
    pub fn mix(&self, other: &Policy, w: f64) -> Policy {
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a + w * (b - a)).collect();
        Policy { n_actions: self.n_actions, rows }
    }

    /// Largest absolute entry difference.
    pub fn linf(&self, other: &Policy) -> f64 {
        self.rows.iter().zip(&other.rows).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn check_shape(&self, n_states: usize, n_actions: usize) -> Result<()> {
        if self.n_actions != n_actions || self.n_states() != n_states {
            return Err(Error::Shape(format!(
                "policy is {}x{}, game is {n_states}x{n_actions}",
                self.n_states(),
                self.n_actions
            )));
        }
        Ok(())
    }
}

/// Time-indexed policy sequence of length H.
pub type PolicySeq = Vec<Policy>;

/// Transition expressions `P(s' | s, a, mu)`; missing entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    states: Vec<String>,
    actions: Vec<String>,
    entries: Vec<Option<Expr>>,
}

/// Kernel evaluated at one population vector.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n_states: usize,
    n_actions: usize,
    data: Vec<f64>,
}

impl KernelMatrix {
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.data[start..start + self.n_states]
    }

    /// Next-state law of one agent at `s` mixing actions with `weights`.
    pub fn mixed_row(&self, s: usize, weights: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (a, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.row(s, a)) {
                *o += w * p;
            }
        }
    }
}

impl Kernel {
    pub fn new(states: Vec<String>, actions: Vec<String>) -> Self {
        let n = states.len() * actions.len() * states.len();
        Kernel { states, actions, entries: vec![None; n] }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    fn idx(&self, s: usize, a: usize, next: usize) -> usize {
        (s * self.actions.len() + a) * self.states.len() + next
    }

    pub fn set(&mut self, s: usize, a: usize, next: usize, e: Expr) {
        let i = self.idx(s, a, next);
        self.entries[i] = Some(e);
    }

    /// Same expression for every action.
    pub fn set_all_actions(&mut self, s: usize, next: usize, e: Expr) {
        for a in 0..self.actions.len() {
            self.set(s, a, next, e.clone());
        }
    }

    pub fn get(&self, s: usize, a: usize, next: usize) -> Option<&Expr> {
        self.entries[self.idx(s, a, next)].as_ref()
    }

    /// True when no entry reads the population.
    pub fn is_mu_independent(&self) -> bool {
        self.entries.iter().flatten().all(Expr::is_constant)
    }

    /// Evaluates every row at `mu` and checks that each is a distribution.
    pub fn eval(&self, mu: &[f64]) -> Result<KernelMatrix> {
        let (ns, na) = (self.n_states(), self.n_actions());
        let mut data = Vec::with_capacity(ns * na * ns);
        for e in &self.entries {
            data.push(match e {
                Some(e) => e.eval(mu)?,
                None => 0.0,
            });
        }
        for s in 0..ns {
            for a in 0..na {
                let start = (s * na + a) * ns;
                normalize_row(&mut data[start..start + ns]).map_err(|msg| Error::InvalidKernel {
                    state: self.states[s].clone(),
                    action: self.actions[a].clone(),
                    msg,
                })?;
            }
        }
        Ok(KernelMatrix { n_states: ns, n_actions: na, data })
    }
}

/// Reward expressions `R(s, a, mu)`; missing entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewards {
    states: Vec<String>,
    actions: Vec<String>,
    entries: Vec<Option<Expr>>,
}

/// Rewards evaluated at one population vector, indexed `[s * |A| + a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMatrix {
    n_actions: usize,
    data: Vec<f64>,
}

impl RewardMatrix {
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.data[s * self.n_actions + a]
    }

    /// Expected reward at `s` under action weights.
    pub fn mixed(&self, s: usize, weights: &[f64]) -> f64 {
        weights.iter().enumerate().map(|(a, w)| w * self.get(s, a)).sum()
    }
}

impl Rewards {
    pub fn new(states: Vec<String>, actions: Vec<String>) -> Self {
        let n = states.len() * actions.len();
        Rewards { states, actions, entries: vec![None; n] }
    }

    pub fn set(&mut self, s: usize, a: usize, e: Expr) {
        let i = s * self.actions.len() + a;
        self.entries[i] = Some(e);
    }

    pub fn set_all_actions(&mut self, s: usize, e: Expr) {
        for a in 0..self.actions.len() {
            self.set(s, a, e.clone());
        }
    }

    pub fn get(&self, s: usize, a: usize) -> Option<&Expr> {
        self.entries[s * self.actions.len() + a].as_ref()
    }

    /// Evaluates every reward at `mu`, checking the `[0, 1]` range.
    pub fn eval(&self, mu: &[f64]) -> Result<RewardMatrix> {
        let na = self.actions.len();
        let mut data = Vec::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            let mut v = match e {
                Some(e) => e.eval(mu)?,
                None => 0.0,
            };
            if !(-SUM_TOL..=1.0 + SUM_TOL).contains(&v) {
                return Err(Error::RewardOutOfRange {
                    state: self.states[i / na].clone(),
                    action: self.actions[i % na].clone(),
                    value: v,
                });
            }
            v = v.clamp(0.0, 1.0);
            data.push(v);
        }
        Ok(RewardMatrix { n_actions: na, data })
    }
}

/// Deterministic probe set: the barycentre, the vertices, then uniform
/// simplex samples, `count` points in total.
pub fn simplex_probe(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(count);
    if n == 0 {
        return pts;
    }
    pts.push(vec![1.0 / n as f64; n]);
    for i in 0..n {
        if pts.len() >= count {
            break;
        }
        pts.push(Distribution::vertex(n, i).into_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pts.len() < count {
        pts.push(sample_simplex(&mut rng, n));
    }
    pts
}

/// Uniform sample from the probability simplex (normalized exponentials).
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

const PROBE_POINTS: usize = 100;
const PROBE_SEED: u64 = 0x5eed;

fn check_tables(kernel: &Kernel, rewards: &Rewards, extra: Option<&[f64]>) -> Result<()> {
    if kernel.states != rewards.states || kernel.actions != rewards.actions {
        return Err(Error::Shape("kernel and reward tables disagree on states or actions".into()));
    }
    if kernel.states.is_empty() || kernel.actions.is_empty() {
        return Err(Error::Shape("a game needs at least one state and one action".into()));
    }
    let ns = kernel.n_states();
    let bad_index =
        kernel.entries.iter().chain(&rewards.entries).flatten().any(|e| e.max_state().is_some_and(|i| i >= ns));
    if bad_index {
        return Err(Error::Shape("expression reads a state outside the game".into()));
    }
    let mut pts = simplex_probe(ns, PROBE_POINTS, PROBE_SEED);
    if let Some(mu) = extra {
        pts.push(mu.to_vec());
    }
    for mu in &pts {
        kernel.eval(mu)?;
        rewards.eval(mu)?;
    }
    Ok(())
}

/// Finite-horizon mean-field game.
#[derive(Debug, Clone, PartialEq)]
pub struct FhMfg {
    pub kernel: Kernel,
    pub rewards: Rewards,
    pub horizon: usize,
    pub mu0: Distribution,
}

impl FhMfg {
    /// Validates shapes and probes the tables on the simplex.
    pub fn new(kernel: Kernel, rewards: Rewards, horizon: usize, mu0: Distribution) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Domain("horizon must be positive".into()));
        }
        if mu0.len() != kernel.n_states() {
            return Err(Error::Shape("initial distribution length differs from state count".into()));
        }
        check_tables(&kernel, &rewards, Some(&mu0))?;
        Ok(FhMfg { kernel, rewards, horizon, mu0 })
    }

    pub fn states(&self) -> &[String] {
        self.kernel.states()
    }

    pub fn actions(&self) -> &[String] {
        self.kernel.actions()
    }

    pub fn n_states(&self) -> usize {
        self.kernel.n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.kernel.n_actions()
    }

    /// Same game with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Domain("horizon must be positive".into()));
        }
        Ok(FhMfg { horizon, ..self.clone() })
    }

    pub fn check_policy_seq(&self, pis: &[Policy]) -> Result<()> {
        if pis.len() != self.horizon {
            return Err(Error::Shape(format!("policy sequence has length {}, horizon is {}", pis.len(), self.horizon)));
        }
        pis.iter().try_for_each(|p| p.check_shape(self.n_states(), self.n_actions()))
    }
}

/// Discounted stationary mean-field game. `mu0` is an optional starting
/// population used by simulations and solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct StatMfg {
    pub kernel: Kernel,
    pub rewards: Rewards,
    pub gamma: f64,
    pub mu0: Option<Distribution>,
}

impl StatMfg {
    pub fn new(kernel: Kernel, rewards: Rewards, gamma: f64, mu0: Option<Distribution>) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Domain(format!("discount {gamma} outside (0, 1)")));
        }
        if let Some(m) = &mu0 {
            if m.len() != kernel.n_states() {
                return Err(Error::Shape("initial distribution length differs from state count".into()));
            }
        }
        check_tables(&kernel, &rewards, mu0.as_deref())?;
        Ok(StatMfg { kernel, rewards, gamma, mu0 })
    }

    pub fn states(&self) -> &[String] {
        self.kernel.states()
    }

    pub fn actions(&self) -> &[String] {
        self.kernel.actions()
    }

    pub fn n_states(&self) -> usize {
        self.kernel.n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.kernel.n_actions()
    }

    pub fn check_policy(&self, pi: &Policy) -> Result<()> {
        pi.check_shape(self.n_states(), self.n_actions())
    }

    pub fn check_distribution(&self, mu: &Distribution) -> Result<()> {
        if mu.len() != self.n_states() {
            return Err(Error::Shape("distribution length differs from state count".into()));
        }
        Ok(())
    }
}

/// Helper for building name lists.
pub fn names<S: AsRef<str>>(list: &[S]) -> Vec<String> {
    list.iter().map(|s| s.as_ref().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_clamps_noise_and_rejects_bad_sums() {
        let d = Distribution::new(vec![-1e-13, 1.0]).unwrap();
        assert_eq!(d[0], 0.0);
        assert!(Distribution::new(vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn policy_rows_validated() {
        assert!(Policy::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).is_ok());
        assert!(Policy::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(Policy::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        let p = Policy::deterministic(&[1, 0], 2);
        assert_eq!(p.row(0), &[0.0, 1.0]);
        assert_eq!(p.prob(1, 0), 1.0);
    }

    #[test]
    fn probe_rejects_bad_row() {
        let st = names(&["a", "b"]);
        let ac = names(&["x"]);
        let mut k = Kernel::new(st.clone(), ac.clone());
        k.set(0, 0, 0, Expr::mu(0));
        k.set(1, 0, 1, Expr::c(1.0));
        let r = Rewards::new(st.clone(), ac.clone());
        let err = FhMfg::new(k, r, 1, Distribution::uniform(2)).unwrap_err();
        assert!(matches!(err, Error::InvalidKernel { .. }));
    }

    #[test]
    fn probe_rejects_reward_out_of_range() {
        let st = names(&["a"]);
        let ac = names(&["x"]);
        let mut k = Kernel::new(st.clone(), ac.clone());
        k.set(0, 0, 0, Expr::c(1.0));
        let mut r = Rewards::new(st.clone(), ac.clone());
        r.set(0, 0, Expr::c(1.5));
        assert!(matches!(StatMfg::new(k, r, 0.5, None), Err(Error::RewardOutOfRange { .. })));
    }

    #[test]
    fn probe_points_are_on_simplex() {
        for p in simplex_probe(5, 100, 3) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
        }
    }
}
