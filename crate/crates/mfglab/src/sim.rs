//! Monte Carlo simulation of the N-player games.
//!
//! Every episode owns a ChaCha stream selected by `(seed, episode index)`,
//! so results do not depend on scheduling. Within an episode the draw order
//! is fixed: initial states for agents `0..N`, then at each step one action
//! draw per agent followed by one transition draw per agent. Each draw
//! consumes exactly one uniform and samples by inverse CDF, so two runs with
//! the same seed that differ only in one agent's policy share all their
//! randomness. Differences between such runs are estimated with paired
//! standard errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{Distribution, FhMfg, Kernel, Policy, Rewards, StatMfg};

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_agents: usize,
    pub episodes: usize,
    pub seed: u64,
    /// Truncation length for stationary runs. Finite-horizon runs use the
    /// game's horizon and ignore this field.
    pub steps: usize,
}

impl SimConfig {
    pub fn new(n_agents: usize, episodes: usize, seed: u64) -> Self {
        SimConfig { n_agents, episodes, seed, steps: 0 }
    }

    pub fn with_steps(self, steps: usize) -> Self {
        SimConfig { steps, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.n_agents == 0 || self.episodes == 0 {
            return Err(Error::Domain("need at least one agent and one episode".into()));
        }
        Ok(())
    }
}

/// Record of one simulated episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStats {
    /// Empirical distribution at each step.
    pub empirical: Vec<Vec<f64>>,
    /// Per-agent total (finite horizon) or discounted (stationary) reward.
    pub rewards: Vec<f64>,
    /// Per-step l1 gap to the reference flow, when one was given.
    pub gaps: Vec<f64>,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub episodes: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return McEstimate { mean: f64::NAN, stderr: f64::NAN, episodes: 0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate { mean, stderr, episodes: n }
    }
}

/// Estimate of `a - b` from paired samples.
pub fn paired_difference(a: &[f64], b: &[f64]) -> Result<McEstimate> {
    if a.len() != b.len() {
        return Err(Error::Shape("paired samples differ in length".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(McEstimate::from_samples(&d))
}

/// Index drawn by inverse CDF from one uniform.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Policy assignment to agents.
#[derive(Debug, Clone, Copy)]
pub enum Agents<'a> {
    /// Everyone plays the same sequence.
    Shared(&'a [Policy]),
    /// Agent 0 plays `first`, the rest play `others`.
    Deviator { first: &'a [Policy], others: &'a [Policy] },
    /// One sequence per agent.
    Each(&'a [Vec<Policy>]),
}

impl Agents<'_> {
    /// Policy of agent `i` at step `h`; sequences of length one are stationary.
    fn get(&self, i: usize, h: usize) -> &Policy {
        let seq: &[Policy] = match self {
            Agents::Shared(p) => p,
            Agents::Deviator { first, others } => {
                if i == 0 {
                    first
                } else {
                    others
                }
            }
            Agents::Each(all) => &all[i],
        };
        if seq.len() == 1 {
            &seq[0]
        } else {
            &seq[h]
        }
    }

    fn check(&self, n_agents: usize, horizon: usize, n_states: usize, n_actions: usize) -> Result<()> {
        let seqs: Vec<&[Policy]> = match self {
            Agents::Shared(p) => vec![p],
            Agents::Deviator { first, others } => vec![first, others],
            Agents::Each(all) => {
                if all.len() != n_agents {
                    return Err(Error::Shape(format!("{} policies for {n_agents} agents", all.len())));
                }
                all.iter().map(|v| v.as_slice()).collect()
            }
        };
        for seq in seqs {
            if seq.len() != 1 && seq.len() != horizon {
                return Err(Error::Shape(format!("policy sequence length {} for horizon {horizon}", seq.len())));
            }
            for p in seq {
                if p.n_states() != n_states || p.n_actions() != n_actions {
                    return Err(Error::Shape("policy shape differs from the game".into()));
                }
            }
        }
        Ok(())
    }
}

struct EpisodeSpec<'a> {
    kernel: &'a Kernel,
    rewards: &'a Rewards,
    init: &'a [f64],
    agents: Agents<'a>,
    n_agents: usize,
    steps: usize,
    discount: f64,
    reference: Option<&'a [Distribution]>,
}

fn run_episode(spec: &EpisodeSpec<'_>, seed: u64, episode: usize) -> Result<EpisodeStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode as u64);
    let n = spec.n_agents;
    let ns = spec.kernel.n_states();
    let inv_n = 1.0 / n as f64;
    let mut states: Vec<usize> = (0..n).map(|_| sample_index(spec.init, rng.random())).collect();
    let mut actions = vec![0; n];
    let mut rewards = vec![0.0; n];
    let mut empirical = Vec::with_capacity(spec.steps);
    let mut gaps = Vec::new();
    let mut disc = 1.0;
    for h in 0..spec.steps {
        let mut mu = vec![0.0; ns];
        for &s in &states {
            mu[s] += inv_n;
        }
        if let Some(reference) = spec.reference {
            gaps.push(reference[h].l1(&mu));
        }
        let km = spec.kernel.eval(&mu)?;
        let rm = spec.rewards.eval(&mu)?;
        for i in 0..n {
            let a = sample_index(spec.agents.get(i, h).row(states[i]), rng.random());
            actions[i] = a;
            rewards[i] += disc * rm.get(states[i], a);
        }
        empirical.push(mu);
        if h + 1 < spec.steps {
            for i in 0..n {
                states[i] = sample_index(km.row(states[i], actions[i]), rng.random());
            }
        }
        disc *= spec.discount;
    }
    Ok(EpisodeStats { empirical, rewards, gaps })
}

fn run_all(spec: &EpisodeSpec<'_>, cfg: &SimConfig) -> Result<Vec<EpisodeStats>> {
    #[cfg(feature = "parallel")]
    let out = (0..cfg.episodes).into_par_iter().map(|e| run_episode(spec, cfg.seed, e)).collect();
    #[cfg(not(feature = "parallel"))]
    let out = (0..cfg.episodes).map(|e| run_episode(spec, cfg.seed, e)).collect();
    out
}

fn fh_spec<'a>(
    g: &'a FhMfg,
    agents: Agents<'a>,
    cfg: &SimConfig,
    reference: Option<&'a [Distribution]>,
) -> Result<EpisodeSpec<'a>> {
    cfg.validate()?;
    agents.check(cfg.n_agents, g.horizon, g.n_states(), g.n_actions())?;
    if let Some(r) = reference {
        if r.len() < g.horizon {
            return Err(Error::Shape("reference flow shorter than the horizon".into()));
        }
    }
    Ok(EpisodeSpec {
        kernel: &g.kernel,
        rewards: &g.rewards,
        init: &g.mu0,
        agents,
        n_agents: cfg.n_agents,
        steps: g.horizon,
        discount: 1.0,
        reference,
    })
}

/// Simulates the finite-horizon N-player game.
pub fn simulate_fh(
    g: &FhMfg,
    agents: Agents<'_>,
    cfg: &SimConfig,
    reference: Option<&[Distribution]>,
) -> Result<Vec<EpisodeStats>> {
    run_all(&fh_spec(g, agents, cfg, reference)?, cfg)
}

/// Per-episode total reward of agent 0 playing `deviator` against `others`.
pub fn fh_returns(g: &FhMfg, deviator: &[Policy], others: &[Policy], cfg: &SimConfig) -> Result<Vec<f64>> {
    let eps = simulate_fh(g, Agents::Deviator { first: deviator, others }, cfg, None)?;
    Ok(eps.into_iter().map(|e| e.rewards[0]).collect())
}

/// Monte Carlo estimate of agent 0's expected total reward.
pub fn estimate_j_fh(g: &FhMfg, deviator: &[Policy], others: &[Policy], cfg: &SimConfig) -> Result<McEstimate> {
    Ok(McEstimate::from_samples(&fh_returns(g, deviator, others, cfg)?))
}

/// Per-step estimate of `E || empirical_h - reference_h ||_1`.
pub fn estimate_divergence(
    g: &FhMfg,
    shared: &[Policy],
    reference: &[Distribution],
    cfg: &SimConfig,
) -> Result<Vec<McEstimate>> {
    let eps = simulate_fh(g, Agents::Shared(shared), cfg, Some(reference))?;
    Ok((0..g.horizon)
        .map(|h| {
            let xs: Vec<f64> = eps.iter().map(|e| e.gaps[h]).collect();
            McEstimate::from_samples(&xs)
        })
        .collect())
}

/// Discounted reward estimate together with the truncation bias bound
/// `gamma^T / (1 - gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StatEstimate {
    pub estimate: McEstimate,
    pub truncation_bias: f64,
}

/// Per-episode truncated discounted reward of agent 0 in the stationary
/// N-player game. Agents start i.i.d. from `init`; agent 0 plays `deviator`
/// when given and `shared` otherwise.
pub fn stat_returns(
    g: &StatMfg,
    init: &Distribution,
    shared: &Policy,
    deviator: Option<&Policy>,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if cfg.steps == 0 {
        return Err(Error::Domain("stationary simulation needs a positive truncation length".into()));
    }
    g.check_distribution(init)?;
    let first = std::slice::from_ref(deviator.unwrap_or(shared));
    let others = std::slice::from_ref(shared);
    let agents = Agents::Deviator { first, others };
    agents.check(cfg.n_agents, cfg.steps, g.n_states(), g.n_actions())?;
    let spec = EpisodeSpec {
        kernel: &g.kernel,
        rewards: &g.rewards,
        init,
        agents,
        n_agents: cfg.n_agents,
        steps: cfg.steps,
        discount: g.gamma,
        reference: None,
    };
    Ok(run_all(&spec, cfg)?.into_iter().map(|e| e.rewards[0]).collect())
}

/// Truncated discounted reward estimate for agent 0.
pub fn simulate_stat(
    g: &StatMfg,
    init: &Distribution,
    shared: &Policy,
    deviator: Option<&Policy>,
    cfg: &SimConfig,
) -> Result<StatEstimate> {
    let xs = stat_returns(g, init, shared, deviator, cfg)?;
    Ok(StatEstimate {
        estimate: McEstimate::from_samples(&xs),
        truncation_bias: g.gamma.powi(cfg.steps as i32) / (1.0 - g.gamma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::game::names;

    fn flip_game(reward: f64, horizon: usize) -> FhMfg {
        // Action 0 stays, action 1 moves to the other state.
        let mut k = Kernel::new(names(&["x", "y"]), names(&["stay", "move"]));
        k.set(0, 0, 0, Expr::c(1.0));
        k.set(1, 0, 1, Expr::c(1.0));
        k.set(0, 1, 1, Expr::c(1.0));
        k.set(1, 1, 0, Expr::c(1.0));
        let mut r = Rewards::new(names(&["x", "y"]), names(&["stay", "move"]));
        for s in 0..2 {
            r.set_all_actions(s, Expr::c(reward));
        }
        FhMfg::new(k, r, horizon, Distribution::new(vec![0.3, 0.7]).unwrap()).unwrap()
    }

    #[test]
    fn inverse_cdf_sampling() {
        assert_eq!(sample_index(&[0.2, 0.8], 0.1), 0);
        assert_eq!(sample_index(&[0.2, 0.8], 0.2), 1);
        assert_eq!(sample_index(&[0.0, 1.0, 0.0], 0.999), 1);
        assert_eq!(sample_index(&[0.5, 0.5 - 1e-17, 0.0], 0.9999999999999999), 1);
    }

    #[test]
    fn single_agent_sits_on_vertices() {
        let g = flip_game(0.5, 4);
        let pis = vec![Policy::uniform(2, 2); 4];
        let eps = simulate_fh(&g, Agents::Shared(&pis), &SimConfig::new(1, 20, 3), None).unwrap();
        for e in eps {
            for mu in e.empirical {
                assert!(mu == [1.0, 0.0] || mu == [0.0, 1.0]);
            }
        }
    }

    #[test]
    fn staying_keeps_the_initial_empirical_distribution() {
        let g = flip_game(0.5, 5);
        let pis = vec![Policy::deterministic(&[0, 0], 2); 5];
        let eps = simulate_fh(&g, Agents::Shared(&pis), &SimConfig::new(50, 10, 9), None).unwrap();
        for e in eps {
            assert!(e.empirical.iter().all(|m| *m == e.empirical[0]));
        }
    }

    #[test]
    fn constant_reward_has_zero_variance() {
        let g = flip_game(1.0, 3);
        let pis = vec![Policy::uniform(2, 2); 3];
        let est = estimate_j_fh(&g, &pis, &pis, &SimConfig::new(4, 30, 1)).unwrap();
        assert_eq!(est.mean, 3.0);
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.episodes, 30);
    }

    #[test]
    fn same_seed_same_output() {
        let g = flip_game(0.5, 4);
        let pis = vec![Policy::uniform(2, 2); 4];
        let cfg = SimConfig::new(17, 40, 12345);
        let a = simulate_fh(&g, Agents::Shared(&pis), &cfg, None).unwrap();
        let b = simulate_fh(&g, Agents::Shared(&pis), &cfg, None).unwrap();
        assert_eq!(a, b);
        let c = simulate_fh(&g, Agents::Shared(&pis), &SimConfig { seed: 12346, ..cfg }, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stat_constant_reward_matches_geometric_sum() {
        let mut k = Kernel::new(names(&["x"]), names(&["a"]));
        k.set(0, 0, 0, Expr::c(1.0));
        let mut r = Rewards::new(names(&["x"]), names(&["a"]));
        r.set(0, 0, Expr::c(1.0));
        let g = StatMfg::new(k, r, 0.8, None).unwrap();
        let cfg = SimConfig::new(3, 5, 0).with_steps(60);
        let est = simulate_stat(&g, &Distribution::uniform(1), &Policy::uniform(1, 1), None, &cfg).unwrap();
        let want = (1.0 - 0.8f64.powi(60)) / 0.2;
        assert!((est.estimate.mean - want).abs() < 1e-12);
        assert_eq!(est.estimate.stderr, 0.0);
        assert!((est.truncation_bias - 7.6e-6).abs() < 1e-7);
    }

    #[test]
    fn estimates_from_samples() {
        let e = McEstimate::from_samples(&[1.0, 3.0]);
        assert_eq!(e.mean, 2.0);
        assert!((e.stderr - 1.0).abs() < 1e-15);
        let d = paired_difference(&[2.0, 4.0], &[1.0, 3.0]).unwrap();
        assert_eq!((d.mean, d.stderr), (1.0, 0.0));
    }
}
