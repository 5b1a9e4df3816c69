//! Exact mean-field computations against frozen populations.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{sample_simplex, Distribution, FhMfg, Flow, Kernel, Policy, PolicySeq, StatMfg};

/// Actions whose value is within this margin of the best count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// One population step: `sum_{s,a} mu(s) pi(a|s) P(.|s,a,mu)`.
pub fn gamma_p(kernel: &Kernel, mu: &Distribution, pi: &Policy) -> Result<Distribution> {
    let km = kernel.eval(mu)?;
    let n = kernel.n_states();
    let mut out = vec![0.0; n];
    let mut row = vec![0.0; n];
    for s in 0..n {
        if mu[s] == 0.0 {
            continue;
        }
        km.mixed_row(s, pi.row(s), &mut row);
        for (o, p) in out.iter_mut().zip(&row) {
            *o += mu[s] * p;
        }
    }
    Distribution::new(out)
}

/// Mean-field flow `[mu_0, Gamma(mu_0, pi_0), ...]` of length H.
pub fn lambda_flow(g: &FhMfg, pis: &[Policy]) -> Result<Flow> {
    g.check_policy_seq(pis)?;
    let mut flow = Vec::with_capacity(g.horizon);
    flow.push(g.mu0.clone());
    for h in 0..g.horizon - 1 {
        let next = gamma_p(&g.kernel, &flow[h], &pis[h])?;
        flow.push(next);
    }
    Ok(flow)
}

fn check_flow(g: &FhMfg, flow: &[Distribution]) -> Result<()> {
    if flow.len() != g.horizon {
        return Err(Error::Shape(format!("flow has length {}, horizon is {}", flow.len(), g.horizon)));
    }
    Ok(())
}

/// Total expected reward of one agent following `pis` against a frozen flow.
///
/// The agent's own state law starts at `mu_0` and is propagated exactly.
pub fn value_fh(g: &FhMfg, flow: &[Distribution], pis: &[Policy]) -> Result<f64> {
    check_flow(g, flow)?;
    g.check_policy_seq(pis)?;
    let n = g.n_states();
    let mut rho = g.mu0.to_vec();
    let mut row = vec![0.0; n];
    let mut total = 0.0;
    for h in 0..g.horizon {
        let km = g.kernel.eval(&flow[h])?;
        let rm = g.rewards.eval(&flow[h])?;
        let mut next = vec![0.0; n];
        for s in 0..n {
            if rho[s] == 0.0 {
                continue;
            }
            total += rho[s] * rm.mixed(s, pis[h].row(s));
            km.mixed_row(s, pis[h].row(s), &mut row);
            for (o, p) in next.iter_mut().zip(&row) {
                *o += rho[s] * p;
            }
        }
        rho = next;
    }
    Ok(total)
}

/// Index of the largest entry; ties within [`TIE_TOL`] go to the lowest index.
pub fn argmax_low(values: &[f64]) -> usize {
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= best - TIE_TOL).unwrap_or(0)
}

/// Backward induction against a frozen flow. Returns the greedy
/// deterministic policy sequence and its value from `mu_0`.
pub fn best_response_fh(g: &FhMfg, flow: &[Distribution]) -> Result<(PolicySeq, f64)> {
    check_flow(g, flow)?;
    let (ns, na) = (g.n_states(), g.n_actions());
    let mut v_next = vec![0.0; ns];
    let mut policies = vec![Policy::uniform(ns, na); g.horizon];
    let mut q = vec![0.0; na];
    for h in (0..g.horizon).rev() {
        let km = g.kernel.eval(&flow[h])?;
        let rm = g.rewards.eval(&flow[h])?;
        let mut v = vec![0.0; ns];
        let mut choice = vec![0; ns];
        for s in 0..ns {
            for (a, qa) in q.iter_mut().enumerate() {
                let cont: f64 = km.row(s, a).iter().zip(&v_next).map(|(p, w)| p * w).sum();
                *qa = rm.get(s, a) + cont;
            }
            let a = argmax_low(&q);
            choice[s] = a;
            v[s] = q[a];
        }
        policies[h] = Policy::deterministic(&choice, na);
        v_next = v;
    }
    let value = g.mu0.iter().zip(&v_next).map(|(m, v)| m * v).sum();
    Ok((policies, value))
}

/// Best-response value minus own value, both against the policy's own flow,
/// floored at zero. The two values are summed in different orders, so the
/// raw difference can be a few ulps below zero.
pub fn exploitability_fh(g: &FhMfg, pis: &[Policy]) -> Result<f64> {
    let flow = lambda_flow(g, pis)?;
    let (_, br) = best_response_fh(g, &flow)?;
    Ok((br - value_fh(g, &flow, pis)?).max(0.0))
}

/// Frozen-population Markov chain under `pi`: per-state reward and
/// row-major transition matrix.
fn frozen_chain(g: &StatMfg, mu: &Distribution, pi: &Policy) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = g.n_states();
    let km = g.kernel.eval(mu)?;
    let rm = g.rewards.eval(mu)?;
    let r = (0..n).map(|s| rm.mixed(s, pi.row(s))).collect();
    let mut p = vec![0.0; n * n];
    for s in 0..n {
        km.mixed_row(s, pi.row(s), &mut p[s * n..(s + 1) * n]);
    }
    Ok((r, p))
}

/// Smallest T with `gamma^T / (1 - gamma) <= tol`.
pub fn truncation_horizon(gamma: f64, tol: f64) -> usize {
    let t = ((tol * (1.0 - gamma)).ln() / gamma.ln()).ceil();
    if t.is_finite() && t > 0.0 {
        t as usize
    } else {
        0
    }
}

/// Discounted value of `pi` in the MDP with the population frozen at `mu`,
/// starting from `mu`, by truncated summation to accuracy `tol`.
pub fn value_stat(g: &StatMfg, mu: &Distribution, pi: &Policy, tol: f64) -> Result<f64> {
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    g.check_distribution(mu)?;
    g.check_policy(pi)?;
    let n = g.n_states();
    let (r, p) = frozen_chain(g, mu, pi)?;
    let t_max = truncation_horizon(g.gamma, tol);
    let mut rho = mu.to_vec();
    let mut disc = 1.0;
    let mut total = 0.0;
    for _ in 0..t_max {
        total += disc * rho.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
        let mut next = vec![0.0; n];
        for s in 0..n {
            if rho[s] == 0.0 {
                continue;
            }
            for (o, q) in next.iter_mut().zip(&p[s * n..(s + 1) * n]) {
                *o += rho[s] * q;
            }
        }
        rho = next;
        disc *= g.gamma;
    }
    Ok(total)
}

/// Exact discounted value via the linear system `(I - gamma P) v = r`.
/// Offered for games with `|S| * |A| <= 64`.
pub fn value_stat_linear(g: &StatMfg, mu: &Distribution, pi: &Policy) -> Result<f64> {
    let n = g.n_states();
    if n * g.n_actions() > 64 {
        return Err(Error::SizeGuard(format!("linear solve needs |S||A| <= 64, got {}", n * g.n_actions())));
    }
    g.check_distribution(mu)?;
    g.check_policy(pi)?;
    let (r, p) = frozen_chain(g, mu, pi)?;
    let m = DMatrix::from_fn(n, n, |i, j| f64::from(i == j) - g.gamma * p[i * n + j]);
    let v =
        m.lu().solve(&DVector::from_vec(r)).ok_or_else(|| Error::Degenerate("singular discounted system".into()))?;
    Ok(mu.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
}

const VI_MAX_ITERS: usize = 1_000_000;

/// Value iteration on the frozen-population MDP until the sup-norm Bellman
/// residual is at most `tol (1 - gamma) / (2 gamma)`. Returns the greedy
/// deterministic policy and its value from `mu`.
pub fn best_response_stat(g: &StatMfg, mu: &Distribution, tol: f64) -> Result<(Policy, f64)> {
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    g.check_distribution(mu)?;
    let (ns, na) = (g.n_states(), g.n_actions());
    let km = g.kernel.eval(mu)?;
    let rm = g.rewards.eval(mu)?;
    let target = tol * (1.0 - g.gamma) / (2.0 * g.gamma);
    let bellman = |v: &[f64], s: usize, a: usize| -> f64 {
        rm.get(s, a) + g.gamma * km.row(s, a).iter().zip(v).map(|(p, w)| p * w).sum::<f64>()
    };
    let mut v = vec![0.0; ns];
    let mut q = vec![0.0; na];
    let mut residual = f64::INFINITY;
    for _ in 0..VI_MAX_ITERS {
        let mut next = vec![0.0; ns];
        for s in 0..ns {
            next[s] = (0..na).map(|a| bellman(&v, s, a)).fold(f64::NEG_INFINITY, f64::max);
        }
        residual = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if residual <= target {
            let mut choice = vec![0; ns];
            for (s, c) in choice.iter_mut().enumerate() {
                for (a, qa) in q.iter_mut().enumerate() {
                    *qa = bellman(&v, s, a);
                }
                *c = argmax_low(&q);
            }
            let pi = Policy::deterministic(&choice, na);
            let value = value_stat(g, mu, &pi, tol)?;
            return Ok((pi, value));
        }
    }
    Err(Error::NoConvergence { iterations: VI_MAX_ITERS, residual })
}

/// `|| Gamma(mu, pi) - mu ||_inf`.
pub fn stat_stability_residual(kernel: &Kernel, mu: &Distribution, pi: &Policy) -> Result<f64> {
    let next = gamma_p(kernel, mu, pi)?;
    Ok(next.linf(mu))
}

/// Best-response value minus the value of `pi`, floored at zero.
pub fn exploitability_stat(g: &StatMfg, mu: &Distribution, pi: &Policy, tol: f64) -> Result<f64> {
    let (_, br) = best_response_stat(g, mu, tol)?;
    Ok((br - value_stat(g, mu, pi, tol)?).max(0.0))
}

/// Lipschitz-type constants of a kernel. `k_s` and `k_a` are exact maxima
/// over the sampled populations; `k_mu_hat` and `l_pop_hat` are sampled
/// lower estimates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KernelConstants {
    pub k_s: f64,
    pub k_a: f64,
    pub k_mu_hat: f64,
    pub l_pop_hat: f64,
}

/// Population samples used by [`kernel_constants`]: `samples` uniform draws,
/// each paired with small moves of mass between every pair of coordinates.
pub fn kernel_constant_samples(n: usize, samples: usize, seed: u64) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
    const STEP: f64 = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mu = sample_simplex(&mut rng, n);
            let mut moves = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let d = STEP.min(mu[j]);
                    if i == j || d <= 0.0 {
                        continue;
                    }
                    let mut nu = mu.clone();
                    nu[i] += d;
                    nu[j] -= d;
                    moves.push(nu);
                }
            }
            (mu, moves)
        })
        .collect()
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Estimates the kernel's Lipschitz constants on a seeded sample.
///
/// The ratio `||P(s,a,mu) - P(s,a,mu')||_1 / ||mu - mu'||_1` is maximized
/// over all pairs of base samples and over each sample paired with its
/// local moves.
pub fn kernel_constants(kernel: &Kernel, samples: usize, seed: u64) -> Result<KernelConstants> {
    if samples < 2 {
        return Err(Error::Domain("need at least two population samples".into()));
    }
    let (ns, na) = (kernel.n_states(), kernel.n_actions());
    let pts = kernel_constant_samples(ns, samples, seed);
    let mut k_s: f64 = 0.0;
    let mut k_a: f64 = 0.0;
    let mut k_mu: f64 = 0.0;
    let mut base = Vec::with_capacity(pts.len());
    for (mu, moves) in &pts {
        let km = kernel.eval(mu)?;
        for a in 0..na {
            for s in 0..ns {
                for t in s + 1..ns {
                    k_s = k_s.max(l1(km.row(s, a), km.row(t, a)));
                }
            }
        }
        for s in 0..ns {
            for a in 0..na {
                for b in a + 1..na {
                    k_a = k_a.max(l1(km.row(s, a), km.row(s, b)));
                }
            }
        }
        for nu in moves {
            let kn = kernel.eval(nu)?;
            k_mu = k_mu.max(max_row_ratio(&km, &kn, l1(mu, nu), ns, na));
        }
        base.push(km);
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = l1(&pts[i].0, &pts[j].0);
            k_mu = k_mu.max(max_row_ratio(&base[i], &base[j], d, ns, na));
        }
    }
    Ok(KernelConstants { k_s, k_a, k_mu_hat: k_mu, l_pop_hat: k_mu + k_s / 2.0 + k_a / 2.0 })
}

fn max_row_ratio(a: &crate::game::KernelMatrix, b: &crate::game::KernelMatrix, dist: f64, ns: usize, na: usize) -> f64 {
    if dist <= 0.0 {
        return 0.0;
    }
    let mut best: f64 = 0.0;
    for s in 0..ns {
        for act in 0..na {
            best = best.max(l1(a.row(s, act), b.row(s, act)) / dist);
        }
    }
    best
}

/// Upper bound on `E ||empirical_h - mu_h||_1` when every agent follows the
/// reference policy: `(1 - L^{h+1}) / (1 - L) * |S| * sqrt(pi / (2N))`.
/// Deviating agents add `K_a / (2N) * sum_i L^{h-i-1} d_i` where `d_i` is
/// the average policy distance at step `i`.
pub fn empirical_distribution_bound(
    h: usize,
    l_pop: f64,
    n_states: usize,
    n_agents: usize,
    k_a: f64,
    policy_gaps: &[f64],
) -> f64 {
    let geo =
        if (l_pop - 1.0).abs() < 1e-12 { (h + 1) as f64 } else { (1.0 - l_pop.powi(h as i32 + 1)) / (1.0 - l_pop) };
    let n = n_agents as f64;
    let base = geo * n_states as f64 * (std::f64::consts::PI / (2.0 * n)).sqrt();
    let dev: f64 = policy_gaps.iter().take(h).enumerate().map(|(i, d)| l_pop.powi((h - i - 1) as i32) * d).sum();
    base + k_a / (2.0 * n) * dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::game::{names, Rewards};

    fn identity_kernel(n: usize, na: usize) -> Kernel {
        let st: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let ac: Vec<String> = (0..na).map(|i| format!("a{i}")).collect();
        let mut k = Kernel::new(st, ac);
        for s in 0..n {
            k.set_all_actions(s, s, Expr::c(1.0));
        }
        k
    }

    fn swap_kernel() -> Kernel {
        let mut k = Kernel::new(names(&["x", "y"]), names(&["a"]));
        k.set(0, 0, 1, Expr::c(1.0));
        k.set(1, 0, 0, Expr::c(1.0));
        k
    }

    fn stat_game(kernel: Kernel, reward: impl Fn(usize, usize) -> f64, gamma: f64) -> StatMfg {
        let mut r = Rewards::new(kernel.states().to_vec(), kernel.actions().to_vec());
        for s in 0..kernel.n_states() {
            for a in 0..kernel.n_actions() {
                r.set(s, a, Expr::c(reward(s, a)));
            }
        }
        StatMfg::new(kernel, r, gamma, None).unwrap()
    }

    fn fh_game(kernel: Kernel, reward: impl Fn(usize, usize) -> f64, h: usize) -> FhMfg {
        let n = kernel.n_states();
        let mut r = Rewards::new(kernel.states().to_vec(), kernel.actions().to_vec());
        for s in 0..n {
            for a in 0..kernel.n_actions() {
                r.set(s, a, Expr::c(reward(s, a)));
            }
        }
        FhMfg::new(kernel, r, h, Distribution::uniform(n)).unwrap()
    }

    #[test]
    fn gamma_identity_and_swap() {
        let mu = Distribution::new(vec![0.3, 0.7]).unwrap();
        let k = identity_kernel(2, 2);
        let pi = Policy::new(vec![vec![0.2, 0.8], vec![1.0, 0.0]]).unwrap();
        assert_eq!(gamma_p(&k, &mu, &pi).unwrap(), mu);
        let out = gamma_p(&swap_kernel(), &mu, &Policy::uniform(2, 1)).unwrap();
        assert_eq!(out.to_vec(), vec![0.7, 0.3]);
    }

    #[test]
    fn flow_lengths() {
        let g = fh_game(identity_kernel(3, 1), |_, _| 0.0, 1);
        assert_eq!(lambda_flow(&g, &[Policy::uniform(3, 1)]).unwrap(), vec![g.mu0.clone()]);
        let g = g.with_horizon(3).unwrap();
        let flow = lambda_flow(&g, &vec![Policy::uniform(3, 1); 3]).unwrap();
        assert_eq!(flow, vec![g.mu0.clone(); 3]);
        assert!(lambda_flow(&g, &[Policy::uniform(3, 1)]).is_err());
    }

    #[test]
    fn fh_values_at_reward_extremes() {
        let g = fh_game(identity_kernel(2, 2), |_, _| 0.0, 4);
        let pis = vec![Policy::uniform(2, 2); 4];
        let flow = lambda_flow(&g, &pis).unwrap();
        assert_eq!(value_fh(&g, &flow, &pis).unwrap(), 0.0);
        let g = fh_game(identity_kernel(2, 2), |_, _| 1.0, 5);
        let pis = vec![Policy::uniform(2, 2); 5];
        let flow = lambda_flow(&g, &pis).unwrap();
        assert!((value_fh(&g, &flow, &pis).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn best_response_picks_rewarded_action() {
        let g = fh_game(identity_kernel(2, 2), |_, a| if a == 0 { 1.0 } else { 0.0 }, 1);
        let flow = vec![g.mu0.clone()];
        let (pis, v) = best_response_fh(&g, &flow).unwrap();
        assert_eq!(pis[0], Policy::deterministic(&[0, 0], 2));
        assert_eq!(v, 1.0);
    }

    #[test]
    fn best_response_single_action_equals_value() {
        let g = fh_game(swap_kernel(), |s, _| if s == 0 { 0.3 } else { 0.9 }, 3);
        let pis = vec![Policy::uniform(2, 1); 3];
        let flow = lambda_flow(&g, &pis).unwrap();
        let (_, br) = best_response_fh(&g, &flow).unwrap();
        assert!((br - value_fh(&g, &flow, &pis).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_action() {
        assert_eq!(argmax_low(&[1.0, 1.0, 0.5]), 0);
        assert_eq!(argmax_low(&[0.0, 1.0, 1.0]), 1);
        assert_eq!(argmax_low(&[0.0, 1.0, 1.0 + 1e-15]), 1);
    }

    #[test]
    fn stat_values_closed_forms() {
        let tol = 1e-9;
        let g = stat_game(identity_kernel(2, 1), |_, _| 0.0, 0.5);
        let mu = Distribution::uniform(2);
        let pi = Policy::uniform(2, 1);
        assert_eq!(value_stat(&g, &mu, &pi, tol).unwrap(), 0.0);
        let g = stat_game(identity_kernel(2, 1), |_, _| 1.0, 0.5);
        assert!((value_stat(&g, &mu, &pi, tol).unwrap() - 2.0).abs() <= tol);
        let g = stat_game(identity_kernel(1, 1), |_, _| 0.3, 0.9);
        let one = Distribution::uniform(1);
        let pi1 = Policy::uniform(1, 1);
        assert!((value_stat(&g, &one, &pi1, tol).unwrap() - 3.0).abs() <= tol);
        assert!((value_stat_linear(&g, &one, &pi1).unwrap() - 3.0).abs() <= 1e-12);
    }

    #[test]
    fn truncation_error_halves_with_tighter_tol() {
        let g = stat_game(swap_kernel(), |s, _| if s == 0 { 0.2 } else { 0.7 }, 0.95);
        let mu = Distribution::new(vec![0.9, 0.1]).unwrap();
        let pi = Policy::uniform(2, 1);
        let a = value_stat(&g, &mu, &pi, 1e-4).unwrap();
        let b = value_stat(&g, &mu, &pi, 1e-5).unwrap();
        let exact = value_stat_linear(&g, &mu, &pi).unwrap();
        assert!((a - b).abs() <= 1e-4);
        assert!((a - exact).abs() <= 1e-4);
    }

    #[test]
    fn stat_best_response_steers_to_absorbing_reward() {
        // State 1 is absorbing with reward 1; from state 0 action 1 moves
        // there and action 0 stays. Hand solve: V(1) = 1/(1-g), V(0) = g V(1).
        let mut k = Kernel::new(names(&["s0", "s1"]), names(&["stay", "go"]));
        k.set(0, 0, 0, Expr::c(1.0));
        k.set(0, 1, 1, Expr::c(1.0));
        k.set_all_actions(1, 1, Expr::c(1.0));
        let g = stat_game(k, |s, _| if s == 1 { 1.0 } else { 0.0 }, 0.9);
        let mu = Distribution::new(vec![0.5, 0.5]).unwrap();
        let tol = 1e-8;
        let (pi, v) = best_response_stat(&g, &mu, tol).unwrap();
        assert_eq!(pi.row(0), &[0.0, 1.0]);
        let expected = 0.5 * 0.9 * 10.0 + 0.5 * 10.0;
        assert!((v - expected).abs() <= 2.0 * tol);
    }

    #[test]
    fn stat_exploitability_cases() {
        let g = stat_game(identity_kernel(1, 2), |_, a| a as f64, 0.5);
        let mu = Distribution::uniform(1);
        let bad = Policy::deterministic(&[0], 2);
        assert!(exploitability_stat(&g, &mu, &bad, 1e-9).unwrap() > 1.9);
        let single = stat_game(identity_kernel(2, 1), |s, _| 0.1 * s as f64, 0.5);
        let e = exploitability_stat(&single, &Distribution::uniform(2), &Policy::uniform(2, 1), 1e-9).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn stability_residual_examples() {
        let pi = Policy::uniform(2, 1);
        let k = identity_kernel(2, 1);
        let mu = Distribution::new(vec![0.1, 0.9]).unwrap();
        assert_eq!(stat_stability_residual(&k, &mu, &pi).unwrap(), 0.0);
        let sw = swap_kernel();
        assert_eq!(stat_stability_residual(&sw, &Distribution::uniform(2), &pi).unwrap(), 0.0);
        assert_eq!(stat_stability_residual(&sw, &Distribution::vertex(2, 0), &pi).unwrap(), 1.0);
    }

    #[test]
    fn constants_of_simple_kernels() {
        let kc = kernel_constants(&identity_kernel(3, 2), 10, 1).unwrap();
        assert_eq!(kc.k_mu_hat, 0.0);
        assert_eq!(kc.k_s, 2.0);
        assert_eq!(kc.k_a, 0.0);
        assert_eq!(kc.l_pop_hat, 1.0);
    }

    #[test]
    fn truncation_horizon_formula() {
        assert_eq!(truncation_horizon(0.8, 1e-5), 59);
        let t = truncation_horizon(0.8, 1e-5) as i32;
        assert!(0.8f64.powi(t) / 0.2 <= 1e-5);
        assert!(0.8f64.powi(t - 1) / 0.2 > 1e-5);
    }

    #[test]
    fn empirical_bound_at_step_zero() {
        let b = empirical_distribution_bound(0, 1.0, 2, 100, 0.0, &[]);
        assert!((b - 2.0 * (std::f64::consts::PI / 200.0).sqrt()).abs() < 1e-12);
    }
}
