//! Exact small-N oracles and binomial identities.
//!
//! The finite-horizon N-player game is a finite Markov chain on
//! (agent 0's state, occupation counts of the other N - 1 agents). Given the
//! current counts, the others' next counts are a convolution of one
//! multinomial per occupied state. Backward induction over that chain gives
//! exact values; branches below [`PRUNE`] are dropped.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::game::{FhMfg, Policy};
use crate::mfg::argmax_low;

/// Probability below which count outcomes are discarded.
pub const PRUNE: f64 = 1e-15;

pub const MAX_AGENTS: usize = 8;
pub const MAX_STATES: usize = 6;
pub const MAX_HORIZON: usize = 6;
/// Largest number of deterministic Markov deviations enumerated.
pub const MAX_MARKOV_POLICIES: u64 = 1 << 16;

type Counts = Vec<u8>;

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// All outcomes of throwing `m` agents into bins with probabilities `q`.
fn multinomial(m: usize, q: &[f64], lf: &[f64]) -> Vec<(Vec<u8>, f64)> {
    let k = q.len();
    let support: Vec<usize> = (0..k).filter(|&i| q[i] > 0.0).collect();
    let mut out = Vec::new();
    let mut counts = vec![0u8; k];
    fn rec(
        idx: usize,
        left: usize,
        support: &[usize],
        q: &[f64],
        lf: &[f64],
        log_p: f64,
        counts: &mut Vec<u8>,
        out: &mut Vec<(Vec<u8>, f64)>,
    ) {
        let bin = support[idx];
        if idx + 1 == support.len() {
            counts[bin] = left as u8;
            let lp = log_p + left as f64 * q[bin].ln() - lf[left];
            out.push((counts.clone(), lp));
            counts[bin] = 0;
            return;
        }
        for take in 0..=left {
            counts[bin] = take as u8;
            let lp = log_p + take as f64 * q[bin].ln() - lf[take];
            rec(idx + 1, left - take, support, q, lf, lp, counts, out);
        }
        counts[bin] = 0;
    }
    if m == 0 || support.is_empty() {
        return vec![(counts, 1.0)];
    }
    rec(0, m, &support, q, lf, lf[m], &mut counts, &mut out);
    out.into_iter().map(|(c, lp)| (c, lp.exp())).filter(|(_, p)| *p >= PRUNE).collect()
}

/// How agent 0 behaves in the chain.
#[derive(Clone, Copy)]
enum Mode<'a> {
    /// Maximize with full view of the counts.
    Best,
    /// Follow a Markov policy sequence.
    Fixed(&'a [Policy]),
}

struct Chain<'a> {
    g: &'a FhMfg,
    others: &'a [Policy],
    n: usize,
    lf: Vec<f64>,
    memo: Vec<HashMap<(usize, Counts), f64>>,
    transitions: Vec<HashMap<(usize, Counts), Vec<(Counts, f64)>>>,
}

impl<'a> Chain<'a> {
    fn new(g: &'a FhMfg, others: &'a [Policy], n: usize) -> Result<Self> {
        if n == 0 || n > MAX_AGENTS || g.n_states() > MAX_STATES || g.horizon > MAX_HORIZON {
            return Err(Error::SizeGuard(format!(
                "exact oracle needs 1 <= N <= {MAX_AGENTS}, |S| <= {MAX_STATES}, H <= {MAX_HORIZON} \
                 (got N={n}, |S|={}, H={})",
                g.n_states(),
                g.horizon
            )));
        }
        g.check_policy_seq(others)?;
        Ok(Chain {
            g,
            others,
            n,
            lf: ln_factorials(n),
            memo: vec![HashMap::new(); g.horizon],
            transitions: vec![HashMap::new(); g.horizon],
        })
    }

    fn empirical(&self, s1: usize, c: &[u8]) -> Vec<f64> {
        let inv = 1.0 / self.n as f64;
        let mut mu: Vec<f64> = c.iter().map(|&k| k as f64 * inv).collect();
        mu[s1] += inv;
        mu
    }

    /// Distribution of the others' counts after step `h`.
    fn next_counts(&mut self, h: usize, s1: usize, c: &Counts) -> Result<Vec<(Counts, f64)>> {
        let key = (s1, c.clone());
        if let Some(v) = self.transitions[h].get(&key) {
            return Ok(v.clone());
        }
        let ns = self.g.n_states();
        let mu = self.empirical(s1, c);
        let km = self.g.kernel.eval(&mu)?;
        let mut dist: HashMap<Counts, f64> = HashMap::from([(vec![0u8; ns], 1.0)]);
        let mut row = vec![0.0; ns];
        for s in 0..ns {
            if c[s] == 0 {
                continue;
            }
            km.mixed_row(s, self.others[h].row(s), &mut row);
            let outcomes = multinomial(c[s] as usize, &row, &self.lf);
            let mut next = HashMap::with_capacity(dist.len() * outcomes.len());
            for (base, p) in &dist {
                for (add, q) in &outcomes {
                    let pq = p * q;
                    if pq < PRUNE {
                        continue;
                    }
                    let k: Counts = base.iter().zip(add).map(|(a, b)| a + b).collect();
                    *next.entry(k).or_insert(0.0) += pq;
                }
            }
            dist = next;
        }
        let mut out: Vec<(Counts, f64)> = dist.into_iter().collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        self.transitions[h].insert(key, out.clone());
        Ok(out)
    }

    fn value(&mut self, mode: Mode<'_>, h: usize, s1: usize, c: &Counts) -> Result<f64> {
        if h == self.g.horizon {
            return Ok(0.0);
        }
        if let Some(v) = self.memo[h].get(&(s1, c.clone())) {
            return Ok(*v);
        }
        let ns = self.g.n_states();
        let na = self.g.n_actions();
        let mu = self.empirical(s1, c);
        let km = self.g.kernel.eval(&mu)?;
        let rm = self.g.rewards.eval(&mu)?;
        let mut cont = vec![0.0; ns];
        if h + 1 < self.g.horizon {
            let next = self.next_counts(h, s1, c)?;
            for (t, w) in cont.iter_mut().enumerate() {
                if (0..na).all(|a| km.row(s1, a)[t] == 0.0) {
                    continue;
                }
                for (c2, p) in &next {
                    *w += p * self.value(mode, h + 1, t, c2)?;
                }
            }
        }
        let q: Vec<f64> =
            (0..na).map(|a| rm.get(s1, a) + km.row(s1, a).iter().zip(&cont).map(|(p, w)| p * w).sum::<f64>()).collect();
        let v = match mode {
            Mode::Best => q[argmax_low(&q)],
            Mode::Fixed(pis) => pis[h].row(s1).iter().zip(&q).map(|(p, x)| p * x).sum(),
        };
        self.memo[h].insert((s1, c.clone()), v);
        Ok(v)
    }

    fn initial_value(&mut self, mode: Mode<'_>) -> Result<f64> {
        let mu0 = self.g.mu0.to_vec();
        let start = multinomial(self.n - 1, &mu0, &self.lf);
        let mut total = 0.0;
        for (s1, &p1) in mu0.iter().enumerate() {
            if p1 == 0.0 {
                continue;
            }
            for (c, p) in &start {
                total += p1 * p * self.value(mode, 0, s1, c)?;
            }
        }
        Ok(total)
    }
}

/// Exact optimal deviation value for agent 0 when the other `n - 1` agents
/// play `others`.
///
/// The deviator conditions on its own state and the others' counts at every
/// step, which is the information generating the game's dynamics. The value
/// is therefore an upper bound on the best deviation restricted to Markov
/// policies of the agent's own state; [`exact_markov_br_nplayer_fh`]
/// computes that restricted value by enumeration.
pub fn exact_br_nplayer_fh(g: &FhMfg, others: &[Policy], n: usize) -> Result<f64> {
    Chain::new(g, others, n)?.initial_value(Mode::Best)
}

/// Exact expected total reward of agent 0 playing `deviator` while the
/// other `n - 1` agents play `others`.
pub fn exact_j_nplayer_fh(g: &FhMfg, deviator: &[Policy], others: &[Policy], n: usize) -> Result<f64> {
    g.check_policy_seq(deviator)?;
    Chain::new(g, others, n)?.initial_value(Mode::Fixed(deviator))
}

/// Best deviation over deterministic Markov policy sequences, by exhaustive
/// enumeration. Returns the value and a maximizing sequence (first found in
/// lexicographic order of per-step action choices).
pub fn exact_markov_br_nplayer_fh(g: &FhMfg, others: &[Policy], n: usize) -> Result<(f64, Vec<Policy>)> {
    let (ns, na, hz) = (g.n_states(), g.n_actions(), g.horizon);
    let slots = (ns * hz) as u32;
    let count = (na as u64)
        .checked_pow(slots)
        .filter(|&c| c <= MAX_MARKOV_POLICIES)
        .ok_or_else(|| Error::SizeGuard(format!("{na}^{slots} Markov policies exceed the enumeration limit")))?;
    let mut chain = Chain::new(g, others, n)?;
    let mut best: Option<(f64, Vec<Policy>)> = None;
    for code in 0..count {
        let mut rest = code;
        let mut choice = vec![0usize; ns * hz];
        for slot in choice.iter_mut().rev() {
            *slot = (rest % na as u64) as usize;
            rest /= na as u64;
        }
        let pis: Vec<Policy> = choice.chunks(ns).map(|c| Policy::deterministic(c, na)).collect();
        chain.memo.iter_mut().for_each(HashMap::clear);
        let v = chain.initial_value(Mode::Fixed(&pis))?;
        if best.as_ref().is_none_or(|(b, _)| v > *b + crate::mfg::TIE_TOL) {
            best = Some((v, pis));
        }
    }
    Ok(best.expect("at least one policy"))
}

/// `ln C(n, k)` from a log-factorial table.
fn ln_choose(lf: &[f64], n: usize, k: usize) -> f64 {
    lf[n] - lf[k] - lf[n - k]
}

fn ln_binom_pmf(lf: &[f64], n: usize, k: usize, p: f64) -> f64 {
    let a = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let b = if k == n { 0.0 } else { (n - k) as f64 * (1.0 - p).ln() };
    ln_choose(lf, n, k) + a + b
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Smallest integer `k` with `k >= N/2 + sqrt(N)/2`, in integer arithmetic.
pub fn anticoncentration_threshold(n: u64) -> u64 {
    // k >= (N + sqrt N) / 2  <=>  2k - N >= sqrt N  <=>  (2k - N)^2 >= N.
    let mut k = n.div_ceil(2);
    while {
        let d = 2 * k - n;
        d * d < n
    } {
        k += 1;
    }
    k
}

/// Exact `P[X >= N/2 + sqrt(N)/2]` for `X ~ Binomial(N, p)`.
pub fn binomial_anticoncentration_exact(n: usize, p: f64) -> Result<f64> {
    if !(1..=10_000).contains(&n) || !(0.5..=1.0).contains(&p) {
        return Err(Error::Domain(format!("need 1 <= N <= 10000 and p in [1/2, 1] (got N={n}, p={p})")));
    }
    let k0 = anticoncentration_threshold(n as u64) as usize;
    if k0 > n {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let lf = ln_factorials(n);
    let terms: Vec<f64> = (k0..=n).map(|k| ln_binom_pmf(&lf, n, k, p)).collect();
    Ok(log_sum_exp(&terms).exp().min(1.0))
}

/// Exact `E | X/N - p |` for `X ~ Binomial(N, p)`.
pub fn binomial_mean_abs_deviation(n: usize, p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let lf = ln_factorials(n);
    (0..=n).map(|k| ln_binom_pmf(&lf, n, k, p).exp() * (k as f64 / n as f64 - p).abs()).sum()
}

/// Exact `E || empirical_0 - mu ||_1` when `N` agents start i.i.d. from `mu`.
pub fn initial_divergence_exact(n: usize, mu: &[f64]) -> f64 {
    mu.iter().map(|&p| binomial_mean_abs_deviation(n, p)).sum()
}
