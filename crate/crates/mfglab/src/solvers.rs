//! Heuristic solvers and an exact bimatrix oracle.
//!
//! None of the mean-field solvers is guaranteed to converge; each returns a
//! [`SolveReport`] whose `converged` flag is set only when the stopping
//! criterion was measured to hold.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Distribution, FhMfg, Kernel, Policy, PolicySeq, StatMfg};
use crate::mfg::{
    best_response_fh, best_response_stat, exploitability_fh, exploitability_stat, gamma_p, lambda_flow,
    stat_stability_residual, value_fh,
};
use crate::reductions::check_bimatrix;

/// Default damping for fixed-point and best-response iterations.
pub const DEFAULT_DAMPING: f64 = 0.3;
/// Stationary values inside [`damped_br_stat`] are evaluated to this
/// fraction of the stopping tolerance.
pub const EVAL_TOL_FACTOR: f64 = 0.1;
/// Payoff slack accepted by [`support_enumeration_2nash`].
pub const NASH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub solver: String,
    pub iterations: usize,
    /// Stability residual of the returned distribution, when there is one.
    pub residual: Option<f64>,
    /// Exploitability of the returned policy, when there is one.
    pub exploitability: Option<f64>,
    pub converged: bool,
    pub wall_time_secs: f64,
    /// Per-iteration residual or exploitability.
    pub history: Vec<f64>,
}

fn check_damping(damping: f64) -> Result<()> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::Domain(format!("damping {damping} outside (0, 1]")));
    }
    Ok(())
}

/// [`damped_fixed_point_from`] started at the uniform distribution.
pub fn damped_fixed_point(
    kernel: &Kernel,
    pi: &Policy,
    damping: f64,
    tol: f64,
    max_iters: usize,
) -> Result<(Distribution, SolveReport)> {
    let start = Distribution::uniform(kernel.n_states());
    damped_fixed_point_from(kernel, pi, start, damping, tol, max_iters)
}

/// Iterates `mu <- (1 - damping) mu + damping Gamma(mu, pi)` until the
/// sup-norm residual `|Gamma(mu, pi) - mu|` is at most `tol`. Each
/// iteration evaluates the operator once; a start point that is already
/// stable returns after one iteration.
pub fn damped_fixed_point_from(
    kernel: &Kernel,
    pi: &Policy,
    start: Distribution,
    damping: f64,
    tol: f64,
    max_iters: usize,
) -> Result<(Distribution, SolveReport)> {
    check_damping(damping)?;
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if start.len() != kernel.n_states() {
        return Err(Error::Shape("start distribution length differs from state count".into()));
    }
    let clock = Instant::now();
    let mut mu = start;
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..max_iters {
        let next = gamma_p(kernel, &mu, pi)?;
        let r = next.linf(&mu);
        history.push(r);
        if r <= tol {
            converged = true;
            break;
        }
        let mixed = mu.iter().zip(next.iter()).map(|(a, b)| a + damping * (b - a)).collect();
        mu = Distribution::new(mixed)?;
    }
    let residual = if converged {
        *history.last().expect("at least one iteration")
    } else {
        stat_stability_residual(kernel, &mu, pi)?
    };
    let report = SolveReport {
        solver: "damped-fixed-point".into(),
        iterations: history.len(),
        residual: Some(residual),
        exploitability: None,
        converged,
        wall_time_secs: clock.elapsed().as_secs_f64(),
        history,
    };
    Ok((mu, report))
}

/// Fictitious play from the uniform policy. Iteration `k` (0-based)
/// computes the flow of the running average, records the average's
/// exploitability, stops if that is at most `tol`, and otherwise folds the
/// exact best response into the average with weight `1/(k+1)`.
pub fn fictitious_play_fh(g: &FhMfg, iterations: usize, tol: f64) -> Result<(PolicySeq, SolveReport)> {
    if iterations == 0 {
        return Err(Error::Domain("fictitious play needs at least one iteration".into()));
    }
    let clock = Instant::now();
    let mut avg = vec![Policy::uniform(g.n_states(), g.n_actions()); g.horizon];
    let mut history = Vec::with_capacity(iterations);
    let mut stopped = false;
    for k in 0..iterations {
        let flow = lambda_flow(g, &avg)?;
        let (br, br_value) = best_response_fh(g, &flow)?;
        let e = br_value - value_fh(g, &flow, &avg)?;
        history.push(e);
        if e <= tol {
            stopped = true;
            break;
        }
        let w = 1.0 / (k + 1) as f64;
        avg = avg.iter().zip(&br).map(|(p, b)| p.mix(b, w)).collect();
    }
    let final_e = if stopped { *history.last().expect("non-empty") } else { exploitability_fh(g, &avg)? };
    let report = SolveReport {
        solver: "fictitious-play".into(),
        iterations: history.len(),
        residual: None,
        exploitability: Some(final_e),
        converged: final_e <= tol,
        wall_time_secs: clock.elapsed().as_secs_f64(),
        history,
    };
    Ok((avg, report))
}

/// [`damped_br_stat_from`] started at `g.mu0` (uniform if absent) and the
/// uniform policy.
pub fn damped_br_stat(
    g: &StatMfg,
    damping: f64,
    tol: f64,
    max_iters: usize,
) -> Result<((Distribution, Policy), SolveReport)> {
    let mu = g.mu0.clone().unwrap_or_else(|| Distribution::uniform(g.n_states()));
    let pi = Policy::uniform(g.n_states(), g.n_actions());
    damped_br_stat_from(g, mu, pi, damping, tol, max_iters)
}

/// Alternates damped best-response and damped population updates. Each
/// iteration first measures the stability residual and exploitability of
/// the current pair and stops when both are at most `tol`; otherwise the
/// policy moves toward the best response by `damping` and the population
/// is relaxed toward the stable distribution of the new policy. A seed
/// that is already an equilibrium is returned unchanged.
pub fn damped_br_stat_from(
    g: &StatMfg,
    mu: Distribution,
    pi: Policy,
    damping: f64,
    tol: f64,
    max_iters: usize,
) -> Result<((Distribution, Policy), SolveReport)> {
    check_damping(damping)?;
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    g.check_distribution(&mu)?;
    g.check_policy(&pi)?;
    let clock = Instant::now();
    let eval_tol = tol * EVAL_TOL_FACTOR;
    let (mut mu, mut pi) = (mu, pi);
    let mut history = Vec::new();
    let mut last = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    for _ in 0..max_iters {
        let residual = stat_stability_residual(&g.kernel, &mu, &pi)?;
        let (br, _) = best_response_stat(g, &mu, eval_tol)?;
        let e = exploitability_stat(g, &mu, &pi, eval_tol)?;
        history.push(residual.max(e));
        last = (residual, e);
        if residual <= tol && e <= tol {
            converged = true;
            break;
        }
        pi = pi.mix(&br, damping);
        let (next, _) = damped_fixed_point_from(&g.kernel, &pi, mu, damping, tol, 1000)?;
        mu = next;
    }
    if !converged {
        last = (stat_stability_residual(&g.kernel, &mu, &pi)?, exploitability_stat(g, &mu, &pi, eval_tol)?);
    }
    let report = SolveReport {
        solver: "damped-best-response".into(),
        iterations: history.len(),
        residual: Some(last.0),
        exploitability: Some(last.1),
        converged,
        wall_time_secs: clock.elapsed().as_secs_f64(),
        history,
    };
    Ok(((mu, pi), report))
}

/// Outcome of the support enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashSolution {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub row_support: Vec<usize>,
    pub col_support: Vec<usize>,
    /// Support pairs whose indifference system was singular.
    pub singular_systems: usize,
}

/// Largest strategy count accepted by [`support_enumeration_2nash`].
pub const MAX_STRATEGIES: usize = 6;

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Mixed strategy on `mine` that makes every strategy in `theirs`
/// indifferent under `pay(t, m)` (the opponent's payoff when they play `t`
/// against our `m`). `None` when the system is singular.
fn indifference(mine: &[usize], theirs: &[usize], size: usize, pay: impl Fn(usize, usize) -> f64) -> Option<Vec<f64>> {
    let k = mine.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for (r, &t) in theirs.iter().enumerate() {
        for (c, &s) in mine.iter().enumerate() {
            m[(r, c)] = pay(t, s);
        }
        m[(r, k)] = -1.0;
    }
    for c in 0..k {
        m[(k, c)] = 1.0;
    }
    rhs[k] = 1.0;
    let x = m.lu().solve(&rhs)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut out = vec![0.0; size];
    for (c, &s) in mine.iter().enumerate() {
        out[s] = x[c];
    }
    Some(out)
}

/// Exact Nash equilibrium by equal-size support enumeration. Supports are
/// tried by size, then row support, then column support, each in
/// lexicographic order; the first profile that is non-negative and has no
/// profitable pure deviation beyond [`NASH_SLACK`] is returned.
pub fn support_enumeration_2nash(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<NashSolution> {
    let (k1, k2) = check_bimatrix(a, b)?;
    if k1 > MAX_STRATEGIES || k2 > MAX_STRATEGIES {
        return Err(Error::SizeGuard(format!("support enumeration needs at most {MAX_STRATEGIES} strategies")));
    }
    let mut singular = 0;
    for k in 1..=k1.min(k2) {
        for rows in subsets(k1, k) {
            for cols in subsets(k2, k) {
                // Column mix makes the row player indifferent over `rows`, and vice versa.
                let col = indifference(&cols, &rows, k2, |i, j| a[i][j]);
                let row = indifference(&rows, &cols, k1, |j, i| b[i][j]);
                let (Some(mut col), Some(mut row)) = (col, row) else {
                    singular += 1;
                    continue;
                };
                if row.iter().chain(&col).any(|&x| x < -NASH_SLACK) {
                    continue;
                }
                for x in row.iter_mut().chain(col.iter_mut()) {
                    *x = x.max(0.0);
                }
                let (sr, sc): (f64, f64) = (row.iter().sum(), col.iter().sum());
                row.iter_mut().for_each(|x| *x /= sr);
                col.iter_mut().for_each(|x| *x /= sc);
                let row_pay: Vec<f64> = (0..k1).map(|i| (0..k2).map(|j| a[i][j] * col[j]).sum()).collect();
                let col_pay: Vec<f64> = (0..k2).map(|j| (0..k1).map(|i| b[i][j] * row[i]).sum()).collect();
                let v1: f64 = row.iter().zip(&row_pay).map(|(x, y)| x * y).sum();
                let v2: f64 = col.iter().zip(&col_pay).map(|(x, y)| x * y).sum();
                if row_pay.iter().all(|&p| p <= v1 + NASH_SLACK) && col_pay.iter().all(|&p| p <= v2 + NASH_SLACK) {
                    return Ok(NashSolution {
                        row,
                        col,
                        row_support: rows,
                        col_support: cols,
                        singular_systems: singular,
                    });
                }
            }
        }
    }
    Err(Error::Degenerate(format!("no equal-support equilibrium found ({singular} singular indifference systems)")))
}
