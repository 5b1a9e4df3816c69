//! Experiment drivers. Each returns flat rows ready for CSV output; the
//! numbers depend only on the arguments, including the seed.

use serde::Serialize;

use crate::corpus::congestion_ring;
use crate::counterexamples::{
    build_fh_lower, build_stat_lower, fh_br_policy, fh_ne_policy, stat_br_policy, stat_ne, FhLowerParams,
    StatLowerParams,
};
use crate::error::{Error, Result};
use crate::exact::{
    binomial_anticoncentration_exact, exact_br_nplayer_fh, exact_j_nplayer_fh, exact_markov_br_nplayer_fh,
    initial_divergence_exact,
};
use crate::format::format_reals;
use crate::game::Policy;
use crate::gcircuit::{check_assignment, Assignment, GCircuit};
use crate::mfg::{empirical_distribution_bound, kernel_constants, lambda_flow, truncation_horizon};
use crate::reductions::{
    extract_fh2_assignment, extract_nash_strategies, extract_statdist_assignment, gcircuit_to_fh2,
    gcircuit_to_statdist, nash2_to_fh2, verify_bimatrix_nash,
};
use crate::sim::{estimate_divergence, fh_returns, paired_difference, stat_returns, SimConfig};
use crate::solvers::{damped_fixed_point, fictitious_play_fh, support_enumeration_2nash, SolveReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub step: usize,
    pub n_agents: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Exact value where one is available (step 0).
    pub exact: Option<f64>,
}

/// Per-step `E || empirical_h - mu_h ||_1` in the finite-horizon lower-bound
/// game when every agent plays the equilibrium policy.
pub fn fh_divergence(p: &FhLowerParams, n: usize, episodes: usize, seed: u64) -> Result<Vec<DivergenceRow>> {
    let g = build_fh_lower(p)?;
    let pis = fh_ne_policy(p.horizon);
    let flow = lambda_flow(&g, &pis)?;
    let est = estimate_divergence(&g, &pis, &flow, &SimConfig::new(n, episodes, seed))?;
    Ok(est
        .iter()
        .enumerate()
        .map(|(h, e)| DivergenceRow {
            step: h,
            n_agents: n,
            mean: e.mean,
            stderr: e.stderr,
            exact: (h == 0).then(|| initial_divergence_exact(n, &g.mu0)),
        })
        .collect())
}

/// Deviation gain estimated from paired episodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub horizon: usize,
    pub n_agents: usize,
    pub episodes: usize,
    pub j_equilibrium: f64,
    pub j_deviation: f64,
    pub gap: f64,
    pub gap_stderr: f64,
}

/// Gain of the drift-exploiting deviation over the equilibrium policy in
/// the finite-horizon lower-bound game, for each horizon.
pub fn fh_gap_sweep(horizons: &[usize], n: usize, episodes: usize, seed: u64) -> Result<Vec<GapRow>> {
    horizons
        .iter()
        .map(|&h| {
            let g = build_fh_lower(&FhLowerParams::with_horizon(h))?;
            let ne = fh_ne_policy(h);
            let cfg = SimConfig::new(n, episodes, seed);
            let base = fh_returns(&g, &ne, &ne, &cfg)?;
            let dev = fh_returns(&g, &fh_br_policy(h), &ne, &cfg)?;
            let d = paired_difference(&dev, &base)?;
            Ok(GapRow {
                horizon: h,
                n_agents: n,
                episodes,
                j_equilibrium: base.iter().sum::<f64>() / episodes as f64,
                j_deviation: dev.iter().sum::<f64>() / episodes as f64,
                gap: d.mean,
                gap_stderr: d.stderr,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatGapRow {
    pub n_agents: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub steps: usize,
    pub truncation_bias: f64,
    pub episodes: usize,
    pub gap: f64,
    pub gap_stderr: f64,
}

/// Gain of the side-state deviation in the stationary lower-bound game with
/// agents started i.i.d. from the equilibrium distribution. The game's
/// anti-crowding weight is `min(0.05, e^-N)`; returns are truncated so the
/// discarded tail is at most `bias_tol`.
pub fn stat_gap_sweep(ns: &[usize], gamma: f64, episodes: usize, seed: u64, bias_tol: f64) -> Result<Vec<StatGapRow>> {
    let steps = truncation_horizon(gamma, bias_tol);
    let (mu, pi) = stat_ne();
    let dev = stat_br_policy();
    ns.iter()
        .map(|&n| {
            let params = StatLowerParams::for_agents(n, gamma);
            let g = build_stat_lower(&params)?;
            let cfg = SimConfig::new(n, episodes, seed).with_steps(steps);
            let base = stat_returns(&g, &mu, &pi, None, &cfg)?;
            let moved = stat_returns(&g, &mu, &pi, Some(&dev), &cfg)?;
            let d = paired_difference(&moved, &base)?;
            Ok(StatGapRow {
                n_agents: n,
                gamma,
                alpha: params.alpha,
                steps,
                truncation_bias: gamma.powi(steps as i32) / (1.0 - gamma),
                episodes,
                gap: d.mean,
                gap_stderr: d.stderr,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnticoncentrationRow {
    pub n: usize,
    pub p: f64,
    pub probability: f64,
}

/// Exact `P[X >= N/2 + sqrt(N)/2]` for `X ~ Binomial(N, p)` over a grid.
pub fn anticoncentration_sweep(n_max: usize, ps: &[f64]) -> Result<Vec<AnticoncentrationRow>> {
    let mut rows = Vec::with_capacity(n_max * ps.len());
    for n in 1..=n_max {
        for &p in ps {
            rows.push(AnticoncentrationRow { n, p, probability: binomial_anticoncentration_exact(n, p)? });
        }
    }
    Ok(rows)
}

/// `0.50, 0.55, ..., 1.00`.
pub fn default_p_grid() -> Vec<f64> {
    (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperTrendRow {
    pub n_agents: usize,
    pub horizon: usize,
    /// Mean-field exploitability of the shared policy.
    pub mf_exploitability: f64,
    pub j_shared: f64,
    /// Best deviation that observes the other agents' counts.
    pub gap_count_observing: f64,
    /// Best deviation among deterministic Markov policies.
    pub gap_markov: Option<f64>,
}

/// Exact finite-N deviation gaps in the congestion ring after solving the
/// mean-field game by fictitious play. Returns the rows and the solver
/// report.
pub fn upper_trend(
    ns: &[usize],
    horizon: usize,
    fp_iters: usize,
    fp_tol: f64,
    with_markov: bool,
) -> Result<(Vec<UpperTrendRow>, SolveReport)> {
    let g = congestion_ring(horizon)?;
    let (pis, rep) = fictitious_play_fh(&g, fp_iters, fp_tol)?;
    let e = rep.exploitability.unwrap_or(f64::NAN);
    let rows = ns
        .iter()
        .map(|&n| {
            let j = exact_j_nplayer_fh(&g, &pis, &pis, n)?;
            let br = exact_br_nplayer_fh(&g, &pis, n)?;
            let markov = if with_markov { Some(exact_markov_br_nplayer_fh(&g, &pis, n)?.0 - j) } else { None };
            Ok(UpperTrendRow {
                n_agents: n,
                horizon,
                mf_exploitability: e,
                j_shared: j,
                gap_count_observing: br - j,
                gap_markov: markov,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, rep))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub step: usize,
    pub n_agents: usize,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
}

/// Monte Carlo `E || empirical_h - mu_h ||_1` in the congestion ring under
/// the fictitious-play policy, next to the analytic upper bound. The ring's
/// kernel does not depend on the population, so the population operator
/// is non-expansive and the bound uses `L = 1`.
pub fn ring_divergence_vs_bound(
    ns: &[usize],
    horizon: usize,
    episodes: usize,
    seed: u64,
    fp_iters: usize,
) -> Result<Vec<BoundRow>> {
    let g = congestion_ring(horizon)?;
    let (pis, _) = fictitious_play_fh(&g, fp_iters, 1e-6)?;
    let flow = lambda_flow(&g, &pis)?;
    let k_a = kernel_constants(&g.kernel, 8, seed)?.k_a;
    let mut rows = Vec::new();
    for &n in ns {
        let est = estimate_divergence(&g, &pis, &flow, &SimConfig::new(n, episodes, seed))?;
        for (h, e) in est.iter().enumerate() {
            rows.push(BoundRow {
                step: h,
                n_agents: n,
                mean: e.mean,
                stderr: e.stderr,
                bound: empirical_distribution_bound(h, 1.0, g.n_states(), n, k_a, &[]),
            });
        }
    }
    Ok(rows)
}

/// One circuit round trip through a compiled game and back.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitRoundTrip {
    pub instance: String,
    pub iterations: usize,
    /// Stability residual (stationary) or exploitability (finite horizon).
    pub solver_error: f64,
    pub converged: bool,
    pub check_eps: f64,
    pub satisfied: bool,
    pub max_violation: f64,
    pub assignment: String,
}

fn summarize(c: &GCircuit, p: &Assignment, eps: f64) -> Result<(bool, f64, String)> {
    let verdicts = check_assignment(c, p, eps)?;
    let worst = verdicts.iter().map(|v| v.violation).fold(0.0, f64::max);
    let text = p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
    Ok((verdicts.iter().all(|v| v.satisfied), worst, text))
}

/// Circuit → stationary game → damped fixed point → assignment.
pub fn statdist_roundtrip(
    c: &GCircuit,
    damping: f64,
    tol: f64,
    max_iters: usize,
    check_eps: f64,
) -> Result<CircuitRoundTrip> {
    let inst = gcircuit_to_statdist(c)?;
    let pi = Policy::uniform(inst.game.n_states(), 1);
    let (mu, rep) = damped_fixed_point(&inst.game.kernel, &pi, damping, tol, max_iters)?;
    let p = extract_statdist_assignment(&inst, &mu)?;
    let (satisfied, max_violation, assignment) = summarize(c, &p, check_eps)?;
    Ok(CircuitRoundTrip {
        instance: "statdist".into(),
        iterations: rep.iterations,
        solver_error: rep.residual.unwrap_or(f64::NAN),
        converged: rep.converged,
        check_eps,
        satisfied,
        max_violation,
        assignment,
    })
}

/// Circuit → two-step game → fictitious play → assignment.
pub fn fh2_roundtrip(c: &GCircuit, iters: usize, tol: f64, check_eps: f64) -> Result<CircuitRoundTrip> {
    let inst = gcircuit_to_fh2(c)?;
    let (pis, rep) = fictitious_play_fh(&inst.game, iters, tol)?;
    let p = extract_fh2_assignment(&inst, &pis)?;
    let (satisfied, max_violation, assignment) = summarize(c, &p, check_eps)?;
    Ok(CircuitRoundTrip {
        instance: "fh2".into(),
        iterations: rep.iterations,
        solver_error: rep.exploitability.unwrap_or(f64::NAN),
        converged: rep.converged,
        check_eps,
        satisfied,
        max_violation,
        assignment,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashRoundTrip {
    pub game: String,
    pub iterations: usize,
    pub exploitability: f64,
    pub row_strategy: String,
    pub col_strategy: String,
    pub oracle_row: String,
    pub oracle_col: String,
    /// Largest coordinate distance to the support-enumeration equilibrium.
    pub linf_to_oracle: f64,
    pub row_regret: f64,
    pub col_regret: f64,
    pub eps: f64,
    pub passed: bool,
}

/// Bimatrix game → two-step game → fictitious play → strategies, compared
/// with the support-enumeration oracle.
pub fn nash_roundtrip(
    name: &str,
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    iters: usize,
    tol: f64,
    eps: f64,
) -> Result<NashRoundTrip> {
    let inst = nash2_to_fh2(a, b)?;
    let (pis, rep) = fictitious_play_fh(&inst.game, iters, tol)?;
    let (s1, s2) = extract_nash_strategies(&inst, &pis)?;
    let oracle = support_enumeration_2nash(a, b)?;
    let v = verify_bimatrix_nash(a, b, &s1, &s2, eps)?;
    let linf =
        s1.iter().zip(&oracle.row).chain(s2.iter().zip(&oracle.col)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(NashRoundTrip {
        game: name.to_string(),
        iterations: rep.iterations,
        exploitability: rep.exploitability.unwrap_or(f64::NAN),
        row_strategy: format_reals(&s1),
        col_strategy: format_reals(&s2),
        oracle_row: format_reals(&oracle.row),
        oracle_col: format_reals(&oracle.col),
        linf_to_oracle: linf,
        row_regret: v.row_regret,
        col_regret: v.col_regret,
        eps,
        passed: v.passed,
    })
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Shape("slope needs two or more paired points".into()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("slope needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Least-squares slope of `ln y` against `ln x`; fails on non-positive data.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.iter().chain(y).any(|&v| v <= 0.0) {
        return Err(Error::Domain("log-log slope needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ls_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcircuit::reference_circuit;
    use crate::reductions::matching_pennies;

    #[test]
    fn slopes() {
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap() - 2.0).abs() < 1e-15);
        let s = log_log_slope(&[1.0, 4.0, 16.0], &[1.0, 0.5, 0.25]).unwrap();
        assert!((s + 0.5).abs() < 1e-12);
        assert!(log_log_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        assert!(ls_slope(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn divergence_has_exact_initial_value() {
        let rows = fh_divergence(&FhLowerParams::with_horizon(3), 50, 20, 1).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].exact.is_some() && rows[1].exact.is_none());
    }

    #[test]
    fn anticoncentration_grid_shape() {
        let rows = anticoncentration_sweep(5, &default_p_grid()).unwrap();
        assert_eq!(rows.len(), 55);
        assert!(rows.iter().all(|r| r.probability >= 0.05));
    }

    #[test]
    fn round_trips_on_reference_circuit() {
        let c = reference_circuit();
        assert!(statdist_roundtrip(&c, 0.3, 1e-8, 10_000, 0.05).unwrap().satisfied);
        assert!(fh2_roundtrip(&c, 1000, 4e-4, 0.2).unwrap().satisfied);
        let (a, b) = matching_pennies();
        let r = nash_roundtrip("matching-pennies", &a, &b, 1000, 1e-6, 0.05).unwrap();
        assert!(r.passed && r.linf_to_oracle <= 0.02);
    }
}
