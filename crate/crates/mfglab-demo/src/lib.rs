//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function wraps a plain Rust function of the same name
//! with an `_impl` suffix; those return `Result<_, String>` so they can be
//! tested natively.

use wasm_bindgen::prelude::*;

use mfglab::counterexamples::FhLowerParams;
use mfglab::exact::binomial_anticoncentration_exact;
use mfglab::experiments::fh_divergence;
use mfglab::expr::parse_expr;

/// Largest population the page may request; larger runs stall the tab.
pub const MAX_AGENTS: usize = 20_000;
pub const MAX_EPISODES: usize = 2_000;
pub const MAX_HORIZON: usize = 40;

/// Per-step divergence estimate in the finite-horizon lower-bound game.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceCurve {
    means: Vec<f64>,
    stderrs: Vec<f64>,
    exact_initial: f64,
}

#[wasm_bindgen]
impl DivergenceCurve {
    #[wasm_bindgen(getter)]
    pub fn means(&self) -> Vec<f64> {
        self.means.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn stderrs(&self) -> Vec<f64> {
        self.stderrs.clone()
    }

    /// Exact expected divergence at step 0.
    #[wasm_bindgen(getter, js_name = exactInitial)]
    pub fn exact_initial(&self) -> f64 {
        self.exact_initial
    }
}

pub fn divergence_curve_impl(
    agents: usize,
    horizon: usize,
    episodes: usize,
    seed: u64,
) -> Result<DivergenceCurve, String> {
    if agents == 0 || agents > MAX_AGENTS || episodes == 0 || episodes > MAX_EPISODES {
        return Err(format!("need 1..={MAX_AGENTS} agents and 1..={MAX_EPISODES} episodes"));
    }
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(format!("horizon must be in 1..={MAX_HORIZON}"));
    }
    let rows =
        fh_divergence(&FhLowerParams::with_horizon(horizon), agents, episodes, seed).map_err(|e| e.to_string())?;
    Ok(DivergenceCurve {
        means: rows.iter().map(|r| r.mean).collect(),
        stderrs: rows.iter().map(|r| r.stderr).collect(),
        exact_initial: rows[0].exact.unwrap_or(f64::NAN),
    })
}

/// Simulates the lower-bound game with every agent on the equilibrium
/// policy and returns `E || empirical_h - mu_h ||_1` per step.
#[wasm_bindgen(js_name = divergenceCurve)]
pub fn divergence_curve(agents: usize, horizon: usize, episodes: usize, seed: u64) -> Result<DivergenceCurve, JsError> {
    divergence_curve_impl(agents, horizon, episodes, seed).map_err(|e| JsError::new(&e))
}

pub fn anticoncentration_impl(n_max: usize, p: f64) -> Result<Vec<f64>, String> {
    if n_max == 0 || n_max > 5000 {
        return Err("N max must be in 1..=5000".into());
    }
    (1..=n_max).map(|n| binomial_anticoncentration_exact(n, p).map_err(|e| e.to_string())).collect()
}

/// `P[X >= N/2 + sqrt(N)/2]` for `X ~ Binomial(N, p)` at `N = 1..=n_max`.
#[wasm_bindgen(js_name = anticoncentration)]
pub fn anticoncentration(n_max: usize, p: f64) -> Result<Vec<f64>, JsError> {
    anticoncentration_impl(n_max, p).map_err(|e| JsError::new(&e))
}

pub fn eval_expression_impl(text: &str, states: &str, mu: &str) -> Result<f64, String> {
    let names: Vec<String> =
        states.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(str::to_string).collect();
    let values: Vec<f64> = mu
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: `{}`", t.trim())))
        .collect::<Result<_, _>>()?;
    if values.len() != names.len() {
        return Err(format!("{} states but {} population values", names.len(), values.len()));
    }
    let e = parse_expr(text, &names).map_err(|e| e.to_string())?;
    e.eval(&values).map_err(|e| e.to_string())
}

/// Parses an expression over the named states and evaluates it at `mu`.
#[wasm_bindgen(js_name = evalExpression)]
pub fn eval_expression(text: &str, states: &str, mu: &str) -> Result<f64, JsError> {
    eval_expression_impl(text, states, mu).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_evaluates_against_named_states() {
        let v = eval_expression_impl("min(1, 4 * mu(b)) + 0.5", "a, b", "0.9, 0.1").unwrap();
        assert!((v - 0.9).abs() < 1e-15);
        assert!(eval_expression_impl("mu(c)", "a, b", "0.5, 0.5").is_err());
        assert!(eval_expression_impl("1 / mu(a)", "a", "0").is_err());
        assert!(eval_expression_impl("mu(a)", "a, b", "1").is_err());
    }

    #[test]
    fn anticoncentration_starts_at_single_coin() {
        let v = anticoncentration_impl(3, 0.5).unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert!(anticoncentration_impl(0, 0.5).is_err());
    }

    #[test]
    fn divergence_curve_has_one_point_per_step() {
        let c = divergence_curve_impl(100, 4, 20, 1).unwrap();
        assert_eq!(c.means().len(), 4);
        assert_eq!(c.stderrs().len(), 4);
        assert!(c.exact_initial() > 0.0);
        assert!(divergence_curve_impl(0, 4, 20, 1).is_err());
    }
}
