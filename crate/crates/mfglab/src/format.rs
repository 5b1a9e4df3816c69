//! Text formats for games, distributions and policies.
//!
//! Game files:
//!
//! ```text
//! states: sL, sR
//! actions: a, b
//! horizon: 4          # or `gamma: 0.9` for a stationary game
//! mu0: 0.5, 0.5       # required with `horizon:`, optional with `gamma:`
//! P sL a sR = 0.5 + 0.5 * mu(sL)
//! R sR b = min(1, 2 * mu(sR))
//! ```
//!
//! Omitted `P` and `R` entries are zero. Solution files hold an optional
//! `mu:` line and policy rows, either `pi <h> <state> = <row>` for a
//! time-indexed sequence or `pi <state> = <row>` for a stationary policy.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::parse_expr;
use crate::game::{Distribution, FhMfg, Kernel, Policy, Rewards, StatMfg};

/// A parsed game file.
#[derive(Debug, Clone, PartialEq)]
pub enum Game {
    Fh(FhMfg),
    Stat(StatMfg),
}

fn file_err(line: usize, msg: impl Into<String>) -> Error {
    Error::File { line, msg: msg.into() }
}

/// Splits a name list on commas and whitespace.
fn name_list(text: &str) -> Vec<String> {
    text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_names(list: &[String], what: &str, line: usize) -> Result<()> {
    for (i, n) in list.iter().enumerate() {
        if !valid_ident(n) {
            return Err(file_err(line, format!("invalid {what} name `{n}`")));
        }
        if list[..i].contains(n) {
            return Err(file_err(line, format!("duplicate {what} `{n}`")));
        }
    }
    if list.is_empty() {
        return Err(file_err(line, format!("empty {what} list")));
    }
    Ok(())
}

/// Parses a comma-separated list of reals.
pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|_| Error::Domain(format!("not a number: `{t}`")))
        })
        .collect()
}

/// Parses a distribution with exactly `n` entries.
pub fn parse_distribution(text: &str, n: usize) -> Result<Distribution> {
    let v = parse_reals(text)?;
    if v.len() != n {
        return Err(Error::Shape(format!("distribution has {} entries, expected {n}", v.len())));
    }
    Distribution::new(v)
}

/// Comma-separated reals that parse back to the same values.
pub fn format_reals(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Parses a game file.
pub fn parse_game(text: &str) -> Result<Game> {
    let mut states: Option<Vec<String>> = None;
    let mut actions: Option<Vec<String>> = None;
    let mut horizon: Option<usize> = None;
    let mut gamma: Option<f64> = None;
    let mut mu0: Option<(usize, String)> = None;
    let mut body = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some((key, rest)) = line.split_once(':') {
            let rest = rest.trim();
            match key.trim() {
                "states" => {
                    let l = name_list(rest);
                    check_names(&l, "state", ln)?;
                    states = Some(l);
                }
                "actions" => {
                    let l = name_list(rest);
                    check_names(&l, "action", ln)?;
                    actions = Some(l);
                }
                "horizon" => {
                    horizon = Some(rest.parse().map_err(|_| file_err(ln, "horizon must be a positive integer"))?);
                }
                "gamma" => {
                    gamma = Some(rest.parse().map_err(|_| file_err(ln, "gamma must be a real"))?);
                }
                "mu0" => mu0 = Some((ln, rest.to_string())),
                other => return Err(file_err(ln, format!("unknown header `{other}`"))),
            }
        } else {
            body.push((ln, line.to_string()));
        }
    }

    let states = states.ok_or_else(|| file_err(0, "missing `states:` header"))?;
    let actions = actions.ok_or_else(|| file_err(0, "missing `actions:` header"))?;
    let mut kernel = Kernel::new(states.clone(), actions.clone());
    let mut rewards = Rewards::new(states.clone(), actions.clone());
    let state_idx = |name: &str, ln: usize| {
        states.iter().position(|s| s == name).ok_or_else(|| file_err(ln, format!("unknown state `{name}`")))
    };
    let action_idx = |name: &str, ln: usize| {
        actions.iter().position(|s| s == name).ok_or_else(|| file_err(ln, format!("unknown action `{name}`")))
    };

    for (ln, line) in body {
        let (lhs, rhs) = line.split_once('=').ok_or_else(|| file_err(ln, "expected `=`"))?;
        let parts: Vec<&str> = lhs.split_whitespace().collect();
        let expr = parse_expr(rhs, &states).map_err(|e| file_err(ln, e.to_string()))?;
        match parts.as_slice() {
            ["P", s, a, t] => {
                let (s, a, t) = (state_idx(s, ln)?, action_idx(a, ln)?, state_idx(t, ln)?);
                if kernel.get(s, a, t).is_some() {
                    return Err(file_err(ln, "duplicate transition entry"));
                }
                kernel.set(s, a, t, expr);
            }
            ["R", s, a] => {
                let (s, a) = (state_idx(s, ln)?, action_idx(a, ln)?);
                if rewards.get(s, a).is_some() {
                    return Err(file_err(ln, "duplicate reward entry"));
                }
                rewards.set(s, a, expr);
            }
            _ => return Err(file_err(ln, "expected `P <s> <a> <s'> = <expr>` or `R <s> <a> = <expr>`")),
        }
    }

    let mu0 = match mu0 {
        Some((ln, text)) => Some(parse_distribution(&text, states.len()).map_err(|e| file_err(ln, e.to_string()))?),
        None => None,
    };
    match (horizon, gamma) {
        (Some(h), None) => {
            let mu0 = mu0.ok_or_else(|| file_err(0, "finite-horizon game needs `mu0:`"))?;
            Ok(Game::Fh(FhMfg::new(kernel, rewards, h, mu0)?))
        }
        (None, Some(g)) => Ok(Game::Stat(StatMfg::new(kernel, rewards, g, mu0)?)),
        (Some(_), Some(_)) => Err(file_err(0, "give either `horizon:` or `gamma:`, not both")),
        (None, None) => Err(file_err(0, "missing `horizon:` or `gamma:` header")),
    }
}

fn write_tables(out: &mut String, kernel: &Kernel, rewards: &Rewards) {
    let st = kernel.states();
    let ac = kernel.actions();
    for (s, sn) in st.iter().enumerate() {
        for (a, an) in ac.iter().enumerate() {
            for (t, tn) in st.iter().enumerate() {
                if let Some(e) = kernel.get(s, a, t) {
                    let _ = writeln!(out, "P {sn} {an} {tn} = {}", e.display(st));
                }
            }
        }
    }
    for (s, sn) in st.iter().enumerate() {
        for (a, an) in ac.iter().enumerate() {
            if let Some(e) = rewards.get(s, a) {
                let _ = writeln!(out, "R {sn} {an} = {}", e.display(st));
            }
        }
    }
}

fn header(kernel: &Kernel) -> String {
    format!("states: {}\nactions: {}\n", kernel.states().join(", "), kernel.actions().join(", "))
}

/// Renders a finite-horizon game.
pub fn write_fh(g: &FhMfg) -> String {
    let mut out = header(&g.kernel);
    let _ = writeln!(out, "horizon: {}", g.horizon);
    let _ = writeln!(out, "mu0: {}", format_reals(&g.mu0));
    write_tables(&mut out, &g.kernel, &g.rewards);
    out
}

/// Renders a stationary game.
pub fn write_stat(g: &StatMfg) -> String {
    let mut out = header(&g.kernel);
    let _ = writeln!(out, "gamma: {:?}", g.gamma);
    if let Some(mu) = &g.mu0 {
        let _ = writeln!(out, "mu0: {}", format_reals(mu));
    }
    write_tables(&mut out, &g.kernel, &g.rewards);
    out
}

pub fn write_game(g: &Game) -> String {
    match g {
        Game::Fh(g) => write_fh(g),
        Game::Stat(g) => write_stat(g),
    }
}

/// Contents of a solution file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solution {
    pub mu: Option<Distribution>,
    /// Time-indexed policies; a stationary policy is a single entry.
    pub policies: Vec<Policy>,
    pub stationary: bool,
}

/// Renders a policy sequence.
pub fn write_policy_seq(states: &[String], pis: &[Policy]) -> String {
    let mut out = format!("horizon: {}\n", pis.len());
    for (h, pi) in pis.iter().enumerate() {
        for (s, sn) in states.iter().enumerate() {
            let _ = writeln!(out, "pi {h} {sn} = {}", format_reals(pi.row(s)));
        }
    }
    out
}

/// Renders a stationary population/policy pair.
pub fn write_stat_solution(states: &[String], mu: &Distribution, pi: &Policy) -> String {
    let mut out = format!("mu: {}\n", format_reals(mu));
    for (s, sn) in states.iter().enumerate() {
        let _ = writeln!(out, "pi {sn} = {}", format_reals(pi.row(s)));
    }
    out
}

/// Parses a solution file against a game's state and action lists.
pub fn parse_solution(text: &str, states: &[String], n_actions: usize) -> Result<Solution> {
    let mut mu = None;
    let mut horizon = None;
    let mut rows: Vec<Vec<Option<Vec<f64>>>> = Vec::new();
    let mut stationary = None;
    let ensure = |rows: &mut Vec<Vec<Option<Vec<f64>>>>, h: usize| {
        while rows.len() <= h {
            rows.push(vec![None; states.len()]);
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("mu:") {
            mu = Some(parse_distribution(rest, states.len()).map_err(|e| file_err(ln, e.to_string()))?);
            continue;
        }
        if let Some(rest) = line.strip_prefix("horizon:") {
            horizon = Some(rest.trim().parse::<usize>().map_err(|_| file_err(ln, "bad horizon"))?);
            continue;
        }
        let (lhs, rhs) = line.split_once('=').ok_or_else(|| file_err(ln, "expected `=`"))?;
        let parts: Vec<&str> = lhs.split_whitespace().collect();
        let (h, sname, is_stat) = match parts.as_slice() {
            ["pi", s] => (0, *s, true),
            ["pi", h, s] => (h.parse::<usize>().map_err(|_| file_err(ln, "bad step index"))?, *s, false),
            _ => return Err(file_err(ln, "expected `pi [<h>] <state> = <row>`")),
        };
        if *stationary.get_or_insert(is_stat) != is_stat {
            return Err(file_err(ln, "mixes stationary and time-indexed rows"));
        }
        let s =
            states.iter().position(|n| n == sname).ok_or_else(|| file_err(ln, format!("unknown state `{sname}`")))?;
        let row = parse_reals(rhs).map_err(|e| file_err(ln, e.to_string()))?;
        if row.len() != n_actions {
            return Err(file_err(ln, format!("row has {} entries, expected {n_actions}", row.len())));
        }
        ensure(&mut rows, h);
        rows[h][s] = Some(row);
    }
    if let Some(h) = horizon {
        if rows.len() != h {
            return Err(file_err(0, format!("found {} steps, header says {h}", rows.len())));
        }
    }
    let mut policies = Vec::with_capacity(rows.len());
    for (h, step) in rows.into_iter().enumerate() {
        let mut full = Vec::with_capacity(step.len());
        for (s, r) in step.into_iter().enumerate() {
            full.push(r.ok_or_else(|| file_err(0, format!("missing row for step {h}, state `{}`", states[s])))?);
        }
        policies.push(Policy::new(full)?);
    }
    Ok(Solution { mu, policies, stationary: stationary.unwrap_or(false) })
}
