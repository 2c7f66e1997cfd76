use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::agent::entropy_term;
use crate::model::game::{CooperativeGame, ReachAvoidSpec};
use crate::synth::PolicyPair;

use super::chain::{induce_full_chain, InducedChain, MarkovChain};

/// Cap on propagated `(step, state)` entries.
pub const HISTORY_GUARD: usize = 1_000_000;

/// Time-indexed sums of the exact cost, cut where the live mass drops below the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedCost {
    /// `sum_t H(A_t S_t | history)`
    pub h: f64,
    pub g_agent: Vec<f64>,
    pub g_coalition: Vec<f64>,
    pub d: f64,
    pub residual_mass: f64,
    pub horizon: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedKl {
    pub value: f64,
    /// Some path has positive probability under the first chain only.
    pub infinite: bool,
    pub residual_mass: f64,
    pub horizon: usize,
}

fn step(chain: &MarkovChain, mu: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; mu.len()];
    for (s, &m) in mu.iter().enumerate() {
        if m > 0.0 {
            for &(u, p) in &chain.transitions[s] {
                next[u] += m * p;
            }
        }
    }
    next
}

fn live_mass(chain: &MarkovChain, mu: &[f64]) -> f64 {
    mu.iter().enumerate().filter(|(s, _)| !chain.is_absorbing(*s)).map(|(_, m)| m).sum()
}

/// Runs `visit(t, mu)` on the live part of the state distribution at each
/// step until the live mass is below `mass_floor` or `horizon` is reached.
fn sweep(
    chain: &MarkovChain,
    horizon: usize,
    mass_floor: f64,
    mut visit: impl FnMut(&[f64]),
) -> Result<(f64, usize)> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let mut mu = vec![0.0; chain.num_states()];
    mu[chain.init] = 1.0;
    let mut entries = 0usize;
    let mut t = 0;
    loop {
        let live = live_mass(chain, &mu);
        if live <= mass_floor || t == horizon {
            return Ok((live, t));
        }
        for (s, m) in mu.iter_mut().enumerate() {
            if chain.is_absorbing(s) {
                *m = 0.0;
            }
        }
        entries += mu.iter().filter(|&&m| m > 0.0).count();
        if entries > HISTORY_GUARD {
            return Err(Error::GuardExceeded(format!("more than {HISTORY_GUARD} propagated entries")));
        }
        visit(&mu);
        mu = step(chain, &mu);
        t += 1;
    }
}

/// Per-step entropy of `(a, u^members)` given `(o, l^members)`, summed with
/// the probability of each conditioning event and weighted by `weight(o)`.
fn grouped_entropy(
    game: &CooperativeGame,
    full: &InducedChain,
    mu: &[f64],
    members: &[usize],
    weight: impl Fn(usize) -> f64,
) -> f64 {
    let agents = game.agents();
    let mut groups: HashMap<(usize, Vec<u32>), HashMap<(Vec<usize>, Vec<usize>), f64>> = HashMap::new();
    for (s, &m) in mu.iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        let o = game.obs(s).unwrap();
        let locals = game.locals(s);
        let key = (o, members.iter().map(|&j| locals[j]).collect::<Vec<u32>>());
        let group = groups.entry(key).or_default();
        for &(code, p) in &full.actions[s] {
            let digits = game.decode_action(code);
            let acts: Vec<usize> = members.iter().map(|&j| digits[j]).collect();
            let mut nexts: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), m * p)];
            for &j in members {
                let d = agents[j].transition(locals[j] as usize, digits[j]).expect("enabled action");
                nexts = nexts
                    .into_iter()
                    .flat_map(|(pre, q)| {
                        d.iter().map(move |&(u, r)| {
                            let mut v = pre.clone();
                            v.push(u);
                            (v, q * r)
                        })
                    })
                    .collect();
            }
            for (u, q) in nexts {
                *group.entry((acts.clone(), u)).or_default() += q;
            }
        }
    }
    let mut total = 0.0;
    for ((o, _), group) in groups {
        let w = weight(o);
        if w == 0.0 {
            continue;
        }
        let mass: f64 = group.values().sum();
        let h: f64 = group.values().map(|&q| -q * (q / mass).ln()).filter(|v| v.is_finite()).sum();
        total += w * h;
    }
    total
}

/// The exact cost with history-conditioned entropies, truncated.
pub fn truncated_exact_d(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    pair: &PolicyPair,
    horizon: usize,
    mass_floor: f64,
) -> Result<TruncatedCost> {
    let full = induce_full_chain(game, spec, pair)?;
    let n = game.num_agents();
    let coalitions = &pair.coalitions;
    let mut h = 0.0;
    let mut g_agent = vec![0.0; n];
    let mut g_coalition = vec![0.0; coalitions.len()];
    let (residual_mass, steps) = sweep(&full.chain, horizon, mass_floor, |mu| {
        for (s, &m) in mu.iter().enumerate() {
            if m <= 0.0 {
                continue;
            }
            let acts = game.actions(s);
            for &(code, p) in &full.actions[s] {
                let e = &acts[game.action_position(s, code).unwrap()];
                h += m * (entropy_term(p) + p * game.transition_entropy(e));
            }
        }
        for (i, g) in g_agent.iter_mut().enumerate() {
            *g += grouped_entropy(game, &full, mu, &[i], |o| {
                coalitions.iter().zip(&pair.comm[o]).filter(|(c, _)| !c.contains(i)).map(|(_, w)| w).sum()
            });
        }
        for (c, g) in g_coalition.iter_mut().enumerate() {
            if !coalitions[c].is_empty() {
                *g += grouped_entropy(game, &full, mu, coalitions[c].members(), |o| pair.comm[o][c]);
            }
        }
    })?;
    let d = g_agent.iter().sum::<f64>() + g_coalition.iter().sum::<f64>() - h;
    Ok(TruncatedCost { h, g_agent, g_coalition, d, residual_mass, horizon: steps })
}

/// `KL(P || Q)` between the path laws of two chains over the same game.
/// Transitions given an action are shared, so only action rows contribute.
pub fn kl_divergence_truncated(
    p: &InducedChain,
    q: &InducedChain,
    horizon: usize,
    mass_floor: f64,
) -> Result<TruncatedKl> {
    if p.actions.len() != q.actions.len() {
        return Err(Error::Policy("chains do not share a state space".into()));
    }
    let mut value = 0.0;
    let mut infinite = false;
    let (residual_mass, steps) = sweep(&p.chain, horizon, mass_floor, |mu| {
        for (s, &m) in mu.iter().enumerate() {
            if m <= 0.0 {
                continue;
            }
            for &(a, pa) in &p.actions[s] {
                let qa = q.actions[s].iter().find(|e| e.0 == a).map(|e| e.1).unwrap_or(0.0);
                if pa <= 0.0 {
                    continue;
                }
                if qa <= 0.0 {
                    infinite = true;
                } else {
                    value += m * pa * (pa / qa).ln();
                }
            }
        }
    })?;
    let value = if infinite { f64::INFINITY } else { value };
    Ok(TruncatedKl { value, infinite, residual_mass, horizon: steps })
}
