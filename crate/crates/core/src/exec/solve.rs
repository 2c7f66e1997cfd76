use std::collections::VecDeque;

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::model::game::{CooperativeGame, ReachAvoidSpec};
use crate::reachlp::StateActionLayout;
use crate::synth::PolicyPair;
use crate::tolerances::CHAIN_RESIDUAL;

use super::chain::MarkovChain;

/// Non-absorbing states reachable from the initial state.
pub fn reachable_transient(chain: &MarkovChain) -> Vec<usize> {
    let n = chain.num_states();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([chain.init]);
    seen[chain.init] = true;
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        if chain.is_absorbing(s) {
            continue;
        }
        out.push(s);
        for &(u, p) in &chain.transitions[s] {
            if p > 0.0 && !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Transient states of `candidates` from which a target is reachable.
fn can_reach_target(chain: &MarkovChain, candidates: &[usize]) -> Vec<bool> {
    let n = chain.num_states();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &s in candidates {
        for &(u, p) in &chain.transitions[s] {
            if p > 0.0 {
                pred[u].push(s);
            }
        }
    }
    let mut good = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| chain.target[s]).collect();
    for &s in &queue {
        good[s] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &s in &pred[u] {
            if !good[s] {
                good[s] = true;
                queue.push_back(s);
            }
        }
    }
    good
}

/// Probability of hitting a target before an avoid state, by a direct
/// linear solve on the states that can still reach the target.
pub fn reach_avoid_probability(chain: &MarkovChain) -> Result<f64> {
    if chain.target[chain.init] {
        return Ok(1.0);
    }
    if chain.is_absorbing(chain.init) {
        return Ok(0.0);
    }
    let transient = reachable_transient(chain);
    let good = can_reach_target(chain, &transient);
    let live: Vec<usize> = transient.into_iter().filter(|&s| good[s]).collect();
    if !live.contains(&chain.init) {
        return Ok(0.0);
    }
    let mut index = vec![usize::MAX; chain.num_states()];
    for (k, &s) in live.iter().enumerate() {
        index[s] = k;
    }
    let m = live.len();
    let mut a = Mat::<f64>::identity(m, m);
    let mut b = Mat::<f64>::zeros(m, 1);
    for (k, &s) in live.iter().enumerate() {
        for &(u, p) in &chain.transitions[s] {
            if chain.target[u] {
                b[(k, 0)] += p;
            } else if index[u] != usize::MAX {
                a[(k, index[u])] -= p;
            }
        }
    }
    let lu = a.partial_piv_lu();
    let residual_of = |x: &Mat<f64>| -> Mat<f64> { &b - &a * x };
    let amax = |r: &Mat<f64>| (0..m).map(|k| r[(k, 0)].abs()).fold(0.0, f64::max);
    let mut x = lu.solve(&b);
    for _ in 0..3 {
        let r = residual_of(&x);
        if amax(&r) <= CHAIN_RESIDUAL {
            break;
        }
        x += lu.solve(&r);
    }
    let residual = amax(&residual_of(&x));
    if !(residual <= CHAIN_RESIDUAL) {
        return Err(Error::Lp(format!("reach solve residual {residual:.3e}")));
    }
    let x = x.col(0).iter().copied().collect::<Vec<f64>>();
    Ok(x[index[chain.init]].clamp(0.0, 1.0))
}

/// Same quantity by Gauss-Seidel value iteration from below.
pub fn reach_avoid_value_iteration(chain: &MarkovChain, tol: f64, max_sweeps: usize) -> f64 {
    let n = chain.num_states();
    let mut p: Vec<f64> = (0..n).map(|s| if chain.target[s] { 1.0 } else { 0.0 }).collect();
    for _ in 0..max_sweeps {
        let mut delta = 0.0f64;
        for s in 0..n {
            if chain.is_absorbing(s) {
                continue;
            }
            let v: f64 = chain.transitions[s].iter().map(|&(u, q)| q * p[u]).sum();
            delta = delta.max((v - p[s]).abs());
            p[s] = v;
        }
        if delta <= tol {
            break;
        }
    }
    p[chain.init]
}

/// Expected visits to each transient state, `nu = e_init + P^T nu`.
pub fn state_occupancy(chain: &MarkovChain) -> Result<Vec<f64>> {
    let mut nu = vec![0.0; chain.num_states()];
    if chain.is_absorbing(chain.init) {
        return Ok(nu);
    }
    let live = reachable_transient(chain);
    let mut index = vec![usize::MAX; chain.num_states()];
    for (k, &s) in live.iter().enumerate() {
        index[s] = k;
    }
    let m = live.len();
    let mut a = Mat::<f64>::identity(m, m);
    for (k, &s) in live.iter().enumerate() {
        for &(u, p) in &chain.transitions[s] {
            if index[u] != usize::MAX {
                a[(index[u], k)] -= p;
            }
        }
    }
    let mut e = Mat::<f64>::zeros(m, 1);
    e[(index[chain.init], 0)] = 1.0;
    let x = a.partial_piv_lu().solve(&e);
    let r = &e - &a * &x;
    let residual = (0..m).map(|k| r[(k, 0)].abs()).fold(0.0, f64::max);
    if !(0..m).all(|k| x[(k, 0)].is_finite() && x[(k, 0)] > -1e-9) || !(residual <= 1e-8) {
        return Err(Error::GuardExceeded("occupancy is unbounded".into()));
    }
    for (k, &s) in live.iter().enumerate() {
        nu[s] = x[(k, 0)].max(0.0);
    }
    Ok(nu)
}

/// Layout over every non-terminal state visited with positive probability.
pub fn visited_layout(game: &CooperativeGame, spec: &ReachAvoidSpec, nu: &[f64]) -> StateActionLayout {
    let states = (0..game.num_states()).filter(|&s| nu[s] > 0.0 && !spec.is_terminal(s)).collect();
    StateActionLayout::enabled(game, states)
}

/// `x_{s,a} = nu_s pi(a|s)` on `layout`.
pub fn state_action_occupancy(layout: &StateActionLayout, pair: &PolicyPair, nu: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; layout.num_vars()];
    for (k, &s) in layout.states.iter().enumerate() {
        for v in layout.range(k) {
            let p = pair.action[s].iter().find(|e| e.0 == layout.codes[v]).map(|e| e.1).unwrap_or(0.0);
            x[v] = nu[s] * p;
        }
    }
    x
}
