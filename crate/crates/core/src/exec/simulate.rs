use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::game::CooperativeGame;

use super::chain::InducedChain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub episodes: usize,
    pub successes: usize,
    pub failures: usize,
    /// Episodes cut at `max_steps` before absorption.
    pub timeouts: usize,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Success,
    Failure,
    Timeout,
}

const CHUNK: usize = 1024;

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: impl Iterator<Item = (T, f64)> + Clone) -> T {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = None;
    for (x, p) in items {
        acc += p;
        last = Some(x);
        if u < acc {
            return x;
        }
    }
    last.expect("nonempty distribution")
}

fn episode(
    game: &CooperativeGame,
    chain: &InducedChain,
    seed: u64,
    index: u64,
    max_steps: usize,
    record: bool,
) -> (Outcome, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut lines = Vec::new();
    let mut s = chain.chain.init;
    for t in 0..max_steps {
        if chain.chain.target[s] {
            return (Outcome::Success, lines);
        }
        if chain.chain.is_absorbing(s) {
            return (Outcome::Failure, lines);
        }
        let comps = &chain.components[s];
        let k = pick(&mut rng, comps.iter().enumerate().map(|(k, c)| (k, c.weight)));
        let comp = &comps[k];
        let a = pick(&mut rng, comp.actions.iter().copied());
        if record {
            let coalition = match comp.coalition {
                Some(c) => chain.coalitions[c].to_string(),
                None => "full".into(),
            };
            lines.push(format!(
                "{t}\t{}\t{}\t{coalition}\t{}",
                game.obs_label(game.obs(s).unwrap()),
                game.local_label(s),
                game.action_label(a)
            ));
        }
        let e = &game.actions(s)[game.action_position(s, a).expect("enabled action")];
        s = pick(&mut rng, game.successors(e).iter().map(|&(u, p)| (u as usize, p)));
    }
    let outcome = if chain.chain.target[s] {
        Outcome::Success
    } else if chain.chain.is_absorbing(s) {
        Outcome::Failure
    } else {
        Outcome::Timeout
    };
    (outcome, lines)
}

#[cfg(feature = "parallel")]
fn run_chunk(
    game: &CooperativeGame,
    chain: &InducedChain,
    seed: u64,
    range: std::ops::Range<u64>,
    max_steps: usize,
    record: bool,
) -> Vec<(Outcome, Vec<String>)> {
    use rayon::prelude::*;
    range.into_par_iter().map(|i| episode(game, chain, seed, i, max_steps, record)).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_chunk(
    game: &CooperativeGame,
    chain: &InducedChain,
    seed: u64,
    range: std::ops::Range<u64>,
    max_steps: usize,
    record: bool,
) -> Vec<(Outcome, Vec<String>)> {
    range.map(|i| episode(game, chain, seed, i, max_steps, record)).collect()
}

/// Monte Carlo reach-avoid estimate. Episode `i` draws from its own
/// stream of `seed`, so results do not depend on scheduling.
pub fn simulate(
    game: &CooperativeGame,
    chain: &InducedChain,
    episodes: usize,
    seed: u64,
    max_steps: usize,
    mut trajectories: Option<&mut dyn Write>,
) -> Result<SimulationSummary> {
    if episodes == 0 {
        return Err(Error::Config("episodes must be at least 1".into()));
    }
    let mut counts = [0usize; 3];
    let mut start = 0u64;
    while (start as usize) < episodes {
        let end = (start + CHUNK as u64).min(episodes as u64);
        let record = trajectories.is_some();
        for (k, (outcome, lines)) in run_chunk(game, chain, seed, start..end, max_steps, record).into_iter().enumerate() {
            counts[outcome as usize] += 1;
            if let Some(w) = trajectories.as_mut() {
                writeln!(w, "# episode {}", start as usize + k)?;
                for line in lines {
                    writeln!(w, "{line}")?;
                }
            }
        }
        start = end;
    }
    let estimate = counts[0] as f64 / episodes as f64;
    Ok(SimulationSummary {
        episodes,
        successes: counts[0],
        failures: counts[1],
        timeouts: counts[2],
        estimate,
        stderr: (estimate * (1.0 - estimate) / episodes as f64).sqrt(),
    })
}
