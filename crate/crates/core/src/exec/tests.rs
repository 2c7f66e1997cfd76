use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::random::{random_instance, RandomGameParams};

fn chain(transitions: Vec<Vec<(usize, f64)>>, target: &[usize], avoid: &[usize]) -> MarkovChain {
    let n = transitions.len();
    MarkovChain {
        transitions,
        init: 0,
        target: (0..n).map(|s| target.contains(&s)).collect(),
        avoid: (0..n).map(|s| avoid.contains(&s)).collect(),
    }
}

fn random_chain(rng: &mut ChaCha8Rng) -> MarkovChain {
    let n = rng.gen_range(3..12);
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        if s + 2 >= n {
            rows.push(Vec::new());
            continue;
        }
        let k = rng.gen_range(1..4);
        let w: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.05).collect();
        let total: f64 = w.iter().sum();
        rows.push(w.iter().map(|v| (rng.gen_range(0..n), v / total)).collect());
    }
    chain(rows, &[n - 1], &[n - 2])
}

#[test]
fn coin_flip_chain() {
    let c = chain(vec![vec![(1, 0.5), (2, 0.5)], vec![], vec![]], &[1], &[2]);
    assert!((reach_avoid_probability(&c).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn self_loop_chain() {
    let c = chain(vec![vec![(0, 0.5), (1, 0.3), (2, 0.2)], vec![], vec![]], &[1], &[2]);
    assert!((reach_avoid_probability(&c).unwrap() - 0.6).abs() < 1e-12);
    let nu = state_occupancy(&c).unwrap();
    assert!((nu[0] - 2.0).abs() < 1e-12);
}

#[test]
fn trapped_mass_never_reaches() {
    // state 1 loops forever
    let c = chain(vec![vec![(1, 0.4), (2, 0.6)], vec![(1, 1.0)], vec![]], &[2], &[]);
    assert!((reach_avoid_probability(&c).unwrap() - 0.6).abs() < 1e-12);
    assert!(state_occupancy(&c).is_err());
}

#[test]
fn value_iteration_agrees_with_direct_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let c = random_chain(&mut rng);
        let direct = reach_avoid_probability(&c).unwrap();
        let vi = reach_avoid_value_iteration(&c, 1e-13, 1_000_000);
        assert!((direct - vi).abs() < 1e-8, "{direct} vs {vi}");
    }
}

#[test]
fn loss_bound_shape() {
    assert_eq!(loss_bound(0.0), 0.0);
    assert!((loss_bound(2f64.ln()) - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(loss_bound(50.0) <= 1.0);
    assert!(BoundCheck::new(0.9, 0.9, 0.0).satisfied);
    assert!(!BoundCheck::new(0.9, 0.5, 0.0).satisfied);
}

#[test]
fn random_pairs_induce_stochastic_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = RandomGameParams { agents: 3, k: 2, ..Default::default() };
    for _ in 0..10 {
        let (game, spec) = random_instance(&mut rng, &params).unwrap();
        let pair = random_pair(&mut rng, &game, &spec).unwrap();
        assert!(pair.max_row_error() < 1e-9);
        let full = induce_full_chain(&game, &spec, &pair).unwrap();
        let restricted = induce_restricted_chain(&game, &spec, &pair).unwrap();
        assert!(full.chain.max_row_error() < 1e-9);
        assert!(restricted.chain.max_row_error() < 1e-9);
        let p = reach_avoid_probability(&full.chain).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&p));
    }
}

#[test]
fn self_divergence_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (game, spec) = random_instance(&mut rng, &RandomGameParams::default()).unwrap();
    let pair = random_pair(&mut rng, &game, &spec).unwrap();
    let full = induce_full_chain(&game, &spec, &pair).unwrap();
    let kl = kl_divergence_truncated(&full, &full, 200, 1e-14).unwrap();
    assert!(!kl.infinite);
    assert!(kl.value.abs() < 1e-12);
}

#[test]
fn simulation_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (game, spec) = random_instance(&mut rng, &RandomGameParams::default()).unwrap();
    let pair = random_pair(&mut rng, &game, &spec).unwrap();
    let full = induce_full_chain(&game, &spec, &pair).unwrap();
    let run = |seed| {
        let mut out = Vec::new();
        let summary = simulate(&game, &full, 3000, seed, 1000, Some(&mut out)).unwrap();
        (summary, out)
    };
    let (a, ta) = run(42);
    let (b, tb) = run(42);
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let exact = reach_avoid_probability(&full.chain).unwrap();
    assert!((a.estimate - exact).abs() <= 5.0 * a.stderr.max(1e-3));
    assert!(simulate(&game, &full, 0, 1, 10, None).is_err());
}
