use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use commsynth::exec::{
    induce_full_chain, induce_restricted_chain, loss_bound, pair_dbar, random_pair, reach_avoid_probability,
    reach_avoid_value_iteration, truncated_exact_d, InducedChain,
};
use commsynth::model::game::CooperativeGame;
use commsynth::model::{random_instance, RandomGameParams};

fn instance(seed: u64, agents: usize) -> (CooperativeGame, commsynth::model::game::ReachAvoidSpec, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = RandomGameParams { agents, k: agents - 1, ..Default::default() };
    let (game, spec) = random_instance(&mut rng, &params).unwrap();
    (game, spec, rng)
}

/// Entropy of the law of `(a_0, s_1, .., a_{T-1}, s_T)` by enumerating every path.
fn path_entropy(game: &CooperativeGame, full: &InducedChain, s: usize, p: f64, steps: usize) -> f64 {
    if steps == 0 || full.chain.is_absorbing(s) {
        return if p > 0.0 { -p * p.ln() } else { 0.0 };
    }
    let mut total = 0.0;
    for &(code, pa) in &full.actions[s] {
        let entry = &game.actions(s)[game.action_position(s, code).unwrap()];
        for &(u, pu) in game.successors(entry) {
            let q = p * pa * pu;
            if q > 0.0 {
                total += path_entropy(game, full, u as usize, q, steps - 1);
            }
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn loss_bound_is_monotone_and_below_one(a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(loss_bound(lo) <= loss_bound(hi));
        prop_assert!((0.0..=1.0).contains(&loss_bound(hi)));
        prop_assert_eq!(loss_bound(-a), 0.0);
    }

    #[test]
    fn random_pairs_are_stochastic(seed in any::<u64>(), agents in 2usize..=3) {
        let (game, spec, mut rng) = instance(seed, agents);
        let pair = random_pair(&mut rng, &game, &spec).unwrap();
        prop_assert!(pair.max_row_error() <= 1e-9);
        for chain in [induce_full_chain(&game, &spec, &pair).unwrap(), induce_restricted_chain(&game, &spec, &pair).unwrap()] {
            prop_assert!(chain.chain.max_row_error() <= 1e-9);
        }
    }

    #[test]
    fn value_iteration_never_overshoots(seed in any::<u64>()) {
        let (game, spec, mut rng) = instance(seed, 2);
        let pair = random_pair(&mut rng, &game, &spec).unwrap();
        let chain = induce_restricted_chain(&game, &spec, &pair).unwrap().chain;
        let exact = reach_avoid_probability(&chain).unwrap();
        let vi = reach_avoid_value_iteration(&chain, 1e-13, 100_000);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&exact));
        prop_assert!(vi <= exact + 1e-9);
        prop_assert!(exact - vi <= 1e-8);
    }

    #[test]
    fn cost_terms_are_nonnegative(seed in any::<u64>(), agents in 2usize..=3) {
        let (game, spec, mut rng) = instance(seed, agents);
        let pair = random_pair(&mut rng, &game, &spec).unwrap();
        let b = pair_dbar(&game, &spec, &pair).unwrap();
        prop_assert!(b.h >= -1e-12);
        prop_assert!(b.g_agent.iter().chain(&b.g_coalition).all(|&g| g >= -1e-12));
        prop_assert!(b.dbar.is_finite());
    }

    #[test]
    fn truncated_entropy_matches_path_enumeration(seed in any::<u64>(), steps in 1usize..=5) {
        let (game, spec, mut rng) = instance(seed, 2);
        let pair = random_pair(&mut rng, &game, &spec).unwrap();
        let full = induce_full_chain(&game, &spec, &pair).unwrap();
        let enumerated = path_entropy(&game, &full, full.chain.init, 1.0, steps);
        let swept = truncated_exact_d(&game, &spec, &pair, steps, 0.0).unwrap().h;
        prop_assert!((enumerated - swept).abs() <= 1e-10, "{} vs {}", enumerated, swept);
    }

    #[test]
    fn json_floats_round_trip(v in prop_oneof![any::<f64>(), Just(f64::INFINITY), Just(f64::NEG_INFINITY), Just(f64::NAN)]) {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct Wrap(#[serde(with = "commsynth::jsonfloat")] f64);
        let text = serde_json::to_string(&Wrap(v)).unwrap();
        let back: Wrap = serde_json::from_str(&text).unwrap();
        prop_assert!(back.0 == v || (v.is_nan() && back.0.is_nan()));
    }
}
