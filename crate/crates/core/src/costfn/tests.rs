use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::agent::{AgentModel, LocalState, TransitionRow};
use crate::model::game::build_joint_game;
use crate::model::random::{random_instance, RandomGameParams};
use crate::reachlp::working_states;

fn ls(l: usize) -> LocalState {
    LocalState { obs: 0, local: l }
}

/// Agent with a start state and a goal; every action jumps to the goal.
fn jumper(name: &str, n_act: usize) -> AgentModel {
    let mut rows = Vec::new();
    for a in 0..n_act {
        rows.push(TransitionRow { state: ls(0), action: a, next: ls(1), prob: 1.0 });
        rows.push(TransitionRow { state: ls(1), action: a, next: ls(1), prob: 1.0 });
    }
    let actions = (0..n_act).map(|a| format!("a{a}")).collect();
    AgentModel::new(name, 1, vec![ls(0), ls(1)], actions, &rows, ls(0)).unwrap()
}

fn jumpers(n: usize, k: usize, n_act: usize) -> (CooperativeGame, StateActionLayout) {
    let game = build_joint_game((0..n).map(|i| jumper(&format!("R{i}"), n_act)).collect(), k).unwrap();
    let target = (0..game.num_states()).filter(|&s| game.locals(s).iter().all(|&l| l == 1));
    let spec = ReachAvoidSpec::new(&game, target, []).unwrap();
    let layout = StateActionLayout::enabled(&game, working_states(&game, &spec));
    (game, layout)
}

use crate::model::game::ReachAvoidSpec;

#[test]
fn coin_flip_policy_has_log2_entropy() {
    let (game, layout) = jumpers(1, 0, 2);
    let model = CostModel::new(&game, &layout);
    assert!((model.joint_entropy(&[0.5, 0.5]) - 2f64.ln()).abs() < 1e-12);
    assert_eq!(model.joint_entropy(&[1.0, 0.0]), 0.0);
}

#[test]
fn product_policy_has_zero_total_correlation() {
    let (game, layout) = jumpers(2, 0, 2);
    let model = CostModel::total_correlation(&game, &layout);
    // pi^1 = (0.3, 0.7), pi^2 = (0.6, 0.4), codes a1 * 2 + a2
    let x = [0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4];
    let b = model.breakdown(&x, &[1.0]);
    assert!(b.dbar.abs() < 1e-12);
    let correlated = [0.5, 0.0, 0.0, 0.5];
    let b = model.breakdown(&correlated, &[1.0]);
    assert!((b.dbar - 2f64.ln()).abs() < 1e-12);
    assert_eq!(b.g_coalition, vec![0.0]);
}

#[test]
fn agent_marginal_sums_preimages() {
    let (game, layout) = jumpers(2, 1, 2);
    let model = CostModel::new(&game, &layout);
    let x = [0.25; 4];
    for i in 0..2 {
        let marg = model.marginalize_agent(&x, i);
        assert_eq!(marg.len(), 2);
        for (key, y) in marg {
            let direct: f64 = (0..4)
                .filter(|&v| game.decode_action(layout.codes[v])[i] as u32 == key.action)
                .map(|v| x[v])
                .sum();
            assert_eq!(y, direct);
        }
    }
}

#[test]
fn weights_follow_communication_mass() {
    let three = crate::model::coalition::enumerate_coalitions(3, 2, false);
    let w = coalition_weights(&[2.0, 0.0, 0.0], 3);
    assert_eq!(w.agent(0, 2, &three), 1.0);
    assert_eq!(w.agent(0, 0, &three), 0.0);
    let w = coalition_weights(&[1.0, 1.0, 1.0], 3);
    for i in 0..3 {
        assert!((w.agent(0, i, &three) - 1.0 / 3.0).abs() < 1e-15);
    }
    let empty = vec![Coalition::empty()];
    let w = coalition_weights(&[0.7], 1);
    assert_eq!(w.agent(0, 1, &empty), 1.0);
    let w = coalition_weights(&[0.0, 0.0, 0.0], 3);
    assert!(w.zero_mass[0]);
    assert_eq!(w.coalition(0, 1), 1.0 / 3.0);
}

#[test]
fn weights_are_scale_invariant() {
    let a = coalition_weights(&[0.2, 0.3, 0.5], 3);
    let b = coalition_weights(&[0.2 * 7.0, 0.3 * 7.0, 0.5 * 7.0], 3);
    for (p, q) in a.w.iter().zip(&b.w) {
        assert!((p - q).abs() < 1e-15);
    }
}

#[test]
fn breakdown_matches_cost_value_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = RandomGameParams { agents: 3, k: 2, ..Default::default() };
    for _ in 0..20 {
        let (game, spec) = random_instance(&mut rng, &params).unwrap();
        let layout = StateActionLayout::enabled(&game, working_states(&game, &spec));
        let model = CostModel::new(&game, &layout);
        let x: Vec<f64> = (0..model.num_vars()).map(|_| rand::Rng::gen_range(&mut rng, 0.0..1.0)).collect();
        let comm: Vec<f64> = model
            .obs_mass(&x)
            .iter()
            .flat_map(|&m| {
                let r: Vec<f64> = (0..model.num_coalitions()).map(|_| rand::Rng::gen_range(&mut rng, 0.1..1.0)).collect();
                let t: f64 = r.iter().sum();
                r.into_iter().map(move |q| q / t * m)
            })
            .collect();
        let b = model.breakdown(&x, &comm);
        let v = model.objective(&x, &comm);
        assert!((b.dbar - v).abs() < 1e-10, "{} vs {v}", b.dbar);
        assert!(b.h >= 0.0);
        assert!(b.g_agent.iter().chain(&b.g_coalition).all(|&g| g >= -1e-12));
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = RandomGameParams { agents: 2, k: 1, ..Default::default() };
    let (game, spec) = random_instance(&mut rng, &params).unwrap();
    let layout = StateActionLayout::enabled(&game, working_states(&game, &spec));
    let model = CostModel::new(&game, &layout);
    let x: Vec<f64> = (0..model.num_vars()).map(|_| rand::Rng::gen_range(&mut rng, 0.2..1.0)).collect();
    let comm: Vec<f64> = (0..model.num_obs() * model.num_coalitions()).map(|_| rand::Rng::gen_range(&mut rng, 0.2..1.0)).collect();
    let (gx, gz) = model.gradient(&x, &comm);
    let h = 1e-6;
    for v in 0..x.len() {
        let (mut a, mut b) = (x.clone(), x.clone());
        a[v] += h;
        b[v] -= h;
        let fd = (model.objective(&a, &comm) - model.objective(&b, &comm)) / (2.0 * h);
        assert!((fd - gx[v]).abs() <= 1e-4 * fd.abs().max(1.0), "x[{v}]: {fd} vs {}", gx[v]);
    }
    for j in 0..comm.len() {
        let (mut a, mut b) = (comm.clone(), comm.clone());
        a[j] += h;
        b[j] -= h;
        let fd = (model.objective(&x, &a) - model.objective(&x, &b)) / (2.0 * h);
        assert!((fd - gz[j]).abs() <= 1e-4 * fd.abs().max(1.0), "comm[{j}]: {fd} vs {}", gz[j]);
    }
}
