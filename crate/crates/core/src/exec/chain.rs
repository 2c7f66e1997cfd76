use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::coalition::Coalition;
use crate::model::game::{CooperativeGame, ReachAvoidSpec, SINK_ACTION};
use crate::synth::{PolicyPair, Row};
use crate::tolerances::JOINT_ROW_SUM;

/// Absorbing Markov chain with reach-avoid tags. Terminal and sink states
/// carry no outgoing row.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    pub transitions: Vec<Vec<(usize, f64)>>,
    pub init: usize,
    pub target: Vec<bool>,
    pub avoid: Vec<bool>,
}

impl MarkovChain {
    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_absorbing(&self, s: usize) -> bool {
        self.transitions[s].is_empty()
    }

    pub fn max_row_error(&self) -> f64 {
        self.transitions
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| (r.iter().map(|p| p.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    Full,
    Restricted,
}

/// One way a row can be drawn: under full communication a single
/// component, under restricted communication one per coalition in use.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub coalition: Option<usize>,
    pub weight: f64,
    pub actions: Row,
}

/// Chain induced on a game by a policy pair. The sink is the last state.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedChain {
    pub mode: ExecutionMode,
    pub chain: MarkovChain,
    pub sink: usize,
    /// Joint action distribution per state, mixed over components.
    pub actions: Vec<Row>,
    pub components: Vec<Vec<Component>>,
    pub coalitions: Vec<Coalition>,
    /// Conditional rows that fell back to uniform.
    pub fallback_rows: usize,
}

fn frame(game: &CooperativeGame, spec: &ReachAvoidSpec) -> (usize, Vec<bool>, Vec<bool>) {
    let sink = game.sink().unwrap_or(game.num_states());
    let n = sink.max(game.num_states() - 1) + 1;
    let target = (0..n).map(|s| s < game.num_states() && spec.is_target(s)).collect();
    let avoid = (0..n).map(|s| s < game.num_states() && spec.is_avoid(s)).collect();
    (sink, target, avoid)
}

fn assemble(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    pair: &PolicyPair,
    mode: ExecutionMode,
    components: Vec<Vec<Component>>,
    fallback_rows: usize,
) -> Result<InducedChain> {
    let (sink, target, avoid) = frame(game, spec);
    let n = target.len();
    let mut transitions = vec![Vec::new(); n];
    let mut actions = vec![Row::new(); n];
    for s in 0..game.num_states() {
        if Some(s) == game.sink() {
            continue;
        }
        if spec.is_terminal(s) {
            actions[s] = vec![(SINK_ACTION, 1.0)];
            continue;
        }
        let mut mixed: BTreeMap<u32, f64> = BTreeMap::new();
        for comp in &components[s] {
            for &(a, p) in &comp.actions {
                *mixed.entry(a).or_default() += comp.weight * p;
            }
        }
        let mut next: BTreeMap<usize, f64> = BTreeMap::new();
        for (&a, &p) in &mixed {
            let pos = game
                .action_position(s, a)
                .ok_or_else(|| Error::Policy(format!("state {s}: action {} is not enabled", game.action_label(a))))?;
            for &(u, q) in game.successors(&game.actions(s)[pos]) {
                *next.entry(u as usize).or_default() += p * q;
            }
        }
        if next.is_empty() {
            return Err(Error::Policy(format!("state {s}: empty action row")));
        }
        transitions[s] = next.into_iter().collect();
        actions[s] = mixed.into_iter().collect();
    }
    let chain = MarkovChain { transitions, init: game.init(), target, avoid };
    let err = chain.max_row_error();
    if err > JOINT_ROW_SUM {
        return Err(Error::Policy(format!("induced row sum off by {err}")));
    }
    Ok(InducedChain {
        mode,
        chain,
        sink,
        actions,
        components: pad(components, n),
        coalitions: pair.coalitions.clone(),
        fallback_rows,
    })
}

fn pad(mut components: Vec<Vec<Component>>, n: usize) -> Vec<Vec<Component>> {
    components.resize(n, Vec::new());
    components
}

/// Chain of the joint action policy under unrestricted communication.
pub fn induce_full_chain(game: &CooperativeGame, spec: &ReachAvoidSpec, pair: &PolicyPair) -> Result<InducedChain> {
    check_shape(game, pair)?;
    let components = (0..game.num_states())
        .map(|s| {
            if spec.is_terminal(s) || Some(s) == game.sink() {
                Vec::new()
            } else {
                vec![Component { coalition: None, weight: 1.0, actions: pair.action[s].clone() }]
            }
        })
        .collect();
    assemble(game, spec, pair, ExecutionMode::Full, components, 0)
}

/// Chain where each step draws a coalition from the communication policy;
/// members act on their joint conditional, everyone else on their own.
pub fn induce_restricted_chain(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    pair: &PolicyPair,
) -> Result<InducedChain> {
    check_shape(game, pair)?;
    let mut fallback_rows = 0;
    let mut components = Vec::with_capacity(game.num_states());
    for s in 0..game.num_states() {
        if spec.is_terminal(s) || Some(s) == game.sink() {
            components.push(Vec::new());
            continue;
        }
        let mut comps = Vec::new();
        let o = game.obs(s).unwrap();
        for (c, &w) in pair.comm[o].iter().enumerate() {
            if w > 0.0 {
                let (actions, fallbacks) = restricted_row(game, pair, s, c);
                fallback_rows += fallbacks;
                comps.push(Component { coalition: Some(c), weight: w, actions });
            }
        }
        components.push(comps);
    }
    assemble(game, spec, pair, ExecutionMode::Restricted, components, fallback_rows)
}

fn check_shape(game: &CooperativeGame, pair: &PolicyPair) -> Result<()> {
    if pair.action.len() != game.num_states() || pair.comm.len() != game.num_joint_obs() {
        return Err(Error::Policy("policy does not match the game".into()));
    }
    if pair.comm.iter().any(|r| r.len() != pair.coalitions.len()) {
        return Err(Error::Policy("communication rows do not match the coalitions".into()));
    }
    if pair.agent_conditionals.len() != game.num_agents()
        || pair.coalition_conditionals.len() != pair.coalitions.len()
    {
        return Err(Error::Policy("policy lacks marginal conditionals".into()));
    }
    Ok(())
}

/// Member action distribution of coalition `c` at `s` (digits per member).
pub(crate) fn coalition_draw(game: &CooperativeGame, pair: &PolicyPair, s: usize, c: usize) -> (Vec<(Vec<usize>, f64)>, bool) {
    let members = pair.coalitions[c].members();
    let locals = game.locals(s);
    let o = game.obs(s).unwrap();
    let key = (o, members.iter().map(|&j| locals[j]).collect::<Vec<u32>>());
    let radix: Vec<usize> = members.iter().map(|&j| game.agents()[j].num_actions()).collect();
    match pair.coalition_conditionals[c].get(&key) {
        Some(row) => (row.iter().map(|&(code, p)| (decode(&radix, code as usize), p)).collect(), false),
        None => {
            let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
            for &j in members {
                let enabled = game.agents()[j].enabled_actions(locals[j] as usize);
                combos = combos
                    .into_iter()
                    .flat_map(|pre| {
                        enabled.iter().map(move |&a| {
                            let mut v = pre.clone();
                            v.push(a);
                            v
                        })
                    })
                    .collect();
            }
            let p = 1.0 / combos.len() as f64;
            (combos.into_iter().map(|d| (d, p)).collect(), !members.is_empty())
        }
    }
}

/// Own action distribution of agent `i` at `s`.
pub(crate) fn agent_draw(game: &CooperativeGame, pair: &PolicyPair, s: usize, i: usize) -> (Row, bool) {
    let l = game.locals(s)[i];
    let o = game.obs(s).unwrap();
    match pair.agent_conditionals[i].get(&(o, l)) {
        Some(row) => (row.clone(), false),
        None => {
            let enabled = game.agents()[i].enabled_actions(l as usize);
            let p = 1.0 / enabled.len() as f64;
            (enabled.into_iter().map(|a| (a as u32, p)).collect(), true)
        }
    }
}

fn decode(radix: &[usize], mut code: usize) -> Vec<usize> {
    let mut out = vec![0; radix.len()];
    for k in (0..radix.len()).rev() {
        out[k] = code % radix[k];
        code /= radix[k];
    }
    out
}

fn restricted_row(game: &CooperativeGame, pair: &PolicyPair, s: usize, c: usize) -> (Row, usize) {
    let n = game.num_agents();
    let coalition = &pair.coalitions[c];
    let (members, mut fallbacks) = {
        let (draw, fb) = coalition_draw(game, pair, s, c);
        (draw, fb as usize)
    };
    let mut partial: Vec<(Vec<usize>, f64)> = members
        .into_iter()
        .map(|(digits, p)| {
            let mut joint = vec![usize::MAX; n];
            for (k, &j) in coalition.members().iter().enumerate() {
                joint[j] = digits[k];
            }
            (joint, p)
        })
        .collect();
    for i in (0..n).filter(|&i| !coalition.contains(i)) {
        let (row, fb) = agent_draw(game, pair, s, i);
        fallbacks += fb as usize;
        partial = partial
            .into_iter()
            .flat_map(|(joint, p)| {
                row.iter().map(move |&(a, q)| {
                    let mut j = joint.clone();
                    j[i] = a as usize;
                    (j, p * q)
                })
            })
            .collect();
    }
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (joint, p) in partial {
        *acc.entry(game.encode_action(&joint)).or_default() += p;
    }
    (acc.into_iter().collect(), fallbacks)
}
