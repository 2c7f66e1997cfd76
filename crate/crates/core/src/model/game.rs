use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::model::agent::AgentModel;
use crate::model::coalition::{enumerate_coalitions, Coalition};
use crate::tolerances::JOINT_ROW_SUM;

/// Code of the sink action `a_alpha`. Ordinary joint actions are mixed-radix
/// codes over the agents' action indices (agent 0 most significant).
pub const SINK_ACTION: u32 = u32::MAX;

/// Which joint states the product construction keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    /// Forward closure from the initial state under all enabled joint actions.
    Reachable,
    /// Every combination of agent states.
    FullProduct,
}

/// One enabled action of a joint state with its successor range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionEntry {
    pub code: u32,
    start: u32,
    end: u32,
}

impl ActionEntry {
    pub fn is_sink(&self) -> bool {
        self.code == SINK_ACTION
    }
}

/// Reach-avoid objective over the joint states of a game.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachAvoidSpec {
    target: Vec<usize>,
    avoid: Vec<usize>,
    is_target: Vec<bool>,
    is_avoid: Vec<bool>,
}

impl ReachAvoidSpec {
    pub fn new(
        game: &CooperativeGame,
        target: impl IntoIterator<Item = usize>,
        avoid: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let n = game.num_states();
        let mut is_target = vec![false; n];
        let mut is_avoid = vec![false; n];
        let mut t: Vec<usize> = target.into_iter().collect();
        let mut a: Vec<usize> = avoid.into_iter().collect();
        t.sort_unstable();
        t.dedup();
        a.sort_unstable();
        a.dedup();
        for &s in &t {
            if s >= n || Some(s) == game.sink() {
                return Err(Error::InvalidSpec(format!("target state {s} is not a joint state")));
            }
            is_target[s] = true;
        }
        for &s in &a {
            if s >= n || Some(s) == game.sink() {
                return Err(Error::InvalidSpec(format!("avoid state {s} is not a joint state")));
            }
            if is_target[s] {
                return Err(Error::InvalidSpec(format!("state {s} is both target and avoid")));
            }
            is_avoid[s] = true;
        }
        Ok(Self { target: t, avoid: a, is_target, is_avoid })
    }

    /// Classify every (non-sink) joint state from its agent-state tuple.
    pub fn from_predicates(
        game: &CooperativeGame,
        is_target: impl Fn(&[u32]) -> bool,
        is_avoid: impl Fn(&[u32]) -> bool,
    ) -> Result<Self> {
        let mut t = Vec::new();
        let mut a = Vec::new();
        for s in 0..game.num_states() {
            if Some(s) == game.sink() {
                continue;
            }
            let locals = game.locals(s);
            if is_avoid(locals) {
                a.push(s);
            } else if is_target(locals) {
                t.push(s);
            }
        }
        Self::new(game, t, a)
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn avoid(&self) -> &[usize] {
        &self.avoid
    }

    pub fn is_target(&self, s: usize) -> bool {
        self.is_target.get(s).copied().unwrap_or(false)
    }

    pub fn is_avoid(&self, s: usize) -> bool {
        self.is_avoid.get(s).copied().unwrap_or(false)
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.is_target(s) || self.is_avoid(s)
    }
}

/// Product MMDP of `N` agents with a communication bound `K`.
///
/// Joint states are stored as tuples of agent state indices, ordered
/// lexicographically; transitions are kept in compressed sparse rows.
#[derive(Debug, Clone)]
pub struct CooperativeGame {
    agents: Vec<AgentModel>,
    k: usize,
    coalitions: Vec<Coalition>,
    // flattened tuples, stride = agents.len(); the sink (if any) is the last state and has no tuple
    tuples: Vec<u32>,
    lookup: HashMap<Box<[u32]>, usize>,
    obs: Vec<Option<usize>>,
    action_ptr: Vec<usize>,
    actions: Vec<ActionEntry>,
    succ: Vec<(u32, f64)>,
    init: usize,
    sink: Option<usize>,
    terminal: Vec<bool>,
    action_radix: Vec<usize>,
    obs_radix: Vec<usize>,
}

/// Options for [`build_joint_game_with`].
#[derive(Debug, Clone, Copy)]
pub struct GameOptions {
    pub enumeration: Enumeration,
    pub allow_smaller_coalitions: bool,
}

impl Default for GameOptions {
    fn default() -> Self {
        Self { enumeration: Enumeration::Reachable, allow_smaller_coalitions: false }
    }
}

/// Product game with reachable-state enumeration and exact-`K` coalitions.
pub fn build_joint_game(agents: Vec<AgentModel>, k: usize) -> Result<CooperativeGame> {
    build_joint_game_with(agents, k, GameOptions::default())
}

pub fn build_joint_game_with(
    agents: Vec<AgentModel>,
    k: usize,
    options: GameOptions,
) -> Result<CooperativeGame> {
    let n = agents.len();
    if n == 0 {
        return Err(Error::InvalidModel("a game needs at least one agent".into()));
    }
    if k > n {
        return Err(Error::InvalidModel(format!("communication bound K={k} exceeds N={n}")));
    }
    let action_radix: Vec<usize> = agents.iter().map(|a| a.num_actions()).collect();
    let obs_radix: Vec<usize> = agents.iter().map(|a| a.num_obs()).collect();
    let code_space: u128 = action_radix.iter().map(|&r| r as u128).product();
    if code_space >= SINK_ACTION as u128 {
        return Err(Error::InvalidModel("joint action space too large".into()));
    }
    let enabled: Vec<Vec<Vec<usize>>> = agents
        .iter()
        .map(|a| (0..a.num_states()).map(|s| a.enabled_actions(s)).collect())
        .collect();

    let init: Vec<u32> = agents.iter().map(|a| a.init() as u32).collect();
    let mut tuples: Vec<Vec<u32>> = match options.enumeration {
        Enumeration::FullProduct => {
            let radix: Vec<usize> = agents.iter().map(|a| a.num_states()).collect();
            let mut all = Vec::new();
            for_each_mixed(&radix, |idx| all.push(idx.iter().map(|&i| i as u32).collect()));
            all
        }
        Enumeration::Reachable => {
            let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
            let mut queue = VecDeque::new();
            seen.insert(init.clone(), ());
            queue.push_back(init.clone());
            while let Some(t) = queue.pop_front() {
                for_each_joint_successor(&agents, &enabled, &t, |_, next, _| {
                    if !seen.contains_key(next) {
                        seen.insert(next.to_vec(), ());
                        queue.push_back(next.to_vec());
                    }
                });
            }
            seen.into_keys().collect()
        }
    };
    tuples.sort();

    let lookup: HashMap<Box<[u32]>, usize> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone().into_boxed_slice(), i))
        .collect();
    let init_idx = lookup[init.as_slice()];

    let mut action_ptr = Vec::with_capacity(tuples.len() + 1);
    let mut actions = Vec::new();
    let mut succ: Vec<(u32, f64)> = Vec::new();
    let mut obs = Vec::with_capacity(tuples.len());
    action_ptr.push(0);
    for t in &tuples {
        let mut current: Option<u32> = None;
        let mut row_start = succ.len();
        for_each_joint_successor(&agents, &enabled, t, |code, next, p| {
            if current != Some(code) {
                if let Some(prev) = current {
                    finish_row(&mut succ, row_start);
                    actions.push(ActionEntry {
                        code: prev,
                        start: row_start as u32,
                        end: succ.len() as u32,
                    });
                }
                current = Some(code);
                row_start = succ.len();
            }
            let idx = *lookup
                .get(next)
                .expect("successor outside enumeration: full product or closure is incomplete");
            succ.push((idx as u32, p));
        });
        if let Some(prev) = current {
            finish_row(&mut succ, row_start);
            actions.push(ActionEntry { code: prev, start: row_start as u32, end: succ.len() as u32 });
        }
        action_ptr.push(actions.len());
        obs.push(Some(encode_mixed(
            &obs_radix,
            t.iter().enumerate().map(|(i, &s)| agents[i].state(s as usize).obs),
        )));
    }

    let coalitions = enumerate_coalitions(n, k, options.allow_smaller_coalitions);
    let num = tuples.len();
    Ok(CooperativeGame {
        agents,
        k,
        coalitions,
        tuples: tuples.into_iter().flatten().collect(),
        lookup,
        obs,
        action_ptr,
        actions,
        succ,
        init: init_idx,
        sink: None,
        terminal: vec![false; num],
        action_radix,
        obs_radix,
    })
}

fn finish_row(succ: &mut [(u32, f64)], start: usize) {
    succ[start..].sort_by_key(|&(s, _)| s);
}

/// Calls `f(code, next_tuple, prob)` for every enabled joint action of `tuple`
/// (codes ascending) and every successor with positive probability.
fn for_each_joint_successor(
    agents: &[AgentModel],
    enabled: &[Vec<Vec<usize>>],
    tuple: &[u32],
    mut f: impl FnMut(u32, &[u32], f64),
) {
    let n = agents.len();
    let lists: Vec<&Vec<usize>> = (0..n).map(|i| &enabled[i][tuple[i] as usize]).collect();
    let radix: Vec<usize> = lists.iter().map(|l| l.len()).collect();
    let action_radix: Vec<usize> = agents.iter().map(|a| a.num_actions()).collect();
    let mut next = vec![0u32; n];
    for_each_mixed(&radix, |choice| {
        let acts: Vec<usize> = (0..n).map(|i| lists[i][choice[i]]).collect();
        let code = encode_mixed(&action_radix, acts.iter().copied()) as u32;
        let dists: Vec<_> = (0..n)
            .map(|i| agents[i].transition(tuple[i] as usize, acts[i]).expect("enabled"))
            .collect();
        let succ_radix: Vec<usize> = dists.iter().map(|d| d.len()).collect();
        for_each_mixed(&succ_radix, |pick| {
            let mut p = 1.0;
            for i in 0..n {
                let (s, q) = dists[i][pick[i]];
                next[i] = s as u32;
                p *= q;
            }
            if p > 0.0 {
                f(code, &next, p);
            }
        });
    });
}

/// Iterates over all index vectors of a mixed-radix counter, last digit fastest.
pub(crate) fn for_each_mixed(radix: &[usize], mut f: impl FnMut(&[usize])) {
    if radix.iter().any(|&r| r == 0) {
        return;
    }
    let mut idx = vec![0usize; radix.len()];
    loop {
        f(&idx);
        let mut i = radix.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < radix[i] {
                break;
            }
            idx[i] = 0;
        }
    }
}

pub(crate) fn encode_mixed(radix: &[usize], digits: impl Iterator<Item = usize>) -> usize {
    let mut code = 0usize;
    for (r, d) in radix.iter().zip(digits) {
        code = code * r + d;
    }
    code
}

pub(crate) fn decode_mixed(radix: &[usize], mut code: usize) -> Vec<usize> {
    let mut out = vec![0usize; radix.len()];
    for i in (0..radix.len()).rev() {
        out[i] = code % radix[i];
        code /= radix[i];
    }
    out
}

impl CooperativeGame {
    pub fn agents(&self) -> &[AgentModel] {
        &self.agents
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    /// Replace the communication actions (e.g. to evaluate a policy with a
    /// different bound). Transitions are unaffected.
    pub fn with_coalitions(&self, k: usize, coalitions: Vec<Coalition>) -> Self {
        let mut g = self.clone();
        g.k = k;
        g.coalitions = coalitions;
        g
    }

    /// Number of joint states, including the sink when present.
    pub fn num_states(&self) -> usize {
        self.action_ptr.len() - 1
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    pub fn is_augmented(&self) -> bool {
        self.sink.is_some()
    }

    /// Terminal flag set by sink augmentation (target or avoid).
    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    /// Agent-state tuple of a joint state. Empty for the sink.
    pub fn locals(&self, s: usize) -> &[u32] {
        let n = self.agents.len();
        if Some(s) == self.sink {
            &[]
        } else {
            &self.tuples[s * n..(s + 1) * n]
        }
    }

    pub fn state_index(&self, tuple: &[u32]) -> Option<usize> {
        self.lookup.get(tuple).copied()
    }

    /// Joint public observation index (mixed radix over agents). `None` for the sink.
    pub fn obs(&self, s: usize) -> Option<usize> {
        self.obs[s]
    }

    pub fn num_joint_obs(&self) -> usize {
        self.obs_radix.iter().product()
    }

    pub fn decode_obs(&self, o: usize) -> Vec<usize> {
        decode_mixed(&self.obs_radix, o)
    }

    pub fn encode_obs(&self, per_agent: &[usize]) -> usize {
        encode_mixed(&self.obs_radix, per_agent.iter().copied())
    }

    pub fn num_joint_actions(&self) -> usize {
        self.action_radix.iter().product()
    }

    pub fn decode_action(&self, code: u32) -> Vec<usize> {
        decode_mixed(&self.action_radix, code as usize)
    }

    pub fn encode_action(&self, per_agent: &[usize]) -> u32 {
        encode_mixed(&self.action_radix, per_agent.iter().copied()) as u32
    }

    pub fn actions(&self, s: usize) -> &[ActionEntry] {
        &self.actions[self.action_ptr[s]..self.action_ptr[s + 1]]
    }

    /// Position of joint action `code` in `actions(s)`.
    pub fn action_position(&self, s: usize, code: u32) -> Option<usize> {
        self.actions(s).binary_search_by_key(&code, |e| e.code).ok()
    }

    pub fn successors(&self, entry: &ActionEntry) -> &[(u32, f64)] {
        &self.succ[entry.start as usize..entry.end as usize]
    }

    /// Number of stored nonzero transition entries.
    pub fn num_transitions(&self) -> usize {
        self.succ.len()
    }

    /// Entropy (nats) of the joint successor distribution of one action.
    pub fn transition_entropy(&self, entry: &ActionEntry) -> f64 {
        self.successors(entry)
            .iter()
            .map(|&(_, p)| crate::model::agent::entropy_term(p))
            .sum()
    }

    /// Product of agent factors `prod_i P^i(s^i, a^i)(u^i)`.
    pub fn product_probability(&self, s: usize, code: u32, u: usize) -> f64 {
        let from = self.locals(s);
        let to = self.locals(u);
        let acts = self.decode_action(code);
        let mut p = 1.0;
        for (i, agent) in self.agents.iter().enumerate() {
            let Some(d) = agent.transition(from[i] as usize, acts[i]) else {
                return 0.0;
            };
            p *= d
                .iter()
                .find(|&&(n, _)| n == to[i] as usize)
                .map(|&(_, q)| q)
                .unwrap_or(0.0);
        }
        p
    }

    /// Maximum deviation of any stored row sum from one.
    pub fn max_row_sum_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..self.num_states() {
            for e in self.actions(s) {
                let total: f64 = self.successors(e).iter().map(|&(_, p)| p).sum();
                worst = worst.max((total - 1.0).abs());
            }
        }
        worst
    }

    /// Sink augmentation: every target/avoid state gets `a_alpha` as its only
    /// action, leading to a fresh absorbing sink. Other rows are unchanged.
    pub fn augment_with_sink(&self, spec: &ReachAvoidSpec) -> Result<Self> {
        if self.sink.is_some() {
            return Err(Error::InvalidModel("game is already sink-augmented".into()));
        }
        let n = self.num_states();
        if spec.is_target.len() != n {
            return Err(Error::InvalidSpec("spec was built for a different game".into()));
        }
        let sink = n;
        let mut action_ptr = Vec::with_capacity(n + 2);
        let mut actions = Vec::with_capacity(self.actions.len());
        let mut succ = Vec::with_capacity(self.succ.len());
        let mut terminal = vec![false; n + 1];
        action_ptr.push(0);
        for s in 0..n {
            if spec.is_terminal(s) {
                terminal[s] = true;
                let start = succ.len() as u32;
                succ.push((sink as u32, 1.0));
                actions.push(ActionEntry { code: SINK_ACTION, start, end: start + 1 });
            } else {
                for e in self.actions(s) {
                    let start = succ.len() as u32;
                    succ.extend_from_slice(self.successors(e));
                    actions.push(ActionEntry { code: e.code, start, end: succ.len() as u32 });
                }
            }
            action_ptr.push(actions.len());
        }
        let start = succ.len() as u32;
        succ.push((sink as u32, 1.0));
        actions.push(ActionEntry { code: SINK_ACTION, start, end: start + 1 });
        action_ptr.push(actions.len());

        let mut obs = self.obs.clone();
        obs.push(None);
        Ok(Self {
            agents: self.agents.clone(),
            k: self.k,
            coalitions: self.coalitions.clone(),
            tuples: self.tuples.clone(),
            lookup: self.lookup.clone(),
            obs,
            action_ptr,
            actions,
            succ,
            init: self.init,
            sink: Some(sink),
            terminal,
            action_radix: self.action_radix.clone(),
            obs_radix: self.obs_radix.clone(),
        })
    }

    /// Checks stored rows against the agent factors and the row-sum bound.
    pub fn validate(&self) -> Result<()> {
        let worst = self.max_row_sum_error();
        if worst > JOINT_ROW_SUM {
            return Err(Error::InvalidModel(format!("joint row sum off by {worst}")));
        }
        Ok(())
    }

    /// Human-readable `(o1,..,oN)` for a joint observation.
    pub fn obs_label(&self, o: usize) -> String {
        tuple_label(&self.decode_obs(o))
    }

    /// Human-readable `(l1,..,lN)` of private labels for a joint state.
    pub fn local_label(&self, s: usize) -> String {
        if Some(s) == self.sink {
            return "sink".into();
        }
        let ls: Vec<usize> = self
            .locals(s)
            .iter()
            .enumerate()
            .map(|(i, &x)| self.agents[i].state(x as usize).local)
            .collect();
        tuple_label(&ls)
    }

    pub fn action_label(&self, code: u32) -> String {
        if code == SINK_ACTION {
            "alpha".into()
        } else {
            tuple_label(&self.decode_action(code))
        }
    }
}

pub fn tuple_label(xs: &[usize]) -> String {
    let inner: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("({})", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::agent::{LocalState, TransitionRow};
    use std::collections::BTreeSet;

    fn ls(local: usize) -> LocalState {
        LocalState { obs: 0, local }
    }

    /// Two-state agent: action 0 flips with prob 0.5 (else stays), action 1 stays.
    fn flipper(name: &str) -> AgentModel {
        let rows = vec![
            TransitionRow { state: ls(0), action: 0, next: ls(1), prob: 0.5 },
            TransitionRow { state: ls(0), action: 0, next: ls(0), prob: 0.5 },
            TransitionRow { state: ls(0), action: 1, next: ls(0), prob: 1.0 },
            TransitionRow { state: ls(1), action: 0, next: ls(0), prob: 1.0 },
            TransitionRow { state: ls(1), action: 1, next: ls(1), prob: 1.0 },
        ];
        AgentModel::new(name, 1, vec![ls(0), ls(1)], vec!["flip".into(), "stay".into()], &rows, ls(0))
            .unwrap()
    }

    #[test]
    fn single_agent_game_is_the_agent_mdp() {
        let g = build_joint_game(vec![flipper("a")], 0).unwrap();
        assert_eq!(g.coalitions(), &[Coalition::empty()]);
        assert_eq!(g.num_states(), 2);
        let e = &g.actions(0)[0];
        assert_eq!(g.successors(e), &[(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn reachable_count_matches_bfs_oracle() {
        let agents = vec![flipper("a"), flipper("b")];
        let g = build_joint_game(agents.clone(), 1).unwrap();
        // independent breadth-first enumeration over agent tuples
        let mut seen = BTreeSet::new();
        let mut frontier = vec![(0usize, 0usize)];
        seen.insert((0, 0));
        while let Some((x, y)) = frontier.pop() {
            for ax in agents[0].enabled_actions(x) {
                for ay in agents[1].enabled_actions(y) {
                    for &(nx, _) in agents[0].transition(x, ax).unwrap() {
                        for &(ny, _) in agents[1].transition(y, ay).unwrap() {
                            if seen.insert((nx, ny)) {
                                frontier.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(g.num_states(), seen.len());
        assert_eq!(g.num_states(), 4);
        g.validate().unwrap();
    }

    #[test]
    fn rejects_k_above_n() {
        assert!(build_joint_game(vec![flipper("a")], 2).is_err());
    }

    #[test]
    fn sink_augmentation_rewires_terminals() {
        let g = build_joint_game(vec![flipper("a"), flipper("b")], 1).unwrap();
        let t = g.state_index(&[1, 1]).unwrap();
        let spec = ReachAvoidSpec::new(&g, [t], []).unwrap();
        let aug = g.augment_with_sink(&spec).unwrap();
        let sink = aug.sink().unwrap();
        assert_eq!(aug.actions(t).len(), 1);
        assert!(aug.actions(t)[0].is_sink());
        assert_eq!(aug.successors(&aug.actions(t)[0]), &[(sink as u32, 1.0)]);
        assert_eq!(aug.successors(&aug.actions(sink)[0]), &[(sink as u32, 1.0)]);
        // edge count: original - outgoing(terminal) + |terminal| + 1
        let outgoing: usize = g.actions(t).iter().map(|e| g.successors(e).len()).sum();
        assert_eq!(aug.num_transitions(), g.num_transitions() - outgoing + 1 + 1);
        for s in 0..g.num_states() {
            if s != t {
                let codes = |gg: &CooperativeGame| -> Vec<(u32, Vec<(u32, f64)>)> {
                    gg.actions(s).iter().map(|e| (e.code, gg.successors(e).to_vec())).collect()
                };
                assert_eq!(codes(&g), codes(&aug));
            }
        }
    }

    #[test]
    fn spec_rejects_overlap() {
        let g = build_joint_game(vec![flipper("a")], 0).unwrap();
        assert!(ReachAvoidSpec::new(&g, [1], [1]).is_err());
        assert!(ReachAvoidSpec::new(&g, [7], []).is_err());
    }
}
