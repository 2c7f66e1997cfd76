//! Scenario configs: explicit transition tables and grid worlds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::agent::{AgentModel, LocalState, TransitionRow};
use crate::model::game::{build_joint_game_with, CooperativeGame, Enumeration, GameOptions, ReachAvoidSpec};

pub const GRID_ACTIONS: [&str; 5] = ["N", "E", "S", "W", "Remain"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default)]
    pub allow_smaller_coalitions: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agents: Option<Vec<TableAgent>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetSpec>,
    #[serde(default)]
    pub avoid_rule: AvoidRule,
}

/// One agent given by an explicit transition table over integer state labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableAgent {
    pub name: String,
    pub states: Vec<usize>,
    pub actions: Vec<String>,
    /// Rows `[state, action, probability, next_state]`.
    pub transitions: Vec<(usize, usize, f64, usize)>,
    pub init: usize,
    /// Region (public observation) of each state label, indexed by label.
    pub region_of_state: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    /// Start cell (row-major id) per agent.
    pub starts: Vec<usize>,
    /// Target cells per agent.
    pub targets: Vec<Vec<usize>>,
    /// Region label per cell, row-major.
    pub regions: Vec<usize>,
    pub slip_model: SlipModel,
    #[serde(default)]
    pub obstacles: Vec<usize>,
    /// Probability that a valid move does not go where intended.
    #[serde(default = "default_slip")]
    pub slip_prob: f64,
}

fn default_slip() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlipModel {
    /// Failed moves stay in place.
    StayOnFail,
    /// Residual mass is split uniformly over the current cell and the other valid neighbours.
    Redistribute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// Explicit joint tuples of state labels.
    Joint(Vec<Vec<usize>>),
    /// Product of per-agent label sets.
    PerAgent(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AvoidRule {
    /// Any two agents on the same label (cell).
    #[default]
    PairwiseCollision,
    None,
}

/// A built scenario: raw (non-augmented) game plus its reach-avoid objective.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub game: CooperativeGame,
    pub spec: ReachAvoidSpec,
}

impl Scenario {
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        Self::from_config_with(config, Enumeration::Reachable)
    }

    pub fn from_config_with(config: ScenarioConfig, enumeration: Enumeration) -> Result<Self> {
        let (game, spec) = match (&config.agents, &config.grid) {
            (Some(_), None) => build_table_scenario(&config, enumeration)?,
            (None, Some(_)) => build_grid_scenario(&config, enumeration)?,
            _ => {
                return Err(Error::Config(
                    "exactly one of `agents` or `grid` must be present".into(),
                ))
            }
        };
        Ok(Self { config, game, spec })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config(load_config(path)?)
    }

    /// Grid dimensions if this is a grid scenario.
    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        self.config.grid.as_ref().map(|g| (g.rows, g.cols))
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Agents from explicit tables. Unlisted `(state, action)` pairs are disabled;
/// a state with no listed action gets `Remain` (last action name, or an
/// appended one) as a self-loop.
pub fn build_table_scenario(
    config: &ScenarioConfig,
    enumeration: Enumeration,
) -> Result<(CooperativeGame, ReachAvoidSpec)> {
    let table = config.agents.as_ref().ok_or_else(|| Error::Config("missing `agents`".into()))?;
    let num_obs = table
        .iter()
        .flat_map(|a| a.region_of_state.iter().copied())
        .max()
        .map(|m| m + 1)
        .unwrap_or(1);
    let mut agents = Vec::with_capacity(table.len());
    for ta in table {
        agents.push(table_agent(ta, num_obs)?);
    }
    finish(config, agents, enumeration)
}

fn table_agent(ta: &TableAgent, num_obs: usize) -> Result<AgentModel> {
    let region = |label: usize| -> Result<usize> {
        ta.region_of_state.get(label).copied().ok_or_else(|| {
            Error::Config(format!("agent {}: no region for state {label}", ta.name))
        })
    };
    let ls = |label: usize| -> Result<LocalState> { Ok(LocalState { obs: region(label)?, local: label }) };
    if !ta.states.contains(&ta.init) {
        return Err(Error::Config(format!("agent {}: init {} is not a state", ta.name, ta.init)));
    }
    let mut actions = ta.actions.clone();
    let remain = match actions.iter().position(|a| a.eq_ignore_ascii_case("remain")) {
        Some(p) => p,
        None => {
            actions.push("Remain".into());
            actions.len() - 1
        }
    };
    let mut rows = Vec::new();
    for &(s, a, p, n) in &ta.transitions {
        if !ta.states.contains(&s) || !ta.states.contains(&n) {
            return Err(Error::Config(format!("agent {}: row ({s},{a},{p},{n}) uses unknown state", ta.name)));
        }
        rows.push(TransitionRow { state: ls(s)?, action: a, next: ls(n)?, prob: p });
    }
    // group sums are checked here so the error names the table row group
    let mut groups: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    for &(s, a, p, _) in &ta.transitions {
        *groups.entry((s, a)).or_default() += p;
    }
    for ((s, a), total) in &groups {
        if (total - 1.0).abs() > crate::tolerances::AGENT_ROW_SUM {
            return Err(Error::Config(format!(
                "agent {}: rows for (state {s}, action {a}) sum to {total}",
                ta.name
            )));
        }
    }
    for &s in &ta.states {
        if !groups.keys().any(|&(gs, _)| gs == s) {
            rows.push(TransitionRow { state: ls(s)?, action: remain, next: ls(s)?, prob: 1.0 });
        }
    }
    let states = ta.states.iter().map(|&s| ls(s)).collect::<Result<Vec<_>>>()?;
    AgentModel::new(ta.name.clone(), num_obs, states, actions, &rows, ls(ta.init)?)
}

/// Grid-world agents with five actions (N, E, S, W, Remain).
pub fn build_grid_scenario(
    config: &ScenarioConfig,
    enumeration: Enumeration,
) -> Result<(CooperativeGame, ReachAvoidSpec)> {
    let grid = config.grid.as_ref().ok_or_else(|| Error::Config("missing `grid`".into()))?;
    let cells = grid.rows * grid.cols;
    if grid.regions.len() != cells {
        return Err(Error::Config(format!(
            "region map has {} entries for {cells} cells",
            grid.regions.len()
        )));
    }
    if grid.starts.len() != grid.targets.len() {
        return Err(Error::Config("starts and targets disagree on the number of agents".into()));
    }
    let blocked = |c: usize| grid.obstacles.contains(&c);
    for (i, &s) in grid.starts.iter().enumerate() {
        if s >= cells || blocked(s) {
            return Err(Error::Config(format!("start cell {s} of agent {} is outside the grid", i + 1)));
        }
    }
    let num_obs = grid.regions.iter().max().map(|m| m + 1).unwrap_or(1);
    let free: Vec<usize> = (0..cells).filter(|&c| !blocked(c)).collect();
    let ls = |c: usize| LocalState { obs: grid.regions[c], local: c };
    let mut rows = Vec::new();
    for &c in &free {
        let (r, col) = (c / grid.cols, c % grid.cols);
        let step = |dir: usize| -> Option<usize> {
            let (nr, nc) = match dir {
                0 => (r.checked_sub(1)?, col),
                1 => (r, col + 1),
                2 => (r + 1, col),
                3 => (r, col.checked_sub(1)?),
                _ => return None,
            };
            if nr >= grid.rows || nc >= grid.cols {
                return None;
            }
            let n = nr * grid.cols + nc;
            (!blocked(n)).then_some(n)
        };
        let neighbours: Vec<usize> = (0..4).filter_map(step).collect();
        for dir in 0..4 {
            let dist = grid_move(grid, c, step(dir), &neighbours);
            for (n, p) in dist {
                rows.push(TransitionRow { state: ls(c), action: dir, next: ls(n), prob: p });
            }
        }
        rows.push(TransitionRow { state: ls(c), action: 4, next: ls(c), prob: 1.0 });
    }
    let actions: Vec<String> = GRID_ACTIONS.iter().map(|s| s.to_string()).collect();
    let mut agents = Vec::new();
    for (i, &start) in grid.starts.iter().enumerate() {
        let states = free.iter().map(|&c| ls(c)).collect();
        agents.push(AgentModel::new(format!("R{}", i + 1), num_obs, states, actions.clone(), &rows, ls(start))?);
    }
    let mut config = config.clone();
    if config.targets.is_none() {
        config.targets = Some(TargetSpec::PerAgent(grid.targets.clone()));
    }
    finish(&config, agents, enumeration)
}

fn grid_move(grid: &GridConfig, cell: usize, target: Option<usize>, neighbours: &[usize]) -> Vec<(usize, f64)> {
    let slip = grid.slip_prob;
    let ok = 1.0 - slip;
    match (grid.slip_model, target) {
        (SlipModel::StayOnFail, Some(t)) => vec![(t, ok), (cell, slip)],
        (SlipModel::StayOnFail, None) => vec![(cell, 1.0)],
        (SlipModel::Redistribute, Some(t)) => {
            let mut out = vec![(t, ok)];
            let others: Vec<usize> = neighbours.iter().copied().filter(|&n| n != t).collect();
            let share = slip / (others.len() + 1) as f64;
            out.push((cell, share));
            out.extend(others.into_iter().map(|n| (n, share)));
            out
        }
        (SlipModel::Redistribute, None) => {
            let share = 1.0 / (neighbours.len() + 1) as f64;
            let mut out = vec![(cell, share)];
            out.extend(neighbours.iter().map(|&n| (n, share)));
            out
        }
    }
}

fn finish(
    config: &ScenarioConfig,
    agents: Vec<AgentModel>,
    enumeration: Enumeration,
) -> Result<(CooperativeGame, ReachAvoidSpec)> {
    let n = agents.len();
    let labels: Vec<Vec<usize>> = agents
        .iter()
        .map(|a| a.states().iter().map(|s| s.local).collect())
        .collect();
    let game = build_joint_game_with(
        agents,
        config.k,
        GameOptions { enumeration, allow_smaller_coalitions: config.allow_smaller_coalitions },
    )?;
    let label_of = |tuple: &[u32]| -> Vec<usize> {
        tuple.iter().enumerate().map(|(i, &s)| labels[i][s as usize]).collect()
    };
    let collide = |ls: &[usize]| -> bool {
        match config.avoid_rule {
            AvoidRule::None => false,
            AvoidRule::PairwiseCollision => {
                (0..ls.len()).any(|i| (i + 1..ls.len()).any(|j| ls[i] == ls[j]))
            }
        }
    };
    let targets = config.targets.clone().ok_or_else(|| Error::Config("missing `targets`".into()))?;
    match &targets {
        TargetSpec::Joint(tuples) | TargetSpec::PerAgent(tuples) if tuples.iter().any(|t| t.is_empty()) => {
            return Err(Error::Config("empty target entry".into()))
        }
        TargetSpec::Joint(tuples) if tuples.iter().any(|t| t.len() != n) => {
            return Err(Error::Config(format!("joint targets must have {n} entries")))
        }
        TargetSpec::PerAgent(sets) if sets.len() != n => {
            return Err(Error::Config(format!("per-agent targets must list {n} sets")))
        }
        _ => {}
    }
    let is_target = |tuple: &[u32]| -> bool {
        let ls = label_of(tuple);
        match &targets {
            TargetSpec::Joint(tuples) => tuples.iter().any(|t| *t == ls),
            TargetSpec::PerAgent(sets) => ls.iter().zip(sets).all(|(l, set)| set.contains(l)),
        }
    };
    let spec = ReachAvoidSpec::from_predicates(&game, is_target, |t| collide(&label_of(t)))?;
    Ok((game, spec))
}
