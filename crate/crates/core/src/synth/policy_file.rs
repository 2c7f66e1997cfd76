use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::agent::LocalState;
use crate::model::coalition::Coalition;
use crate::model::game::{tuple_label, CooperativeGame, SINK_ACTION};

use super::extract::{PolicyPair, Row};

pub const POLICY_FORMAT: &str = "commsynth-policy/1";

fn state_key(game: &CooperativeGame, s: usize) -> String {
    format!("o={};l={}", game.obs_label(game.obs(s).unwrap()), game.local_label(s))
}

fn digits_label(radix: &[usize], code: u32) -> String {
    let mut out = vec![0; radix.len()];
    let mut c = code as usize;
    for k in (0..radix.len()).rev() {
        out[k] = c % radix[k];
        c /= radix[k];
    }
    tuple_label(&out)
}

fn row_json(row: &Row, label: impl Fn(u32) -> String) -> Value {
    Value::Object(row.iter().map(|&(a, p)| (label(a), json!(p))).collect())
}

fn member_radix(game: &CooperativeGame, c: &Coalition) -> Vec<usize> {
    c.members().iter().map(|&j| game.agents()[j].num_actions()).collect()
}

/// Policy document with sorted keys; `report` is embedded as given.
pub fn policy_to_json(game: &CooperativeGame, pair: &PolicyPair, report: Value) -> Value {
    let mut action = Map::new();
    for s in 0..game.num_states() {
        if Some(s) != game.sink() && !pair.action[s].is_empty() {
            action.insert(state_key(game, s), row_json(&pair.action[s], |a| game.action_label(a)));
        }
    }
    let live: Vec<bool> = {
        let mut v = vec![false; game.num_joint_obs()];
        for s in 0..game.num_states() {
            if let Some(o) = game.obs(s) {
                v[o] = true;
            }
        }
        v
    };
    let comm: Map<String, Value> = (0..game.num_joint_obs())
        .filter(|&o| live[o])
        .map(|o| {
            let row = pair.coalitions.iter().zip(&pair.comm[o]).map(|(c, &w)| (c.to_string(), json!(w))).collect();
            (game.obs_label(o), Value::Object(row))
        })
        .collect();
    let agents: Vec<Value> = pair
        .agent_conditionals
        .iter()
        .enumerate()
        .map(|(i, table)| {
            let agent = &game.agents()[i];
            Value::Object(
                table
                    .iter()
                    .map(|(&(o, l), row)| {
                        let key = format!("o={};l={}", game.obs_label(o), agent.state(l as usize).local);
                        (key, row_json(row, |a| a.to_string()))
                    })
                    .collect(),
            )
        })
        .collect();
    let coalitions: Vec<Value> = pair
        .coalition_conditionals
        .iter()
        .zip(&pair.coalitions)
        .map(|(table, c)| {
            let radix = member_radix(game, c);
            Value::Object(
                table
                    .iter()
                    .map(|((o, ls), row)| {
                        let locals: Vec<usize> = c
                            .members()
                            .iter()
                            .zip(ls)
                            .map(|(&j, &l)| game.agents()[j].state(l as usize).local)
                            .collect();
                        let key = format!("o={};l={}", game.obs_label(*o), tuple_label(&locals));
                        (key, row_json(row, |a| digits_label(&radix, a)))
                    })
                    .collect(),
            )
        })
        .collect();
    json!({
        "format": POLICY_FORMAT,
        "agents": game.agents().iter().map(|a| a.name()).collect::<Vec<_>>(),
        "coalitions": pair.coalitions.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "action_policy": action,
        "comm_policy": comm,
        "agent_policies": agents,
        "coalition_policies": coalitions,
        "zero_mass_states": pair.zero_mass_states.iter().map(|&s| state_key(game, s)).collect::<Vec<_>>(),
        "zero_mass_observations": pair.zero_mass_observations.iter().map(|&o| game.obs_label(o)).collect::<Vec<_>>(),
        "report": report,
    })
}

fn parse_tuple(text: &str) -> Result<Vec<usize>> {
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::Policy(format!("malformed tuple {text}")))?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Policy(format!("malformed tuple {text}"))))
        .collect()
}

fn split_key(key: &str) -> Result<(&str, &str)> {
    key.strip_prefix("o=")
        .and_then(|k| k.split_once(";l="))
        .ok_or_else(|| Error::Policy(format!("malformed key {key}")))
}

fn object<'v>(v: &'v Value, what: &str) -> Result<&'v Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Policy(format!("{what} must be an object")))
}

fn array<'v>(v: &'v Value, what: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Policy(format!("{what} must be an array")))
}

fn parse_row(v: &Value, mut code: impl FnMut(&str) -> Result<u32>) -> Result<Row> {
    let mut row = Vec::new();
    for (k, p) in object(v, "distribution")? {
        let p = p.as_f64().ok_or_else(|| Error::Policy(format!("probability of {k} is not a number")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Policy(format!("probability {p} of {k} outside [0, 1]")));
        }
        row.push((code(k)?, p));
    }
    row.sort_by_key(|e| e.0);
    Ok(row)
}

fn encode(radix: &[usize], digits: &[usize]) -> Result<u32> {
    if digits.len() != radix.len() || digits.iter().zip(radix).any(|(d, r)| d >= r) {
        return Err(Error::Policy(format!("action {} out of range", tuple_label(digits))));
    }
    Ok(digits.iter().zip(radix).fold(0usize, |acc, (d, r)| acc * r + d) as u32)
}

/// Inverse of [`policy_to_json`] for the same game.
pub fn policy_from_json(game: &CooperativeGame, doc: &Value) -> Result<PolicyPair> {
    if doc.get("format").and_then(Value::as_str) != Some(POLICY_FORMAT) {
        return Err(Error::Policy(format!("expected format {POLICY_FORMAT}")));
    }
    let field = |name: &str| doc.get(name).ok_or_else(|| Error::Policy(format!("missing field {name}")));
    let n = game.num_agents();
    let names = array(field("agents")?, "agents")?;
    if names.len() != n {
        return Err(Error::Policy(format!("policy has {} agents, game has {n}", names.len())));
    }
    let coalition_names = array(field("coalitions")?, "coalitions")?;
    let coalitions: Vec<Coalition> = coalition_names
        .iter()
        .map(|v| {
            let text = v.as_str().ok_or_else(|| Error::Policy("coalition must be a string".into()))?;
            parse_coalition(text, n)
        })
        .collect::<Result<_>>()?;
    let nc = coalitions.len();
    if nc == 0 {
        return Err(Error::Policy("no coalitions".into()));
    }

    let by_key: HashMap<String, usize> = (0..game.num_states())
        .filter(|&s| Some(s) != game.sink())
        .map(|s| (state_key(game, s), s))
        .collect();
    let obs_by_label: HashMap<String, usize> = (0..game.num_joint_obs()).map(|o| (game.obs_label(o), o)).collect();
    let action_radix: Vec<usize> = game.agents().iter().map(|a| a.num_actions()).collect();

    let mut action = vec![Row::new(); game.num_states()];
    for (key, row) in object(field("action_policy")?, "action_policy")? {
        let &s = by_key.get(key).ok_or_else(|| Error::Policy(format!("unknown state {key}")))?;
        action[s] = parse_row(row, |a| {
            if a == "alpha" {
                Ok(SINK_ACTION)
            } else {
                encode(&action_radix, &parse_tuple(a)?)
            }
        })?;
    }
    let mut comm = vec![vec![1.0 / nc as f64; nc]; game.num_joint_obs()];
    for (key, row) in object(field("comm_policy")?, "comm_policy")? {
        let &o = obs_by_label.get(key).ok_or_else(|| Error::Policy(format!("unknown observation {key}")))?;
        let row = object(row, "communication row")?;
        for (c, name) in coalition_names.iter().enumerate() {
            comm[o][c] = row.get(name.as_str().unwrap()).and_then(Value::as_f64).unwrap_or(0.0);
        }
    }

    let mut agent_conditionals = Vec::with_capacity(n);
    for (i, table) in array(field("agent_policies")?, "agent_policies")?.iter().enumerate() {
        if i >= n {
            return Err(Error::Policy("too many agent policies".into()));
        }
        let agent = &game.agents()[i];
        let mut out = BTreeMap::new();
        for (key, row) in object(table, "agent policy")? {
            let (o_text, l_text) = split_key(key)?;
            let &o = obs_by_label.get(o_text).ok_or_else(|| Error::Policy(format!("unknown observation {o_text}")))?;
            let local: usize = l_text.parse().map_err(|_| Error::Policy(format!("malformed key {key}")))?;
            let l = agent
                .state_index(LocalState { obs: game.decode_obs(o)[i], local })
                .ok_or_else(|| Error::Policy(format!("agent {i}: unknown state {key}")))?;
            let row = parse_row(row, |a| {
                let a: usize = a.parse().map_err(|_| Error::Policy(format!("malformed action {a}")))?;
                encode(&[agent.num_actions()], &[a])
            })?;
            out.insert((o, l as u32), row);
        }
        agent_conditionals.push(out);
    }
    if agent_conditionals.len() != n {
        return Err(Error::Policy("missing agent policies".into()));
    }

    let tables = array(field("coalition_policies")?, "coalition_policies")?;
    if tables.len() != nc {
        return Err(Error::Policy("coalition policies do not match the coalitions".into()));
    }
    let mut coalition_conditionals = Vec::with_capacity(nc);
    for (table, c) in tables.iter().zip(&coalitions) {
        let radix = member_radix(game, c);
        let mut out = BTreeMap::new();
        for (key, row) in object(table, "coalition policy")? {
            let (o_text, l_text) = split_key(key)?;
            let &o = obs_by_label.get(o_text).ok_or_else(|| Error::Policy(format!("unknown observation {o_text}")))?;
            let locals = parse_tuple(l_text)?;
            if locals.len() != c.len() {
                return Err(Error::Policy(format!("malformed key {key}")));
            }
            let obs = game.decode_obs(o);
            let states = c
                .members()
                .iter()
                .zip(&locals)
                .map(|(&j, &local)| {
                    game.agents()[j]
                        .state_index(LocalState { obs: obs[j], local })
                        .map(|x| x as u32)
                        .ok_or_else(|| Error::Policy(format!("unknown coalition state {key}")))
                })
                .collect::<Result<Vec<u32>>>()?;
            out.insert((o, states), parse_row(row, |a| encode(&radix, &parse_tuple(a)?))?);
        }
        coalition_conditionals.push(out);
    }

    let zero_mass_states = array(field("zero_mass_states")?, "zero_mass_states")?
        .iter()
        .map(|v| {
            v.as_str()
                .and_then(|k| by_key.get(k).copied())
                .ok_or_else(|| Error::Policy(format!("unknown state {v}")))
        })
        .collect::<Result<_>>()?;
    let zero_mass_observations = array(field("zero_mass_observations")?, "zero_mass_observations")?
        .iter()
        .map(|v| {
            v.as_str()
                .and_then(|k| obs_by_label.get(k).copied())
                .ok_or_else(|| Error::Policy(format!("unknown observation {v}")))
        })
        .collect::<Result<_>>()?;
    Ok(PolicyPair {
        coalitions,
        action,
        comm,
        agent_conditionals,
        coalition_conditionals,
        zero_mass_states,
        zero_mass_observations,
    })
}

fn parse_coalition(text: &str, n: usize) -> Result<Coalition> {
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| Error::Policy(format!("malformed coalition {text}")))?;
    if inner.is_empty() {
        return Ok(Coalition::empty());
    }
    let members = inner
        .split(',')
        .map(|m| {
            m.trim()
                .strip_prefix('R')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1 && k <= n)
                .map(|k| k - 1)
                .ok_or_else(|| Error::Policy(format!("malformed coalition {text}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Coalition::new(members))
}
