//! Browser bindings: stage-1 value with occupancy heat maps, policy
//! evaluation against the loss bound, and the bound curve.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use commsynth::exec::{check_theorem1_bound, loss_bound};
use commsynth::model::scenario::parse_config;
use commsynth::model::Scenario;
use commsynth::reachlp::optimal_reach_avoid_value;
use commsynth::synth::{agent_occupancy, policy_from_json};

const SCENARIOS: [(&str, &str); 4] = [
    ("scenario1", include_str!("../../../scenarios/scenario1.json")),
    ("scenario2", include_str!("../../../scenarios/scenario2.json")),
    ("scenario3", include_str!("../../../scenarios/scenario3.json")),
    ("scenario4", include_str!("../../../scenarios/scenario4.json")),
];

fn fail(e: impl ToString) -> JsError {
    JsError::new(&e.to_string())
}

fn load(config: &str) -> Result<Scenario, JsError> {
    Scenario::from_config(parse_config(config).map_err(fail)?).map_err(fail)
}

/// Names of the bundled scenarios.
#[wasm_bindgen]
pub fn scenario_names() -> Vec<String> {
    SCENARIOS.iter().map(|(n, _)| n.to_string()).collect()
}

/// Bundled scenario config as JSON text.
#[wasm_bindgen]
pub fn scenario_config(name: &str) -> Result<String, JsError> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| fail(format!("unknown scenario {name}")))
}

/// Solves stage 1 and returns `{v_star, rows, cols, agents: [{name, occupancy: [[label, value]]}]}`.
#[wasm_bindgen]
pub fn reach_value(config: &str) -> Result<String, JsError> {
    Ok(reach_value_json(config)?.to_string())
}

fn reach_value_json(config: &str) -> Result<Value, JsError> {
    let sc = load(config)?;
    let r = optimal_reach_avoid_value(&sc.game, &sc.spec).map_err(fail)?;
    let agents: Vec<Value> = (0..sc.game.num_agents())
        .map(|i| {
            let occ = if r.occupancy.is_empty() {
                Vec::new()
            } else {
                agent_occupancy(&sc.game, &r.layout, &r.occupancy, i)
            };
            json!({ "name": sc.game.agents()[i].name(), "occupancy": occ })
        })
        .collect();
    let (rows, cols) = sc.grid_dims().unzip();
    Ok(json!({
        "v_star": r.v_star,
        "states": sc.game.num_states(),
        "rows": rows,
        "cols": cols,
        "agents": agents,
    }))
}

/// Full and restricted reach-avoid values of a policy file with its bound check.
#[wasm_bindgen]
pub fn evaluate_policy(config: &str, policy: &str) -> Result<String, JsError> {
    let sc = load(config)?;
    let doc: Value = serde_json::from_str(policy).map_err(fail)?;
    let pair = policy_from_json(&sc.game, &doc).map_err(fail)?;
    let check = check_theorem1_bound(&sc.game, &sc.spec, &pair).map_err(fail)?;
    serde_json::to_string(&check).map_err(fail)
}

/// `sqrt(1 - exp(-d))` sampled at `points` values of `d` in `[0, d_max]`.
#[wasm_bindgen]
pub fn bound_curve(d_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|k| loss_bound(d_max * k as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse() {
        for name in scenario_names() {
            let sc = load(&scenario_config(&name).unwrap()).unwrap();
            assert!(sc.game.num_states() > 0);
        }
    }

    #[test]
    fn heat_maps_sum_to_the_joint_total() {
        let v = reach_value_json(&scenario_config("scenario3").unwrap()).unwrap();
        assert!((v["v_star"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        let totals: Vec<f64> = v["agents"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| a["occupancy"].as_array().unwrap().iter().map(|e| e[1].as_f64().unwrap()).sum())
            .collect();
        for t in &totals {
            assert!((t - totals[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn curve_endpoints() {
        let c = bound_curve(3.0, 4);
        assert_eq!(c[0], 0.0);
        assert!((c[3] - loss_bound(3.0)).abs() < 1e-15);
    }
}
