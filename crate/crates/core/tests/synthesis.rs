use std::path::PathBuf;

use commsynth::exec::{check_theorem1_bound, induce_restricted_chain, reach_avoid_probability};
use commsynth::model::Scenario;
use commsynth::synth::{synthesize, SynthesisConfig};

fn scenario(n: usize) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/scenario{n}.json"));
    Scenario::load(path).unwrap()
}

#[test]
fn table_scenarios_reach_zero_cost() {
    for n in [2, 3] {
        let sc = scenario(n);
        let out = synthesize(&sc.game, &sc.spec, &SynthesisConfig::default()).unwrap();
        let r = &out.report;
        assert!(r.dbar_value <= 1e-4);
        assert!((r.achieved_value - 1.0).abs() <= 1e-6);
        let restricted = induce_restricted_chain(&sc.game, &sc.spec, &out.policy).unwrap();
        assert!((reach_avoid_probability(&restricted.chain).unwrap() - 1.0).abs() <= 1e-6);
        let check = check_theorem1_bound(&sc.game, &sc.spec, &out.policy).unwrap();
        assert!(check.satisfied, "{check:?}");
    }
}

#[test]
fn scenario2_total_correlation_baseline() {
    let sc = scenario(2);
    let cmp = commsynth::synth::compare_total_correlation(&sc.game, &sc.spec, &SynthesisConfig::default()).unwrap();
    assert!((cmp.tc_min - 0.591).abs() <= 0.05);
    assert!((cmp.tc_ours - 0.693).abs() <= 0.05);
    assert!(cmp.tc_min < cmp.tc_ours);
    assert!(cmp.dbar_tc_policy > 0.0);
    assert!(cmp.dbar_ours <= 1e-4);
}
