//! Stage 2: minimum-cost action and communication policies above a
//! reach-avoid threshold.

mod extract;
mod fw;
mod policy_file;
mod region;

pub use extract::{extract_policy, PolicyPair, Row};
pub use fw::{frank_wolfe, polish_comm, FwRun, FwSettings, FwStatus, StepRule};
pub use policy_file::{policy_from_json, policy_to_json, POLICY_FORMAT};
pub use region::{
    assemble_feasible_region, assemble_full_program, region_from_stage1, ProblemSize, Region, OCCUPANCY_CAP_FACTOR,
};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costfn::{CostBreakdown, CostModel};
use crate::error::{Error, Result};
use crate::jsonfloat;
use crate::exec::{induce_full_chain, reach_avoid_probability};
use crate::model::game::{CooperativeGame, ReachAvoidSpec};
use crate::reachlp::{flow_residual, SimplexEngine, StateActionLayout};
use crate::tolerances::{FW_GAP, FW_MAX_ITERATIONS};

/// Cost below which a run stops: the objective is nonnegative at its optimum
/// and this is far under any reported tolerance.
pub const ZERO_COST: f64 = 1e-9;
/// A restart at or below this cost counts as zero cost and ends the restart loop.
pub const ACCEPT_COST: f64 = 1e-4;
const MIX_VERTICES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// `None` uses the stage-1 optimum.
    pub v_threshold: Option<f64>,
    pub max_iterations: usize,
    pub restarts: usize,
    pub step_rule: StepRule,
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            v_threshold: None,
            max_iterations: FW_MAX_ITERATIONS,
            restarts: 20,
            step_rule: StepRule::LineSearch,
            convergence_tol: FW_GAP,
            seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.v_threshold {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("threshold {v} outside [0, 1]")));
            }
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Config("convergence tolerance must be positive".into()));
        }
        Ok(())
    }

    fn fw_settings(&self) -> FwSettings {
        FwSettings {
            max_iterations: self.max_iterations,
            convergence_tol: self.convergence_tol,
            zero_tol: ZERO_COST,
            step_rule: self.step_rule,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthesisStatus {
    Converged,
    IterationLimit,
    InfeasibleThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    #[serde(with = "jsonfloat")]
    pub v_star: f64,
    #[serde(with = "jsonfloat")]
    pub v_threshold: f64,
    #[serde(with = "jsonfloat")]
    pub achieved_value: f64,
    #[serde(with = "jsonfloat")]
    pub dbar_value: f64,
    pub breakdown: CostBreakdown,
    pub iterations: usize,
    pub restarts_used: usize,
    #[serde(with = "jsonfloat")]
    pub wall_time: f64,
    pub status: SynthesisStatus,
    #[serde(with = "jsonfloat")]
    pub fw_gap: f64,
    pub selected_restart: usize,
    #[serde(with = "jsonfloat::vec")]
    pub restart_dbar: Vec<f64>,
    #[serde(with = "jsonfloat::option")]
    pub occupancy_cap: Option<f64>,
    #[serde(with = "jsonfloat")]
    pub flow_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub policy: PolicyPair,
    pub report: SynthesisReport,
    pub region: Region,
    pub model: CostModel,
    pub x: Vec<f64>,
    pub comm: Vec<f64>,
}

/// Stage 1, the region at the configured threshold, then restarted
/// Frank-Wolfe on the communication cost.
pub fn synthesize(game: &CooperativeGame, spec: &ReachAvoidSpec, config: &SynthesisConfig) -> Result<Synthesis> {
    config.validate()?;
    let region = assemble_feasible_region(game, spec, config.v_threshold)?;
    let model = CostModel::new(game, &region.layout);
    synthesize_in_region(game, spec, region, model, config)
}

/// Same pipeline with the total correlation (no communication) as objective.
pub fn minimize_total_correlation(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    config: &SynthesisConfig,
) -> Result<Synthesis> {
    config.validate()?;
    let region = assemble_feasible_region(game, spec, config.v_threshold)?;
    let model = CostModel::total_correlation(game, &region.layout);
    synthesize_in_region(game, spec, region, model, config)
}

/// Occupancy of each private label of `agent`, summed over everything else.
pub fn agent_occupancy(game: &CooperativeGame, layout: &StateActionLayout, x: &[f64], agent: usize) -> Vec<(usize, f64)> {
    let model = &game.agents()[agent];
    let mut per_label: BTreeMap<usize, f64> = model.states().iter().map(|st| (st.local, 0.0)).collect();
    for (k, &s) in layout.states.iter().enumerate() {
        let label = model.state(game.locals(s)[agent] as usize).local;
        *per_label.entry(label).or_default() += layout.range(k).map(|v| x[v]).sum::<f64>();
    }
    per_label.into_iter().collect()
}

/// Total-correlation baseline against the communication-cost solution at the
/// same threshold, each policy scored under both objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    #[serde(with = "jsonfloat")]
    pub v_threshold: f64,
    #[serde(with = "jsonfloat")]
    pub tc_min: f64,
    #[serde(with = "jsonfloat")]
    pub tc_ours: f64,
    #[serde(with = "jsonfloat")]
    pub dbar_tc_policy: f64,
    #[serde(with = "jsonfloat")]
    pub dbar_ours: f64,
    pub tc_report: SynthesisReport,
    pub ours_report: SynthesisReport,
}

pub fn compare_total_correlation(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    config: &SynthesisConfig,
) -> Result<BaselineComparison> {
    config.validate()?;
    let region = assemble_feasible_region(game, spec, config.v_threshold)?;
    let tc_model = CostModel::total_correlation(game, &region.layout);
    let ours = synthesize_in_region(game, spec, region.clone(), CostModel::new(game, &region.layout), config)?;
    let tc = synthesize_in_region(game, spec, region, tc_model.clone(), config)?;
    let tc_of = |x: &[f64]| tc_model.objective(x, &tc_model.uniform_comm(&tc_model.obs_mass(x)));
    let (_, dbar_tc_policy) = polish_comm(&ours.model, &tc.x);
    Ok(BaselineComparison {
        v_threshold: ours.report.v_threshold,
        tc_min: tc.report.dbar_value,
        tc_ours: tc_of(&ours.x),
        dbar_tc_policy,
        dbar_ours: ours.report.dbar_value,
        tc_report: tc.report,
        ours_report: ours.report,
    })
}

fn restart_start(
    r: usize,
    model: &CostModel,
    region: &Region,
    base: &SimplexEngine,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    let nc = model.num_coalitions();
    let mass = model.obs_mass(&region.start);
    if r == 0 {
        return Ok((region.start.clone(), model.uniform_comm(&mass), false));
    }
    if r <= nc {
        return Ok((region.start.clone(), model.concentrated_comm(&mass, &vec![r - 1; mass.len()]), false));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
    let mut engine = base.clone();
    let mut points = vec![region.start.clone()];
    for _ in 0..MIX_VERTICES {
        let cost: Vec<f64> = (0..model.num_vars()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sol = engine.minimize(&cost);
        if !sol.is_optimal() {
            return Err(Error::Lp(format!("restart {r}: vertex oracle returned {:?}", sol.status)));
        }
        points.push(sol.values);
    }
    let weights: Vec<f64> = points.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut x = vec![0.0; model.num_vars()];
    for (p, w) in points.iter().zip(&weights) {
        for (xv, pv) in x.iter_mut().zip(p) {
            *xv += w / total * pv;
        }
    }
    Ok((x, Vec::new(), true))
}

fn run_restart(
    r: usize,
    model: &CostModel,
    region: &Region,
    base: &SimplexEngine,
    config: &SynthesisConfig,
) -> Result<FwRun> {
    let (x0, comm0, polish) = restart_start(r, model, region, base, config.seed)?;
    let mut engine = base.clone();
    let run = frank_wolfe(model, &mut engine, x0, comm0, polish, &config.fw_settings());
    if run.status == FwStatus::LpFailure {
        return Err(Error::Lp(format!("restart {r}: linear oracle failed")));
    }
    Ok(run)
}

#[cfg(feature = "parallel")]
fn run_batch(
    batch: std::ops::Range<usize>,
    model: &CostModel,
    region: &Region,
    base: &SimplexEngine,
    config: &SynthesisConfig,
) -> Vec<Result<FwRun>> {
    use rayon::prelude::*;
    batch.into_par_iter().map(|r| run_restart(r, model, region, base, config)).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_batch(
    batch: std::ops::Range<usize>,
    model: &CostModel,
    region: &Region,
    base: &SimplexEngine,
    config: &SynthesisConfig,
) -> Vec<Result<FwRun>> {
    batch.map(|r| run_restart(r, model, region, base, config)).collect()
}

fn batch_size() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Restarted minimization over a prepared region and cost model.
pub fn synthesize_in_region(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    region: Region,
    model: CostModel,
    config: &SynthesisConfig,
) -> Result<Synthesis> {
    config.validate()?;
    let clock = Instant::now();
    let mut runs: Vec<FwRun> = Vec::new();
    if region.is_empty_layout() {
        runs.push(FwRun {
            x: Vec::new(),
            comm: Vec::new(),
            value: 0.0,
            gap: 0.0,
            iterations: 0,
            lp_iterations: 0,
            status: FwStatus::ZeroCost,
        });
    } else {
        let base = SimplexEngine::with_basis(&region.lp, &region.start_basis)?;
        if !base.is_feasible() {
            return Err(Error::InfeasibleThreshold { threshold: region.threshold, v_star: region.v_star });
        }
        let mut next = 0;
        while next < config.restarts {
            let end = (next + batch_size()).min(config.restarts);
            let mut lp_error = None;
            for result in run_batch(next..end, &model, &region, &base, config) {
                match result {
                    Ok(run) => runs.push(run),
                    Err(e) => {
                        lp_error.get_or_insert(e);
                        runs.push(FwRun {
                            x: Vec::new(),
                            comm: Vec::new(),
                            value: f64::INFINITY,
                            gap: f64::INFINITY,
                            iterations: 0,
                            lp_iterations: 0,
                            status: FwStatus::LpFailure,
                        });
                    }
                }
            }
            if runs.iter().all(|r| r.status == FwStatus::LpFailure) {
                if let Some(e) = lp_error {
                    return Err(e);
                }
            }
            if runs.iter().any(|r| r.value <= ACCEPT_COST) {
                break;
            }
            next = end;
        }
    }
    let selected = runs
        .iter()
        .position(|r| r.value <= ACCEPT_COST)
        .unwrap_or_else(|| {
            (0..runs.len()).fold(0, |best, k| if runs[k].value < runs[best].value { k } else { best })
        });
    let restarts_used = if runs[selected].value <= ACCEPT_COST { selected + 1 } else { runs.len() };
    let run = runs[selected].clone();
    let restart_dbar = runs[..restarts_used].iter().map(|r| r.value).collect();
    let policy = extract_policy(game, spec, &model, &region.layout, &run.x, &run.comm);
    let achieved_value = reach_avoid_probability(&induce_full_chain(game, spec, &policy)?.chain)?;
    let breakdown = model.breakdown(&run.x, &run.comm);
    let status = match run.status {
        FwStatus::Converged | FwStatus::ZeroCost => SynthesisStatus::Converged,
        _ => SynthesisStatus::IterationLimit,
    };
    let report = SynthesisReport {
        v_star: region.v_star,
        v_threshold: region.threshold,
        achieved_value,
        dbar_value: run.value,
        breakdown,
        iterations: run.iterations,
        restarts_used,
        wall_time: clock.elapsed().as_secs_f64(),
        status,
        fw_gap: run.gap,
        selected_restart: selected,
        restart_dbar,
        occupancy_cap: region.occupancy_cap,
        flow_residual: flow_residual(game, &region.layout, &run.x),
    };
    Ok(Synthesis { policy, report, region, model, x: run.x, comm: run.comm })
}
