use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use commsynth::exec::{
    check_theorem1_bound, complete_pair, induce_full_chain, induce_restricted_chain, simulate, BoundCheck,
};
use commsynth::jsonfloat;
use commsynth::model::{enumerate_coalitions, Scenario};
use commsynth::reachlp::{optimal_reach_avoid_value, to_fixed_mps};
use commsynth::synth::{
    agent_occupancy, assemble_feasible_region, compare_total_correlation, policy_from_json, policy_to_json,
    synthesize, SynthesisConfig, SynthesisReport, SynthesisStatus, ACCEPT_COST,
};
use commsynth::Error;

#[derive(Parser)]
#[command(name = "commsynth", version, about = "Reach-avoid policy synthesis under bounded communication")]
struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal reach-avoid probability with unrestricted communication.
    Value { scenario: PathBuf },
    /// Two-stage synthesis; writes policy.json, report.json and occupancy CSVs.
    Solve {
        scenario: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = commsynth::tolerances::FW_MAX_ITERATIONS)]
        max_iterations: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the stage-2 feasible region as fixed-format MPS.
        #[arg(long)]
        mps: Option<PathBuf>,
    },
    /// Full and restricted execution of a policy file against the loss bound.
    Evaluate {
        scenario: PathBuf,
        policy: PathBuf,
        /// Re-evaluate with coalitions of this size; communication becomes uniform over them.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Total-correlation baseline against the communication-cost solution.
    BaselineTc {
        scenario: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of a policy file's reach-avoid probability.
    Simulate {
        scenario: PathBuf,
        policy: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Restricted)]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Write every episode as TSV lines.
        #[arg(long)]
        trajectories: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Restricted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Timings {
    #[serde(with = "jsonfloat")]
    stage1: f64,
    #[serde(with = "jsonfloat")]
    stage2: f64,
    #[serde(with = "jsonfloat")]
    evaluation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunReport {
    scenario: String,
    config: SynthesisConfig,
    #[serde(with = "jsonfloat")]
    v_star: f64,
    #[serde(with = "jsonfloat")]
    v_threshold: f64,
    #[serde(with = "jsonfloat")]
    dbar_value: f64,
    bound_check: BoundCheck,
    timings: Timings,
    synthesis: SynthesisReport,
    files: Vec<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Lp(_) => 3,
            Error::InfeasibleThreshold { .. } => 4,
            Error::GuardExceeded(_) => 5,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    input_error(format!("{}: {e}", path.display()))
}

struct Log {
    quiet: bool,
}

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log { quiet: cli.quiet };
    if let Some(n) = std::env::var("COMMSYNTH_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = commsynth::set_threads(n) {
            log.info(format!("warning: COMMSYNTH_THREADS ignored: {e}"));
        }
    }
    let result = match cli.command {
        Command::Value { scenario } => cmd_value(&scenario),
        Command::Solve { scenario, threshold, restarts, seed, max_iterations, out, mps } => {
            let config = SynthesisConfig { v_threshold: threshold, restarts, seed, max_iterations, ..Default::default() };
            cmd_solve(&log, &scenario, config, &out, mps.as_deref())
        }
        Command::Evaluate { scenario, policy, k } => cmd_evaluate(&scenario, &policy, k),
        Command::BaselineTc { scenario, threshold, restarts, seed, out } => {
            let config = SynthesisConfig { v_threshold: threshold, restarts, seed, ..Default::default() };
            cmd_baseline_tc(&log, &scenario, config, out.as_deref())
        }
        Command::Simulate { scenario, policy, episodes, seed, mode, max_steps, trajectories } => {
            cmd_simulate(&scenario, &policy, episodes, seed, mode, max_steps, trajectories.as_deref())
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    Scenario::load(path).map_err(|e| {
        let f = Failure::from(e);
        Failure { message: format!("{}: {}", path.display(), f.message), ..f }
    })
}

fn scenario_id(sc: &Scenario, path: &Path) -> String {
    if sc.config.name.is_empty() {
        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    } else {
        sc.config.name.clone()
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Pretty JSON with sorted keys.
fn sorted_json(value: &impl Serialize) -> Result<String, Failure> {
    let v = serde_json::to_value(value).map_err(|e| input_error(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| input_error(e.to_string()))
}

fn cmd_value(path: &Path) -> Result<u8, Failure> {
    let sc = load(path)?;
    let r = optimal_reach_avoid_value(&sc.game, &sc.spec)?;
    println!("v* = {:.6}", r.v_star);
    Ok(0)
}

fn cmd_solve(
    log: &Log,
    path: &Path,
    config: SynthesisConfig,
    out: &Path,
    mps: Option<&Path>,
) -> Result<u8, Failure> {
    config.validate()?;
    let sc = load(path)?;
    let id = scenario_id(&sc, path);
    log.info(format!("{id}: {} joint states, {} coalitions", sc.game.num_states(), sc.game.coalitions().len()));

    let clock = Instant::now();
    let stage1 = optimal_reach_avoid_value(&sc.game, &sc.spec)?;
    let stage1_time = clock.elapsed().as_secs_f64();
    log.info(format!("stage 1: v* = {:.6} ({stage1_time:.2}s)", stage1.v_star));

    if let Some(mps_path) = mps {
        let region = assemble_feasible_region(&sc.game, &sc.spec, config.v_threshold)?;
        write_file(mps_path, &to_fixed_mps(&region.lp, &id))?;
        log.info(format!("wrote {}", mps_path.display()));
    }

    let clock = Instant::now();
    let syn = synthesize(&sc.game, &sc.spec, &config)?;
    let stage2_time = clock.elapsed().as_secs_f64();
    let r = &syn.report;
    log.info(format!(
        "stage 2: dbar = {:.6e} at threshold {:.6}, achieved {:.6}, {} restarts ({stage2_time:.2}s)",
        r.dbar_value, r.v_threshold, r.achieved_value, r.restarts_used
    ));
    if r.dbar_value > ACCEPT_COST {
        log.info(format!(
            "warning: zero communication cost is unattainable at threshold {:.6}; best dbar = {:.6}",
            r.v_threshold, r.dbar_value
        ));
    }

    let clock = Instant::now();
    let bound = check_theorem1_bound(&sc.game, &sc.spec, &syn.policy)?;
    let eval_time = clock.elapsed().as_secs_f64();

    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let mut files = Vec::new();
    let report_value = serde_json::to_value(r).map_err(|e| input_error(e.to_string()))?;
    let policy = policy_to_json(&sc.game, &syn.policy, report_value);
    let policy_path = out.join("policy.json");
    write_file(&policy_path, &sorted_json(&policy)?)?;
    files.push("policy.json".to_string());
    for i in 0..sc.game.num_agents() {
        let name = format!("occupancy_agent_{i}.csv");
        let mut csv = String::from("state_id,occupancy\n");
        for (label, occ) in agent_occupancy(&sc.game, &syn.region.layout, &syn.x, i) {
            csv.push_str(&format!("{label},{occ:.12e}\n"));
        }
        write_file(&out.join(&name), &csv)?;
        files.push(name);
    }
    files.push("report.json".to_string());
    let report = RunReport {
        scenario: id,
        config,
        v_star: stage1.v_star,
        v_threshold: r.v_threshold,
        dbar_value: r.dbar_value,
        bound_check: bound,
        timings: Timings { stage1: stage1_time, stage2: stage2_time, evaluation: eval_time },
        synthesis: r.clone(),
        files,
    };
    write_file(&out.join("report.json"), &sorted_json(&report)?)?;
    log.info(format!("wrote {}", out.display()));
    println!("v* = {:.6}", stage1.v_star);
    println!("dbar = {:.6e}", r.dbar_value);
    println!("achieved = {:.6}", r.achieved_value);
    Ok(match r.status {
        SynthesisStatus::InfeasibleThreshold => 4,
        _ => 0,
    })
}

fn read_policy(sc: &Scenario, path: &Path) -> Result<commsynth::synth::PolicyPair, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(policy_from_json(&sc.game, &doc)?)
}

fn cmd_evaluate(path: &Path, policy: &Path, k: Option<usize>) -> Result<u8, Failure> {
    let mut sc = load(path)?;
    let mut pair = read_policy(&sc, policy)?;
    if let Some(k) = k {
        let n = sc.game.num_agents();
        if k > n {
            return Err(input_error(format!("--k {k} exceeds the number of agents {n}")));
        }
        let coalitions = enumerate_coalitions(n, k, sc.config.allow_smaller_coalitions);
        sc.game = sc.game.with_coalitions(k, coalitions.clone());
        let nc = coalitions.len();
        let comm = vec![vec![1.0 / nc as f64; nc]; sc.game.num_joint_obs()];
        pair = complete_pair(&sc.game, &sc.spec, pair.action, comm, coalitions)?;
    }
    let b = check_theorem1_bound(&sc.game, &sc.spec, &pair)?;
    println!("p_full = {:.6}", b.p_full);
    println!("p_restricted = {:.6}", b.p_restricted);
    println!("dbar = {:.6e}", b.d_value);
    println!("bound = {:.6}", b.bound);
    println!("satisfied = {}", b.satisfied);
    Ok(0)
}

fn cmd_baseline_tc(log: &Log, path: &Path, config: SynthesisConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let sc = load(path)?;
    log.info("solving both objectives");
    let cmp = compare_total_correlation(&sc.game, &sc.spec, &config)?;
    println!("threshold = {:.6}", cmp.v_threshold);
    println!("tc_min = {:.6}", cmp.tc_min);
    println!("tc_ours = {:.6}", cmp.tc_ours);
    println!("dbar_tc_policy = {:.6e}", cmp.dbar_tc_policy);
    println!("dbar_ours = {:.6e}", cmp.dbar_ours);
    if let Some(out) = out {
        fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
        let doc = json!({ "scenario": scenario_id(&sc, path), "comparison": cmp });
        write_file(&out.join("baseline.json"), &sorted_json(&doc)?)?;
    }
    Ok(0)
}

fn cmd_simulate(
    path: &Path,
    policy: &Path,
    episodes: usize,
    seed: u64,
    mode: Mode,
    max_steps: usize,
    trajectories: Option<&Path>,
) -> Result<u8, Failure> {
    if episodes == 0 {
        return Err(input_error("--episodes must be at least 1"));
    }
    let sc = load(path)?;
    let pair = read_policy(&sc, policy)?;
    let chain = match mode {
        Mode::Full => induce_full_chain(&sc.game, &sc.spec, &pair)?,
        Mode::Restricted => induce_restricted_chain(&sc.game, &sc.spec, &pair)?,
    };
    let summary = match trajectories {
        Some(t) => {
            let file = fs::File::create(t).map_err(|e| io_error(t, e))?;
            let mut w = std::io::BufWriter::new(file);
            let s = simulate(&sc.game, &chain, episodes, seed, max_steps, Some(&mut w))?;
            w.flush().map_err(|e| io_error(t, e))?;
            s
        }
        None => simulate(&sc.game, &chain, episodes, seed, max_steps, None)?,
    };
    println!("estimate = {:.6}", summary.estimate);
    println!("stderr = {:.6}", summary.stderr);
    println!(
        "episodes = {} successes = {} failures = {} timeouts = {}",
        summary.episodes, summary.successes, summary.failures, summary.timeouts
    );
    Ok(0)
}
