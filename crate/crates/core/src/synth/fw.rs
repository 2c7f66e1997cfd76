use serde::{Deserialize, Serialize};

use crate::costfn::{coalition_weights, CostModel};
use crate::reachlp::SimplexEngine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    LineSearch,
    Diminishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FwStatus {
    /// Frank-Wolfe gap below tolerance.
    Converged,
    /// Objective at (numerical) zero, its global minimum.
    ZeroCost,
    IterationLimit,
    /// Line search found no decrease although the gap is open.
    Stalled,
    LpFailure,
}

#[derive(Debug, Clone, Copy)]
pub struct FwSettings {
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub zero_tol: f64,
    pub step_rule: StepRule,
}

#[derive(Debug, Clone)]
pub struct FwRun {
    pub x: Vec<f64>,
    pub comm: Vec<f64>,
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub lp_iterations: usize,
    pub status: FwStatus,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const GRID_STEPS: usize = 40;
const GOLDEN_STEPS: usize = 30;
// a run whose value moved less than this (relative) over the window has stalled
const STALL_WINDOW: usize = 25;
const STALL_RELATIVE: f64 = 1e-6;

/// Moves each observation's communication mass to its cheapest coalition.
pub fn polish_comm(model: &CostModel, x: &[f64]) -> (Vec<f64>, f64) {
    let costs = model.evaluate(x);
    let best = model.best_coalitions(&costs);
    let comm = model.concentrated_comm(&costs.mass, &best);
    let value = model.value(&costs, &coalition_weights(&comm, model.num_coalitions()));
    (comm, value)
}

/// Gradient of the part of the objective that is concave in `x`: every term
/// except the joint conditional entropy.
fn concave_gradient(model: &CostModel, x: &[f64], comm: &[f64]) -> Vec<f64> {
    let (mut gx, _) = model.gradient(x, comm);
    let joint = model.joint_map();
    let (y, rows) = joint.sums(x);
    for (g, n) in gx.iter_mut().zip(joint.neg_log_conditional(&y, &rows)) {
        *g += n;
    }
    gx
}

/// Vertex descent: repeatedly minimizes the linearization of the concave part
/// over the region and moves to the resulting vertex while the objective drops.
fn vertex_descent(
    model: &CostModel,
    engine: &mut SimplexEngine,
    x: &mut Vec<f64>,
    comm: &mut Vec<f64>,
    value: &mut f64,
    settings: &FwSettings,
    budget: usize,
) -> (usize, usize, bool) {
    let mut steps = 0;
    let mut lp_iterations = 0;
    while steps < budget && *value > settings.zero_tol {
        let g = concave_gradient(model, x, comm);
        let sol = engine.minimize(&g);
        lp_iterations += sol.iterations;
        if !sol.is_optimal() {
            return (steps, lp_iterations, false);
        }
        let (c, v) = polish_comm(model, &sol.values);
        if !(v < *value) {
            break;
        }
        *x = sol.values;
        *comm = c;
        *value = v;
        steps += 1;
    }
    (steps, lp_iterations, true)
}

/// Vertex descent followed by conditional gradient on `(x, x_comm)` over the
/// engine's polytope, with the communication block minimized exactly after
/// every step.
pub fn frank_wolfe(
    model: &CostModel,
    engine: &mut SimplexEngine,
    x0: Vec<f64>,
    comm0: Vec<f64>,
    polish_first: bool,
    settings: &FwSettings,
) -> FwRun {
    let nc = model.num_coalitions();
    let var_obs = model.var_obs();
    let (mut x, mut comm) = (x0, comm0);
    let mut value = if polish_first {
        let (c, v) = polish_comm(model, &x);
        comm = c;
        v
    } else {
        model.objective(&x, &comm)
    };
    let (mut it, mut lp_iterations, ok) =
        vertex_descent(model, engine, &mut x, &mut comm, &mut value, settings, settings.max_iterations);
    let mut gap = f64::INFINITY;
    let mut status = if ok { FwStatus::IterationLimit } else { FwStatus::LpFailure };
    let mut history: Vec<f64> = Vec::new();
    while ok && it < settings.max_iterations {
        history.push(value);
        if history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            if old - value <= STALL_RELATIVE * old {
                status = FwStatus::Stalled;
                break;
            }
        }
        if value <= settings.zero_tol {
            status = FwStatus::ZeroCost;
            break;
        }
        let (gx, gz) = model.gradient(&x, &comm);
        let mut best_c = vec![0usize; model.num_obs()];
        let mut best_g = vec![0.0; model.num_obs()];
        for o in 0..model.num_obs() {
            let block = &gz[o * nc..(o + 1) * nc];
            for c in 1..nc {
                if block[c] < block[best_c[o]] {
                    best_c[o] = c;
                }
            }
            best_g[o] = block[best_c[o]];
        }
        let cost: Vec<f64> = gx.iter().zip(var_obs).map(|(g, &o)| g + best_g[o as usize]).collect();
        let sol = engine.minimize(&cost);
        lp_iterations += sol.iterations;
        if !sol.is_optimal() {
            status = FwStatus::LpFailure;
            break;
        }
        let vx = sol.values;
        let vcomm = model.concentrated_comm(&model.obs_mass(&vx), &best_c);
        gap = gx.iter().zip(x.iter().zip(&vx)).map(|(g, (a, b))| g * (a - b)).sum::<f64>()
            + gz.iter().zip(comm.iter().zip(&vcomm)).map(|(g, (a, b))| g * (a - b)).sum::<f64>();
        if gap <= settings.convergence_tol {
            status = FwStatus::Converged;
            break;
        }
        let point = |gamma: f64| -> (Vec<f64>, Vec<f64>) {
            let xs = x.iter().zip(&vx).map(|(a, b)| a + gamma * (b - a)).collect();
            let cs = comm.iter().zip(&vcomm).map(|(a, b)| a + gamma * (b - a)).collect();
            (xs, cs)
        };
        let phi = |gamma: f64| {
            let (xs, cs) = point(gamma);
            model.objective(&xs, &cs)
        };
        let gamma = match settings.step_rule {
            StepRule::Diminishing => 2.0 / (it as f64 + 2.0),
            StepRule::LineSearch => {
                let (g, fg) = line_search(&phi, value);
                if fg >= value {
                    status = FwStatus::Stalled;
                    break;
                }
                g
            }
        };
        let (xs, _) = point(gamma);
        x = xs;
        let (c, v) = polish_comm(model, &x);
        comm = c;
        value = v;
        it += 1;
    }
    FwRun { x, comm, value, gap, iterations: it, lp_iterations, status }
}

/// Step on `[0, 1]`: the best of a geometric grid towards zero, refined by
/// golden section around it. Entropy terms make the objective steep near
/// zero, so useful steps can be tiny.
fn line_search(phi: &impl Fn(f64) -> f64, at_zero: f64) -> (f64, f64) {
    let mut best = (0.0, at_zero);
    let mut best_k = None;
    for k in 0..=GRID_STEPS {
        let g = 0.5f64.powi(k as i32);
        let f = phi(g);
        if f < best.1 {
            best = (g, f);
            best_k = Some(k);
        }
    }
    let Some(k) = best_k else {
        return best;
    };
    let hi = 0.5f64.powi(k as i32 - 1).min(1.0);
    let lo = 0.5f64.powi(k as i32 + 1);
    let (g, f) = golden_section(phi, lo, hi);
    if f < best.1 {
        (g, f)
    } else {
        best
    }
}

/// Golden-section minimizer of `phi` on `[lo, hi]`.
fn golden_section(phi: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    for _ in 0..GOLDEN_STEPS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = phi(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
