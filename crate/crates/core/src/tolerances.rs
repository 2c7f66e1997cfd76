//! Numeric tolerances shared across the crate.

/// Agent transition rows must sum to one within this bound.
pub const AGENT_ROW_SUM: f64 = 1e-12;
/// Joint transition rows and induced chain rows.
pub const JOINT_ROW_SUM: f64 = 1e-9;

/// Primal feasibility tolerance of the simplex engine.
pub const LP_FEASIBILITY: f64 = 1e-8;
/// Reduced-cost (optimality) tolerance of the simplex engine.
pub const LP_OPTIMALITY: f64 = 1e-9;
/// Smallest pivot element accepted in the ratio test.
pub const LP_PIVOT: f64 = 1e-7;

/// Floor applied inside logarithms by the smoothed objective and its gradient.
pub const LOG_FLOOR: f64 = 1e-12;

/// Frank-Wolfe stationarity tolerance on the smoothed objective.
pub const FW_GAP: f64 = 1e-6;
/// Iteration cap per restart.
pub const FW_MAX_ITERATIONS: usize = 5000;

/// Residual of the reach-probability linear solve.
pub const CHAIN_RESIDUAL: f64 = 1e-10;
/// Slack allowed when checking the performance-loss bound.
pub const BOUND_SLACK: f64 = 1e-6;
