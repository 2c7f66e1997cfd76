//! Linear programming: the LP model, a revised simplex engine and the
//! stage-1 reach-avoid LP.

pub mod lp;
pub mod mps;
pub mod reach;
pub mod simplex;

pub use lp::{Constraint, LinearProgram, LpSolution, LpStatus, Relation, Sense};
pub use mps::to_fixed_mps;
pub use reach::{
    assemble_reach_lp, flow_residual, flow_rows, optimal_reach_avoid_value, proper_policy_columns, target_mass, working_states, ReachResult,
    StateActionLayout,
};
pub use simplex::{solve_lp, SimplexEngine};
