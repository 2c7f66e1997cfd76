//! Execution of policy pairs: induced chains, exact values, truncated cost
//! oracles, the performance-loss bound and Monte Carlo simulation.

mod bound;
mod chain;
mod simulate;
mod solve;
mod truncated;

pub use bound::{
    check_bound_with, check_theorem1_bound, complete_pair, loss_bound, pair_dbar, pair_occupancy, random_pair, BoundCheck,
    PairOccupancy,
};
pub use chain::{induce_full_chain, induce_restricted_chain, Component, ExecutionMode, InducedChain, MarkovChain};
pub use simulate::{simulate, SimulationSummary};
pub use solve::{
    reach_avoid_probability, reach_avoid_value_iteration, reachable_transient, state_action_occupancy,
    state_occupancy, visited_layout,
};
pub use truncated::{kl_divergence_truncated, truncated_exact_d, TruncatedCost, TruncatedKl, HISTORY_GUARD};

#[cfg(test)]
mod tests;
