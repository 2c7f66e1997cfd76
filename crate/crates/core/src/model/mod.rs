pub mod agent;
pub mod coalition;
pub mod game;
pub mod random;
pub mod scenario;

pub use agent::{AgentModel, LocalState, TransitionRow};
pub use coalition::{enumerate_coalitions, Coalition};
pub use game::{
    build_joint_game, build_joint_game_with, ActionEntry, CooperativeGame, Enumeration, GameOptions,
    ReachAvoidSpec, SINK_ACTION,
};
pub use random::{random_instance, RandomGameParams};
pub use scenario::{Scenario, ScenarioConfig};
