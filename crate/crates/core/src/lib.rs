pub mod agents;
pub mod cost;
pub mod error;
pub mod games;
pub mod harness;
pub mod lb;
pub mod runner;
pub mod sim;
pub mod topology;
pub mod utility;

pub use cost::{eval_cost, LoadToCost};
pub use error::{Error, Result};
pub use sim::{world_reward, world_utility, Decisions, Simulator, Trajectory, WaveSchedule};
pub use topology::{build_topology, AgentKey, NodeId, ScenarioSpec, Topology, Variant};
