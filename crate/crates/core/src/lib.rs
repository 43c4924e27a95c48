//! Assisted path planning for a ground vehicle (UGV) crossing a road network
//! whose impeded edges have random travel times, helped by a faster aerial
//! vehicle (UAV) that inspects impeded edges ahead of it.
//!
//! * [`dstar`]: incremental shortest paths towards a fixed destination.
//! * [`kspp`]: k loopless shortest paths maintained across cost updates.
//! * [`rpp`]: inspection routing with time windows (exact depth-first search).
//! * [`paa`]: linear-time priority scoring of inspection candidates.
//! * [`sim`]: event-driven co-simulation, baselines and the lower bound.
//! * [`gen`] and [`experiment`]: instance families and the experiment harness.

pub mod dstar;
pub mod error;
pub mod experiment;
pub mod gen;
pub mod io;
pub mod kspp;
pub mod model;
pub mod paa;
pub mod rpp;
pub mod shortest;
pub mod sim;
pub mod transit;

pub use error::{FormatError, InstanceError, PlanError};
pub use experiment::{run_experiment, ExperimentSpec, Family, SummaryRow};
pub use kspp::{update_k_paths, PathSet};
pub use model::{
    Coord, CostDistribution, EdgeCost, EdgeId, EdgeRecord, Endpoints, KnowledgeState, Path, PlanningCostView,
    ProblemInstance, Realization, UavSettings, UgvCost, VertexId, INF,
};
pub use paa::PriorityWeights;
pub use rpp::{Pruning, RppOptions};
pub use sim::{lower_bound, run, OutcomeRow, Planner, SimulationConfig, SimulationOutcome};
