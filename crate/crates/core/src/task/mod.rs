//! The hover benchmark: waypoint schedule, per-cycle fitness, health
//! monitoring, flight evaluation and population seeding.

mod eval;
mod fitness;
mod health;
pub mod rigs;
mod seed;
mod waypoint;

pub use eval::{
    fly, Controller, EvalResult, Flight, HoverTask, Plant, PlantFactory, SimPlant, Simulated, StartPose, TaskConfig,
};
pub use fitness::{
    core_range_score, deadband, fitness_components, fitness_cycle, wrap_angle, FitnessComponents, StateLimits,
};
pub use health::{yaw_arc_error, HealthConfig, HealthMonitor, HealthRule, Termination};
pub use seed::{hover_bounds, seed_population, ATTITUDE_COMMAND, HEIGHT_COMMAND, POSITION_COMMAND};
pub use waypoint::{waypoint_at, Schedule, Waypoint};
