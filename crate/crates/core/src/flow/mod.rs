//! Numerical gradient flow and an empirical census of converging seeds.

mod census;
mod integrator;

pub use census::{grid_census, trajectory_census, Census, GridError, OutcomeCount, SeedGrid, Spread, EMPIRICAL};
pub use integrator::{integrate, FlowConfig, FlowOutcome, GradientFlow, PathPoint, TrajectorySample};
