//! Measurement and certification of strategies: mirror strategies, exact
//! optimality and Nash gaps, rounding, bound calculators and simulation.

mod bounds;
mod gaps;
mod mirror;
mod rounding;
mod simulate;

pub use crate::game_model::strategy_patience;
pub use bounds::{bounds, ln_interval, BoundName, BoundParams, BoundReport, Direction};
pub use gaps::{low_outcome_reply, nash_gap, optimality_gap, GapEntry, GapReport, Witness};
pub use mirror::mirror_strategy;
pub use rounding::{round_distribution, round_profile};
pub use simulate::{simulate_play, SimulationReport};
