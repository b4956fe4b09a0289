//! Exact algorithms for two-player and multi-player concurrent stochastic
//! games with reachability and safety objectives.
//!
//! All probabilities and values are exact rationals. The crate covers matrix
//! games, value iteration, best responses through induced MDPs, the Purgatory
//! and safety duel families, and patience/rounding/mirror analyses.

pub mod analysis;
pub mod error;
pub mod families;
pub mod game_model;
pub mod matrix_game;
pub mod mdp_solver;
pub mod scalar;
pub mod value_iteration;

pub use error::{Error, Result};
