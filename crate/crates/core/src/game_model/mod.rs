//! Games, distributions and strategies, with their JSON forms.

mod distribution;
mod game;
mod strategy;

pub use distribution::Distribution;
pub use game::{
    validate_game, ActionId, GameBuilder, GameDocument, GameStructure, Objective, ObjectiveDoc, ObjectiveKind,
    StateDoc, StateId, StateInfo, StateProb, TransitionDoc,
};
pub use strategy::{
    strategy_patience, ActionProb, AliveSet, ChoiceDoc, FallbackDoc, PlayerStationaryStrategy, ProfileDocument,
    StationaryStrategy, Strategy, StrategyDocument, StrategyKind, StrategyProfile, MAX_PLAYERS,
};
