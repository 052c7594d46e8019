//! Turn-based stochastic games with reachability, safety, Büchi and
//! co-Büchi objectives: exact values, almost-sure winning regions,
//! memoryless deterministic strategies, lazy truncations of infinite games,
//! and Monte Carlo simulation.

pub mod chain;
pub mod format;
pub mod gallery;
pub mod game;
mod graph;
pub mod lazy;
pub mod objective;
pub mod oracle;
pub mod qualitative;
pub mod rational;
pub mod simulate;
pub mod strategy;
pub mod transforms;
pub mod valuation;

pub use game::{Game, GameBuilder, GameError, Owner, Player, StateId, StateSet};
pub use objective::{Objective, ObjectiveKind};
pub use rational::Rational;
pub use valuation::{SolveMode, ValueVector};
