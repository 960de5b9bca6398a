//! A small grid world in which an agent learns everyday behaviors by reward,
//! plus the tools to summarize what it does as chronologies of events.
//!
//! * [`scenario`]: TOML scenario definitions and the five built-in ones.
//! * [`world`]: state, actions, transitions and observable snapshots.
//! * [`learn`]: tabular Q-learning and rollouts.
//! * [`chronology`]: event extraction, distances, clustering, evaluation.

pub mod chronology;
pub mod learn;
pub mod scenario;
pub mod world;

use thiserror::Error;

pub use chronology::{
    chronology_distance, confusion_matrix, distance, extract_chronology, representatives, Atom,
    Chronology, ConfusionMatrix, ObservationTrace,
};
pub use learn::{
    rollout, success_rate, train_policy, LearnParams, Policy, RolloutOptions, TrainStats,
};
pub use scenario::Scenario;
pub use world::{Action, Status, WorldState};

#[derive(Debug, Error)]
pub enum AieError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("could not place `{0}` on the grid")]
    Placement(String),
    #[error("illegal action {action}: {reason}")]
    IllegalAction { action: String, reason: String },
    #[error("policy for `{policy}` does not fit scenario `{scenario}`")]
    PolicyMismatch { policy: String, scenario: String },
    #[error("no data for behavior `{0}`")]
    MissingBehavior(String),
}
