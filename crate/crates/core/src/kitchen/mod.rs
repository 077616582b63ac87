//! The restaurant game: configs, compilation to a planning problem, and the
//! legal-move state machine used for interactive and simulated play.

mod compile;
mod config;
mod play;
mod snapshot;

pub use compile::{compile, Game};
pub use config::*;
pub use play::{check_state, is_over, legal_actions, step, KitchenEvent};
pub use snapshot::{read_snapshot, write_snapshot};

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KitchenError {
    #[error("config parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("illegal action `{0}`")]
    IllegalAction(String),
    #[error("the game is over")]
    GameOver,
    #[error("snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },
}
