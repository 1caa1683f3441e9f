//! Coach learners: double DQN over the 27 formations and DDPG over three
//! continuous outputs, with experience replay and Ornstein-Uhlenbeck noise.

mod checkpoint;
mod ddpg;
mod ddqn;
mod discretize;
mod noise;
mod replay;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neural::NeuralError;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use ddpg::{DdpgAgent, DdpgConfig, DdpgLosses, ACTION_DIM};
pub use ddqn::{argmax, DdqnAgent, DdqnConfig, EpsilonSchedule};
pub use discretize::{discretize_output, discretize_value, ROLE_THRESHOLD};
pub use noise::{OuConfig, OuState};
pub use replay::{ReplayBuffer, Transition};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid transition: {0}")]
    InvalidTransition(String),
    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,
    #[error("non-finite {what} at learner step {step}")]
    NonFiniteLoss { what: &'static str, step: u64 },
    #[error("checkpoint holds a {found} agent, expected {expected}")]
    AlgorithmMismatch { expected: Algorithm, found: Algorithm },
    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ddqn,
    Ddpg,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ddqn => "ddqn",
            Algorithm::Ddpg => "ddpg",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        match s {
            "ddqn" => Some(Algorithm::Ddqn),
            "ddpg" => Some(Algorithm::Ddpg),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Checks a batch is non-empty and every state has `state_len` entries.
fn check_batch(batch: &[&Transition], state_len: usize) -> Result<(), AgentError> {
    if batch.is_empty() {
        return Err(AgentError::InvalidTransition("empty batch".into()));
    }
    for t in batch {
        if t.state.len() != state_len || t.next_state.len() != state_len {
            return Err(AgentError::InvalidTransition(format!(
                "state length {} / {} does not match network input {state_len}",
                t.state.len(),
                t.next_state.len()
            )));
        }
    }
    Ok(())
}
