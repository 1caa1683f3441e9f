use serde::{Deserialize, Serialize};

use crate::agents::discretize_output;
use crate::behaviors::{Role, RoleAssignment};
use crate::env::EnvError;
use crate::sim::ROBOTS_PER_TEAM;

/// Number of role triples: three roles for each of three robots.
pub const ACTION_COUNT: usize = 27;

/// A coach decision, either an index into the 27 formations or one
/// continuous value per robot in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoachAction {
    Discrete(usize),
    Continuous([f64; ROBOTS_PER_TEAM]),
}

impl CoachAction {
    pub fn assignment(&self) -> Result<RoleAssignment, EnvError> {
        match *self {
            CoachAction::Discrete(index) => decode_discrete(index),
            CoachAction::Continuous(values) => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(EnvError::InvalidAction(format!("non-finite continuous action {values:?}")));
                }
                Ok(discretize_output(&values))
            }
        }
    }
}

fn role_digit(role: Role) -> usize {
    match role {
        Role::Attacker => 0,
        Role::Defender => 1,
        Role::Goalkeeper => 2,
    }
}

/// Base-3 decoding, most significant digit first: robot 0, robot 1, robot 2.
/// Digits map 0 → attacker, 1 → defender, 2 → goalkeeper.
pub fn decode_discrete(index: usize) -> Result<RoleAssignment, EnvError> {
    if index >= ACTION_COUNT {
        return Err(EnvError::InvalidAction(format!(
            "discrete action {index} out of range 0..{ACTION_COUNT}"
        )));
    }
    let digits = [index / 9, (index / 3) % 3, index % 3];
    Ok(RoleAssignment(digits.map(|d| Role::ALL[d])))
}

/// Inverse of [`decode_discrete`].
pub fn encode_assignment(assignment: &RoleAssignment) -> usize {
    assignment.roles().iter().fold(0, |acc, &r| acc * 3 + role_digit(r))
}
