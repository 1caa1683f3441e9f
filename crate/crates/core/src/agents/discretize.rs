use crate::behaviors::{Role, RoleAssignment};
use crate::sim::ROBOTS_PER_TEAM;

/// Attacker below this actor output, goalkeeper above its negation.
pub const ROLE_THRESHOLD: f64 = 0.34;

/// Maps one actor output to a role: below `-0.34` attacker, above `0.34`
/// goalkeeper, anything in the closed middle interval defender.
pub fn discretize_value(value: f64) -> Role {
    if value < -ROLE_THRESHOLD {
        Role::Attacker
    } else if value > ROLE_THRESHOLD {
        Role::Goalkeeper
    } else {
        Role::Defender
    }
}

/// Per-robot threshold mapping of a continuous coach output.
pub fn discretize_output(values: &[f64; ROBOTS_PER_TEAM]) -> RoleAssignment {
    RoleAssignment(values.map(discretize_value))
}
