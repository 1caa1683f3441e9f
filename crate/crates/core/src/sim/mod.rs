//! Deterministic 2D kinematic simulation of a 3-vs-3 match.
//!
//! Robots are differential-drive discs, the ball is a damped disc. Blue is
//! always the learning side and defends the goal at `x = -half_length`;
//! "ours" in scores and events refers to blue.

mod field;
mod physics;
mod rules;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, Vec2};

pub use field::FieldGeometry;
pub use physics::{PhysicsParams, Simulator};
pub use rules::{detect_goal, detect_penalty, kickoff_pose};

pub const ROBOTS_PER_TEAM: usize = 3;
pub const ROBOT_COUNT: usize = 2 * ROBOTS_PER_TEAM;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("state corruption: {0}")]
    StateCorruption(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Blue,
    Yellow,
}

impl Team {
    pub fn other(self) -> Team {
        match self {
            Team::Blue => Team::Yellow,
            Team::Yellow => Team::Blue,
        }
    }

    /// Sign of the x coordinate of the goal this team defends.
    pub fn defended_side(self) -> f64 {
        match self {
            Team::Blue => -1.0,
            Team::Yellow => 1.0,
        }
    }

    /// Index of this team's robot `index` inside [`WorldState::robots`].
    pub fn slot(self, index: usize) -> usize {
        debug_assert!(index < ROBOTS_PER_TEAM);
        match self {
            Team::Blue => index,
            Team::Yellow => ROBOTS_PER_TEAM + index,
        }
    }

    fn latch(self) -> usize {
        match self {
            Team::Blue => 0,
            Team::Yellow => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub position: Vec2,
    /// Radians in (−π, π].
    pub heading: f64,
    pub linear_velocity: Vec2,
    pub team: Team,
    pub index: usize,
}

impl RobotState {
    pub fn at_rest(team: Team, index: usize, position: Vec2, heading: f64) -> Self {
        Self {
            position,
            heading: wrap_angle(heading),
            linear_velocity: Vec2::ZERO,
            team,
            index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BallState {
    pub position: Vec2,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Score {
    pub ours: u32,
    pub theirs: u32,
}

impl Score {
    pub fn difference(&self) -> i64 {
        self.ours as i64 - self.theirs as i64
    }
}

/// Full kinematic snapshot of a match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    /// Blue robots 0..3, then yellow robots 0..3.
    pub robots: [RobotState; ROBOT_COUNT],
    pub ball: BallState,
    pub score: Score,
    pub sim_time: f64,
    pub tick: u64,
    /// Per-team penalty detector arming (blue, yellow). Cleared when a penalty
    /// fires, set again by any reset.
    pub penalty_armed: [bool; 2],
}

impl WorldState {
    pub fn robot(&self, team: Team, index: usize) -> &RobotState {
        &self.robots[team.slot(index)]
    }

    pub fn robot_mut(&mut self, team: Team, index: usize) -> &mut RobotState {
        &mut self.robots[team.slot(index)]
    }

    pub fn team_robots(&self, team: Team) -> &[RobotState] {
        let start = team.slot(0);
        &self.robots[start..start + ROBOTS_PER_TEAM]
    }

    pub fn penalty_armed(&self, team: Team) -> bool {
        self.penalty_armed[team.latch()]
    }

    pub(crate) fn set_penalty_armed(&mut self, team: Team, armed: bool) {
        self.penalty_armed[team.latch()] = armed;
    }

    /// Point reflection `(x, y) -> (-x, -y)` with team colours swapped.
    ///
    /// The reflected world seen by blue is what yellow sees in `self`; wheel
    /// commands carry over unchanged because the reflection preserves handedness.
    pub fn mirrored(&self) -> WorldState {
        let flip = |r: &RobotState| RobotState {
            position: -r.position,
            heading: wrap_angle(r.heading + std::f64::consts::PI),
            linear_velocity: -r.linear_velocity,
            team: r.team.other(),
            index: r.index,
        };
        let mut robots = self.robots;
        for i in 0..ROBOTS_PER_TEAM {
            robots[i] = flip(&self.robots[ROBOTS_PER_TEAM + i]);
            robots[ROBOTS_PER_TEAM + i] = flip(&self.robots[i]);
        }
        WorldState {
            robots,
            ball: BallState {
                position: -self.ball.position,
                velocity: -self.ball.velocity,
            },
            score: Score {
                ours: self.score.theirs,
                theirs: self.score.ours,
            },
            sim_time: self.sim_time,
            tick: self.tick,
            penalty_armed: [self.penalty_armed[1], self.penalty_armed[0]],
        }
    }

    /// The world as seen by `team`, always defending `-x`.
    pub fn from_perspective(&self, team: Team) -> WorldState {
        match team {
            Team::Blue => self.clone(),
            Team::Yellow => self.mirrored(),
        }
    }

    pub fn check_finite(&self) -> Result<(), SimError> {
        for r in &self.robots {
            if !(r.position.is_finite() && r.heading.is_finite() && r.linear_velocity.is_finite()) {
                return Err(SimError::StateCorruption(format!(
                    "{:?} robot {} has a non-finite component",
                    r.team, r.index
                )));
            }
        }
        if !(self.ball.position.is_finite() && self.ball.velocity.is_finite()) {
            return Err(SimError::StateCorruption("ball has a non-finite component".into()));
        }
        Ok(())
    }
}

/// Wheel linear speeds (m/s) for one robot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelCommand {
    pub left: f64,
    pub right: f64,
}

impl WheelCommand {
    pub const STOP: WheelCommand = WheelCommand { left: 0.0, right: 0.0 };

    pub const fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }

    pub fn is_finite(&self) -> bool {
        self.left.is_finite() && self.right.is_finite()
    }

    pub fn within(&self, max_speed: f64) -> bool {
        self.left.abs() <= max_speed + 1e-12 && self.right.abs() <= max_speed + 1e-12
    }
}

/// What happened on a tick, from blue's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchEvent {
    None,
    GoalFor,
    GoalAgainst,
    PenaltyCommittedByUs,
    PenaltyCommittedByThem,
}

impl MatchEvent {
    pub fn is_none(self) -> bool {
        self == MatchEvent::None
    }

    pub fn penalty_by(team: Team) -> MatchEvent {
        match team {
            Team::Blue => MatchEvent::PenaltyCommittedByUs,
            Team::Yellow => MatchEvent::PenaltyCommittedByThem,
        }
    }
}
