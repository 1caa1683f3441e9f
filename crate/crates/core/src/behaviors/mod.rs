//! Low-level player behaviours: attacker, defender and goalkeeper, plus the
//! scripted opponent formations.
//!
//! Every behaviour is written for the blue side. Yellow robots are driven by
//! evaluating the same code on the point-reflected world (see
//! [`WorldState::from_perspective`]); the resulting wheel commands apply
//! unchanged.

mod motion;
mod pid;
mod roles;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sim::{Simulator, Team, WheelCommand, WorldState, ROBOTS_PER_TEAM};

pub use motion::{goto_point, saturate, MotionGains};
pub use pid::{pid_step, PidState};
pub use roles::{AttackerTarget, RobotMemory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Attacker,
    Defender,
    Goalkeeper,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Attacker, Role::Defender, Role::Goalkeeper];

    pub fn letter(self) -> char {
        match self {
            Role::Attacker => 'A',
            Role::Defender => 'D',
            Role::Goalkeeper => 'G',
        }
    }
}

/// One role per robot, indexed by robot number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoleAssignment(pub [Role; ROBOTS_PER_TEAM]);

impl RoleAssignment {
    pub fn roles(&self) -> &[Role; ROBOTS_PER_TEAM] {
        &self.0
    }

    pub fn count(&self, role: Role) -> usize {
        self.0.iter().filter(|&&r| r == role).count()
    }
}

impl fmt::Display for RoleAssignment {
    /// Per-robot letters, robot 0 first, e.g. `GDA`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.0 {
            write!(f, "{}", r.letter())?;
        }
        Ok(())
    }
}

/// Fixed formations played by the scripted opponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyId {
    Balanced,
    Offensive,
    #[serde(rename = "heavy")]
    HeavilyOffensive,
}

impl StrategyId {
    pub const ALL: [StrategyId; 3] = [StrategyId::Balanced, StrategyId::Offensive, StrategyId::HeavilyOffensive];

    pub fn assignment(self) -> RoleAssignment {
        use Role::*;
        RoleAssignment(match self {
            StrategyId::Balanced => [Goalkeeper, Defender, Attacker],
            StrategyId::Offensive => [Goalkeeper, Attacker, Attacker],
            StrategyId::HeavilyOffensive => [Attacker, Attacker, Attacker],
        })
    }

    /// Name used on the command line and in config files.
    pub fn name(self) -> &'static str {
        match self {
            StrategyId::Balanced => "balanced",
            StrategyId::Offensive => "offensive",
            StrategyId::HeavilyOffensive => "heavy",
        }
    }

    pub fn parse(s: &str) -> Option<StrategyId> {
        StrategyId::ALL.into_iter().find(|id| id.name() == s)
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorParams {
    /// Goalkeeper line distance from the own goal line (m).
    pub keeper_line_offset: f64,
    /// Defender line distance from the own goal line (m).
    pub defender_line_offset: f64,
    /// Goalkeeper segment spans `|y| <= keeper_half_span`.
    pub keeper_half_span: f64,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub heading_gain: f64,
    pub arrive_radius: f64,
    /// Approach point distance behind the ball.
    pub approach_distance: f64,
    /// How far past the ball the striker aims when pushing.
    pub through_distance: f64,
    pub alignment_tolerance: f64,
    /// Extra distance behind the ball per support rank.
    pub support_spacing: f64,
    pub support_offset: f64,
    /// Gap between the y segments of robots sharing a line role.
    pub lane_gap: f64,
    /// Off-line distance beyond which a line keeper drives back with go-to-point.
    pub line_tolerance: f64,
    /// Heading correction per meter of off-line drift (rad/m).
    pub line_correction: f64,
    /// Line keepers push the ball away when it comes within this distance.
    pub clear_radius: f64,
    /// Attackers keep their targets this far outside the own goal area.
    pub area_margin: f64,
    pub unstick_window: f64,
    pub unstick_displacement: f64,
    pub unstick_reverse: f64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            keeper_line_offset: 0.08,
            defender_line_offset: 0.45,
            keeper_half_span: 0.25,
            kp: 5.0,
            ki: 0.0,
            kd: 0.5,
            heading_gain: 0.8,
            arrive_radius: 0.03,
            approach_distance: 0.10,
            through_distance: 0.20,
            alignment_tolerance: 0.04,
            support_spacing: 0.15,
            support_offset: 0.12,
            lane_gap: 0.12,
            line_tolerance: 0.04,
            line_correction: 3.0,
            clear_radius: 0.09,
            area_margin: 0.06,
            unstick_window: 0.5,
            unstick_displacement: 0.01,
            unstick_reverse: 0.3,
        }
    }
}

impl BehaviorParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.keeper_line_offset > 0.0 && self.keeper_line_offset < self.defender_line_offset) {
            return Err("behavior.keeper_line_offset must be positive and below defender_line_offset".into());
        }
        for (name, v) in [
            ("kp", self.kp),
            ("ki", self.ki),
            ("kd", self.kd),
            ("heading_gain", self.heading_gain),
            ("approach_distance", self.approach_distance),
            ("lane_gap", self.lane_gap),
            ("area_margin", self.area_margin),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("behavior.{name} must be non-negative and finite, got {v}"));
            }
        }
        for (name, v) in [
            ("arrive_radius", self.arrive_radius),
            ("keeper_half_span", self.keeper_half_span),
            ("unstick_window", self.unstick_window),
            ("unstick_reverse", self.unstick_reverse),
            ("line_tolerance", self.line_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("behavior.{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }
}

/// Borrowed simulator constants plus behaviour parameters.
#[derive(Debug, Clone, Copy)]
pub struct BehaviorContext<'a> {
    pub sim: &'a Simulator,
    pub params: &'a BehaviorParams,
}

impl<'a> BehaviorContext<'a> {
    pub fn new(sim: &'a Simulator, params: &'a BehaviorParams) -> Self {
        Self { sim, params }
    }

    pub fn gains(&self) -> MotionGains {
        MotionGains {
            max_speed: self.sim.physics.max_wheel_speed,
            heading_gain: self.params.heading_gain,
            arrive_radius: self.params.arrive_radius,
        }
    }

    pub fn fresh_pid(&self) -> PidState {
        PidState::new(self.params.kp, self.params.ki, self.params.kd, self.sim.physics.max_wheel_speed)
    }

    pub fn goalkeeper_line_x(&self) -> f64 {
        -self.sim.field.half_length + self.params.keeper_line_offset
    }

    pub fn defender_line_x(&self) -> f64 {
        -self.sim.field.half_length + self.params.defender_line_offset
    }

    /// The y segment of the `slot`-th of `count` robots sharing a line role.
    /// Segments are disjoint and ordered by increasing y.
    pub fn lane(&self, role: Role, slot: usize, count: usize) -> (f64, f64) {
        let half = match role {
            Role::Goalkeeper => self.params.keeper_half_span,
            _ => self.sim.field.half_width - self.sim.physics.robot_radius,
        };
        let gap = self.params.lane_gap;
        let len = ((2.0 * half - gap * (count as f64 - 1.0)) / count as f64).max(0.0);
        let lo = -half + slot as f64 * (len + gap);
        (lo, lo + len)
    }

    /// Wheel commands for `team` playing `assignment`.
    pub fn team_commands(
        &self,
        world: &WorldState,
        team: Team,
        assignment: &RoleAssignment,
        memory: &mut [RobotMemory; ROBOTS_PER_TEAM],
    ) -> [WheelCommand; ROBOTS_PER_TEAM] {
        let view = world.from_perspective(team);
        let roles = assignment.roles();

        // Striker is the attacker nearest the ball; ties go to the lower index.
        let mut attackers: Vec<usize> = (0..ROBOTS_PER_TEAM).filter(|&i| roles[i] == Role::Attacker).collect();
        attackers.sort_by(|&a, &b| {
            let da = view.robot(Team::Blue, a).position.distance(view.ball.position);
            let db = view.robot(Team::Blue, b).position.distance(view.ball.position);
            da.total_cmp(&db).then(a.cmp(&b))
        });

        let mut out = [WheelCommand::STOP; ROBOTS_PER_TEAM];
        for i in 0..ROBOTS_PER_TEAM {
            let role = roles[i];
            match role {
                Role::Attacker => {
                    let rank = attackers.iter().position(|&a| a == i).unwrap_or(0);
                    memory[i].lane = None;
                    out[i] = self.attacker_command(&view, i, rank, &mut memory[i]);
                }
                Role::Defender | Role::Goalkeeper => {
                    let count = assignment.count(role);
                    let slot = (0..i).filter(|&j| roles[j] == role).count();
                    let (lo, hi) = self.lane(role, slot, count);
                    let line_x = if role == Role::Goalkeeper {
                        self.goalkeeper_line_x()
                    } else {
                        self.defender_line_x()
                    };
                    let lane = Some((line_x, lo, hi));
                    let m = &mut memory[i];
                    if m.lane != lane {
                        m.pid = m.pid.cleared();
                        m.lane = lane;
                    }
                    m.trail.clear();
                    m.reverse_ticks = 0;
                    let (cmd, pid) = self.line_keeper_command(&view, i, line_x, (lo, hi), &m.pid);
                    m.pid = pid;
                    m.last_command = cmd;
                    out[i] = cmd;
                }
            }
        }
        out
    }
}

/// Controller state for one team across ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamController {
    pub team: Team,
    pub memory: [RobotMemory; ROBOTS_PER_TEAM],
}

impl TeamController {
    pub fn new(team: Team, ctx: &BehaviorContext<'_>) -> Self {
        let pid = ctx.fresh_pid();
        Self {
            team,
            memory: std::array::from_fn(|_| RobotMemory::new(pid)),
        }
    }

    /// Forget all history, e.g. after a restart teleports the robots.
    pub fn reset(&mut self, ctx: &BehaviorContext<'_>) {
        *self = TeamController::new(self.team, ctx);
    }

    pub fn commands(
        &mut self,
        ctx: &BehaviorContext<'_>,
        world: &WorldState,
        assignment: &RoleAssignment,
    ) -> [WheelCommand; ROBOTS_PER_TEAM] {
        ctx.team_commands(world, self.team, assignment, &mut self.memory)
    }
}
