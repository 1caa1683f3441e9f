use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_2;

use crate::behaviors::motion::{goto_point, saturate};
use crate::behaviors::{BehaviorContext, PidState};
use crate::geometry::{wrap_angle, Vec2};
use crate::sim::{RobotState, Team, WheelCommand, WorldState};

/// Per-robot controller memory carried between ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotMemory {
    pub pid: PidState,
    /// Line the PID is currently regulating onto: (x, y_min, y_max).
    pub lane: Option<(f64, f64, f64)>,
    /// Recent positions, oldest first, for stall detection.
    pub trail: VecDeque<Vec2>,
    pub reverse_ticks: u32,
    /// Sign of the last nonzero forward speed.
    pub drive_sign: f64,
    pub last_command: WheelCommand,
}

impl RobotMemory {
    pub fn new(pid: PidState) -> Self {
        Self {
            pid,
            lane: None,
            trail: VecDeque::new(),
            reverse_ticks: 0,
            drive_sign: 1.0,
            last_command: WheelCommand::STOP,
        }
    }

    fn remember(&mut self, cmd: WheelCommand) -> WheelCommand {
        let forward = 0.5 * (cmd.left + cmd.right);
        if forward.abs() > 1e-6 {
            self.drive_sign = forward.signum();
        }
        self.last_command = cmd;
        cmd
    }
}

/// Where an attacker is heading this tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackerTarget {
    /// Lined up behind the ball: push through it toward the opponent goal.
    ThroughBall(Vec2),
    /// Get to the approach point behind the ball first.
    Approach(Vec2),
    /// Secondary attacker holding a staggered point behind the ball.
    Support(Vec2),
}

impl AttackerTarget {
    pub fn point(self) -> Vec2 {
        match self {
            AttackerTarget::ThroughBall(p) | AttackerTarget::Approach(p) | AttackerTarget::Support(p) => p,
        }
    }
}

impl BehaviorContext<'_> {
    fn clamp_inside(&self, p: Vec2) -> Vec2 {
        let f = &self.sim.field;
        let r = self.sim.physics.robot_radius;
        Vec2::new(
            p.x.clamp(-f.half_length + r, f.half_length - r),
            p.y.clamp(-f.half_width + r, f.half_width - r),
        )
    }

    /// Moves a target lying inside the own goal area onto its front edge, so
    /// attackers never add a second body to the area.
    fn outside_own_area(&self, p: Vec2) -> Vec2 {
        let f = &self.sim.field;
        let edge = -f.half_length + f.goal_area_depth + self.params.area_margin;
        if p.x < edge && p.y.abs() < f.goal_area_half_width + self.params.area_margin {
            Vec2::new(edge, p.y)
        } else {
            p
        }
    }

    /// Attack direction (unit vector ball → opponent goal) in blue's frame.
    fn attack_direction(&self, ball: Vec2) -> Vec2 {
        let dir = (self.sim.field.opponent_goal_center() - ball).normalized();
        if dir == Vec2::ZERO {
            Vec2::new(1.0, 0.0)
        } else {
            dir
        }
    }

    /// Target selection for a blue attacker. `rank` 0 is the striker; higher
    /// ranks are staggered support positions.
    pub fn attacker_target(&self, world: &WorldState, robot: &RobotState, rank: usize) -> AttackerTarget {
        let p = &self.params;
        let ball = world.ball.position;
        let u = self.attack_direction(ball);
        let rel = robot.position - ball;
        let behind = -rel.dot(u);
        let lateral = rel.cross(u).abs();
        let tolerance = (0.25 * behind).clamp(p.alignment_tolerance, 2.0 * p.alignment_tolerance);
        let aligned = behind > 0.0 && lateral < tolerance;

        if rank == 0 {
            if aligned {
                return AttackerTarget::ThroughBall(self.clamp_inside(ball + u * p.through_distance));
            }
            return AttackerTarget::Approach(self.clamp_inside(ball - u * p.approach_distance));
        }
        if aligned && behind < 0.25 {
            return AttackerTarget::ThroughBall(self.clamp_inside(ball + u * p.through_distance));
        }
        let side = if rank % 2 == 1 { 1.0 } else { -1.0 };
        let back = p.approach_distance + p.support_spacing * rank as f64;
        AttackerTarget::Support(self.clamp_inside(ball - u * back + u.perp() * (side * p.support_offset)))
    }

    /// Routes around the ball when the straight path to `target` would hit it.
    fn route_around_ball(&self, world: &WorldState, robot: &RobotState, target: Vec2) -> Vec2 {
        let ball = world.ball.position;
        let seg = target - robot.position;
        let len2 = seg.dot(seg);
        let t = if len2 > 1e-12 {
            ((ball - robot.position).dot(seg) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let closest = robot.position + seg * t;
        let clearance = self.sim.physics.robot_radius + self.sim.physics.ball_radius;
        if closest.distance(ball) >= clearance + 0.02 || t <= 0.0 || t >= 1.0 {
            return target;
        }
        let u = self.attack_direction(ball);
        let side = (robot.position - ball).dot(u.perp());
        let side = if side >= 0.0 { 1.0 } else { -1.0 };
        self.clamp_inside(ball + u.perp() * (side * (clearance + 0.04)) - u * 0.02)
    }

    /// Attacker behaviour for blue robot `index` with stall recovery: if the
    /// robot has moved less than the stall threshold over the stall window while
    /// driving, it backs off for the reverse duration.
    pub fn attacker_command(
        &self,
        world: &WorldState,
        index: usize,
        rank: usize,
        memory: &mut RobotMemory,
    ) -> WheelCommand {
        let robot = world.robot(Team::Blue, index);
        let p = &self.params;
        let dt = self.sim.physics.dt;
        let window = (p.unstick_window / dt).round().max(1.0) as usize;

        memory.trail.push_back(robot.position);
        while memory.trail.len() > window + 1 {
            memory.trail.pop_front();
        }

        if memory.reverse_ticks > 0 {
            memory.reverse_ticks -= 1;
            let v = -memory.drive_sign * 0.5 * self.sim.physics.max_wheel_speed;
            memory.last_command = WheelCommand::new(v, v);
            return memory.last_command;
        }

        let driving = 0.5 * (memory.last_command.left + memory.last_command.right);
        if memory.trail.len() > window && driving.abs() > 0.05 {
            let moved = memory.trail.front().map_or(f64::INFINITY, |old| old.distance(robot.position));
            if moved < p.unstick_displacement {
                memory.reverse_ticks = ((p.unstick_reverse / dt).round() as u32).saturating_sub(1);
                memory.trail.clear();
                let v = -memory.drive_sign * 0.5 * self.sim.physics.max_wheel_speed;
                memory.last_command = WheelCommand::new(v, v);
                return memory.last_command;
            }
        }

        let target = match self.attacker_target(world, robot, rank) {
            AttackerTarget::ThroughBall(t) => t,
            AttackerTarget::Approach(t) | AttackerTarget::Support(t) => self.route_around_ball(world, robot, t),
        };
        let cmd = goto_point(robot, self.outside_own_area(target), &self.gains());
        memory.remember(cmd)
    }

    /// Keeps blue robot `index` on the vertical segment `x = line_x`,
    /// `y ∈ [y_min, y_max]`, tracking the ball's y with the PID. Far from the
    /// line it drives back with the go-to-point law; a ball that comes within
    /// reach in front of the robot is pushed away.
    pub fn line_keeper_command(
        &self,
        world: &WorldState,
        index: usize,
        line_x: f64,
        y_range: (f64, f64),
        pid: &PidState,
    ) -> (WheelCommand, PidState) {
        let robot = world.robot(Team::Blue, index);
        let p = &self.params;
        let dt = self.sim.physics.dt;
        let vmax = self.sim.physics.max_wheel_speed;
        let ball = world.ball.position;
        let target_y = ball.y.clamp(y_range.0, y_range.1);

        let to_ball = ball - robot.position;
        if to_ball.norm() < p.clear_radius && ball.x > robot.position.x {
            let u = self.attack_direction(ball);
            let cmd = goto_point(robot, self.clamp_inside(ball + u * 0.10), &self.gains());
            return (cmd, pid.cleared());
        }

        let dx = line_x - robot.position.x;
        if dx.abs() > p.line_tolerance {
            let cmd = goto_point(robot, Vec2::new(line_x, target_y), &self.gains());
            return (cmd, pid.cleared());
        }

        let (effort, pid) = pid.step(target_y - robot.position.y, dt);
        // Which end of the robot currently faces +y.
        let facing = if robot.heading.sin() >= 0.0 { 1.0 } else { -1.0 };
        let forward = facing * effort;
        let drift = (p.line_correction * dx * forward.signum()).clamp(-0.3, 0.3);
        let desired = facing * (FRAC_PI_2 - drift);
        let turn = (p.heading_gain * wrap_angle(desired - robot.heading)).clamp(-vmax, vmax);
        (saturate(forward - turn, forward + turn, vmax), pid)
    }
}
