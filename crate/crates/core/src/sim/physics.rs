use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Vec2};
use crate::sim::{
    detect_goal, detect_penalty, FieldGeometry, MatchEvent, SimError, Team, WheelCommand, WorldState,
    ROBOT_COUNT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// Physics tick (s).
    pub dt: f64,
    pub robot_radius: f64,
    pub ball_radius: f64,
    pub max_wheel_speed: f64,
    /// Distance between the wheels (m).
    pub axle_track: f64,
    /// Exponential ball velocity damping rate (1/s).
    pub ball_damping: f64,
    pub ball_wall_restitution: f64,
    /// Restitution of robot-on-ball contacts; the robot is treated as infinitely heavy.
    pub kick_restitution: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            dt: 1.0 / 60.0,
            robot_radius: 0.05,
            ball_radius: 0.02135,
            max_wheel_speed: 0.8,
            axle_track: 0.075,
            ball_damping: 0.7,
            ball_wall_restitution: 0.5,
            kick_restitution: 1.0,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("dt", self.dt),
            ("robot_radius", self.robot_radius),
            ("ball_radius", self.ball_radius),
            ("max_wheel_speed", self.max_wheel_speed),
            ("axle_track", self.axle_track),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("physics.{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.ball_damping.is_finite() && self.ball_damping >= 0.0) {
            return Err("physics.ball_damping must be non-negative".into());
        }
        for (name, v) in [
            ("ball_wall_restitution", self.ball_wall_restitution),
            ("kick_restitution", self.kick_restitution),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("physics.{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

/// Field plus physics constants; every operation is a pure function of its inputs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Simulator {
    pub field: FieldGeometry,
    pub physics: PhysicsParams,
}

impl Simulator {
    pub fn new(field: FieldGeometry, physics: PhysicsParams) -> Self {
        Self { field, physics }
    }

    /// Advances the world by one default physics tick.
    pub fn step(
        &self,
        world: &WorldState,
        commands: &[WheelCommand; ROBOT_COUNT],
    ) -> Result<WorldState, SimError> {
        self.step_dt(world, commands, self.physics.dt)
    }

    /// Advances the world by `dt` seconds: differential-drive kinematics,
    /// damped ball motion, contact resolution and wall handling.
    ///
    /// Commands beyond the wheel-speed bound are saturated.
    pub fn step_dt(
        &self,
        world: &WorldState,
        commands: &[WheelCommand; ROBOT_COUNT],
        dt: f64,
    ) -> Result<WorldState, SimError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SimError::StateCorruption(format!("invalid time step {dt}")));
        }
        if let Some(i) = commands.iter().position(|c| !c.is_finite()) {
            return Err(SimError::StateCorruption(format!("non-finite wheel command for robot slot {i}")));
        }
        world.check_finite()?;

        let p = &self.physics;
        let rr = p.robot_radius;
        let rb = p.ball_radius;
        let mut next = world.clone();

        for (robot, cmd) in next.robots.iter_mut().zip(commands) {
            let left = cmd.left.clamp(-p.max_wheel_speed, p.max_wheel_speed);
            let right = cmd.right.clamp(-p.max_wheel_speed, p.max_wheel_speed);
            let v = 0.5 * (left + right);
            let omega = (right - left) / p.axle_track;
            let before = robot.position;
            let mid_heading = robot.heading + 0.5 * omega * dt;
            robot.position += Vec2::from_angle(mid_heading) * (v * dt);
            robot.heading = wrap_angle(robot.heading + omega * dt);
            robot.position = self.clamp_robot(robot.position);
            robot.linear_velocity = (robot.position - before) * (1.0 / dt);
        }

        // Exact integral of an exponentially damped velocity over dt.
        let decay = (-p.ball_damping * dt).exp();
        let travel = if p.ball_damping > 0.0 {
            (1.0 - decay) / p.ball_damping
        } else {
            dt
        };
        next.ball.position += next.ball.velocity * travel;
        next.ball.velocity = next.ball.velocity * decay;
        self.ball_walls(&mut next);

        // Contacts are resolved simultaneously so neither team gains from
        // processing order. Robots only get separated, never bounced.
        for _ in 0..2 {
            let mut shift = [Vec2::ZERO; ROBOT_COUNT];
            for i in 0..ROBOT_COUNT {
                for j in (i + 1)..ROBOT_COUNT {
                    let d = next.robots[j].position - next.robots[i].position;
                    let dist = d.norm();
                    let min = 2.0 * rr;
                    if dist < min {
                        let n = if dist > 1e-12 { d * (1.0 / dist) } else { Vec2::new(1.0, 0.0) };
                        let push = n * (0.5 * (min - dist));
                        shift[i] -= push;
                        shift[j] += push;
                    }
                }
            }
            for (robot, s) in next.robots.iter_mut().zip(shift) {
                robot.position = self.clamp_robot(robot.position + s);
            }
        }

        let mut ball_shift = Vec2::ZERO;
        let mut impulse = Vec2::ZERO;
        for robot in &next.robots {
            let d = next.ball.position - robot.position;
            let dist = d.norm();
            let min = rr + rb;
            if dist < min {
                let n = if dist > 1e-12 { d * (1.0 / dist) } else { Vec2::from_angle(robot.heading) };
                ball_shift += n * (min - dist);
                let closing = (robot.linear_velocity - next.ball.velocity).dot(n);
                if closing > 0.0 {
                    impulse += n * ((1.0 + p.kick_restitution) * closing);
                }
            }
        }
        next.ball.position += ball_shift;
        next.ball.velocity += impulse;
        self.ball_walls(&mut next);

        // A ball pinned against a wall or between robots pushes them back instead.
        for robot in next.robots.iter_mut() {
            let d = next.ball.position - robot.position;
            let dist = d.norm();
            let min = rr + rb;
            if dist < min {
                let n = if dist > 1e-12 { d * (1.0 / dist) } else { Vec2::from_angle(robot.heading) };
                robot.position = self.clamp_robot(next.ball.position - n * min);
            }
        }

        next.tick += 1;
        next.sim_time = next.tick as f64 * dt;
        next.check_finite()?;
        Ok(next)
    }

    fn clamp_robot(&self, p: Vec2) -> Vec2 {
        let f = &self.field;
        let r = self.physics.robot_radius;
        Vec2::new(
            p.x.clamp(-f.half_length + r, f.half_length - r),
            p.y.clamp(-f.half_width + r, f.half_width - r),
        )
    }

    fn ball_walls(&self, world: &mut WorldState) {
        let f = &self.field;
        let rb = self.physics.ball_radius;
        let e = self.physics.ball_wall_restitution;
        let ball = &mut world.ball;

        let y_limit = f.half_width - rb;
        if ball.position.y > y_limit {
            ball.position.y = y_limit;
            if ball.velocity.y > 0.0 {
                ball.velocity.y *= -e;
            }
        } else if ball.position.y < -y_limit {
            ball.position.y = -y_limit;
            if ball.velocity.y < 0.0 {
                ball.velocity.y *= -e;
            }
        }

        let x_limit = f.half_length - rb;
        if ball.position.x.abs() > x_limit {
            let sign = ball.position.x.signum();
            if ball.position.y.abs() < f.goal_half_width {
                // Inside the goal mouth: bounded by the net and the posts.
                let back = f.half_length + f.goal_depth - rb;
                if ball.position.x.abs() > back {
                    ball.position.x = sign * back;
                    if ball.velocity.x * sign > 0.0 {
                        ball.velocity.x *= -e;
                    }
                }
                if ball.position.x.abs() > f.half_length {
                    let post = f.goal_half_width - rb;
                    if ball.position.y.abs() > post {
                        ball.position.y = ball.position.y.signum() * post;
                        ball.velocity.y *= -e;
                    }
                }
            } else {
                ball.position.x = sign * x_limit;
                if ball.velocity.x * sign > 0.0 {
                    ball.velocity.x *= -e;
                }
            }
        }
    }

    /// One refereed tick: [`Simulator::step`] followed by [`Simulator::officiate`].
    pub fn advance(
        &self,
        world: &WorldState,
        commands: &[WheelCommand; ROBOT_COUNT],
    ) -> Result<(WorldState, MatchEvent), SimError> {
        let stepped = self.step(world, commands)?;
        Ok(self.officiate(stepped))
    }

    /// Applies the match rules to a freshly stepped world. Goals take priority
    /// over penalties; a goal updates the score and restarts from kickoff, a
    /// penalty restarts from the offender's penalty mark.
    pub fn officiate(&self, mut world: WorldState) -> (WorldState, MatchEvent) {
        let event = match detect_goal(&world, &self.field) {
            MatchEvent::GoalFor => {
                world.score.ours += 1;
                MatchEvent::GoalFor
            }
            MatchEvent::GoalAgainst => {
                world.score.theirs += 1;
                MatchEvent::GoalAgainst
            }
            _ => detect_penalty(&mut world, &self.field),
        };
        let world = match event {
            MatchEvent::GoalFor | MatchEvent::GoalAgainst => self.reset_kickoff(&world),
            MatchEvent::PenaltyCommittedByUs => self.reset_penalty(&world, Team::Blue),
            MatchEvent::PenaltyCommittedByThem => self.reset_penalty(&world, Team::Yellow),
            MatchEvent::None => world,
        };
        (world, event)
    }
}
