use std::f64::consts::FRAC_PI_2;
use std::f64::consts::PI;

use crate::geometry::{wrap_angle, Vec2};
use crate::sim::{RobotState, WheelCommand};

/// Gains for the go-to-point law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionGains {
    pub max_speed: f64,
    /// Wheel speed differential (m/s) per radian of heading error.
    pub heading_gain: f64,
    /// Forward speed ramps down linearly inside this distance of the target.
    pub arrive_radius: f64,
}

/// Scales both wheels down together so neither exceeds `max_speed`.
pub fn saturate(left: f64, right: f64, max_speed: f64) -> WheelCommand {
    let peak = left.abs().max(right.abs());
    if peak > max_speed {
        let s = max_speed / peak;
        WheelCommand::new(left * s, right * s)
    } else {
        WheelCommand::new(left, right)
    }
}

/// Differential-drive steering toward `target`.
///
/// Robots are front/back symmetric, so when the target is more than 90°
/// off the nose the robot drives backward instead of turning around.
pub fn goto_point(robot: &RobotState, target: Vec2, gains: &MotionGains) -> WheelCommand {
    let d = target - robot.position;
    let dist = d.norm();
    if dist < 1e-9 {
        return WheelCommand::STOP;
    }
    let err = wrap_angle(d.angle() - robot.heading);
    let (direction, err) = if err.abs() > FRAC_PI_2 {
        (-1.0, wrap_angle(err - PI))
    } else {
        (1.0, err)
    };
    let ramp = (dist / gains.arrive_radius).min(1.0);
    let forward = direction * gains.max_speed * err.cos().max(0.0) * ramp;
    let turn = (gains.heading_gain * err).clamp(-gains.max_speed, gains.max_speed);
    saturate(forward - turn, forward + turn, gains.max_speed)
}
