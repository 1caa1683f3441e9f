use serde::{Deserialize, Serialize};

/// PID controller with integral anti-windup and output clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub integral: f64,
    pub prev_error: f64,
    pub output_limit: f64,
    /// Bound on `|integral|`.
    pub integral_limit: f64,
}

impl PidState {
    pub fn new(kp: f64, ki: f64, kd: f64, output_limit: f64) -> Self {
        let integral_limit = if ki > 0.0 { output_limit / ki } else { output_limit };
        Self {
            kp,
            ki,
            kd,
            integral: 0.0,
            prev_error: 0.0,
            output_limit,
            integral_limit,
        }
    }

    /// Same gains, cleared history.
    pub fn cleared(&self) -> Self {
        Self {
            integral: 0.0,
            prev_error: 0.0,
            ..*self
        }
    }

    /// One controller update; returns the clamped output and the next state.
    pub fn step(&self, error: f64, dt: f64) -> (f64, PidState) {
        debug_assert!(dt > 0.0);
        let integral = (self.integral + error * dt).clamp(-self.integral_limit, self.integral_limit);
        let derivative = (error - self.prev_error) / dt;
        let raw = self.kp * error + self.ki * integral + self.kd * derivative;
        let output = raw.clamp(-self.output_limit, self.output_limit);
        let next = PidState {
            integral,
            prev_error: error,
            ..*self
        };
        (output, next)
    }
}

/// Free-function form of [`PidState::step`].
pub fn pid_step(pid: &PidState, error: f64, dt: f64) -> (f64, PidState) {
    pid.step(error, dt)
}
