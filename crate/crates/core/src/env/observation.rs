use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::sim::{FieldGeometry, Team, WorldState, ROBOTS_PER_TEAM};

pub const FRAME_FEATURES: usize = 17;

/// Normalised features of one world snapshot, from one team's perspective:
/// ball (x, y), three opponents (x, y), three teammates (x, y), three
/// teammate headings. Positions are divided by the field half extents,
/// headings by π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationFrame(pub [f64; FRAME_FEATURES]);

impl ObservationFrame {
    pub fn features(&self) -> &[f64; FRAME_FEATURES] {
        &self.0
    }
}

/// Observation for `team`. The world is first put in the team's perspective
/// (own goal at `-x`), so blue and yellow observations are interchangeable.
pub fn build_observation(world: &WorldState, team: Team, field: &FieldGeometry) -> ObservationFrame {
    let view = world.from_perspective(team);
    let nx = |x: f64| (x / field.half_length).clamp(-1.0, 1.0);
    let ny = |y: f64| (y / field.half_width).clamp(-1.0, 1.0);
    let mut f = [0.0; FRAME_FEATURES];
    f[0] = nx(view.ball.position.x);
    f[1] = ny(view.ball.position.y);
    for (i, r) in view.team_robots(Team::Yellow).iter().enumerate() {
        f[2 + 2 * i] = nx(r.position.x);
        f[3 + 2 * i] = ny(r.position.y);
    }
    for (i, r) in view.team_robots(Team::Blue).iter().enumerate() {
        f[8 + 2 * i] = nx(r.position.x);
        f[9 + 2 * i] = ny(r.position.y);
        f[14 + i] = r.heading / std::f64::consts::PI;
    }
    debug_assert_eq!(14 + ROBOTS_PER_TEAM, FRAME_FEATURES);
    ObservationFrame(f)
}

/// The last `N` frames, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationStack {
    frames: VecDeque<ObservationFrame>,
    depth: usize,
}

impl ObservationStack {
    /// A stack of `depth` copies of `initial`.
    pub fn filled(initial: ObservationFrame, depth: usize) -> Self {
        assert!(depth > 0, "stack depth must be positive");
        Self {
            frames: std::iter::repeat_n(initial, depth).collect(),
            depth,
        }
    }

    /// Appends the newest frame and evicts the oldest.
    pub fn push(&mut self, frame: ObservationFrame) {
        self.frames.pop_front();
        self.frames.push_back(frame);
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn frames(&self) -> impl Iterator<Item = &ObservationFrame> {
        self.frames.iter()
    }

    pub fn newest(&self) -> &ObservationFrame {
        self.frames.back().expect("stack is never empty")
    }

    /// Frames concatenated oldest first; length `17 · depth`.
    pub fn flatten(&self) -> Vec<f64> {
        self.frames.iter().flat_map(|f| f.0).collect()
    }
}
