use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::sim::Team;

/// Playing-field dimensions. The blue team defends the goal at `x = -half_length`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldGeometry {
    pub half_length: f64,
    pub half_width: f64,
    pub goal_half_width: f64,
    pub goal_depth: f64,
    pub goal_area_depth: f64,
    pub goal_area_half_width: f64,
    /// Distance of the penalty mark from the goal line.
    pub penalty_mark_distance: f64,
}

impl Default for FieldGeometry {
    fn default() -> Self {
        Self {
            half_length: 0.75,
            half_width: 0.65,
            goal_half_width: 0.20,
            goal_depth: 0.10,
            goal_area_depth: 0.15,
            goal_area_half_width: 0.35,
            penalty_mark_distance: 0.375,
        }
    }
}

impl FieldGeometry {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("half_length", self.half_length),
            ("half_width", self.half_width),
            ("goal_half_width", self.goal_half_width),
            ("goal_depth", self.goal_depth),
            ("goal_area_depth", self.goal_area_depth),
            ("goal_area_half_width", self.goal_area_half_width),
            ("penalty_mark_distance", self.penalty_mark_distance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("field.{name} must be positive and finite, got {v}"));
            }
        }
        if self.goal_half_width >= self.half_width {
            return Err("field.goal_half_width must be smaller than half_width".into());
        }
        if self.goal_area_depth >= self.half_length {
            return Err("field.goal_area_depth must be smaller than half_length".into());
        }
        if self.goal_area_half_width >= self.half_width {
            return Err("field.goal_area_half_width must be smaller than half_width".into());
        }
        if self.penalty_mark_distance >= self.half_length {
            return Err("field.penalty_mark_distance must be smaller than half_length".into());
        }
        Ok(())
    }

    /// Centre of the goal defended by blue (`g_o` from blue's point of view).
    pub fn own_goal_center(&self) -> Vec2 {
        Vec2::new(-self.half_length, 0.0)
    }

    /// Centre of the goal blue attacks (`g_a`).
    pub fn opponent_goal_center(&self) -> Vec2 {
        Vec2::new(self.half_length, 0.0)
    }

    /// Centre of the goal defended by `team`.
    pub fn defended_goal_center(&self, team: Team) -> Vec2 {
        Vec2::new(team.defended_side() * self.half_length, 0.0)
    }

    /// True when `p` lies inside the goal area defended by `team` (boundary inclusive).
    pub fn in_goal_area(&self, team: Team, p: Vec2) -> bool {
        let depth = -team.defended_side() * p.x + self.half_length;
        (0.0..=self.goal_area_depth).contains(&depth) && p.y.abs() <= self.goal_area_half_width
    }

    /// Penalty mark in front of the goal defended by `team`.
    pub fn penalty_mark(&self, team: Team) -> Vec2 {
        let side = team.defended_side();
        Vec2::new(side * (self.half_length - self.penalty_mark_distance), 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry_is_valid() {
        let f = FieldGeometry::default();
        f.validate().unwrap();
        assert_eq!(f.own_goal_center(), Vec2::new(-0.75, 0.0));
        assert_eq!(f.opponent_goal_center(), Vec2::new(0.75, 0.0));
    }

    #[test]
    fn goal_area_membership() {
        let f = FieldGeometry::default();
        assert!(f.in_goal_area(Team::Blue, Vec2::new(-0.70, 0.1)));
        assert!(!f.in_goal_area(Team::Blue, Vec2::new(-0.55, 0.1)));
        assert!(!f.in_goal_area(Team::Blue, Vec2::new(-0.70, 0.4)));
        assert!(f.in_goal_area(Team::Yellow, Vec2::new(0.70, -0.3)));
        assert!(!f.in_goal_area(Team::Yellow, Vec2::new(-0.70, 0.0)));
    }

    #[test]
    fn rejects_inconsistent_goal() {
        let f = FieldGeometry {
            goal_half_width: 0.9,
            ..FieldGeometry::default()
        };
        assert!(f.validate().is_err());
    }
}
