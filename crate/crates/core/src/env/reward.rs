use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::sim::{FieldGeometry, MatchEvent};

/// Ball potential in `[-1, 0]`: `-1` at the own goal centre, `0` at the
/// opponent goal centre, `-0.5` anywhere equidistant from both.
pub fn ball_potential(ball: Vec2, field: &FieldGeometry) -> f64 {
    let own = field.own_goal_center();
    let opp = field.opponent_goal_center();
    let ratio = (own.distance(ball) - opp.distance(ball)) / own.distance(opp);
    (ratio - 1.0) / 2.0
}

/// Rate of change of the ball potential between two coach decisions.
pub fn potential_reward(bp_now: f64, bp_prev: f64, dt_coach: f64) -> f64 {
    debug_assert!(dt_coach > 0.0);
    (bp_now - bp_prev) / dt_coach
}

/// Reward magnitudes for each term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardScheme {
    /// `w_p`, the weight of the potential term.
    pub shaping_weight: f64,
    pub goal_for: f64,
    pub goal_against: f64,
    /// Added when our team commits a goal-area penalty. Set to 0 to disable.
    pub penalty: f64,
}

impl Default for RewardScheme {
    fn default() -> Self {
        Self {
            shaping_weight: 1.0,
            goal_for: 100.0,
            goal_against: -100.0,
            penalty: -35.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// `w_p · R_p`.
    pub shaping: f64,
    pub goal_bonus: f64,
    pub penalty_bonus: f64,
    pub total: f64,
}

impl RewardScheme {
    /// Shaping plus the bonuses of every event in `events`. Penalties by the
    /// opponent are worth nothing.
    pub fn compose<'a>(&self, r_p: f64, events: impl IntoIterator<Item = &'a MatchEvent>) -> RewardBreakdown {
        let shaping = self.shaping_weight * r_p;
        let mut goal_bonus = 0.0;
        let mut penalty_bonus = 0.0;
        for event in events {
            match event {
                MatchEvent::GoalFor => goal_bonus += self.goal_for,
                MatchEvent::GoalAgainst => goal_bonus += self.goal_against,
                MatchEvent::PenaltyCommittedByUs => penalty_bonus += self.penalty,
                MatchEvent::PenaltyCommittedByThem | MatchEvent::None => {}
            }
        }
        RewardBreakdown {
            shaping,
            goal_bonus,
            penalty_bonus,
            total: shaping + goal_bonus + penalty_bonus,
        }
    }
}

/// Single-event reward with the default bonus values.
pub fn compose_reward(r_p: f64, event: MatchEvent, shaping_weight: f64) -> RewardBreakdown {
    RewardScheme {
        shaping_weight,
        ..RewardScheme::default()
    }
    .compose(r_p, [&event])
}
