use std::f64::consts::PI;

use crate::geometry::Vec2;
use crate::sim::{
    BallState, FieldGeometry, MatchEvent, RobotState, Score, Simulator, Team, WorldState, ROBOTS_PER_TEAM,
};

/// Goal when the ball centre is past a goal line inside the mouth.
pub fn detect_goal(world: &WorldState, field: &FieldGeometry) -> MatchEvent {
    let b = world.ball.position;
    if b.y.abs() >= field.goal_half_width {
        return MatchEvent::None;
    }
    if b.x > field.half_length {
        MatchEvent::GoalFor
    } else if b.x < -field.half_length {
        MatchEvent::GoalAgainst
    } else {
        MatchEvent::None
    }
}

/// Goal-area penalty: two or more defenders plus the ball inside the
/// defenders' own goal area (robot centres count).
///
/// Fires once per violation; the detector stays disarmed for that team until
/// the next reset.
pub fn detect_penalty(world: &mut WorldState, field: &FieldGeometry) -> MatchEvent {
    for team in [Team::Blue, Team::Yellow] {
        if !field.in_goal_area(team, world.ball.position) {
            continue;
        }
        let inside = world
            .team_robots(team)
            .iter()
            .filter(|r| field.in_goal_area(team, r.position))
            .count();
        if inside >= 2 && world.penalty_armed(team) {
            world.set_penalty_armed(team, false);
            return MatchEvent::penalty_by(team);
        }
    }
    MatchEvent::None
}

/// Kickoff pose for `team`'s robot `index`. Yellow poses mirror blue's under
/// `(x, y) -> (-x, y)`.
pub fn kickoff_pose(team: Team, index: usize) -> (Vec2, f64) {
    const BLUE: [(f64, f64); ROBOTS_PER_TEAM] = [(-0.67, 0.0), (-0.40, 0.20), (-0.15, 0.0)];
    let (x, y) = BLUE[index];
    match team {
        Team::Blue => (Vec2::new(x, y), 0.0),
        Team::Yellow => (Vec2::new(-x, y), PI),
    }
}

impl Simulator {
    /// Fresh kickoff configuration with the given score and tick count.
    pub fn kickoff_world(&self, score: Score, tick: u64) -> WorldState {
        let robots = std::array::from_fn(|slot| {
            let team = if slot < ROBOTS_PER_TEAM { Team::Blue } else { Team::Yellow };
            let index = slot % ROBOTS_PER_TEAM;
            let (p, h) = kickoff_pose(team, index);
            RobotState::at_rest(team, index, p, h)
        });
        WorldState {
            robots,
            ball: BallState::default(),
            score,
            sim_time: tick as f64 * self.physics.dt,
            tick,
            penalty_armed: [true, true],
        }
    }

    /// Restart after a goal: ball at the centre, robots at kickoff poses.
    /// Score and clock carry over; both penalty detectors are rearmed.
    pub fn reset_kickoff(&self, world: &WorldState) -> WorldState {
        let mut next = self.kickoff_world(world.score, world.tick);
        next.sim_time = world.sim_time;
        next
    }

    /// Restart after a penalty by `offender`: ball on the offender's penalty
    /// mark, kicker (the other team's robot 2) 0.10 m behind it facing the goal.
    pub fn reset_penalty(&self, world: &WorldState, offender: Team) -> WorldState {
        let mut next = self.reset_kickoff(world);
        let mark = self.field.penalty_mark(offender);
        next.ball.position = mark;
        let kicker = offender.other();
        // The kicker attacks the goal the offender defends.
        let toward_goal = Vec2::new(offender.defended_side(), 0.0);
        let heading = toward_goal.angle();
        *next.robot_mut(kicker, 2) = RobotState::at_rest(kicker, 2, mark - toward_goal * 0.10, heading);
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim() -> Simulator {
        Simulator::default()
    }

    #[test]
    fn goal_geometry() {
        let s = sim();
        let f = &s.field;
        let mut w = s.kickoff_world(Score::default(), 0);
        w.ball.position = Vec2::new(f.half_length + 1e-6, 0.0);
        assert_eq!(detect_goal(&w, f), MatchEvent::GoalFor);
        w.ball.position = Vec2::new(f.half_length + 1e-6, f.goal_half_width + 0.01);
        assert_eq!(detect_goal(&w, f), MatchEvent::None);
        w.ball.position = Vec2::ZERO;
        assert_eq!(detect_goal(&w, f), MatchEvent::None);
        w.ball.position = Vec2::new(-f.half_length - 1e-6, -0.1);
        assert_eq!(detect_goal(&w, f), MatchEvent::GoalAgainst);
    }

    #[test]
    fn two_defenders_with_ball_is_a_penalty() {
        let s = sim();
        let mut w = s.kickoff_world(Score::default(), 0);
        w.robot_mut(Team::Blue, 0).position = Vec2::new(-0.70, 0.1);
        w.robot_mut(Team::Blue, 1).position = Vec2::new(-0.66, -0.2);
        w.ball.position = Vec2::new(-0.68, 0.0);
        assert_eq!(detect_penalty(&mut w, &s.field), MatchEvent::PenaltyCommittedByUs);
        // Same continuous violation does not fire again.
        assert_eq!(detect_penalty(&mut w, &s.field), MatchEvent::None);
        let mut rearmed = s.reset_kickoff(&w);
        rearmed.robots = w.robots;
        rearmed.ball = w.ball;
        assert_eq!(detect_penalty(&mut rearmed, &s.field), MatchEvent::PenaltyCommittedByUs);
    }

    #[test]
    fn one_defender_is_legal() {
        let s = sim();
        let mut w = s.kickoff_world(Score::default(), 0);
        w.robot_mut(Team::Blue, 0).position = Vec2::new(-0.70, 0.1);
        w.ball.position = Vec2::new(-0.68, 0.0);
        assert_eq!(detect_penalty(&mut w, &s.field), MatchEvent::None);
    }

    #[test]
    fn ball_outside_area_is_legal() {
        let s = sim();
        let mut w = s.kickoff_world(Score::default(), 0);
        w.robot_mut(Team::Blue, 0).position = Vec2::new(-0.70, 0.1);
        w.robot_mut(Team::Blue, 1).position = Vec2::new(-0.66, -0.2);
        w.ball.position = Vec2::ZERO;
        assert_eq!(detect_penalty(&mut w, &s.field), MatchEvent::None);
    }

    #[test]
    fn yellow_penalty() {
        let s = sim();
        let mut w = s.kickoff_world(Score::default(), 0);
        w.robot_mut(Team::Yellow, 1).position = Vec2::new(0.70, 0.1);
        w.robot_mut(Team::Yellow, 2).position = Vec2::new(0.66, -0.2);
        w.ball.position = Vec2::new(0.68, 0.0);
        assert_eq!(detect_penalty(&mut w, &s.field), MatchEvent::PenaltyCommittedByThem);
    }

    #[test]
    fn goal_takes_priority_over_penalty() {
        let s = sim();
        let mut w = s.kickoff_world(Score::default(), 0);
        w.robot_mut(Team::Blue, 0).position = Vec2::new(-0.70, 0.25);
        w.robot_mut(Team::Blue, 1).position = Vec2::new(-0.66, -0.25);
        // Ball rolling into our goal through the area.
        w.ball.position = Vec2::new(-0.735, 0.0);
        w.ball.velocity = Vec2::new(-1.0, 0.0);
        let cmds = [crate::sim::WheelCommand::STOP; crate::sim::ROBOT_COUNT];
        let (next, ev) = s.advance(&w, &cmds).unwrap();
        assert_eq!(ev, MatchEvent::GoalAgainst);
        assert_eq!(next.score.theirs, 1);
    }

    #[test]
    fn kickoff_is_centered_and_mirrored() {
        let s = sim();
        let mut w = s.kickoff_world(Score { ours: 2, theirs: 1 }, 90);
        w.ball.position = Vec2::new(0.3, 0.2);
        w.sim_time = 1.5;
        let k = s.reset_kickoff(&w);
        assert_eq!(k.ball.position, Vec2::ZERO);
        assert_eq!(k.ball.velocity, Vec2::ZERO);
        assert_eq!(k.score, w.score);
        assert_eq!(k.sim_time, 1.5);
        for i in 0..ROBOTS_PER_TEAM {
            let b = k.robot(Team::Blue, i);
            let y = k.robot(Team::Yellow, i);
            assert_eq!(y.position, Vec2::new(-b.position.x, b.position.y));
            assert!((y.heading - (PI - b.heading)).abs() < 1e-12);
        }
        assert_eq!(s.reset_kickoff(&w), k);
    }

    #[test]
    fn penalty_restart_placement() {
        let s = sim();
        let f = &s.field;
        let w = s.kickoff_world(Score::default(), 10);
        let blue = s.reset_penalty(&w, Team::Blue);
        assert_eq!(blue.ball.position, Vec2::new(-f.half_length + f.penalty_mark_distance, 0.0));
        let kicker = blue.robot(Team::Yellow, 2);
        assert!((kicker.position.x - (blue.ball.position.x + 0.10)).abs() < 1e-12);
        assert!((kicker.heading - PI).abs() < 1e-12);

        let yellow = s.reset_penalty(&w, Team::Yellow);
        assert_eq!(yellow.ball.position, Vec2::new(f.half_length - f.penalty_mark_distance, 0.0));
        let kicker = yellow.robot(Team::Blue, 2);
        assert!((kicker.position.x - (yellow.ball.position.x - 0.10)).abs() < 1e-12);
        assert_eq!(kicker.heading, 0.0);

        assert_eq!(s.reset_penalty(&blue, Team::Blue), blue);
        assert_eq!(blue.penalty_armed, [true, true]);
    }

    #[test]
    fn restart_poses_do_not_overlap() {
        let s = sim();
        let w = s.kickoff_world(Score::default(), 0);
        for world in [w.clone(), s.reset_penalty(&w, Team::Blue), s.reset_penalty(&w, Team::Yellow)] {
            for i in 0..6 {
                for j in (i + 1)..6 {
                    let d = world.robots[i].position.distance(world.robots[j].position);
                    assert!(d >= 2.0 * s.physics.robot_radius, "{i} {j} {d}");
                }
                let d = world.robots[i].position.distance(world.ball.position);
                assert!(d >= s.physics.robot_radius + s.physics.ball_radius);
            }
        }
    }
}
