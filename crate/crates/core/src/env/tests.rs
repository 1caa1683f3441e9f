use super::*;
use crate::behaviors::Role;
use crate::sim::RobotState;

fn env() -> CoachEnv {
    CoachEnv::default()
}

const AAA: CoachAction = CoachAction::Discrete(0);

#[test]
fn reset_fills_stack_with_initial_frame() {
    let mut e = env();
    let stack = e.reset(3, StrategyId::Balanced.into()).clone();
    assert_eq!(stack.depth(), 4);
    let first = *stack.frames().next().unwrap();
    assert!(stack.frames().all(|f| *f == first));
    assert_eq!(e.world().tick, 0);
    assert!(!e.is_done());
}

#[test]
fn reset_is_seeded() {
    let mut a = env();
    let mut b = env();
    assert_eq!(a.reset(11, StrategyId::Balanced.into()), b.reset(11, StrategyId::Balanced.into()));
    let s11 = a.reset(11, StrategyId::Balanced.into()).clone();
    let s12 = a.reset(12, StrategyId::Balanced.into()).clone();
    assert_ne!(s11, s12);
    // Jitter never exceeds 1 cm per axis.
    let kickoff = a.simulator().kickoff_world(Score::default(), 0);
    for (r, k) in a.world().robots.iter().zip(kickoff.robots.iter()) {
        assert!((r.position.x - k.position.x).abs() <= 0.01);
        assert!((r.position.y - k.position.y).abs() <= 0.01);
    }
}

#[test]
fn stepping_after_done_is_an_error() {
    let config = EnvConfig {
        episode_seconds: 2.0,
        ..EnvConfig::default()
    };
    let mut e = CoachEnv::new(Simulator::default(), BehaviorParams::default(), config);
    e.reset(1, StrategyId::Offensive.into());
    assert!(!e.step(AAA).unwrap().done);
    let last = e.step(AAA).unwrap();
    assert!(last.done);
    assert!((last.info.sim_time - 2.0).abs() < 1e-9);
    assert!(matches!(e.step(AAA), Err(EnvError::EpisodeOver)));
    assert!(matches!(CoachEnv::default().step(AAA), Err(EnvError::EpisodeOver)));
}

#[test]
fn invalid_action_is_rejected() {
    let mut e = env();
    e.reset(1, StrategyId::Balanced.into());
    assert!(matches!(e.step(CoachAction::Discrete(27)), Err(EnvError::InvalidAction(_))));
}

fn off_ball_world(e: &CoachEnv) -> WorldState {
    let mut w = e.simulator().kickoff_world(Score::default(), 0);
    let parked = [Vec2::new(0.55, 0.55), Vec2::new(0.55, -0.55), Vec2::new(0.2, 0.55)];
    for (i, p) in parked.into_iter().enumerate() {
        *w.robot_mut(Team::Yellow, i) = RobotState::at_rest(Team::Yellow, i, p, 0.0);
    }
    w
}

#[test]
fn attackers_push_ball_forward_against_idle_opponent() {
    let mut e = env();
    let w = off_ball_world(&e);
    e.reset_from(w, Opponent::Idle, 0);
    let bp0 = ball_potential(e.world().ball.position, &e.simulator().field);
    let mut shaping = 0.0;
    let mut bp = bp0;
    for _ in 0..3 {
        let out = e.step(AAA).unwrap();
        shaping += out.reward.shaping;
        if out.info.events.is_empty() {
            bp = ball_potential(e.world().ball.position, &e.simulator().field);
        }
    }
    assert!(shaping > 0.0, "cumulative shaping {shaping}");
    assert!(bp > bp0);
}

#[test]
fn goal_inside_window_adds_bonus_and_restarts() {
    let mut e = env();
    let mut w = off_ball_world(&e);
    w.ball.position = Vec2::new(0.6, 0.0);
    w.ball.velocity = Vec2::new(1.0, 0.0);
    e.reset_from(w, Opponent::Idle, 0);
    let out = e.step(CoachAction::Discrete(26)).unwrap();
    assert_eq!(out.info.events, vec![MatchEvent::GoalFor]);
    assert_eq!(out.reward.goal_bonus, 100.0);
    assert_eq!(out.info.score, Score { ours: 1, theirs: 0 });
    assert_eq!(out.info.roles_applied, RoleAssignment([Role::Goalkeeper; 3]));
    // Shaping only covers the stretch up to the goal and after the restart.
    assert!(out.reward.shaping > 0.0 && out.reward.shaping < 1.0);
    assert!((out.reward.total - out.reward.shaping - 100.0).abs() < 1e-12);
}

#[test]
fn penalty_costs_reward_and_restarts() {
    let mut e = env();
    let mut w = off_ball_world(&e);
    *w.robot_mut(Team::Blue, 0) = RobotState::at_rest(Team::Blue, 0, Vec2::new(-0.70, 0.15), 0.0);
    *w.robot_mut(Team::Blue, 1) = RobotState::at_rest(Team::Blue, 1, Vec2::new(-0.70, -0.15), 0.0);
    w.ball.position = Vec2::new(-0.66, 0.0);
    e.reset_from(w, Opponent::Idle, 0);
    let out = e.step(CoachAction::Discrete(26)).unwrap();
    assert_eq!(out.info.count(MatchEvent::PenaltyCommittedByUs), 1);
    assert_eq!(out.reward.penalty_bonus, -35.0);
}

#[test]
fn shaping_telescopes_without_events() {
    let mut e = env();
    let mut checked = 0;
    for seed in 0..6u64 {
        e.reset(seed, Opponent::Idle);
        let start = ball_potential(e.world().ball.position, &e.simulator().field);
        let mut sum = 0.0;
        let mut clean = true;
        let dt_coach = 60.0 / 60.0;
        while !e.is_done() {
            let out = e.step(CoachAction::Discrete(13)).unwrap();
            clean &= out.info.events.is_empty();
            sum += out.reward.shaping * dt_coach;
        }
        if clean {
            let end = ball_potential(e.world().ball.position, &e.simulator().field);
            assert!((sum - (end - start)).abs() < 1e-9, "seed {seed}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn stack_holds_latest_frames() {
    let mut e = env();
    e.reset(5, StrategyId::Balanced.into());
    // Reference model: the initial frame repeated, then one frame per step.
    let mut expected: std::collections::VecDeque<_> = std::iter::repeat_n(*e.observation().newest(), 4).collect();
    for k in 1..=6 {
        let out = e.step(CoachAction::Discrete(k)).unwrap();
        expected.pop_front();
        expected.push_back(build_observation(e.world(), Team::Blue, &e.simulator().field));
        let frames: Vec<_> = out.observation.frames().copied().collect();
        assert_eq!(frames, Vec::from(expected.clone()));
    }
}

#[test]
fn observations_stay_normalised() {
    let mut e = env();
    for seed in 0..3 {
        e.reset(seed, StrategyId::HeavilyOffensive.into());
        let mut k = 0;
        while !e.is_done() {
            let out = e.step(CoachAction::Discrete((k * 7 + seed as usize) % 27)).unwrap();
            for v in out.observation.flatten() {
                assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&v));
            }
            k += 1;
        }
    }
}
