//! The coach environment: blue is coached, yellow plays a scripted formation.
//!
//! One [`CoachEnv::step`] holds a role assignment fixed for
//! `ticks_per_decision` physics ticks, then returns the new frame stack and
//! the shaped reward for that window.

mod action;
mod observation;
mod reward;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behaviors::{BehaviorContext, BehaviorParams, RoleAssignment, StrategyId, TeamController};
use crate::geometry::Vec2;
use crate::sim::{MatchEvent, Score, SimError, Simulator, Team, WheelCommand, WorldState, ROBOT_COUNT};

pub use action::{decode_discrete, encode_assignment, CoachAction, ACTION_COUNT};
pub use observation::{build_observation, ObservationFrame, ObservationStack, FRAME_FEATURES};
pub use reward::{ball_potential, compose_reward, potential_reward, RewardBreakdown, RewardScheme};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("episode is over; call reset before stepping again")]
    EpisodeOver,
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Number of stacked frames `N`.
    pub frames: usize,
    /// Physics ticks per coach decision `K`.
    pub ticks_per_decision: u32,
    pub episode_seconds: f64,
    /// Uniform kickoff jitter half-width (m) applied at reset.
    pub reset_jitter: f64,
    pub reward: RewardScheme,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            frames: 4,
            ticks_per_decision: 60,
            episode_seconds: 60.0,
            reset_jitter: 0.01,
            reward: RewardScheme::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.frames == 0 {
            return Err("env.frames must be at least 1".into());
        }
        if self.ticks_per_decision == 0 {
            return Err("env.ticks_per_decision must be at least 1".into());
        }
        if !(self.episode_seconds.is_finite() && self.episode_seconds > 0.0) {
            return Err("episode length must be positive".into());
        }
        if !(self.reset_jitter.is_finite() && (0.0..0.05).contains(&self.reset_jitter)) {
            return Err("env.reset_jitter must lie in [0, 0.05)".into());
        }
        let r = &self.reward;
        if ![r.shaping_weight, r.goal_for, r.goal_against, r.penalty].iter().all(|v| v.is_finite()) {
            return Err("env.reward values must be finite".into());
        }
        Ok(())
    }

    /// Flattened observation length, `17 · N`.
    pub fn observation_len(&self) -> usize {
        FRAME_FEATURES * self.frames
    }
}

/// What the yellow team does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Opponent {
    Scripted(StrategyId),
    /// Robots never move.
    Idle,
}

impl From<StrategyId> for Opponent {
    fn from(s: StrategyId) -> Self {
        Opponent::Scripted(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub events: Vec<MatchEvent>,
    pub score: Score,
    pub sim_time: f64,
    pub roles_applied: RoleAssignment,
}

impl StepInfo {
    pub fn count(&self, kind: MatchEvent) -> usize {
        self.events.iter().filter(|&&e| e == kind).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: ObservationStack,
    pub reward: RewardBreakdown,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
pub struct CoachEnv {
    sim: Simulator,
    behavior: BehaviorParams,
    config: EnvConfig,
    opponent: Opponent,
    world: WorldState,
    ours: TeamController,
    theirs: TeamController,
    stack: ObservationStack,
    bp_prev: f64,
    done: bool,
    /// Seeded per episode; perturbs every restart so set pieces do not replay identically.
    jitter_rng: ChaCha8Rng,
}

impl CoachEnv {
    pub fn new(sim: Simulator, behavior: BehaviorParams, config: EnvConfig) -> Self {
        let ctx = BehaviorContext::new(&sim, &behavior);
        let ours = TeamController::new(Team::Blue, &ctx);
        let theirs = TeamController::new(Team::Yellow, &ctx);
        let world = sim.kickoff_world(Score::default(), 0);
        let frame = build_observation(&world, Team::Blue, &sim.field);
        let stack = ObservationStack::filled(frame, config.frames);
        let bp_prev = ball_potential(world.ball.position, &sim.field);
        Self {
            sim,
            behavior,
            config,
            opponent: Opponent::Scripted(StrategyId::Balanced),
            world,
            ours,
            theirs,
            stack,
            bp_prev,
            done: true,
            jitter_rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn opponent(&self) -> Opponent {
        self.opponent
    }

    pub fn observation(&self) -> &ObservationStack {
        &self.stack
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn episode_ticks(&self) -> u64 {
        (self.config.episode_seconds / self.sim.physics.dt).round() as u64
    }

    /// Starts an episode from kickoff, with every robot and the ball jittered
    /// by a seeded uniform offset of at most `reset_jitter` per axis. The same
    /// seeded stream jitters every restart after a goal or penalty.
    pub fn reset(&mut self, seed: u64, opponent: Opponent) -> &ObservationStack {
        self.jitter_rng = ChaCha8Rng::seed_from_u64(seed);
        let mut world = self.sim.kickoff_world(Score::default(), 0);
        self.jitter(&mut world);
        self.start(world, opponent)
    }

    fn jitter(&mut self, world: &mut WorldState) {
        let j = self.config.reset_jitter;
        if j <= 0.0 {
            return;
        }
        let rng = &mut self.jitter_rng;
        for p in world.robots.iter_mut().map(|r| &mut r.position).chain([&mut world.ball.position]) {
            *p += Vec2::new(rng.random_range(-j..=j), rng.random_range(-j..=j));
        }
    }

    /// Starts an episode from an arbitrary world; the clock restarts at zero.
    /// Later restarts are jittered from a stream derived from `seed`.
    pub fn reset_from(&mut self, world: WorldState, opponent: Opponent, seed: u64) -> &ObservationStack {
        self.jitter_rng = ChaCha8Rng::seed_from_u64(seed);
        self.start(world, opponent)
    }

    fn start(&mut self, mut world: WorldState, opponent: Opponent) -> &ObservationStack {
        world.tick = 0;
        world.sim_time = 0.0;
        self.opponent = opponent;
        self.world = world;
        self.reset_controllers();
        let frame = build_observation(&self.world, Team::Blue, &self.sim.field);
        self.stack = ObservationStack::filled(frame, self.config.frames);
        self.bp_prev = ball_potential(self.world.ball.position, &self.sim.field);
        self.done = false;
        &self.stack
    }

    fn reset_controllers(&mut self) {
        let ctx = BehaviorContext::new(&self.sim, &self.behavior);
        self.ours.reset(&ctx);
        self.theirs.reset(&ctx);
    }

    /// Plays one coach window with the roles from `action`.
    ///
    /// Goals and penalties inside the window restart play immediately and add
    /// their bonuses. The shaping term sums the potential change over each
    /// continuous stretch of play, so restarts never count as ball movement.
    pub fn step(&mut self, action: CoachAction) -> Result<StepOutcome, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let assignment = action.assignment()?;
        let theirs_assignment = match self.opponent {
            Opponent::Scripted(s) => Some(s.assignment()),
            Opponent::Idle => None,
        };
        let limit = self.episode_ticks();
        let field = self.sim.field.clone();

        let mut events = Vec::new();
        let mut segment_start = self.bp_prev;
        let mut potential_change = 0.0;
        let mut ticks = 0u32;
        while ticks < self.config.ticks_per_decision && self.world.tick < limit {
            let ctx = BehaviorContext::new(&self.sim, &self.behavior);
            let ours = self.ours.commands(&ctx, &self.world, &assignment);
            let theirs = match &theirs_assignment {
                Some(a) => self.theirs.commands(&ctx, &self.world, a),
                None => [WheelCommand::STOP; 3],
            };
            let commands: [WheelCommand; ROBOT_COUNT] = [ours[0], ours[1], ours[2], theirs[0], theirs[1], theirs[2]];
            let stepped = self.sim.step(&self.world, &commands)?;
            let before_restart = stepped.ball.position;
            let (mut world, event) = self.sim.officiate(stepped);
            if !event.is_none() {
                self.jitter(&mut world);
            }
            self.world = world;
            if !event.is_none() {
                potential_change += ball_potential(before_restart, &field) - segment_start;
                segment_start = ball_potential(self.world.ball.position, &field);
                events.push(event);
                self.reset_controllers();
            }
            ticks += 1;
        }

        let bp_now = ball_potential(self.world.ball.position, &field);
        potential_change += bp_now - segment_start;
        let dt_coach = ticks as f64 * self.sim.physics.dt;
        let r_p = if events.is_empty() {
            potential_reward(bp_now, self.bp_prev, dt_coach)
        } else {
            potential_change / dt_coach
        };
        let reward = self.config.reward.compose(r_p, &events);
        self.bp_prev = bp_now;
        self.done = self.world.tick >= limit;
        self.stack.push(build_observation(&self.world, Team::Blue, &field));

        Ok(StepOutcome {
            observation: self.stack.clone(),
            reward,
            done: self.done,
            info: StepInfo {
                events,
                score: self.world.score,
                sim_time: self.world.sim_time,
                roles_applied: assignment,
            },
        })
    }
}

impl Default for CoachEnv {
    fn default() -> Self {
        CoachEnv::new(Simulator::default(), BehaviorParams::default(), EnvConfig::default())
    }
}

#[cfg(test)]
mod tests;
