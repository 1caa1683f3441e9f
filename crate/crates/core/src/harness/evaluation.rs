use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{seed_stream, EpisodeRecord, HarnessError, RunConfig, ScoreTable, SeedStream};
use crate::agents::{argmax, Checkpoint, ACTION_DIM};
use crate::behaviors::{RoleAssignment, StrategyId};
use crate::env::{encode_assignment, CoachAction, CoachEnv, ACTION_COUNT};
use crate::neural::Network;
use crate::sim::MatchEvent;

/// A frozen coach: no exploration, no learning.
#[derive(Debug, Clone, PartialEq)]
pub enum CoachPolicy {
    /// Greedy over a Q-network's 27 outputs.
    Ddqn(Network),
    /// Noise-free actor output, discretised per robot.
    Ddpg(Network),
    /// Uniform over the 27 formations at every step.
    Random,
    /// The same formation throughout.
    Fixed(RoleAssignment),
}

impl CoachPolicy {
    /// Takes the online network or actor from a checkpoint.
    pub fn from_checkpoint(checkpoint: &Checkpoint) -> Result<Self, HarnessError> {
        let (net, outputs) = match checkpoint {
            Checkpoint::Ddqn { online, .. } => (online, ACTION_COUNT),
            Checkpoint::Ddpg { actor, .. } => (actor, ACTION_DIM),
        };
        if net.output_len() != outputs {
            return Err(HarnessError::Config(format!(
                "{} checkpoint policy has {} outputs, expected {outputs}",
                checkpoint.algorithm(),
                net.output_len()
            )));
        }
        Ok(match checkpoint {
            Checkpoint::Ddqn { online, .. } => CoachPolicy::Ddqn(online.clone()),
            Checkpoint::Ddpg { actor, .. } => CoachPolicy::Ddpg(actor.clone()),
        })
    }

    /// Observation length the policy needs, if it reads observations at all.
    pub fn input_len(&self) -> Option<usize> {
        match self {
            CoachPolicy::Ddqn(net) | CoachPolicy::Ddpg(net) => Some(net.input_len()),
            CoachPolicy::Random | CoachPolicy::Fixed(_) => None,
        }
    }

    pub fn decide<R: Rng + ?Sized>(&self, state: &[f64], rng: &mut R) -> CoachAction {
        match self {
            CoachPolicy::Ddqn(net) => CoachAction::Discrete(argmax(&net.forward(state))),
            CoachPolicy::Ddpg(net) => {
                let out = net.forward(state);
                CoachAction::Continuous(std::array::from_fn(|i| out[i].clamp(-1.0, 1.0)))
            }
            CoachPolicy::Random => CoachAction::Discrete(rng.random_range(0..ACTION_COUNT)),
            CoachPolicy::Fixed(a) => CoachAction::Discrete(encode_assignment(a)),
        }
    }
}

/// Plays one full match from a seeded reset.
pub fn play_match<R: Rng + ?Sized>(
    env: &mut CoachEnv,
    policy: &CoachPolicy,
    opponent: StrategyId,
    index: usize,
    env_seed: u64,
    rng: &mut R,
) -> Result<EpisodeRecord, HarnessError> {
    let mut state = env.reset(env_seed, opponent.into()).flatten();
    let mut record = EpisodeRecord {
        episode: index,
        opponent,
        env_seed,
        goals_for: 0,
        goals_against: 0,
        penalties: 0,
        penalties_against: 0,
        rewards: Vec::new(),
        actions: Vec::new(),
        mean_loss: None,
    };
    while !env.is_done() {
        let action = policy.decide(&state, rng);
        let outcome = env.step(action)?;
        record.penalties += outcome.info.count(MatchEvent::PenaltyCommittedByUs) as u32;
        record.penalties_against += outcome.info.count(MatchEvent::PenaltyCommittedByThem) as u32;
        record.rewards.push(outcome.reward.total);
        record.actions.push(outcome.info.roles_applied);
        state = outcome.observation.flatten();
    }
    let score = env.world().score;
    record.goals_for = score.ours;
    record.goals_against = score.theirs;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub table: ScoreTable,
    pub records: Vec<EpisodeRecord>,
}

/// Plays `matches` matches against one opponent. Match `i` resets the
/// environment with the `i`-th draw of the evaluation stream, so every policy
/// evaluated with the same seed faces the same sequence of matches.
pub fn evaluate_policy(
    policy: &CoachPolicy,
    config: &RunConfig,
    opponent: StrategyId,
    matches: usize,
    seed: u64,
) -> Result<Evaluation, HarnessError> {
    config.validate()?;
    if matches == 0 {
        return Err(HarnessError::Config("evaluation needs at least one match".into()));
    }
    let obs_len = config.env.observation_len();
    if let Some(len) = policy.input_len() {
        if len != obs_len {
            return Err(HarnessError::Config(format!(
                "policy expects observations of length {len}, the environment produces {obs_len}"
            )));
        }
    }
    let mut env = CoachEnv::new(config.simulator(), config.behavior.clone(), config.env.clone());
    let mut match_seeds = seed_stream(seed, SeedStream::Evaluation);
    let mut coach_rng = seed_stream(seed, SeedStream::RandomCoach);
    let records = (0..matches)
        .map(|i| {
            let env_seed = match_seeds.next_u64();
            play_match(&mut env, policy, opponent, i, env_seed, &mut coach_rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Evaluation {
        table: ScoreTable::from_records(opponent, &records),
        records,
    })
}

/// Evaluates the frozen policy stored in `checkpoint`.
pub fn run_evaluation(
    checkpoint: &Checkpoint,
    config: &RunConfig,
    opponent: StrategyId,
    matches: usize,
    seed: u64,
) -> Result<Evaluation, HarnessError> {
    evaluate_policy(&CoachPolicy::from_checkpoint(checkpoint)?, config, opponent, matches, seed)
}
