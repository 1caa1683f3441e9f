use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{seed_stream, EpisodeRecord, HarnessError, RunConfig, SeedStream};
use crate::agents::{
    AgentError, Algorithm, Checkpoint, DdpgAgent, DdqnAgent, EpsilonSchedule, OuState, ReplayBuffer, Transition,
};
use crate::behaviors::StrategyId;
use crate::env::{encode_assignment, CoachAction, CoachEnv, StepOutcome};
use crate::sim::MatchEvent;

/// Column names of `steps.tsv`. `raw` holds the continuous actor output for
/// DDPG and `-` for DDQN; `action` is always the applied formation's index.
pub const STEP_LOG_HEADER: &str = "episode\tstep\topponent\taction\troles\traw\tshaping\tgoal_bonus\tpenalty_bonus\treward\tgoals_for\tgoals_against\tsim_time";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "state", content = "error")]
pub enum RunStatus {
    Running,
    Complete,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub episodes: usize,
    /// SHA-256 of `config.toml`.
    pub config_sha256: String,
    /// Stream numbers of the seed split, by consumer.
    pub seed_streams: Vec<(String, u64)>,
    pub observation_len: usize,
    pub episodes_completed: usize,
    /// Paths relative to the run directory, oldest first.
    pub checkpoints: Vec<String>,
    pub final_checkpoint: Option<String>,
    pub status: RunStatus,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Malformed {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainingSummary {
    pub manifest: Manifest,
    pub records: Vec<EpisodeRecord>,
    /// Absolute path of `final.ckpt`.
    pub final_checkpoint: PathBuf,
}

enum Learner {
    Ddqn { agent: DdqnAgent, schedule: EpsilonSchedule },
    Ddpg { agent: DdpgAgent, noise: OuState },
}

impl Learner {
    fn new(config: &RunConfig, total_steps: u64) -> Self {
        let input = config.env.observation_len();
        let mut init = seed_stream(config.seed, SeedStream::Init);
        match config.algorithm {
            Algorithm::Ddqn => {
                let c = &config.agent.ddqn;
                let schedule = EpsilonSchedule {
                    start: c.epsilon_start,
                    end: c.epsilon_end,
                    decay_steps: (c.epsilon_decay_fraction * total_steps as f64).round() as u64,
                };
                Learner::Ddqn {
                    agent: DdqnAgent::new(input, c.clone(), &mut init),
                    schedule,
                }
            }
            Algorithm::Ddpg => {
                let agent = DdpgAgent::new(input, config.agent.ddpg.clone(), &mut init);
                let noise = agent.fresh_noise();
                Learner::Ddpg { agent, noise }
            }
        }
    }

    fn start_episode(&mut self) {
        if let Learner::Ddpg { noise, .. } = self {
            noise.reset();
        }
    }

    fn act(&mut self, state: &[f64], step: u64, explore: &mut ChaCha8Rng, noise_rng: &mut ChaCha8Rng) -> CoachAction {
        match self {
            Learner::Ddqn { agent, schedule } => CoachAction::Discrete(agent.act(state, schedule.value(step), explore)),
            Learner::Ddpg { agent, noise } => CoachAction::Continuous(agent.act(state, Some((noise, noise_rng)))),
        }
    }

    /// Runs one learner step; DDPG reports its critic loss.
    fn learn(&mut self, batch: &[&Transition]) -> Result<f64, AgentError> {
        match self {
            Learner::Ddqn { agent, .. } => agent.learn(batch),
            Learner::Ddpg { agent, .. } => agent.learn(batch).map(|l| l.critic),
        }
    }

    fn checkpoint(&self) -> Checkpoint {
        match self {
            Learner::Ddqn { agent, .. } => agent.checkpoint(),
            Learner::Ddpg { agent, .. } => agent.checkpoint(),
        }
    }
}

fn stream_names() -> Vec<(String, u64)> {
    [
        ("environment", SeedStream::Environment),
        ("opponent", SeedStream::Opponent),
        ("exploration", SeedStream::Exploration),
        ("noise", SeedStream::Noise),
        ("replay", SeedStream::Replay),
        ("init", SeedStream::Init),
    ]
    .into_iter()
    .map(|(n, s)| (n.to_string(), s as u64))
    .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifests always serialise");
    text.push('\n');
    write_file(&dir.join("manifest.json"), text.as_bytes())
}

fn step_line(episode: usize, step: usize, opponent: StrategyId, action: &CoachAction, o: &StepOutcome) -> String {
    let raw = match action {
        CoachAction::Continuous(v) => format!("{},{},{}", v[0], v[1], v[2]),
        CoachAction::Discrete(_) => "-".into(),
    };
    let roles = o.info.roles_applied;
    let r = &o.reward;
    format!(
        "{episode}\t{step}\t{opponent}\t{}\t{roles}\t{raw}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        encode_assignment(&roles),
        r.shaping,
        r.goal_bonus,
        r.penalty_bonus,
        r.total,
        o.info.score.ours,
        o.info.score.theirs,
        o.info.sim_time,
    )
}

/// Trains one coach and writes the run directory `out`.
///
/// Each episode draws its opponent uniformly from `config.opponents`, resets
/// the environment with a fresh seed, and takes one learner step per coach
/// step once the buffer holds `warmup` transitions. On failure the manifest
/// records the error and every checkpoint written so far is kept.
pub fn run_training(config: &RunConfig, out: &Path) -> Result<TrainingSummary, HarnessError> {
    config.validate()?;
    let ckpt_dir = out.join("checkpoints");
    fs::create_dir_all(&ckpt_dir).map_err(|e| HarnessError::io(&ckpt_dir, e))?;
    let config_text = config.to_toml();
    write_file(&out.join("config.toml"), config_text.as_bytes())?;
    let mut manifest = Manifest {
        algorithm: config.algorithm,
        seed: config.seed,
        episodes: config.episodes,
        config_sha256: config.hash(),
        seed_streams: stream_names(),
        observation_len: config.env.observation_len(),
        episodes_completed: 0,
        checkpoints: Vec::new(),
        final_checkpoint: None,
        status: RunStatus::Running,
    };
    write_manifest(out, &manifest)?;

    let mut records = Vec::with_capacity(config.episodes);
    match train_loop(config, out, &mut manifest, &mut records) {
        Ok(final_checkpoint) => {
            manifest.status = RunStatus::Complete;
            write_manifest(out, &manifest)?;
            Ok(TrainingSummary {
                manifest,
                records,
                final_checkpoint,
            })
        }
        Err(e) => {
            manifest.status = RunStatus::Failed(e.to_string());
            // The original error matters more than a failure to record it.
            let _ = write_manifest(out, &manifest);
            Err(e)
        }
    }
}

fn train_loop(
    config: &RunConfig,
    out: &Path,
    manifest: &mut Manifest,
    records: &mut Vec<EpisodeRecord>,
) -> Result<PathBuf, HarnessError> {
    let seed = config.seed;
    let mut env_seeds = seed_stream(seed, SeedStream::Environment);
    let mut opponent_rng = seed_stream(seed, SeedStream::Opponent);
    let mut explore_rng = seed_stream(seed, SeedStream::Exploration);
    let mut noise_rng = seed_stream(seed, SeedStream::Noise);
    let mut replay_rng = seed_stream(seed, SeedStream::Replay);

    let mut env = CoachEnv::new(config.simulator(), config.behavior.clone(), config.env.clone());
    let steps_per_episode = env.episode_ticks().div_ceil(config.env.ticks_per_decision as u64);
    let mut learner = Learner::new(config, steps_per_episode * config.episodes as u64);
    let settings = &config.agent;
    let mut buffer = ReplayBuffer::new(settings.replay_capacity, config.env.observation_len());

    let steps_path = out.join("steps.tsv");
    let episodes_path = out.join("episodes.jsonl");
    let open = |p: &Path| File::create(p).map(BufWriter::new).map_err(|e| HarnessError::io(p, e));
    let mut steps_log = open(&steps_path)?;
    let mut episodes_log = open(&episodes_path)?;
    writeln!(steps_log, "{STEP_LOG_HEADER}").map_err(|e| HarnessError::io(&steps_path, e))?;

    let mut global_step = 0u64;
    for episode in 0..config.episodes {
        let opponent = config.opponents[opponent_rng.random_range(0..config.opponents.len())];
        let env_seed = env_seeds.next_u64();
        let mut state = env.reset(env_seed, opponent.into()).flatten();
        learner.start_episode();
        let mut record = EpisodeRecord {
            episode,
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
        let (mut loss_sum, mut loss_count) = (0.0, 0usize);
        let mut lines = String::new();
        let mut step = 0;
        while !env.is_done() {
            let action = learner.act(&state, global_step, &mut explore_rng, &mut noise_rng);
            let outcome = env.step(action)?;
            let next_state = outcome.observation.flatten();
            buffer.push(Transition {
                state: std::mem::take(&mut state),
                action,
                reward: outcome.reward.total,
                next_state: next_state.clone(),
                done: outcome.done,
            })?;
            if buffer.len() >= settings.warmup {
                let batch = buffer.sample(settings.batch_size, &mut replay_rng)?;
                loss_sum += learner.learn(&batch)?;
                loss_count += 1;
            }
            lines.push_str(&step_line(episode, step, opponent, &action, &outcome));
            record.penalties += outcome.info.count(MatchEvent::PenaltyCommittedByUs) as u32;
            record.penalties_against += outcome.info.count(MatchEvent::PenaltyCommittedByThem) as u32;
            record.rewards.push(outcome.reward.total);
            record.actions.push(outcome.info.roles_applied);
            state = next_state;
            step += 1;
            global_step += 1;
        }
        let score = env.world().score;
        record.goals_for = score.ours;
        record.goals_against = score.theirs;
        record.mean_loss = (loss_count > 0).then(|| loss_sum / loss_count as f64);

        steps_log
            .write_all(lines.as_bytes())
            .and_then(|_| steps_log.flush())
            .map_err(|e| HarnessError::io(&steps_path, e))?;
        let json = serde_json::to_string(&record).expect("records always serialise");
        writeln!(episodes_log, "{json}")
            .and_then(|_| episodes_log.flush())
            .map_err(|e| HarnessError::io(&episodes_path, e))?;
        records.push(record);
        manifest.episodes_completed = episode + 1;

        if config.checkpoint_every > 0 && (episode + 1) % config.checkpoint_every == 0 {
            let name = format!("checkpoints/ep{:05}.ckpt", episode + 1);
            write_file(&out.join(&name), &learner.checkpoint().encode())?;
            manifest.checkpoints.push(name);
            write_manifest(out, manifest)?;
        }
    }

    let name = "checkpoints/final.ckpt".to_string();
    let path = out.join(&name);
    write_file(&path, &learner.checkpoint().encode())?;
    manifest.final_checkpoint = Some(name);
    Ok(path)
}
