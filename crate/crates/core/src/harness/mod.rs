//! Configuration, seeded training loops, frozen-policy evaluation and run
//! reports.
//!
//! A run directory holds:
//!
//! ```text
//! config.toml        resolved configuration
//! manifest.json      config hash, seeds, status, final checkpoint
//! steps.tsv          one line per coach step
//! episodes.jsonl     one EpisodeRecord per episode
//! checkpoints/       epNNNNN.ckpt every `checkpoint_every` episodes, final.ckpt
//! ```

mod config;
mod evaluation;
mod metrics;
mod report;
mod training;

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::agents::AgentError;
use crate::env::EnvError;

pub use config::{AgentSettings, Preset, RunConfig};
pub use evaluation::{evaluate_policy, play_match, run_evaluation, CoachPolicy, Evaluation};
pub use metrics::{
    action_distribution, formation_label, formation_labels, mean_std, pearson, penalty_goal_report, top_actions,
    windowed_return, ActionShare, EpisodeRecord, PenaltyGoalReport, ScoreTable,
};
pub use report::{find_runs, read_episodes, write_report, ReportSummary, RETURN_WINDOW};
pub use training::{run_training, Manifest, RunStatus, TrainingSummary, STEP_LOG_HEADER};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Independent random streams fanned out from one root seed. Each consumer
/// gets `ChaCha8Rng::seed_from_u64(root)` with its own stream number, so
/// drawing more from one never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStream {
    /// Per-episode environment seeds (restart jitter).
    Environment = 0,
    /// Opponent formation drawn for each training episode.
    Opponent = 1,
    /// Epsilon-greedy draws.
    Exploration = 2,
    /// Ornstein-Uhlenbeck noise.
    Noise = 3,
    /// Replay minibatch sampling.
    Replay = 4,
    /// Network initialisation.
    Init = 5,
    /// Per-match environment seeds during evaluation.
    Evaluation = 6,
    /// Decisions of the random coach during evaluation.
    RandomCoach = 7,
}

pub fn seed_stream(root: u64, stream: SeedStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream as u64);
    rng
}
