use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coachrl::agents::{Algorithm, Checkpoint};
use coachrl::behaviors::StrategyId;
use coachrl::harness::{
    evaluate_policy, run_training, write_report, CoachPolicy, Evaluation, HarnessError, RunConfig,
};

#[derive(Debug, Parser)]
#[command(name = "coachrl", version, about = "Train and evaluate role-assignment coaches for 3-vs-3 robot soccer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a coach and write a run directory.
    Train {
        #[arg(long, value_parser = parse_algorithm)]
        algo: Option<Algorithm>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        episode_seconds: Option<f64>,
        /// TOML file; every key is optional.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run directory [default: runs/<algo>-seed<seed>].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play frozen-policy matches from a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "balanced", value_parser = parse_opponent)]
        opponent: StrategyId,
        #[arg(long, default_value_t = 30)]
        matches: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run configuration [default: the config.toml of the checkpoint's run].
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also play the same matches with a uniformly random coach.
        #[arg(long)]
        compare_random: bool,
    },
    /// Write learning-curve, formation, penalty and score files for runs.
    Report {
        #[arg(long)]
        runs: PathBuf,
    },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| format!("unknown algorithm {s:?} (expected ddqn or ddpg)"))
}

fn parse_opponent(s: &str) -> Result<StrategyId, String> {
    StrategyId::parse(s).ok_or_else(|| format!("unknown opponent {s:?} (expected balanced, offensive or heavy)"))
}

/// Run directory holding a checkpoint: its own directory or, for files under
/// `checkpoints/`, the one above.
fn run_dir_of(checkpoint: &Path) -> Option<PathBuf> {
    let parent = checkpoint.parent()?;
    [Some(parent), parent.parent()]
        .into_iter()
        .flatten()
        .find(|d| d.join("config.toml").is_file())
        .map(Path::to_path_buf)
}

fn train(
    algo: Option<Algorithm>,
    seed: Option<u64>,
    episodes: Option<usize>,
    episode_seconds: Option<f64>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), HarnessError> {
    let mut c = match config {
        Some(path) => RunConfig::load(&path)?,
        None => RunConfig::default(),
    };
    if let Some(a) = algo {
        c.algorithm = a;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
    if let Some(e) = episodes {
        c.episodes = e;
    }
    if let Some(s) = episode_seconds {
        c.env.episode_seconds = s;
    }
    c.validate()?;
    let out = out.unwrap_or_else(|| PathBuf::from(format!("runs/{}-seed{}", c.algorithm, c.seed)));
    let summary = run_training(&c, &out)?;
    let n = summary.records.len();
    let tail = &summary.records[n - n.div_ceil(10)..];
    let diff = tail.iter().map(|r| r.goal_difference() as f64).sum::<f64>() / tail.len() as f64;
    println!(
        "trained {} for {n} episodes; mean goal difference over the last {} episodes {diff:.2}",
        c.algorithm,
        tail.len()
    );
    println!("final checkpoint: {}", summary.final_checkpoint.display());
    Ok(())
}

fn print_evaluation(who: &str, e: &Evaluation) {
    let t = &e.table;
    println!(
        "{who} vs {}: {} over {} matches, mean difference {:.2}, W/D/L {}/{}/{}",
        t.opponent,
        t.score_line(),
        t.matches,
        t.difference_mean,
        t.wins,
        t.draws,
        t.losses
    );
}

fn eval(
    checkpoint: PathBuf,
    opponent: StrategyId,
    matches: usize,
    seed: u64,
    config: Option<PathBuf>,
    compare_random: bool,
) -> Result<(), HarnessError> {
    if matches == 0 {
        return Err(HarnessError::Config("--matches must be at least 1".into()));
    }
    let bytes = std::fs::read(&checkpoint).map_err(|e| HarnessError::Io {
        path: checkpoint.clone(),
        source: e,
    })?;
    let ckpt = Checkpoint::decode(&bytes)?;
    let run_dir = run_dir_of(&checkpoint);
    let c = match config.or_else(|| run_dir.as_ref().map(|d| d.join("config.toml"))) {
        Some(path) => RunConfig::load(&path)?,
        None => RunConfig::default(),
    };
    let policy = CoachPolicy::from_checkpoint(&ckpt)?;
    let result = evaluate_policy(&policy, &c, opponent, matches, seed)?;
    print_evaluation(ckpt.algorithm().name(), &result);
    if compare_random {
        let random = evaluate_policy(&CoachPolicy::Random, &c, opponent, matches, seed)?;
        print_evaluation("random", &random);
    }
    if let Some(dir) = run_dir {
        let stem = checkpoint.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let out_dir = dir.join("evaluations");
        std::fs::create_dir_all(&out_dir).map_err(|e| HarnessError::Io {
            path: out_dir.clone(),
            source: e,
        })?;
        let path = out_dir.join(format!("{stem}-{opponent}-seed{seed}.json"));
        let json = serde_json::to_string_pretty(&result).expect("evaluations always serialise");
        std::fs::write(&path, json).map_err(|e| HarnessError::Io {
            path: path.clone(),
            source: e,
        })?;
        println!("saved {}", path.display());
    }
    Ok(())
}

fn report(runs: PathBuf) -> Result<(), HarnessError> {
    let summary = write_report(&runs)?;
    for r in &summary.runs {
        let corr = r.penalty_goal_correlation.map_or("n/a".into(), |c| format!("{c:.3}"));
        println!(
            "{}: {} episodes, goal difference {:.2} early -> {:.2} late, penalty/goal correlation {corr}",
            r.run, r.episodes, r.early_difference, r.late_difference
        );
    }
    println!("wrote {}", runs.join("summary.tsv").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Train {
            algo,
            seed,
            episodes,
            episode_seconds,
            config,
            out,
        } => train(algo, seed, episodes, episode_seconds, config, out),
        Command::Eval {
            checkpoint,
            opponent,
            matches,
            seed,
            config,
            compare_random,
        } => eval(checkpoint, opponent, matches, seed, config, compare_random),
        Command::Report { runs } => report(runs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ HarnessError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
