use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn coachrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coachrl")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const TINY: &str = "
episodes = 2
checkpoint_every = 1
[env]
episode_seconds = 5.0
[agent]
warmup = 4
batch_size = 4
[agent.ddqn]
hidden = [8]
[agent.ddpg]
hidden = [8]
";

fn train_tiny(dir: &Path, algo: &str) -> std::path::PathBuf {
    let config = dir.join("tiny.toml");
    fs::write(&config, TINY).unwrap();
    let run = dir.join(format!("run-{algo}"));
    let out = coachrl(&[
        "train",
        "--algo",
        algo,
        "--seed",
        "3",
        "--config",
        config.to_str().unwrap(),
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    run
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&coachrl(&[])), 1);
    assert_eq!(code(&coachrl(&["fly"])), 1);
    assert_eq!(code(&coachrl(&["train", "--algo", "sarsa"])), 1);
    assert_eq!(code(&coachrl(&["eval"])), 1);
    assert_eq!(code(&coachrl(&["eval", "--checkpoint", "x", "--opponent", "nobody"])), 1);
    assert_eq!(code(&coachrl(&["train", "--episodes", "0"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[env]\nframes = 0\n").unwrap();
    let out = coachrl(&["train", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("frames"));
}

#[test]
fn help_exits_with_zero() {
    let out = coachrl(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("train"));
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.ckpt");
    assert_eq!(code(&coachrl(&["eval", "--checkpoint", missing.to_str().unwrap()])), 2);
    let junk = dir.path().join("junk.ckpt");
    fs::write(&junk, b"not a checkpoint").unwrap();
    assert_eq!(code(&coachrl(&["eval", "--checkpoint", junk.to_str().unwrap()])), 2);
    assert_eq!(code(&coachrl(&["report", "--runs", dir.path().to_str().unwrap()])), 2);
    let no_config = dir.path().join("absent.toml");
    assert_eq!(code(&coachrl(&["train", "--config", no_config.to_str().unwrap()])), 2);
}

#[test]
fn train_eval_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for algo in ["ddqn", "ddpg"] {
        let run = train_tiny(dir.path(), algo);
        for f in ["config.toml", "manifest.json", "steps.tsv", "episodes.jsonl", "checkpoints/ep00001.ckpt"] {
            assert!(run.join(f).is_file(), "{algo}: {f}");
        }
        let ckpt = run.join("checkpoints/final.ckpt");
        let before = fs::read(&ckpt).unwrap();
        let out = coachrl(&[
            "eval",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--opponent",
            "heavy",
            "--matches",
            "2",
            "--seed",
            "1",
            "--compare-random",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains(&format!("{algo} vs heavy")), "{stdout}");
        assert!(stdout.contains("random vs heavy"), "{stdout}");
        assert_eq!(fs::read(&ckpt).unwrap(), before, "evaluation must not touch the checkpoint");
        assert!(run.join("evaluations/final-heavy-seed1.json").is_file());
    }
    let out = coachrl(&["report", "--runs", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.tsv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    let scores = fs::read_to_string(dir.path().join("run-ddpg/report/score_table.tsv")).unwrap();
    assert!(scores.contains("frozen-policy evaluations"));
}
